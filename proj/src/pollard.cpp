#include "gradbw/errors.hpp"
#include "gradbw/noisy_kmeans.hpp"

#include <algorithm>
#include <cmath>

namespace gradbw {

namespace {

// bilinear interpolation between cell midpoints, clamped at the border
double interpolate(const GridFunction& f, double x, double y)
{
  const auto m = static_cast<double>(f.grid.m);
  auto split = [&](double v, std::size_t& i0, double& w) {
    double s = std::clamp(v * m - 0.5, 0.0, m - 1.0);
    i0 = std::min(static_cast<std::size_t>(s), f.grid.m - 2);
    w = s - static_cast<double>(i0);
  };
  std::size_t i;
  std::size_t j;
  double wx;
  double wy;
  split(x, i, wx);
  split(y, j, wy);
  const std::size_t M = f.grid.m;
  const double a = f.values[i * M + j];
  const double b = f.values[(i + 1) * M + j];
  const double c = f.values[i * M + j + 1];
  const double e = f.values[(i + 1) * M + j + 1];
  return (1 - wx) * (1 - wy) * a + wx * (1 - wy) * b + (1 - wx) * wy * c + wx * wy * e;
}

} // namespace

PollardHessian pollard_hessian(const Codebook& cb, const DeconvDensity& f, std::size_t face_nodes)
{
  if (cb.d != 2 || f.f.grid.dim != 2) {
    throw UnsupportedDimension("the block Hessian is implemented for d = 2");
  }
  if (cb.k > 1 && cb.min_separation() <= 1e-9) {
    throw DegenerateCodebook("two centroids coincide");
  }
  const std::size_t k = cb.k;
  const auto sums = gk::cell_sums(f.f.grid, f.f.values, cb.c, k, false);
  PollardHessian out;
  out.H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * k), static_cast<Eigen::Index>(2 * k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t u = 0; u < 2; ++u) {
      out.H(static_cast<Eigen::Index>(2 * i + u), static_cast<Eigen::Index>(2 * i + u)) = 2.0 * sums.mass[i];
    }
  }

  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double* ci = cb.centroid(i);
      const double* cj = cb.centroid(j);
      const double dx = cj[0] - ci[0];
      const double dy = cj[1] - ci[1];
      const double delta = std::hypot(dx, dy);
      // bisector x(s) = p0 + s v
      const double p0[2] = {0.5 * (ci[0] + cj[0]), 0.5 * (ci[1] + cj[1])};
      const double v[2] = {-dy / delta, dx / delta};
      double lo = -1e9;
      double hi = 1e9;
      auto restrict = [&](double a, double b) {
        // a s <= b
        if (std::abs(a) < 1e-15) {
          if (b < 0.0) {
            lo = 1.0;
            hi = 0.0;
          }
          return;
        }
        if (a > 0.0) {
          hi = std::min(hi, b / a);
        } else {
          lo = std::max(lo, b / a);
        }
      };
      for (std::size_t u = 0; u < 2; ++u) {
        restrict(-v[u], p0[u]);
        restrict(v[u], 1.0 - p0[u]);
      }
      for (std::size_t w = 0; w < k; ++w) {
        if (w == i || w == j) {
          continue;
        }
        const double* cw = cb.centroid(w);
        double a = 0.0;
        double b = 0.0;
        for (std::size_t u = 0; u < 2; ++u) {
          a += 2.0 * v[u] * (cw[u] - ci[u]);
          b += cw[u] * cw[u] - ci[u] * ci[u] - 2.0 * p0[u] * (cw[u] - ci[u]);
        }
        restrict(a, b);
      }
      if (!(hi > lo)) {
        continue;
      }
      Eigen::Matrix2d Aii = Eigen::Matrix2d::Zero();
      Eigen::Matrix2d Ajj = Eigen::Matrix2d::Zero();
      Eigen::Matrix2d Aij = Eigen::Matrix2d::Zero();
      const double ds = (hi - lo) / static_cast<double>(face_nodes);
      for (std::size_t q = 0; q < face_nodes; ++q) {
        const double s = lo + (static_cast<double>(q) + 0.5) * ds;
        const Eigen::Vector2d x(p0[0] + s * v[0], p0[1] + s * v[1]);
        const double fx = interpolate(f.f, x[0], x[1]) * ds;
        const Eigen::Vector2d ei = x - Eigen::Vector2d(ci[0], ci[1]);
        const Eigen::Vector2d ej = x - Eigen::Vector2d(cj[0], cj[1]);
        Aii += fx * ei * ei.transpose();
        Ajj += fx * ej * ej.transpose();
        Aij += fx * ei * ej.transpose();
      }
      const auto bi = static_cast<Eigen::Index>(2 * i);
      const auto bj = static_cast<Eigen::Index>(2 * j);
      out.H.block<2, 2>(bi, bi) -= 2.0 / delta * Aii;
      out.H.block<2, 2>(bj, bj) -= 2.0 / delta * Ajj;
      out.H.block<2, 2>(bi, bj) += 2.0 / delta * Aij;
      out.H.block<2, 2>(bj, bi) += 2.0 / delta * Aij.transpose();
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (out.H + out.H.transpose()));
  out.lambda_min = eig.eigenvalues().minCoeff();
  return out;
}

} // namespace gradbw
