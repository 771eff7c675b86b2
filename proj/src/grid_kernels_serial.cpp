// Serial reference versions of the grid loops. Deliberately direct: no separable
// factorisation, no row partials.

#include "gradbw/grid_kernels.hpp"

#include <cmath>

namespace gradbw::gk::serial {

CellSums cell_sums(const GridSpec& grid, const Vec& values, const Vec& centroids, std::size_t k, bool positive_only)
{
  const std::size_t d = grid.dim;
  CellSums out;
  out.mass.assign(k, 0.0);
  out.moment.assign(k * d, 0.0);
  Vec x(d);
  for (std::size_t f = 0; f < grid.size(); ++f) {
    grid.coords(f, x.data());
    std::size_t best = 0;
    double best_d = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double dist = 0.0;
      for (std::size_t u = 0; u < d; ++u) {
        const double e = x[u] - centroids[j * d + u];
        dist += e * e;
      }
      if (j == 0 || dist < best_d) {
        best = j;
        best_d = dist;
      }
    }
    const double v = positive_only && values[f] < 0.0 ? 0.0 : values[f];
    out.mass[best] += v;
    for (std::size_t u = 0; u < d; ++u) {
      out.moment[best * d + u] += x[u] * v;
    }
    out.distortion += best_d * v;
  }
  const double dv = grid.cell_volume();
  for (double& v : out.mass) {
    v *= dv;
  }
  for (double& v : out.moment) {
    v *= dv;
  }
  out.distortion *= dv;
  return out;
}

std::vector<int> voronoi_labels(const GridSpec& grid, const Vec& centroids, std::size_t k)
{
  const std::size_t d = grid.dim;
  std::vector<int> labels(grid.size());
  Vec x(d);
  for (std::size_t f = 0; f < grid.size(); ++f) {
    grid.coords(f, x.data());
    int best = 0;
    double best_d = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double dist = 0.0;
      for (std::size_t u = 0; u < d; ++u) {
        const double e = x[u] - centroids[j * d + u];
        dist += e * e;
      }
      if (j == 0 || dist < best_d) {
        best = static_cast<int>(j);
        best_d = dist;
      }
    }
    labels[f] = best;
  }
  return labels;
}

namespace {

std::size_t tensor_size(const std::vector<Vec>& freqs)
{
  std::size_t s = 1;
  for (const Vec& f : freqs) {
    s *= f.size();
  }
  return s;
}

void unflatten(std::size_t flat, const std::vector<Vec>& freqs, std::vector<std::size_t>& idx)
{
  for (std::size_t j = freqs.size(); j-- > 0;) {
    idx[j] = flat % freqs[j].size();
    flat /= freqs[j].size();
  }
}

} // namespace

cvec empirical_cf(const Vec& points, std::size_t d, const std::vector<Vec>& freqs)
{
  const std::size_t n = points.size() / d;
  cvec out(tensor_size(freqs));
  std::vector<std::size_t> idx(d);
  for (std::size_t f = 0; f < out.size(); ++f) {
    unflatten(f, freqs, idx);
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double phase = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        phase += freqs[j][idx[j]] * points[i * d + j];
      }
      s += std::polar(1.0, -phase);
    }
    out[f] = s / static_cast<double>(n);
  }
  return out;
}

Vec synthesize(const GridSpec& grid, const std::vector<Vec>& freqs, const cvec& coeffs)
{
  const std::size_t d = grid.dim;
  Vec out(grid.size(), 0.0);
  Vec x(d);
  std::vector<std::size_t> idx(d);
  for (std::size_t f = 0; f < grid.size(); ++f) {
    grid.coords(f, x.data());
    double s = 0.0;
    for (std::size_t c = 0; c < coeffs.size(); ++c) {
      unflatten(c, freqs, idx);
      double phase = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        phase += freqs[j][idx[j]] * x[j];
      }
      s += (coeffs[c] * std::polar(1.0, phase)).real();
    }
    out[f] = s;
  }
  return out;
}

} // namespace gradbw::gk::serial
