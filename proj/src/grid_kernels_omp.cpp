#include "gradbw/grid_kernels.hpp"

#include <cmath>

namespace gradbw::gk {

namespace {

// node coordinates per axis index
Vec axis_nodes(const GridSpec& grid)
{
  Vec nodes(grid.m);
  for (std::size_t i = 0; i < grid.m; ++i) {
    nodes[i] = grid.node(i);
  }
  return nodes;
}

} // namespace

CellSums cell_sums(const GridSpec& grid, const Vec& values, const Vec& centroids, std::size_t k, bool positive_only,
                   Exec exec)
{
  if (exec == Exec::serial) {
    return serial::cell_sums(grid, values, centroids, k, positive_only);
  }
  const std::size_t d = grid.dim;
  const std::size_t rows = grid.m;
  const std::size_t per_row = grid.size() / rows;
  const std::size_t width = k + k * d + 1;
  const Vec nodes = axis_nodes(grid);
  Vec partial(rows * width, 0.0);

  if (d == 2) {
#pragma omp parallel for schedule(static)
    for (long r = 0; r < static_cast<long>(rows); ++r) {
      double* acc = partial.data() + static_cast<std::size_t>(r) * width;
      const double x0 = nodes[static_cast<std::size_t>(r)];
      const double* row = values.data() + static_cast<std::size_t>(r) * per_row;
      for (std::size_t q = 0; q < per_row; ++q) {
        const double x1 = nodes[q];
        std::size_t best = 0;
        double best_d = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
          const double e0 = x0 - centroids[2 * j];
          const double e1 = x1 - centroids[2 * j + 1];
          const double dist = e0 * e0 + e1 * e1;
          if (j == 0 || dist < best_d) {
            best = j;
            best_d = dist;
          }
        }
        const double v = positive_only && row[q] < 0.0 ? 0.0 : row[q];
        acc[best] += v;
        acc[k + 2 * best] += x0 * v;
        acc[k + 2 * best + 1] += x1 * v;
        acc[width - 1] += best_d * v;
      }
    }
  } else {
#pragma omp parallel for schedule(static)
    for (long r = 0; r < static_cast<long>(rows); ++r) {
      double* acc = partial.data() + static_cast<std::size_t>(r) * width;
      double x[8];
      std::size_t idx[8] = {};
      x[0] = nodes[static_cast<std::size_t>(r)];
      for (std::size_t u = 1; u < d; ++u) {
        x[u] = nodes[0];
      }
      for (std::size_t q = 0; q < per_row; ++q) {
        const std::size_t f = static_cast<std::size_t>(r) * per_row + q;
        if (q > 0) {
          // odometer over the trailing axes
          for (std::size_t u = d - 1; u >= 1; --u) {
            if (++idx[u] < grid.m) {
              x[u] = nodes[idx[u]];
              break;
            }
            idx[u] = 0;
            x[u] = nodes[0];
          }
        }
        std::size_t best = 0;
        double best_d = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
          const double* c = centroids.data() + j * d;
          double dist = 0.0;
          for (std::size_t u = 0; u < d; ++u) {
            const double e = x[u] - c[u];
            dist += e * e;
          }
          if (j == 0 || dist < best_d) {
            best = j;
            best_d = dist;
          }
        }
        const double v = positive_only && values[f] < 0.0 ? 0.0 : values[f];
        acc[best] += v;
        for (std::size_t u = 0; u < d; ++u) {
          acc[k + best * d + u] += x[u] * v;
        }
        acc[width - 1] += best_d * v;
      }
    }
  }

  CellSums out;
  out.mass.assign(k, 0.0);
  out.moment.assign(k * d, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* acc = partial.data() + r * width;
    for (std::size_t j = 0; j < k; ++j) {
      out.mass[j] += acc[j];
    }
    for (std::size_t u = 0; u < k * d; ++u) {
      out.moment[u] += acc[k + u];
    }
    out.distortion += acc[width - 1];
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

std::vector<int> voronoi_labels(const GridSpec& grid, const Vec& centroids, std::size_t k, Exec exec)
{
  if (exec == Exec::serial) {
    return serial::voronoi_labels(grid, centroids, k);
  }
  const std::size_t d = grid.dim;
  std::vector<int> labels(grid.size());
#pragma omp parallel for schedule(static)
  for (long f = 0; f < static_cast<long>(grid.size()); ++f) {
    double x[8];
    grid.coords(static_cast<std::size_t>(f), x);
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
    labels[static_cast<std::size_t>(f)] = best;
  }
  return labels;
}

cvec empirical_cf(const Vec& points, std::size_t d, const std::vector<Vec>& freqs, Exec exec)
{
  if (exec == Exec::serial) {
    return serial::empirical_cf(points, d, freqs);
  }
  const std::size_t n = points.size() / d;
  // per-axis exponentials, then a product over axes for each output frequency
  std::vector<cvec> E(d);
  for (std::size_t j = 0; j < d; ++j) {
    E[j].resize(freqs[j].size() * n);
    for (std::size_t b = 0; b < freqs[j].size(); ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        E[j][b * n + i] = std::polar(1.0, -freqs[j][b] * points[i * d + j]);
      }
    }
  }
  std::size_t total = 1;
  for (const Vec& f : freqs) {
    total *= f.size();
  }
  cvec out(total);
#pragma omp parallel for schedule(static)
  for (long f = 0; f < static_cast<long>(total); ++f) {
    std::size_t idx[8];
    std::size_t rest = static_cast<std::size_t>(f);
    for (std::size_t j = d; j-- > 0;) {
      idx[j] = rest % freqs[j].size();
      rest /= freqs[j].size();
    }
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::complex<double> p = E[0][idx[0] * n + i];
      for (std::size_t j = 1; j < d; ++j) {
        p *= E[j][idx[j] * n + i];
      }
      s += p;
    }
    out[static_cast<std::size_t>(f)] = s / static_cast<double>(n);
  }
  return out;
}

Vec synthesize(const GridSpec& grid, const std::vector<Vec>& freqs, const cvec& coeffs, Exec exec)
{
  if (exec == Exec::serial) {
    return serial::synthesize(grid, freqs, coeffs);
  }
  const std::size_t d = grid.dim;
  const Vec nodes = axis_nodes(grid);
  // successive mode products: replace frequency axis j by node axis j
  std::vector<std::size_t> dims(d);
  for (std::size_t j = 0; j < d; ++j) {
    dims[j] = freqs[j].size();
  }
  cvec cur = coeffs;
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t b = dims[j];
    cvec S(grid.m * b);
    for (std::size_t a = 0; a < grid.m; ++a) {
      for (std::size_t c = 0; c < b; ++c) {
        S[a * b + c] = std::polar(1.0, freqs[j][c] * nodes[a]);
      }
    }
    std::size_t outer = 1;
    std::size_t inner = 1;
    for (std::size_t u = 0; u < j; ++u) {
      outer *= dims[u];
    }
    for (std::size_t u = j + 1; u < d; ++u) {
      inner *= dims[u];
    }
    cvec next(outer * grid.m * inner);
#pragma omp parallel for schedule(static)
    for (long oa = 0; oa < static_cast<long>(outer * grid.m); ++oa) {
      const std::size_t o = static_cast<std::size_t>(oa) / grid.m;
      const std::size_t a = static_cast<std::size_t>(oa) % grid.m;
      std::complex<double>* dst = next.data() + (o * grid.m + a) * inner;
      for (std::size_t c = 0; c < b; ++c) {
        const std::complex<double> s = S[a * b + c];
        const std::complex<double>* src = cur.data() + (o * b + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) {
          dst[i] += s * src[i];
        }
      }
    }
    cur.swap(next);
    dims[j] = grid.m;
  }
  Vec out(cur.size());
  for (std::size_t f = 0; f < cur.size(); ++f) {
    out[f] = cur[f].real();
  }
  return out;
}

} // namespace gradbw::gk
