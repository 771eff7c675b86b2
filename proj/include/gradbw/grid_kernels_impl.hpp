#pragma once

#include <cstddef>

namespace gradbw::gk {

template <class F>
Vec spatial_sum(const GridSpec& grid, const Vec& points, F&& kernel, Exec exec)
{
  const std::size_t d = grid.dim;
  const std::size_t n = points.size() / d;
  const auto N = static_cast<long>(grid.size());
  Vec out(grid.size(), 0.0);
  auto node = [&](long f) {
    double x[8];
    double diff[8];
    grid.coords(static_cast<std::size_t>(f), x);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        diff[j] = points[i * d + j] - x[j];
      }
      s += kernel(diff);
    }
    out[static_cast<std::size_t>(f)] = s / static_cast<double>(n);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long f = 0; f < N; ++f) {
      node(f);
    }
  } else {
    for (long f = 0; f < N; ++f) {
      node(f);
    }
  }
  return out;
}

} // namespace gradbw::gk
