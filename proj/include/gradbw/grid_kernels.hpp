#pragma once

// Hot loops over the evaluation grid. Every routine exists in an OpenMP version and a
// plain serial reference; the parallel versions reduce per grid row and then sum rows in
// order, so their results do not depend on the thread count.

#include "gradbw/kernels.hpp"

#include <complex>
#include <vector>

namespace gradbw::gk {

enum class Exec
{
  parallel,
  serial
};

using cvec = std::vector<std::complex<double>>;

/// Riemann sums over Voronoi cells (nearest centroid, ties to the lowest index):
/// mass_j = sum f, moment_j = sum x f, distortion = sum min_j |x - c_j|^2 f, each times the cell volume.
struct CellSums
{
  Vec mass;
  Vec moment;
  double distortion = 0.0;
};

/// `centroids` is k x d row-major. With positive_only, negative values are treated as zero.
CellSums cell_sums(const GridSpec& grid, const Vec& values, const Vec& centroids, std::size_t k, bool positive_only,
                   Exec exec = Exec::parallel);

/// Nearest-centroid label of every grid node.
std::vector<int> voronoi_labels(const GridSpec& grid, const Vec& centroids, std::size_t k, Exec exec = Exec::parallel);

/// phi(t) = (1/n) sum_i exp(-i t . z_i) on the tensor product of per-axis frequency lists.
cvec empirical_cf(const Vec& points, std::size_t d, const std::vector<Vec>& freqs, Exec exec = Exec::parallel);

/// Real part of sum_t coeff(t) exp(i t . x) at every grid node.
Vec synthesize(const GridSpec& grid, const std::vector<Vec>& freqs, const cvec& coeffs, Exec exec = Exec::parallel);

/// (1/n) sum_i K(z_i - x) at every grid node for a spatial evaluator K.
template <class F>
Vec spatial_sum(const GridSpec& grid, const Vec& points, F&& kernel, Exec exec = Exec::parallel);

namespace serial {
CellSums cell_sums(const GridSpec& grid, const Vec& values, const Vec& centroids, std::size_t k, bool positive_only);
std::vector<int> voronoi_labels(const GridSpec& grid, const Vec& centroids, std::size_t k);
cvec empirical_cf(const Vec& points, std::size_t d, const std::vector<Vec>& freqs);
Vec synthesize(const GridSpec& grid, const std::vector<Vec>& freqs, const cvec& coeffs);
} // namespace serial

} // namespace gradbw::gk

#include "gradbw/grid_kernels_impl.hpp"
