#pragma once

#include "gradbw/kernels.hpp"

#include <cstddef>
#include <vector>

namespace gradbw {

/// Exponential bandwidth net: tensor ladder h_plus * a^m per axis plus the isotropic corner.
struct BandwidthNet
{
  /// Ordered coarse to fine (volume descending, ties lexicographically larger first); corner last.
  std::vector<Bandwidth> members;
  /// Ladder exponents per member; empty for the corner.
  std::vector<std::vector<int>> exponents;
  double a = 0.7;
  double h_minus = 0.0;
  double h_plus = 0.0;
  std::size_t cap = 0;
  bool truncated = false;

  std::size_t size() const { return members.size(); }
  std::size_t dim() const { return members.empty() ? 0 : members.front().dim(); }
  const Bandwidth& operator[](std::size_t i) const { return members[i]; }
  const Bandwidth& corner() const { return members.back(); }
  /// Index of a member, or size() when absent.
  std::size_t find(const Bandwidth& h) const;
  /// True when `h` is the corner or has the generator form with h_j >= h_minus.
  bool contains_by_formula(const Bandwidth& h) const;
};

BandwidthNet build_net(double h_minus, double h_plus, double a, std::size_t d, std::size_t cap);

/// Net holding a single bandwidth (used for collapsed selections).
BandwidthNet singleton_net(const Bandwidth& h);

/// Isotropic members of a net, same order.
BandwidthNet isotropic_subnet(const BandwidthNet& net);

struct BandwidthBounds
{
  double h_minus = 0.0;
  double h_plus = 0.0;
  double raw_h_minus = 0.0;
  double raw_h_plus = 0.0;
  bool clamped = false;
};

/// Clustering window: h_- = (log^6 n / n)^{1/(2 v 2 sum beta)}, h_+ = (1/log n)^{1/(2 s_plus)}.
BandwidthBounds clustering_bounds(std::size_t n, const Vec& beta, double s_plus);

/// Regression window: h_- = log^{6/d} n / n^{1/d}, h_+ = 1/log^2 n.
BandwidthBounds regression_bounds(std::size_t n, std::size_t d);

GridSpec spatial_grid(std::size_t d, std::size_t m_per_axis);

} // namespace gradbw
