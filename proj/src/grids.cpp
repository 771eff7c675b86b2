#include "gradbw/grids.hpp"

#include "gradbw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gradbw {

namespace {

double ladder_value(double h_plus, double a, int m) { return h_plus * std::pow(a, m); }

bool coarser(const Bandwidth& x, const Bandwidth& y)
{
  const double vx = x.volume();
  const double vy = y.volume();
  if (vx != vy) {
    return vx > vy;
  }
  return y < x;
}

BandwidthBounds clamp(BandwidthBounds b, std::size_t n, std::size_t d)
{
  const bool ok = b.raw_h_minus > 0.0 && b.raw_h_minus < 1.0 && b.raw_h_plus > 0.0 && b.raw_h_plus < 1.0 &&
                  b.raw_h_minus < b.raw_h_plus;
  if (ok) {
    b.h_minus = b.raw_h_minus;
    b.h_plus = b.raw_h_plus;
    b.clamped = false;
    return b;
  }
  b.h_plus = 0.5;
  b.h_minus = std::max(std::pow(static_cast<double>(n), -1.0 / static_cast<double>(d)), 0.02);
  b.h_minus = std::min(b.h_minus, 0.5 * b.h_plus);
  b.clamped = true;
  return b;
}

} // namespace

std::size_t BandwidthNet::find(const Bandwidth& h) const
{
  auto it = std::find(members.begin(), members.end(), h);
  return static_cast<std::size_t>(it - members.begin());
}

bool BandwidthNet::contains_by_formula(const Bandwidth& h) const
{
  if (h == Bandwidth::isotropic(h_minus, h.dim())) {
    return true;
  }
  for (std::size_t j = 0; j < h.dim(); ++j) {
    if (h[j] < h_minus) {
      return false;
    }
    bool hit = false;
    for (int m = 0; ladder_value(h_plus, a, m) >= h_minus; ++m) {
      if (ladder_value(h_plus, a, m) == h[j]) {
        hit = true;
        break;
      }
    }
    if (!hit) {
      return false;
    }
  }
  return true;
}

BandwidthNet build_net(double h_minus, double h_plus, double a, std::size_t d, std::size_t cap)
{
  if (!(h_minus > 0.0) || !(h_plus < 1.0) || h_minus >= h_plus) {
    throw InvalidBounds("bandwidth bounds must satisfy 0 < h_minus < h_plus < 1");
  }
  if (!(a > 0.0 && a < 1.0)) {
    throw InvalidArgument("net ratio must lie in (0, 1)");
  }
  if (d == 0) {
    throw InvalidArgument("net dimension must be positive");
  }
  if (cap == 0) {
    throw EmptyNet("net cap must be at least 1");
  }

  std::vector<int> ladder;
  for (int m = 0; ladder_value(h_plus, a, m) >= h_minus; ++m) {
    ladder.push_back(m);
  }

  struct Entry
  {
    Bandwidth h;
    std::vector<int> exps;
  };
  std::vector<Entry> entries;
  std::vector<int> counter(d, 0);
  const Bandwidth corner = Bandwidth::isotropic(h_minus, d);
  while (true) {
    Vec h(d);
    std::vector<int> exps(d);
    for (std::size_t j = 0; j < d; ++j) {
      exps[j] = ladder[static_cast<std::size_t>(counter[j])];
      h[j] = ladder_value(h_plus, a, exps[j]);
    }
    Bandwidth b(std::move(h));
    if (!(b == corner)) {
      entries.push_back({std::move(b), std::move(exps)});
    }
    std::size_t j = d;
    while (j-- > 0) {
      if (++counter[j] < static_cast<int>(ladder.size())) {
        break;
      }
      counter[j] = 0;
    }
    if (j == static_cast<std::size_t>(-1)) {
      break;
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) { return coarser(x.h, y.h); });

  BandwidthNet net;
  net.a = a;
  net.h_minus = h_minus;
  net.h_plus = h_plus;
  net.cap = cap;
  const std::size_t keep = std::min(entries.size(), cap - 1);
  net.truncated = keep < entries.size();
  for (std::size_t i = 0; i < keep; ++i) {
    net.members.push_back(entries[i].h);
    net.exponents.push_back(entries[i].exps);
  }
  net.members.push_back(corner);
  net.exponents.emplace_back();
  return net;
}

BandwidthNet singleton_net(const Bandwidth& h)
{
  BandwidthNet net;
  net.members.push_back(h);
  net.exponents.emplace_back();
  net.h_minus = *std::min_element(h.values().begin(), h.values().end());
  net.h_plus = *std::max_element(h.values().begin(), h.values().end());
  net.cap = 1;
  return net;
}

BandwidthNet isotropic_subnet(const BandwidthNet& net)
{
  BandwidthNet out = net;
  out.members.clear();
  out.exponents.clear();
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (net.members[i].is_isotropic()) {
      out.members.push_back(net.members[i]);
      out.exponents.push_back(net.exponents[i]);
    }
  }
  return out;
}

BandwidthBounds clustering_bounds(std::size_t n, const Vec& beta, double s_plus)
{
  if (n < 3 || beta.empty() || !(s_plus > 0.0)) {
    throw InvalidArgument("clustering bounds need n >= 3, nonempty beta and s_plus > 0");
  }
  const double ln = std::log(static_cast<double>(n));
  const double sum_beta = std::accumulate(beta.begin(), beta.end(), 0.0);
  BandwidthBounds b;
  b.raw_h_minus = std::pow(std::pow(ln, 6.0) / static_cast<double>(n), 1.0 / std::max(2.0, 2.0 * sum_beta));
  b.raw_h_plus = std::pow(1.0 / ln, 1.0 / (2.0 * s_plus));
  return clamp(b, n, beta.size());
}

BandwidthBounds regression_bounds(std::size_t n, std::size_t d)
{
  if (n < 3 || d == 0) {
    throw InvalidArgument("regression bounds need n >= 3 and d >= 1");
  }
  const double ln = std::log(static_cast<double>(n));
  const double dd = static_cast<double>(d);
  BandwidthBounds b;
  b.raw_h_minus = std::pow(ln, 6.0 / dd) / std::pow(static_cast<double>(n), 1.0 / dd);
  b.raw_h_plus = 1.0 / (ln * ln);
  return clamp(b, n, d);
}

GridSpec spatial_grid(std::size_t d, std::size_t m_per_axis)
{
  if (d == 0) {
    throw InvalidArgument("grid dimension must be positive");
  }
  if (m_per_axis < 8) {
    throw InvalidArgument("grid needs at least 8 nodes per axis");
  }
  GridSpec g;
  g.dim = d;
  g.m = m_per_axis;
  g.padding = 2;
  return g;
}

} // namespace gradbw
