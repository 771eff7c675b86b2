#include "gradbw/errors.hpp"
#include "gradbw/experiments.hpp"
#include "gradbw/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gradbw {

Vec AffineMap::apply(const Vec& points) const
{
  const std::size_t d = center.size();
  Vec out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = (points[i] - center[i % d]) * scale + 0.5;
  }
  return out;
}

Vec AffineMap::inverse(const Vec& points) const
{
  const std::size_t d = center.size();
  Vec out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = (points[i] - 0.5) / scale + center[i % d];
  }
  return out;
}

AffineMap fit_unit_box(const Vec& points, std::size_t d, double fill)
{
  if (d == 0 || points.size() < d || points.size() % d != 0) {
    throw InvalidArgument("cannot fit a box to an empty point set");
  }
  if (!(fill > 0.0 && fill <= 1.0)) {
    throw InvalidArgument("fill fraction must lie in (0, 1]");
  }
  Vec lo(d, std::numeric_limits<double>::infinity());
  Vec hi(d, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < points.size(); ++i) {
    lo[i % d] = std::min(lo[i % d], points[i]);
    hi[i % d] = std::max(hi[i % d], points[i]);
  }
  AffineMap map;
  map.center.resize(d);
  double range = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    map.center[j] = 0.5 * (lo[j] + hi[j]);
    range = std::max(range, hi[j] - lo[j]);
  }
  map.scale = range > 0.0 ? fill / range : 1.0;
  return map;
}

MixtureSample gen_mixture(std::size_t n, double u, std::uint64_t seed, double fill)
{
  if (!(u >= 0.0)) {
    throw InvalidArgument("u must be nonnegative");
  }
  if (n == 0) {
    throw InvalidArgument("n must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MixtureSample out;
  out.z_raw.resize(2 * n);
  out.x_raw.resize(2 * n);
  std::vector<int> labels(n);
  const double su = std::sqrt(u);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = uniform01(rng) < 0.5 ? 0 : 1;
    const double x1 = normal(rng) + (labels[i] == 1 ? 5.0 : 0.0);
    const double x2 = normal(rng);
    const double e1 = normal(rng);
    const double e2 = su * normal(rng);
    out.x_raw[2 * i] = x1;
    out.x_raw[2 * i + 1] = x2;
    out.z_raw[2 * i] = x1 + e1;
    out.z_raw[2 * i + 1] = x2 + e2;
  }
  out.map = fit_unit_box(out.z_raw, 2, fill);
  out.sample.d = 2;
  out.sample.z = out.map.apply(out.z_raw);
  out.sample.clean = out.map.apply(out.x_raw);
  out.sample.labels = std::move(labels);
  out.noise_sd = {out.map.scale, out.map.scale * su};
  return out;
}

double f_star(const std::string& id, const double* x, std::size_t d)
{
  if (id == "zero") {
    return 0.0;
  }
  if (id == "sine") {
    return std::sin(2.0 * std::numbers::pi * x[0]);
  }
  if (id == "lipschitz") {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      s += std::abs(x[j] - 0.5);
    }
    return 1.0 - 2.0 * s / static_cast<double>(d);
  }
  if (id == "bump") {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      s += (x[j] - 0.5) * (x[j] - 0.5);
    }
    return std::exp(-8.0 * s);
  }
  throw InvalidArgument("unknown regression function: " + id);
}

RegressionSample gen_regression(std::size_t n, const std::string& f_star_id, const RegressionNoise& noise,
                                std::uint64_t seed, std::size_t d)
{
  if (n == 0 || d == 0) {
    throw InvalidArgument("n and d must be positive");
  }
  f_star(f_star_id, Vec(d, 0.5).data(), d);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::student_t_distribution<double> t3(3.0);
  std::cauchy_distribution<double> cauchy(0.0, 1.0);
  RegressionSample s;
  s.d = d;
  s.w.resize(n * d);
  s.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      s.w[i * d + j] = uniform01(rng);
    }
    double xi = 0.0;
    switch (noise.kind) {
    case RegressionNoise::Kind::none:
      break;
    case RegressionNoise::Kind::gaussian:
      xi = noise.scale * normal(rng);
      break;
    case RegressionNoise::Kind::student_t3:
      xi = noise.scale * t3(rng);
      break;
    case RegressionNoise::Kind::cauchy:
      xi = noise.scale * cauchy(rng);
      break;
    }
    s.y[i] = f_star(f_star_id, s.point(i), d) + xi;
  }
  return s;
}

} // namespace gradbw
