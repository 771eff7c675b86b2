#include "oracles.hpp"

#include "gradbw/errors.hpp"
#include "gradbw/experiments.hpp"
#include "gradbw/random.hpp"
#include "gradbw/robust_regression.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace gradbw;

namespace {

RegressionSample uniform_sample(std::size_t n, std::uint64_t seed, double (*f)(double), double noise_sd)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> z(0.0, noise_sd);
  RegressionSample s;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = unif(rng);
    s.w.push_back(w);
    s.y.push_back(f(w) + (noise_sd > 0.0 ? z(rng) : 0.0));
  }
  return s;
}

double smooth(double x) { return std::sin(2.0 * std::numbers::pi * x); }

double median(Vec v)
{
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

const KernelSpec& epa()
{
  static const KernelSpec K(KernelId::epanechnikov, 1);
  return K;
}

} // namespace

TEST_CASE("Huber loss")
{
  CHECK(huber(0.5, 1.0) == 0.125);
  CHECK(huber(2.0, 1.0) == 1.5);
  CHECK(huber(-2.0, 1.0) == 1.5);
  CHECK(huber_prime(-3.0, 1.0) == -1.0);
  CHECK(huber_prime(0.4, 1.0) == 0.4);
  CHECK(huber_second(0.4, 1.0) == 1);
  CHECK(huber_second(1.4, 1.0) == 0);
  for (double z : {-1.7, -0.3, 0.0, 0.9, 2.5}) {
    CHECK(huber(z, std::abs(z) + 0.1) == 0.5 * z * z);
    CHECK(huber(z, std::abs(z)) == 0.5 * z * z);
  }
}

TEST_CASE("regression noise laws")
{
  const auto g = RegressionNoise::parse("gaussian", 0.5);
  CHECK(g.prob_within(1.5) == doctest::Approx(std::erf(3.0 / std::sqrt(2.0))).epsilon(1e-12));
  CHECK(g.prob_within(1.5) == doctest::Approx(0.9973).epsilon(1e-4));
  CHECK_THROWS_AS(RegressionNoise::parse("uniform", 1.0), InvalidArgument);

  auto clipped_oracle = [](double a, double gamma, double (*pdf)(double), double scale) {
    return oracle::simpson([&](double u) { return std::clamp(scale * u + a, -gamma, gamma) * pdf(u); }, -400.0, 400.0,
                           400000);
  };
  auto normal_pdf = [](double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); };
  auto t3_pdf = [](double u) { return 2.0 / (std::numbers::pi * std::sqrt(3.0) * std::pow(1.0 + u * u / 3.0, 2)); };
  const auto t3 = RegressionNoise::parse("student-t3", 0.7);
  for (double a : {-1.0, -0.2, 0.0, 0.35, 2.0}) {
    CHECK(g.mean_clipped(a, 0.8) == doctest::Approx(clipped_oracle(a, 0.8, normal_pdf, 0.5)).epsilon(1e-7));
    CHECK(t3.mean_clipped(a, 0.8) == doctest::Approx(clipped_oracle(a, 0.8, t3_pdf, 0.7)).epsilon(1e-5));
  }
  CHECK(std::abs(t3.mean_clipped(0.0, 1.0)) <= 1e-12);
}

TEST_CASE("local score")
{
  RegressionSample s;
  s.w = {0.5};
  s.y = {0.8};
  const Bandwidth h({0.2});
  const double x0 = 0.45;
  const double w = kernel_weights(s, epa(), h, &x0)[0];
  CHECK(w > 0.0);
  CHECK(g_emp_loc(0.5, &x0, h, s, epa(), 1.0) == doctest::Approx(-0.3 * w).epsilon(1e-14));

  RegressionSample flat;
  flat.w = {0.2, 0.4, 0.5, 0.6};
  flat.y = {0.7, 0.7, 0.7, 0.7};
  CHECK(g_emp_loc(0.7, &x0, h, flat, epa(), 0.5) == 0.0);

  const RegressionSample r = gen_regression(300, "sine", RegressionNoise::parse("cauchy", 0.3), 4);
  const Vec tg = t_grid(2.0, 81);
  for (const std::optional<Bandwidth>& aux : {std::optional<Bandwidth>{}, std::optional<Bandwidth>{Bandwidth({0.1})}}) {
    const Vec wts = kernel_weights(r, epa(), h, &x0, aux);
    const LocalScore fast(r, wts, 0.6);
    double prev = -INFINITY;
    for (double t : tg) {
      const double v = g_emp_loc(t, &x0, h, r, epa(), 0.6, aux);
      CHECK(v >= prev - 1e-14);
      CHECK(fast(t) == doctest::Approx(v).epsilon(1e-10));
      prev = v;
    }
  }
}

TEST_CASE("local estimate")
{
  const RegressionSample s = uniform_sample(200, 7, smooth, 0.3);
  const Bandwidth h({0.15});
  const double x0 = 0.4;
  double ymax = 0.0;
  for (double y : s.y) {
    ymax = std::max(ymax, std::abs(y));
  }
  const double B = 3.0;

  SUBCASE("large gamma is Nadaraya-Watson")
  {
    const double nw = oracle::nadaraya_watson(s.w, s.y, x0, 0.15);
    CHECK(std::abs(local_estimate(&x0, h, s, epa(), ymax + 2.0 * B, B) - nw) <= 1e-9);
  }

  SUBCASE("constant data")
  {
    RegressionSample c = s;
    std::fill(c.y.begin(), c.y.end(), -1.25);
    CHECK(local_estimate(&x0, h, c, epa(), 0.5, B) == doctest::Approx(-1.25).epsilon(1e-10));
  }

  SUBCASE("boundary when no root inside")
  {
    RegressionSample c = s;
    std::fill(c.y.begin(), c.y.end(), 10.0);
    CHECK(local_estimate(&x0, h, c, epa(), 0.5, B) == B);
  }

  SUBCASE("outlier influence is bounded by the clipped score")
  {
    for (double gamma : {0.5, ymax + 2.0 * B}) {
      RegressionSample o = s;
      const Vec clean = kernel_weights(s, epa(), h, &x0);
      double W = 0.0;
      for (double v : clean) {
        W += v;
      }
      const double before = local_estimate(&x0, h, o, epa(), gamma, B);
      o.w.push_back(0.42);
      o.y.push_back(1000.0);
      const double after = local_estimate(&x0, h, o, epa(), gamma, B);
      const double wo = kernel_weights(o, epa(), h, &x0).back();
      // weight of clean points on the quadratic branch at both roots
      double inside = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (std::abs(s.y[i] - after) <= gamma && std::abs(s.y[i] - before) <= gamma) {
          inside += clean[i];
        }
      }
      CHECK(after > before);
      CHECK(after - before <= gamma * wo / inside + 1e-9);
      if (inside == W) {
        CHECK(after - before <= gamma * wo / W + 1e-9);
      }
    }
  }

  SUBCASE("shift equivariance on the quadratic branch")
  {
    const double gamma = ymax + 10.0;
    RegressionSample sh = s;
    for (double& y : sh.y) {
      y += 0.37;
    }
    const double a = local_estimate(&x0, h, s, epa(), gamma, B);
    const double b = local_estimate(&x0, h, sh, epa(), gamma, B);
    CHECK(b - a == doctest::Approx(0.37).epsilon(1e-8));
  }

  SUBCASE("empty window")
  {
    RegressionSample far;
    far.w = {0.9, 0.95};
    far.y = {1.0, 2.0};
    const double z = 0.1;
    CHECK_THROWS_AS(local_estimate(&z, Bandwidth({0.05}), far, epa(), 1.0, 2.0), EmptyWindow);
  }
}

TEST_CASE("pointwise majorant")
{
  const double n2 = kernel_norm(epa(), 2.0);
  const double vhat = 1.0 / (n2 * n2);
  const Bandwidth one({1.0});
  // C0 |K|_2 sqrt(vhat) = 1 and n = 3
  CHECK(majorant_loc(one, one, 3, 1, epa(), vhat) == doctest::Approx(2.0 * std::sqrt(std::log(3.0) / 3.0)).epsilon(1e-13));
  CHECK(2.0 * std::sqrt(1.0 / std::numbers::e) == doctest::Approx(1.213).epsilon(1e-3));
  const Bandwidth eta({0.3});
  CHECK(majorant_loc(Bandwidth({0.1}), eta, 500, 1, epa(), 0.4) == majorant_loc(Bandwidth({0.25}), eta, 500, 1, epa(), 0.4));
  double prev = INFINITY;
  for (double e : {0.05, 0.1, 0.2, 0.4}) {
    const double v = majorant_loc(Bandwidth({0.2}), Bandwidth({e}), 500, 1, epa(), 0.4);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("global deviation bound")
{
  const double n2 = kernel_norm(epa(), 2.0);
  const Bandwidth h({0.25});
  CHECK(gamma_lq(h, 2.0, 1, 100, epa(), 1.0) ==
        doctest::Approx(60.0 / std::log(2.0) * n2 / 5.0 * std::sqrt(2.0)).epsilon(1e-13));
  CHECK(60.0 / std::log(2.0) / 5.0 * std::sqrt(2.0) == doctest::Approx(24.49).epsilon(1e-3));
  CHECK(gamma_lq(h, 1.0, 1, 100, epa(), 0.7) == doctest::Approx(4.0 * 0.7 * std::sqrt(2.0)).epsilon(1e-13));
  CHECK(gamma_lq(h, 1.0, 1, 100, epa(), 0.7) == gamma_lq(h, 1.0, 1, 10000, epa(), 0.7));
  CHECK(gamma_lq(h, 2.0, 2, 800, epa(), 1.3) / gamma_lq(h, 2.0, 2, 1600, epa(), 1.3) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  const double n15 = kernel_norm(epa(), 1.5);
  CHECK(gamma_lq(h, 1.5, 1, 100, epa(), 1.0) ==
        doctest::Approx(4.0 * n15 * std::pow(25.0, -1.0 / 3.0) * std::sqrt(2.0)).epsilon(1e-13));
  CHECK_THROWS_AS(gamma_lq(h, 0.5, 1, 100, epa(), 1.0), InvalidQ);
}

TEST_CASE("pointwise rule")
{
  const RegressionSample s = gen_regression(400, "lipschitz", RegressionNoise::parse("student-t3", 0.5), 3);
  const Vec x0{0.5};
  const double B = default_bound(s);

  SUBCASE("single member")
  {
    const auto fit = select_pointwise(x0, s, singleton_net(Bandwidth({0.2})), epa(), 0.8, B);
    CHECK(fit.selected == Bandwidth({0.2}));
    CHECK(std::abs(fit.estimate) <= B);
  }

  SUBCASE("four-member net against brute force")
  {
    const BandwidthNet net = build_net(0.05, 0.4, 0.5, 1, 4);
    REQUIRE(net.size() == 4);
    RegressionOptions opts;
    const auto fit = select_pointwise(x0, s, net, epa(), 0.8, B, opts);
    const Vec tg = t_grid(B, opts.t_points);
    std::vector<Vec> thetas;
    for (double t : tg) {
      thetas.push_back({t});
    }
    const Vec bv = oracle::brute_bv(
      net.members, thetas,
      [&](const Bandwidth& h, const Vec& t) { return Vec{g_emp_loc(t[0], x0.data(), h, s, epa(), 0.8)}; },
      [&](const Bandwidth& h, const Bandwidth& e, const Vec& t) {
        return Vec{g_emp_loc(t[0], x0.data(), h, s, epa(), 0.8, e)};
      },
      oracle::norm2,
      [&](const Bandwidth& h, const Bandwidth& e) { return majorant_loc(h, e, s.size(), 1, epa(), fit.vhat); }, {},
      false);
    for (std::size_t i = 0; i < net.size(); ++i) {
      CHECK(fit.report.bv[i] == doctest::Approx(bv[i]).epsilon(1e-10));
    }
    CHECK(fit.report.selected_index == oracle::brute_argmin(bv, net.members));
    CHECK(fit.estimate == local_estimate(x0.data(), fit.selected, s, epa(), 0.8, B));
  }

  SUBCASE("loss scaling")
  {
    const BandwidthNet net = build_net(0.03, 0.5, 0.7, 1, 20);
    RegressionOptions scaled;
    scaled.loss_scale = 7.5;
    const auto a = select_pointwise(x0, s, net, epa(), 0.8, B);
    const auto b = select_pointwise(x0, s, net, epa(), 0.8, B, scaled);
    CHECK(a.selected == b.selected);
    CHECK(b.vhat == doctest::Approx(7.5 * 7.5 * a.vhat).epsilon(1e-12));
  }
}

TEST_CASE("pointwise rule against the best fixed bandwidth")
{
  const BandwidthNet net = build_net(0.03, 0.5, 0.7, 1, 20);
  const Vec x0{0.5};
  const double truth = f_star("lipschitz", x0.data(), 1);
  Vec selected;
  std::vector<Vec> per_h(net.size());
  for (std::uint64_t r = 0; r < 50; ++r) {
    const RegressionSample s = gen_regression(500, "lipschitz", RegressionNoise::parse("student-t3", 0.5), 100 + r);
    const double B = default_bound(s);
    const double gamma = default_gamma(s, net, epa());
    const auto fit = select_pointwise(x0, s, net, epa(), gamma, B);
    selected.push_back(std::abs(fit.estimate - truth));
    for (std::size_t i = 0; i < net.size(); ++i) {
      per_h[i].push_back(std::abs(local_estimate(x0.data(), net[i], s, epa(), gamma, B) - truth));
    }
  }
  double best = INFINITY;
  for (const auto& v : per_h) {
    best = std::min(best, median(v));
  }
  CHECK(median(selected) <= 2.0 * best);
}

TEST_CASE("global rule")
{
  const RegressionSample s = gen_regression(300, "sine", RegressionNoise::parse("student-t3", 0.5), 8);
  const double B = default_bound(s);
  const XGrid x = interior_grid(1, 20, 0.25);
  CHECK(x.size() == 20);
  CHECK(x.weight == doctest::Approx(0.025).epsilon(1e-14));
  CHECK(x.points.front() == doctest::Approx(0.2625).epsilon(1e-14));

  SUBCASE("single member")
  {
    const auto fit = select_global(s, singleton_net(Bandwidth({0.2})), epa(), 0.8, B, 2.0, x);
    CHECK(fit.selected == Bandwidth({0.2}));
    CHECK(fit.fitted.size() == x.size());
  }

  SUBCASE("three-member net against brute force")
  {
    const BandwidthNet net = build_net(0.05, 0.2, 0.5, 1, 3);
    REQUIRE(net.size() == 3);
    std::vector<Vec> thetas;
    for (double t : t_grid(B, 201)) {
      thetas.push_back({t});
    }
    auto scores = [&](const Bandwidth& h, const std::optional<Bandwidth>& e, double t) {
      Vec v(x.size());
      for (std::size_t p = 0; p < x.size(); ++p) {
        v[p] = g_emp_loc(t, x.points.data() + p, h, s, epa(), 0.8, e);
      }
      return v;
    };
    for (double q : {1.5, 2.0, 4.0}) {
      const auto fit = select_global(s, net, epa(), 0.8, B, q, x);
      auto Gam = [&](const Bandwidth& h) { return gamma_lq(h, q, 1, s.size(), epa(), 0.8); };
      const Vec bv = oracle::brute_bv(
        net.members, thetas, [&](const Bandwidth& h, const Vec& t) { return scores(h, std::nullopt, t[0]); },
        [&](const Bandwidth& h, const Bandwidth& e, const Vec& t) { return scores(h, e, t[0]); },
        [&](const Vec& v) {
          double a = 0.0;
          for (double z : v) {
            a += std::pow(std::abs(z), q) * x.weight;
          }
          return std::pow(a, 1.0 / q);
        },
        [&](const Bandwidth& h, const Bandwidth& e) { return Gam(max(h, e)) + Gam(e); },
        [&](const Bandwidth& h) { return 2.0 * Gam(h); }, false);
      for (std::size_t i = 0; i < net.size(); ++i) {
        CHECK(fit.report.bv[i] == doctest::Approx(bv[i]).epsilon(1e-10));
      }
      CHECK(fit.report.selected_index == oracle::brute_argmin(bv, net.members));
    }
  }

  SUBCASE("loss scaling")
  {
    const BandwidthNet net = build_net(0.03, 0.25, 0.7, 1, 20);
    RegressionOptions scaled;
    scaled.loss_scale = 0.04;
    for (double q : {1.5, 2.0, 3.0}) {
      const auto a = select_global(s, net, epa(), 0.8, B, q, x);
      const auto b = select_global(s, net, epa(), 0.8, B, q, x, scaled);
      CHECK(a.selected == b.selected);
    }
  }

  SUBCASE("margin and q are validated")
  {
    CHECK_THROWS_AS(select_global(s, singleton_net(Bandwidth({0.3})), epa(), 0.8, B, 2.0, x), InvalidArgument);
    CHECK_THROWS_AS(select_global(s, singleton_net(Bandwidth({0.2})), epa(), 0.8, B, 0.9, x), InvalidQ);
  }

  SUBCASE("csv")
  {
    const auto fit = select_global(s, singleton_net(Bandwidth({0.2})), epa(), 0.8, B, 2.0, x);
    std::ostringstream os;
    fit.write_csv(os);
    std::istringstream is(os.str());
    std::string line;
    std::size_t lines = 0;
    while (std::getline(is, line)) {
      ++lines;
    }
    CHECK(lines == x.size() + 1);
  }
}

TEST_CASE("global rule against the best fixed bandwidth")
{
  const BandwidthNet net = build_net(0.02, 0.25, 0.7, 1, 20);
  const XGrid x = interior_grid(1, 50, 0.25);
  const double q = 2.0;
  double selected = 0.0;
  Vec per_h(net.size(), 0.0);
  auto risk = [&](const Vec& fitted) {
    double a = 0.0;
    for (std::size_t p = 0; p < x.size(); ++p) {
      a += std::pow(std::abs(fitted[p] - f_star("sine", x.points.data() + p, 1)), q) * x.weight;
    }
    return std::pow(a, 1.0 / q);
  };
  for (std::uint64_t r = 0; r < 20; ++r) {
    const RegressionSample s = gen_regression(1000, "sine", RegressionNoise::parse("student-t3", 0.5), 300 + r);
    const double B = default_bound(s);
    const double gamma = default_gamma(s, net, epa());
    const auto fit = select_global(s, net, epa(), gamma, B, q, x);
    selected += risk(fit.fitted);
    for (std::size_t i = 0; i < net.size(); ++i) {
      Vec fitted(x.size());
      for (std::size_t p = 0; p < x.size(); ++p) {
        fitted[p] = local_estimate(x.points.data() + p, net[i], s, epa(), gamma, B);
      }
      per_h[i] += risk(fitted);
    }
  }
  CHECK(selected <= 1.5 * *std::min_element(per_h.begin(), per_h.end()));
}

TEST_CASE("local margin")
{
  const auto noise = RegressionNoise::parse("gaussian", 0.3);
  const BandwidthNet net = build_net(0.05, 0.4, 0.6, 1, 10);
  const Vec x0{0.5};
  const double truth = f_star("bump", x0.data(), 1);
  int with_precondition = 0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const RegressionSample s = gen_regression(500, "bump", noise, 50 + r);
    const MarginReport rep = check_local_margin(x0, s, net, epa(), 0.9, 3.0, truth, noise);
    CHECK(rep.expected_second == doctest::Approx(std::erf(3.0 / std::sqrt(2.0))).epsilon(1e-12));
    if (rep.precondition) {
      ++with_precondition;
      CHECK(rep.inequality);
    }
  }
  CHECK(with_precondition > 0);

  // an exact fit gives zero on both sides
  RegressionSample exact;
  exact.w = {0.45, 0.5, 0.55};
  exact.y = {truth, truth, truth};
  const MarginReport e = check_local_margin(x0, exact, singleton_net(Bandwidth({0.2})), epa(), 0.9, 3.0, truth, noise);
  REQUIRE(e.rows.size() == 1);
  CHECK(e.rows[0].lhs == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(e.rows[0].rhs == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(e.rows[0].holds);
}

TEST_CASE("defaults")
{
  RegressionSample s;
  s.w = {0.1, 0.5, 0.9};
  s.y = {-2.2, 0.3, 1.1};
  CHECK(default_bound(s) == 3.0);
  s.y = {0.1, -0.2, 0.3};
  CHECK(default_bound(s) == 1.0);
  const Vec t = t_grid(2.0, 5);
  CHECK(t == Vec{-2.0, -1.0, 0.0, 1.0, 2.0});
  const RegressionSample r = gen_regression(500, "sine", RegressionNoise::parse("gaussian", 0.4), 1);
  const double g = default_gamma(r, build_net(0.03, 0.5, 0.7, 1, 20), epa());
  // 1.345 sigma for gaussian residuals, up to pilot bias and sampling
  CHECK(g == doctest::Approx(1.345 * 0.4).epsilon(0.2));
}
