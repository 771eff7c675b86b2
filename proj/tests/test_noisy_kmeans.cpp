#include "oracles.hpp"

#include "gradbw/errors.hpp"
#include "gradbw/experiments.hpp"
#include "gradbw/noisy_kmeans.hpp"
#include "gradbw/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace gradbw;

namespace {

DeconvDensity from_values(const GridSpec& grid, Vec values)
{
  DeconvDensity f;
  f.f = GridFunction(grid, std::move(values));
  return f;
}

// Gaussian bumps of equal weight, normalized to unit Riemann mass
DeconvDensity bumps(std::size_t m, const std::vector<Vec>& centers, double sd)
{
  const GridSpec grid = spatial_grid(2, m);
  Vec v(grid.size());
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t q = 0; q < m; ++q) {
      double s = 0.0;
      for (const auto& c : centers) {
        const double a = grid.node(r) - c[0];
        const double b = grid.node(q) - c[1];
        s += std::exp(-(a * a + b * b) / (2.0 * sd * sd));
      }
      v[r * m + q] = s;
    }
  }
  const double mass = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(grid.size());
  for (double& x : v) {
    x /= mass;
  }
  return from_values(grid, std::move(v));
}

// nearest centroid per node, ties to the lowest index
std::vector<std::size_t> assignment(const Vec& c, std::size_t k, const GridSpec& grid)
{
  std::vector<std::size_t> a(grid.size());
  Vec x(grid.dim);
  for (std::size_t f = 0; f < grid.size(); ++f) {
    grid.coords(f, x.data());
    double best = INFINITY;
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t u = 0; u < grid.dim; ++u) {
        s += (x[u] - c[j * grid.dim + u]) * (x[u] - c[j * grid.dim + u]);
      }
      if (s < best) {
        best = s;
        a[f] = j;
      }
    }
  }
  return a;
}

double distortion_oracle(const Vec& c, std::size_t k, const DeconvDensity& f)
{
  const GridSpec& grid = f.f.grid;
  Vec x(grid.dim);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.coords(i, x.data());
    double best = INFINITY;
    for (std::size_t j = 0; j < k; ++j) {
      double e = 0.0;
      for (std::size_t u = 0; u < grid.dim; ++u) {
        e += (x[u] - c[j * grid.dim + u]) * (x[u] - c[j * grid.dim + u]);
      }
      best = std::min(best, e);
    }
    s += best * f.f.values[i];
  }
  return s * grid.cell_volume();
}

double rel_err(const Vec& a, const Vec& b)
{
  Vec d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = a[i] - b[i];
  }
  return oracle::norm2(d) / std::max(oracle::norm2(b), 1e-300);
}

const MixtureSample& mixture400()
{
  static const MixtureSample mix = gen_mixture(400, 2.0, 21);
  return mix;
}

DeconvDensity mixture_density(double h)
{
  const auto& mix = mixture400();
  return deconv_density(mix.sample, KernelSpec(KernelId::sinc, 2), Bandwidth({h, h}),
                        NoiseModel::gaussian(mix.noise_sd, {1.0, 1.0}), spatial_grid(2, 128));
}

} // namespace

TEST_CASE("codebook validation")
{
  CHECK_THROWS_AS(Codebook(2, 2, {0.1, 0.2, 0.3}), InvalidArgument);
  const Codebook c(2, 2, {0.1, 0.2, 0.4, 0.6});
  CHECK(c.min_separation() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c.inside_unit_box());
  CHECK_FALSE(Codebook(1, 2, {1.2, 0.5}).inside_unit_box());
}

TEST_CASE("deconvolved density of a single point without noise is the kernel")
{
  const GridSpec grid = spatial_grid(1, 64);
  const double h = 0.05;
  NoisySample s;
  s.d = 1;
  s.z = {grid.node(20)};
  const DeconvDensity f = deconv_density(s, KernelSpec(KernelId::sinc, 1), Bandwidth({h}), NoiseModel::none(1), grid);
  auto dirichlet = [&](double x) {
    double v = 1.0;
    for (int k = 1; std::numbers::pi * k * h < 1.0; ++k) {
      v += 2.0 * std::cos(std::numbers::pi * k * x);
    }
    return 0.5 * v;
  };
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(std::abs(f.f.values[i] - dirichlet(grid.node(i) - s.z[0])) <= 1e-8);
  }

  const KernelSpec E(KernelId::epanechnikov, 1);
  const DeconvDensity e = deconv_density(s, E, Bandwidth({0.1}), NoiseModel::none(1), grid);
  for (std::size_t i = 0; i < 64; ++i) {
    const Vec x{grid.node(i) - s.z[0]};
    CHECK(e.f.values[i] == doctest::Approx(dilate(E, Bandwidth({0.1}), x)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(deconv_density(s, E, Bandwidth({0.1}), NoiseModel::laplace({0.1}), grid), NonBandLimited);
}

TEST_CASE("deconvolved densities carry unit mass")
{
  // bandwidths short against the 0.2 margin around the data; larger n keeps the inverse filter ringing small
  const MixtureSample mix = gen_mixture(4000, 2.0, 21);
  const KernelSpec S(KernelId::sinc, 2);
  for (double h : {0.02, 0.03, 0.04}) {
    for (const NoiseModel& g : {NoiseModel::gaussian(mix.noise_sd, {1.0, 1.0}), NoiseModel::none(2)}) {
      const DeconvDensity f = deconv_density(mix.sample, S, Bandwidth({h, h}), g, spatial_grid(2, 128));
      CHECK(std::abs(f.f.riemann_sum() - 1.0) <= 1e-2);
      CHECK_FALSE(f.auxiliary);
    }
  }
  const DeconvDensity a = deconv_density(mix.sample, S, Bandwidth({0.03, 0.02}), NoiseModel::gaussian(mix.noise_sd, {1.0, 1.0}),
                                         spatial_grid(2, 128), Bandwidth({0.02, 0.03}));
  CHECK(a.auxiliary);
  CHECK(std::abs(a.f.riemann_sum() - 1.0) <= 1e-2);
}

TEST_CASE("deconvolution beats the naive estimate on blurred uniform data")
{
  const GridSpec grid = spatial_grid(1, 256);
  const KernelSpec K(KernelId::sinc, 1);
  const double sigma = 0.1;
  double ise_deconv = 0.0;
  double ise_naive = 0.0;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    std::mt19937_64 rng(derive_seed({77, rep}));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0 / sigma);
    NoisySample s;
    s.d = 1;
    for (int i = 0; i < 2000; ++i) {
      const double e = expo(rng) * (unif(rng) < 0.5 ? -1.0 : 1.0);
      s.z.push_back(0.25 + 0.5 * unif(rng) + e);
    }
    const Bandwidth h({0.06});
    const auto fd = deconv_density(s, K, h, NoiseModel::laplace({sigma}), grid);
    const auto fn = deconv_density(s, K, h, NoiseModel::none(1), grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double truth = grid.node(i) > 0.25 && grid.node(i) < 0.75 ? 2.0 : 0.0;
      ise_deconv += std::pow(fd.f.values[i] - truth, 2);
      ise_naive += std::pow(fn.f.values[i] - truth, 2);
    }
  }
  CHECK(ise_deconv < ise_naive);
}

TEST_CASE("distortion examples")
{
  const GridSpec g1 = spatial_grid(1, 256);
  const DeconvDensity uni = from_values(g1, Vec(256, 1.0));
  CHECK(distortion(Codebook(1, 1, {0.5}), uni) == doctest::Approx(1.0 / 12.0).epsilon(1e-4));

  Vec spike(256, 0.0);
  spike[100] = 256.0;
  const DeconvDensity point = from_values(g1, spike);
  CHECK(distortion(Codebook(1, 1, {g1.node(100)}), point) == 0.0);

  const DeconvDensity f = mixture_density(0.08);
  const Codebook c(2, 2, {0.3, 0.4, 0.7, 0.5});
  const Codebook c3(3, 2, {0.3, 0.4, 0.7, 0.5, 0.95, 0.05});
  const DeconvDensity b = bumps(128, {{0.3, 0.4}, {0.7, 0.6}}, 0.1);
  CHECK(distortion(c3, b) <= distortion(c, b));
  CHECK(distortion(c, f) == doctest::Approx(distortion_oracle(c.c, 2, f)).epsilon(1e-12));
}

TEST_CASE("gradient examples")
{
  const DeconvDensity f = bumps(128, {{0.5, 0.5}}, 0.1);
  const auto sums = distortion(Codebook(1, 2, {0.5, 0.5}), f);
  CHECK(sums > 0.0);
  // barycenter of a centred symmetric bump is the centre
  const Vec g = gradient_distortion(Codebook(1, 2, {0.5, 0.5}), f);
  CHECK(std::abs(g[0]) <= 1e-12);
  CHECK(std::abs(g[1]) <= 1e-12);
  const Vec g2 = gradient_distortion(Codebook(1, 2, {0.4, 0.7}), f);
  CHECK(g2[0] == doctest::Approx(-2.0 * (0.5 - 0.4)).epsilon(1e-10));
  CHECK(g2[1] == doctest::Approx(-2.0 * (0.5 - 0.7)).epsilon(1e-10));

  // symmetric density and codebook in one dimension
  const GridSpec g1 = spatial_grid(1, 128);
  Vec v(128);
  for (std::size_t i = 0; i < 128; ++i) {
    v[i] = std::exp(-std::pow(g1.node(i) - 0.5, 2) / 0.02);
  }
  const Vec gs = gradient_distortion(Codebook(2, 1, {0.3, 0.7}), from_values(g1, v));
  CHECK(gs[0] == doctest::Approx(-gs[1]).epsilon(1e-12));
  CHECK(gs[0] != 0.0);

  CHECK_THROWS_AS(gradient_distortion(Codebook(2, 2, {0.3, 0.3, 0.3, 0.3}), f), DegenerateCodebook);
}

TEST_CASE("gradient matches central differences away from cell changes")
{
  const DeconvDensity f = mixture_density(0.06);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.1, 0.9);
  const double step = 1e-5;
  for (std::size_t k : {1u, 2u, 3u}) {
    int tested = 0;
    while (tested < 6) {
      Vec c(2 * k);
      for (double& x : c) {
        x = unif(rng);
      }
      const Codebook cb(k, 2, c);
      if (k > 1 && cb.min_separation() < 0.05) {
        continue;
      }
      const auto base = assignment(c, k, f.f.grid);
      bool stable = true;
      for (std::size_t i = 0; i < c.size() && stable; ++i) {
        for (double s : {step, -step}) {
          Vec p = c;
          p[i] += s;
          stable = stable && assignment(p, k, f.f.grid) == base;
        }
      }
      if (!stable) {
        continue;
      }
      const Vec fd = oracle::central_difference([&](const Vec& x) { return distortion_oracle(x, k, f); }, c, step);
      CHECK(rel_err(gradient_distortion(cb, f), fd) <= 1e-5);
      ++tested;
    }
  }
}

TEST_CASE("permutation equivariance")
{
  const DeconvDensity f = mixture_density(0.08);
  const Codebook a(3, 2, {0.2, 0.3, 0.6, 0.7, 0.8, 0.2});
  const Codebook b(3, 2, {0.8, 0.2, 0.2, 0.3, 0.6, 0.7});
  CHECK(distortion(a, f) == distortion(b, f));
  const Vec ga = gradient_distortion(a, f);
  const Vec gb = gradient_distortion(b, f);
  for (std::size_t u = 0; u < 2; ++u) {
    CHECK(gb[0 + u] == ga[4 + u]);
    CHECK(gb[2 + u] == ga[0 + u]);
    CHECK(gb[4 + u] == ga[2 + u]);
  }
}

TEST_CASE("codebook fitting")
{
  const DeconvDensity two = bumps(128, {{0.3, 0.3}, {0.7, 0.6}}, 0.04);
  const double cell = 1.0 / 128.0;
  const double tol = 1e-8;
  const CodebookFit fit = fit_codebook(two, 2, 3, 200, tol);
  Vec c = fit.codebook.c;
  if (c[0] > c[2]) {
    std::swap(c[0], c[2]);
    std::swap(c[1], c[3]);
  }
  CHECK(std::abs(c[0] - 0.3) <= cell);
  CHECK(std::abs(c[1] - 0.3) <= cell);
  CHECK(std::abs(c[2] - 0.7) <= cell);
  CHECK(std::abs(c[3] - 0.6) <= cell);
  CHECK(oracle::norm2(gradient_distortion(fit.codebook, two)) <= 10.0 * tol);
  CHECK(fit.grad_norm <= 10.0 * tol);
  CHECK(fit.distortion == doctest::Approx(distortion(fit.codebook, two)).epsilon(1e-14));

  // k = 1 lands on the barycenter in one step
  const DeconvDensity skew = bumps(64, {{0.2, 0.25}, {0.2, 0.25}, {0.8, 0.5}}, 0.08);
  const CodebookFit one = fit_codebook(skew, 1, 4, 1, tol);
  double mx = 0.0;
  double my = 0.0;
  double mass = 0.0;
  Vec x(2);
  for (std::size_t i = 0; i < skew.f.grid.size(); ++i) {
    skew.f.grid.coords(i, x.data());
    mass += skew.f.values[i];
    mx += x[0] * skew.f.values[i];
    my += x[1] * skew.f.values[i];
  }
  CHECK(one.codebook.c[0] == doctest::Approx(mx / mass).epsilon(1e-12));
  CHECK(one.codebook.c[1] == doctest::Approx(my / mass).epsilon(1e-12));
  CHECK(oracle::norm2(gradient_distortion(one.codebook, skew)) <= 1e-10);

  CHECK(fit_codebook(two, 2, 3, 200, tol).codebook.c == fit.codebook.c);
  CHECK_THROWS_AS(fit_codebook(from_values(spatial_grid(2, 16), Vec(256, -1.0)), 2, 1), EmptyCell);
}

TEST_CASE("fitting on a signed deconvolution density stays near stationary")
{
  const DeconvDensity f = mixture_density(0.08);
  const CodebookFit fit = fit_codebook(f, 2, 9);
  CHECK(fit.codebook.inside_unit_box());
  // grid discreteness keeps signed fits from exact stationarity
  CHECK(fit.grad_norm <= 1e-3);
  CHECK(fit.grad_norm == doctest::Approx(oracle::norm2(gradient_distortion(fit.codebook, f))).epsilon(1e-12));
}

TEST_CASE("clustering majorant")
{
  const Bandwidth h({0.5, 0.5});
  CHECK(majorant_kmeans(h, h, 100, 2, 2, {1.0, 1.0}, 1.0) == doctest::Approx(1.6).epsilon(1e-14));
  const double flat = 2.0 * 0.7 * 2.0 / 10.0;
  CHECK(majorant_kmeans(Bandwidth({0.1, 0.3}), Bandwidth({0.2, 0.05}), 100, 2, 2, {0.0, 0.0}, 0.7) ==
        doctest::Approx(flat).epsilon(1e-14));
  const Bandwidth eta({0.2, 0.3});
  double prev = INFINITY;
  for (double a : {0.05, 0.1, 0.2, 0.3, 0.5, 0.8}) {
    const double v = majorant_kmeans(Bandwidth({a, 0.1}), eta, 500, 3, 2, {1.0, 2.0}, 1.0);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("clustering error")
{
  const MixtureSample mix = gen_mixture(200, 1.0, 3);
  const Vec& X = mix.sample.clean;
  const std::vector<int>& Y = mix.sample.labels;
  const Codebook means(2, 2, {mix.map.apply({0.0, 0.0})[0], mix.map.apply({0.0, 0.0})[1], mix.map.apply({5.0, 0.0})[0],
                              mix.map.apply({5.0, 0.0})[1]});
  const double e = clustering_error(means, X, Y);
  CHECK(e <= 0.03);
  std::vector<int> flipped(Y.size());
  std::transform(Y.begin(), Y.end(), flipped.begin(), [](int y) { return 1 - y; });
  CHECK(clustering_error(means, X, flipped) == e);

  const Codebook km = lloyd_kmeans_baseline(mix.sample, 2, 4);
  CHECK(clustering_error(km, X, Y) == doctest::Approx(oracle::two_class_error(km.c, X, Y)).epsilon(1e-15));

  // three classes, every relabeling gives the same value
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec pts;
  std::vector<int> lab;
  for (int i = 0; i < 90; ++i) {
    pts.push_back(unif(rng));
    pts.push_back(unif(rng));
    lab.push_back(i % 3);
  }
  const Codebook c3(3, 2, {0.2, 0.2, 0.5, 0.8, 0.8, 0.3});
  const double e3 = clustering_error(c3, pts, lab);
  CHECK(e3 >= 0.0);
  CHECK(e3 <= 1.0);
  std::vector<int> perm{0, 1, 2};
  while (std::next_permutation(perm.begin(), perm.end())) {
    std::vector<int> relab(lab.size());
    for (std::size_t i = 0; i < lab.size(); ++i) {
      relab[i] = perm[static_cast<std::size_t>(lab[i])];
    }
    CHECK(clustering_error(c3, pts, relab) == e3);
  }
  CHECK_THROWS_AS(clustering_error(Codebook(9, 1, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}), {0.5}, {0}),
                  KTooLargeForExactMatching);
}

TEST_CASE("Pollard Hessian")
{
  const DeconvDensity one = bumps(128, {{0.5, 0.5}}, 0.1);
  const PollardHessian H1 = pollard_hessian(Codebook(1, 2, {0.45, 0.5}), one);
  CHECK(H1.H(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(H1.H(1, 1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(H1.H(0, 1) == 0.0);
  CHECK(H1.lambda_min == doctest::Approx(2.0).epsilon(1e-12));

  const DeconvDensity two = bumps(256, {{0.3, 0.5}, {0.7, 0.5}}, 0.12);
  const Codebook sym(2, 2, {0.3, 0.5, 0.7, 0.5});
  const PollardHessian H = pollard_hessian(sym, two);
  // swapping the centroids together with a reflection x -> 1 - x leaves the blocks equal
  CHECK(H.H(0, 0) == doctest::Approx(H.H(2, 2)).epsilon(1e-6));
  CHECK(H.H(1, 1) == doctest::Approx(H.H(3, 3)).epsilon(1e-6));
  CHECK(H.H(0, 2) == doctest::Approx(H.H(2, 0)).epsilon(1e-12));
  CHECK(H.H(1, 3) == doctest::Approx(H.H(3, 1)).epsilon(1e-12));

  const Codebook c(2, 2, {0.32, 0.48, 0.66, 0.55});
  const PollardHessian Hc = pollard_hessian(c, two);
  const auto J = oracle::jacobian([&](const Vec& x) { return gradient_distortion(Codebook(2, 2, x), two); }, c.c, 0.01);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      num += std::pow(Hc.H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - J[i][j], 2);
      den += J[i][j] * J[i][j];
    }
  }
  CHECK(std::sqrt(num / den) <= 0.05);

  const DeconvDensity sep = bumps(128, {{0.3, 0.3}, {0.7, 0.6}}, 0.05);
  CHECK(pollard_hessian(fit_codebook(sep, 2, 1).codebook, sep).lambda_min > 0.0);
  CHECK_THROWS_AS(pollard_hessian(Codebook(1, 1, {0.5}), from_values(spatial_grid(1, 16), Vec(16, 1.0))),
                  UnsupportedDimension);
}

TEST_CASE("Lloyd baseline")
{
  NoisySample s;
  s.d = 2;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0.0, 0.01);
  double ax = 0.0;
  double ay = 0.0;
  double bx = 0.0;
  double by = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Vec p{0.2 + z(rng), 0.3 + z(rng)};
    const Vec q{0.8 + z(rng), 0.7 + z(rng)};
    ax += p[0];
    ay += p[1];
    bx += q[0];
    by += q[1];
    s.z.insert(s.z.end(), p.begin(), p.end());
    s.z.insert(s.z.end(), q.begin(), q.end());
  }
  Codebook c = lloyd_kmeans_baseline(s, 2, 1);
  Vec v = c.c;
  if (v[0] > v[2]) {
    std::swap(v[0], v[2]);
    std::swap(v[1], v[3]);
  }
  CHECK(v[0] == doctest::Approx(ax / 50).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(ay / 50).epsilon(1e-12));
  CHECK(v[2] == doctest::Approx(bx / 50).epsilon(1e-12));
  CHECK(v[3] == doctest::Approx(by / 50).epsilon(1e-12));

  const Codebook m = lloyd_kmeans_baseline(s, 1, 1);
  CHECK(m.c[0] == doctest::Approx((ax + bx) / 100).epsilon(1e-12));
  CHECK(m.c[1] == doctest::Approx((ay + by) / 100).epsilon(1e-12));
}

TEST_CASE("clustering selection")
{
  const auto& mix = mixture400();
  const KernelSpec K(KernelId::sinc, 2);
  const NoiseModel g = NoiseModel::gaussian(mix.noise_sd, {1.0, 1.0});
  const GridSpec grid = spatial_grid(2, 128);

  SUBCASE("single member")
  {
    const BandwidthNet one = singleton_net(Bandwidth({0.06, 0.09}));
    const auto sel = select_bandwidth_kmeans(mix.sample, K, g, one, 2, 1.0, grid, 3);
    CHECK(sel.report.selected == Bandwidth({0.06, 0.09}));
    const ErcResult e = erc_baseline(mix.sample, K, g, singleton_net(Bandwidth({0.07, 0.07})), 2, 1.0, grid, 3);
    CHECK(e.selected == Bandwidth({0.07, 0.07}));
  }

  SUBCASE("3x3 net against brute force")
  {
    const BandwidthNet net = build_net(0.04, 0.12, 0.6, 2, 9);
    REQUIRE(net.size() == 9);
    for (double b1 : {0.1, 1.0, 10.0}) {
      const KmeansPrep prep = prepare_kmeans(mix.sample, K, g, net, 2, grid, 5);
      const auto sel = select_kmeans(prep, b1);
      const auto& F = *prep.field;
      const Vec bv = oracle::brute_bv(
        prep.net.members, prep.candidates.points, [&](const Bandwidth& h, const Vec& t) { return F.grad(h, t); },
        [&](const Bandwidth& h, const Bandwidth& e, const Vec& t) { return F.grad_aux(h, e, t); }, oracle::norm2,
        [&](const Bandwidth& h, const Bandwidth& e) { return majorant_kmeans(h, e, 400, 2, 2, {1.0, 1.0}, b1); }, {},
        false);
      CHECK(sel.report.selected_index == oracle::brute_argmin(bv, prep.net.members));
      CHECK(sel.codebook.c == prep.fits[sel.report.selected_index].codebook.c);
    }
  }

  SUBCASE("loss scaling leaves the choice unchanged")
  {
    const BandwidthNet net = build_net(0.03, 0.12, 0.7, 2, 17);
    KmeansOptions scaled;
    scaled.loss_scale = 10.0;
    const auto a = select_bandwidth_kmeans(mix.sample, K, g, net, 2, 1.0, grid, 6);
    const auto b = select_bandwidth_kmeans(mix.sample, K, g, net, 2, 10.0, grid, 6, scaled);
    CHECK(a.report.selected == b.report.selected);
  }

  SUBCASE("random candidates enlarge the set")
  {
    const BandwidthNet net = build_net(0.04, 0.12, 0.6, 2, 9);
    KmeansOptions opts;
    opts.random_candidates = 16;
    const KmeansPrep prep = prepare_kmeans(mix.sample, K, g, net, 2, grid, 5, opts);
    CHECK(prep.candidates.points.size() == prep.fits.size() + 16);
  }

  SUBCASE("ERC is deterministic")
  {
    const BandwidthNet iso = isotropic_subnet(build_net(0.03, 0.12, 0.7, 2, 17));
    const auto a = erc_baseline(mix.sample, K, g, iso, 2, 1.0, grid, 11);
    const auto b = erc_baseline(mix.sample, K, g, iso, 2, 1.0, grid, 11);
    CHECK(a.selected == b.selected);
    CHECK(a.codebook.c == b.codebook.c);
    CHECK(a.criterion.size() == iso.size());
  }
}

TEST_CASE("ERC on clean separated data is close to Lloyd")
{
  const MixtureSample mix = gen_mixture(2000, 0.0, 13);
  NoisySample clean = mix.sample;
  clean.z = clean.clean;
  const KernelSpec K(KernelId::sinc, 2);
  const BandwidthNet iso = isotropic_subnet(build_net(0.03, 0.12, 0.7, 2, 17));
  const auto erc = erc_baseline(clean, K, NoiseModel::none(2), iso, 2, 1.0, spatial_grid(2, 128), 2);
  const Codebook km = lloyd_kmeans_baseline(clean, 2, 2);
  const double a = clustering_error(erc.codebook, mix.sample.clean, mix.sample.labels);
  const double b = clustering_error(km, mix.sample.clean, mix.sample.labels);
  CHECK(a <= b + 0.02);
}
