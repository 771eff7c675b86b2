#include "gradbw/diagnostics.hpp"

#include "gradbw/errors.hpp"
#include "gradbw/experiments.hpp"
#include "gradbw/grid_kernels.hpp"
#include "gradbw/random.hpp"

#include <cmath>
#include <complex>
#include <ostream>
#include <sstream>

namespace gradbw {

namespace {

std::string fmt(double v)
{
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

CheckResult fourier_identity(std::size_t m)
{
  const KernelSpec K(KernelId::sinc, 2);
  const Bandwidth h({0.08, 0.1});
  const NoiseModel g = NoiseModel::laplace({0.02, 0.03});
  const GridSpec grid = spatial_grid(2, m);
  const KernelLattice L = deconv_kernel_on_grid(K, h, g, grid);
  const auto T = L.transform();
  double worst = 0.0;
  for (std::size_t i = 0; i < T.size(); ++i) {
    worst = std::max(worst, std::abs(T[i] - L.spectrum[i]));
  }
  return {"fourier identity", worst <= 1e-10, "max error " + fmt(worst)};
}

CheckResult quadratic_link(std::uint64_t seed)
{
  const RiskFn R = [](const Vec& t) { return 0.5 * (t[0] * t[0] + 4.0 * t[1] * t[1]); };
  const GradientFn G = [](const Vec& t) { return Vec{t[0], 4.0 * t[1]}; };
  const auto rep = check_gradient_link(R, G, {0.0, 0.0}, 1.0, 200, seed);
  return {"gradient link (quadratic)", rep.passed, "ratio " + fmt(rep.max_ratio) + " <= bound " + fmt(rep.bound)};
}

CheckResult clustering_checks(std::uint64_t seed, std::size_t m, CheckResult& fd)
{
  const MixtureSample mix = gen_mixture(400, 1.0, derive_seed({seed, 1}), 0.6);
  const KernelSpec K(KernelId::sinc, 2);
  const NoiseModel g = NoiseModel::gaussian(mix.noise_sd, {1.0, 1.0});
  const GridSpec grid = spatial_grid(2, m);
  const DeconvDensity f = deconv_density(mix.sample, K, Bandwidth({0.08, 0.08}), g, grid);
  const CodebookFit fit = fit_codebook(f, 2, derive_seed({seed, 2}));

  double worst = 0.0;
  std::mt19937_64 rng(derive_seed({seed, 3}));
  const double step = 1e-5;
  // the Riemann sum has kinks where a node changes cell; only smooth points are compared
  auto stable = [&](const Vec& c) {
    const auto base = gk::voronoi_labels(grid, c, 2);
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (double s : {step, -step}) {
        Vec p = c;
        p[i] += s;
        if (gk::voronoi_labels(grid, p, 2) != base) {
          return false;
        }
      }
    }
    return true;
  };
  int trials = 0;
  for (int attempt = 0; attempt < 200 && trials < 10; ++attempt) {
    Vec c = fit.codebook.c;
    for (double& v : c) {
      v += 0.05 * (uniform01(rng) - 0.5);
    }
    if (!stable(c)) {
      continue;
    }
    ++trials;
    const Codebook cb(2, 2, c);
    const Vec grad = gradient_distortion(cb, f);
    for (std::size_t i = 0; i < c.size(); ++i) {
      Vec cp = c;
      Vec cm = c;
      cp[i] += step;
      cm[i] -= step;
      const double num = (distortion(Codebook(2, 2, cp), f) - distortion(Codebook(2, 2, cm), f)) / (2.0 * step);
      worst = std::max(worst, std::abs(num - grad[i]) / std::max(1.0, std::abs(num)));
    }
  }
  fd = {"distortion gradient vs finite differences", trials > 0 && worst <= 1e-5,
        "max relative error " + fmt(worst) + " over " + std::to_string(trials) + " codebooks"};

  const RiskFn R = [&](const Vec& t) { return distortion(Codebook(2, 2, t), f); };
  const GradientFn G = [&](const Vec& t) { return gradient_distortion(Codebook(2, 2, t), f); };
  const auto rep = check_gradient_link(R, G, fit.codebook.c, 0.02, 100, derive_seed({seed, 4}));
  return {"gradient link (clustering distortion)", rep.passed,
          "ratio " + fmt(rep.max_ratio) + " <= bound " + fmt(rep.bound)};
}

CheckResult margin(std::uint64_t seed)
{
  const RegressionNoise noise = RegressionNoise::parse("gaussian", 0.3);
  const RegressionSample s = gen_regression(500, "bump", noise, derive_seed({seed, 5}), 1);
  const KernelSpec K(KernelId::epanechnikov, 1);
  const BandwidthNet net = build_net(0.05, 0.4, 0.7, 1, 50);
  const Vec x0{0.5};
  const MarginReport rep = check_local_margin(x0, s, net, K, 1.0, 3.0, f_star("bump", x0.data(), 1), noise);
  const bool ok = !rep.precondition || rep.inequality;
  return {"local margin", ok,
          std::string(rep.precondition ? "precondition holds" : "precondition fails, not tested") +
            ", sup error " + fmt(rep.sup_error)};
}

} // namespace

std::vector<CheckResult> run_diagnostics(std::uint64_t seed, std::size_t grid)
{
  std::vector<CheckResult> out;
  auto guarded = [&](const std::string& name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      out.push_back({name, false, e.what()});
    }
  };
  guarded("fourier identity", [&] { out.push_back(fourier_identity(grid)); });
  guarded("gradient link (quadratic)", [&] { out.push_back(quadratic_link(seed)); });
  guarded("clustering", [&] {
    CheckResult fd;
    CheckResult link = clustering_checks(seed, grid, fd);
    out.push_back(fd);
    out.push_back(link);
  });
  guarded("local margin", [&] { out.push_back(margin(seed)); });
  return out;
}

bool report_diagnostics(const std::vector<CheckResult>& results, std::ostream& os)
{
  bool all = true;
  for (const auto& r : results) {
    os << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    all = all && r.passed;
  }
  return all;
}

} // namespace gradbw
