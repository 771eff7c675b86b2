#include "gradbw/diagnostics.hpp"
#include "gradbw/errors.hpp"
#include "gradbw/experiments.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

using namespace gradbw;

namespace {

struct Common
{
  std::uint64_t seed = 1;
  std::vector<double> constants;
  std::string out;
  std::string data;
  std::size_t grid = 0;
  bool quiet = false;
};

void emit(const std::string& path, const std::function<void(std::ostream&)>& write)
{
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw InvalidArgument("cannot write " + path);
  }
  write(os);
}

std::string join(const Vec& v)
{
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += (i ? " " : "") + format_number(v[i]);
  }
  return s;
}

int cluster_select(const Common& c, std::size_t k, const std::string& noise, std::vector<double> sigma, double h_minus,
                   double h_plus, double a, double fill)
{
  const DataFile df = read_data(c.data);
  if (df.columns.size() != 2 && df.columns.size() != 3) {
    throw InvalidArgument("cluster-select expects two columns and an optional label column, got " +
                          std::to_string(df.columns.size()));
  }
  const std::size_t d = 2;
  Vec z;
  std::vector<int> labels;
  for (const auto& r : df.rows) {
    z.insert(z.end(), r.begin(), r.begin() + 2);
    if (r.size() == 3) {
      if (r[2] != std::floor(r[2]) || r[2] < 0.0) {
        throw InvalidArgument("labels must be non-negative integers");
      }
      labels.push_back(static_cast<int>(r[2]));
    }
  }
  const AffineMap map = fit_unit_box(z, d, fill);
  NoisySample s;
  s.d = d;
  s.z = map.apply(z);
  if (sigma.size() == 1) {
    sigma.assign(d, sigma[0]);
  }
  if (sigma.size() != d) {
    throw InvalidArgument("--sigma needs one value or one per column");
  }
  for (double& v : sigma) {
    v *= map.scale;
  }
  NoiseModel g = NoiseModel::none(d);
  if (noise == "laplace") {
    g = NoiseModel::laplace(sigma);
  } else if (noise == "gaussian") {
    g = NoiseModel::gaussian(sigma, Vec(d, 1.0));
  } else if (noise != "none") {
    throw InvalidArgument("unknown noise law: " + noise);
  }
  const KernelSpec K(KernelId::sinc, d);
  const BandwidthNet net = build_net(h_minus, h_plus, a, d, s.size());
  const GridSpec grid = spatial_grid(d, c.grid ? c.grid : 128);
  const double constant = c.constants.empty() ? 1.0 : c.constants.front();
  const KmeansSelection sel = select_bandwidth_kmeans(s, K, g, net, k, constant, grid, c.seed);
  std::cout << "selected " << sel.report.selected.str() << '\n';
  const Vec raw = map.inverse(sel.codebook.c);
  if (!labels.empty()) {
    std::cout << "error " << format_number(clustering_error(Codebook(k, d, raw), z, labels)) << '\n';
  }
  for (std::size_t j = 0; j < k; ++j) {
    std::cout << "centroid " << join(Vec(raw.begin() + static_cast<long>(j * d), raw.begin() + static_cast<long>((j + 1) * d)))
              << '\n';
  }
  if (!c.quiet && !sel.report.note.empty()) {
    std::cerr << sel.report.note << '\n';
  }
  if (!c.out.empty()) {
    emit(c.out, [&](std::ostream& os) { sel.report.write_csv(os); });
  }
  return 0;
}

RegressionSample regression_data(const std::string& path)
{
  const DataFile df = read_data(path);
  if (df.columns.size() < 2) {
    throw InvalidArgument("regression data needs covariate columns followed by a response column");
  }
  RegressionSample s;
  s.d = df.columns.size() - 1;
  for (const auto& r : df.rows) {
    for (std::size_t j = 0; j < s.d; ++j) {
      if (r[j] < 0.0 || r[j] > 1.0) {
        throw InvalidArgument("covariates must lie in [0, 1]");
      }
      s.w.push_back(r[j]);
    }
    s.y.push_back(r.back());
  }
  return s;
}

int regress(const Common& c, bool global, const std::vector<double>& x0, double q, std::size_t x_points, double gamma,
            double B, double h_minus, double h_plus, double a)
{
  const RegressionSample s = regression_data(c.data);
  const KernelSpec K(KernelId::epanechnikov, s.d);
  BandwidthBounds bounds = regression_bounds(s.size(), s.d);
  const BandwidthNet net =
    build_net(h_minus > 0.0 ? h_minus : bounds.h_minus, h_plus > 0.0 ? h_plus : bounds.h_plus, a, s.d, s.size());
  const double g = gamma > 0.0 ? gamma : default_gamma(s, net, K);
  const double b = B > 0.0 ? B : default_bound(s);
  RegressionOptions opts;
  if (!c.constants.empty()) {
    opts.C0 = c.constants.front();
    opts.Cq = c.constants.front();
  }
  if (!global) {
    Vec point = x0.empty() ? Vec(s.d, 0.5) : Vec(x0);
    if (point.size() != s.d) {
      throw InvalidArgument("--x0 needs one value per covariate");
    }
    const LocalFit fit = select_pointwise(point, s, net, K, g, b, opts);
    std::cout << "selected " << fit.selected.str() << '\n' << "estimate " << format_number(fit.estimate) << '\n';
    if (!c.out.empty()) {
      emit(c.out, [&](std::ostream& os) { fit.report.write_csv(os); });
    }
    return 0;
  }
  const XGrid xg = interior_grid(s.d, x_points, net.members.front()[0]);
  const GlobalFit fit = select_global(s, net, K, g, b, q, xg, opts);
  std::cout << "selected " << fit.selected.str() << '\n';
  emit(c.out, [&](std::ostream& os) { fit.write_csv(os); });
  return 0;
}

int experiment(const Common& c, const std::string& which, const std::string& config_path, std::size_t n,
               std::size_t reps)
{
  ExperimentConfig cfg;
  cfg.experiment = which;
  if (which == "rates") {
    cfg.replicates = 50;
  }
  if (!config_path.empty()) {
    cfg = load_config(config_path, cfg);
  }
  if (which != "figure1" && which != "rates") {
    throw InvalidArgument("unknown experiment: " + which);
  }
  cfg.experiment = which;
  if (n) {
    cfg.n = n;
  }
  if (reps) {
    cfg.replicates = reps;
  }
  if (c.seed != 0) {
    cfg.seed = c.seed;
  }
  if (!c.constants.empty()) {
    cfg.constants = c.constants;
  }
  if (c.grid) {
    cfg.grid = c.grid;
  }
  if (!c.out.empty()) {
    cfg.output = c.out;
  }
  cfg.quiet = cfg.quiet || c.quiet;
  const ResultTable t = which == "figure1" ? run_figure1(cfg) : run_regression_experiment(cfg);
  emit(cfg.output, [&](std::ostream& os) { t.write_csv(os); });
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Gradient-comparison bandwidth selection for kernel empirical risk minimization"};
  app.require_subcommand(1);
  Common c;
  c.seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--const", c.constants, "Majorant constant (repeatable)");
    sub->add_option("--out", c.out, "Output CSV path");
    sub->add_option("--grid", c.grid, "Grid nodes per axis");
    sub->add_flag("--quiet", c.quiet, "Suppress progress output");
  };

  std::size_t k = 2;
  std::string noise = "laplace";
  std::vector<double> sigma{0.1};
  double h_minus = 0.0;
  double h_plus = 0.0;
  double a = 0.7;
  double fill = 0.6;
  auto* cs = app.add_subcommand("cluster-select", "Noisy k-means with a selected bandwidth");
  add_common(cs);
  cs->add_option("--data", c.data, "Two-column data file")->required();
  cs->add_option("--k", k, "Number of clusters");
  cs->add_option("--noise", noise, "Noise law: none, laplace, gaussian");
  cs->add_option("--sigma", sigma, "Noise scale, one value or one per axis");
  cs->add_option("--h-minus", h_minus, "Smallest bandwidth");
  cs->add_option("--h-plus", h_plus, "Largest bandwidth");
  cs->add_option("--a", a, "Net ratio in (0, 1)");

  std::vector<double> x0;
  double q = 2.0;
  std::size_t x_points = 50;
  double gamma = 0.0;
  double B = 0.0;
  auto* rp = app.add_subcommand("regress-point", "Robust local estimate at one point");
  auto* rg = app.add_subcommand("regress-global", "Robust local fit over an interior grid");
  for (auto* sub : {rp, rg}) {
    add_common(sub);
    sub->add_option("--data", c.data, "Covariate columns then response")->required();
    sub->add_option("--gamma", gamma, "Huber threshold (default from the data)");
    sub->add_option("--B", B, "Parameter bound (default from the data)");
    sub->add_option("--h-minus", h_minus, "Smallest bandwidth");
    sub->add_option("--h-plus", h_plus, "Largest bandwidth");
    sub->add_option("--a", a, "Net ratio in (0, 1)");
  }
  rp->add_option("--x0", x0, "Evaluation point");
  rg->add_option("--q", q, "Norm exponent");
  rg->add_option("--x-points", x_points, "Evaluation points per axis");

  std::string which;
  std::string config_path;
  std::size_t n = 0;
  std::size_t reps = 0;
  auto* ex = app.add_subcommand("experiment", "Run a simulation study");
  add_common(ex);
  ex->add_option("which", which, "figure1 or rates")->required();
  ex->add_option("--config", config_path, "Config file");
  ex->add_option("--n", n, "Sample size");
  ex->add_option("--reps", reps, "Replicates");

  auto* ck = app.add_subcommand("check", "Run the numerical diagnostic suite");
  add_common(ck);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cs->parsed()) {
      return cluster_select(c, k, noise, sigma, h_minus > 0.0 ? h_minus : 0.03, h_plus > 0.0 ? h_plus : 0.12, a, fill);
    }
    if (rp->parsed() || rg->parsed()) {
      return regress(c, rg->parsed(), x0, q, x_points, gamma, B, h_minus, h_plus, a);
    }
    if (ex->parsed()) {
      return experiment(c, which, config_path, n, reps);
    }
    if (ck->parsed()) {
      const auto results = run_diagnostics(c.seed ? c.seed : 1, c.grid ? c.grid : 64);
      return report_diagnostics(results, std::cout) ? 0 : 1;
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
