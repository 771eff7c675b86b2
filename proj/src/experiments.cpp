#include "gradbw/experiments.hpp"

#include "gradbw/errors.hpp"
#include "gradbw/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace gradbw {

// ---------------------------------------------------------------- clean mixture quadrature

namespace {

struct Quadrature
{
  Vec points;
  Vec weights;
};

const Quadrature& mixture_quadrature()
{
  static const Quadrature q = [] {
    Quadrature out;
    const double step = 0.05;
    const double inv = 1.0 / (2.0 * std::numbers::pi);
    for (double x = -7.0 + 0.5 * step; x < 12.0; x += step) {
      for (double y = -7.0 + 0.5 * step; y < 7.0; y += step) {
        const double a = std::exp(-0.5 * (x * x + y * y));
        const double b = std::exp(-0.5 * ((x - 5.0) * (x - 5.0) + y * y));
        out.points.push_back(x);
        out.points.push_back(y);
        out.weights.push_back(0.5 * inv * (a + b) * step * step);
      }
    }
    return out;
  }();
  return q;
}

Vec quadrature_moments(const Codebook& c, const Quadrature& q, Vec& mass, double& dist)
{
  const std::size_t k = c.k;
  mass.assign(k, 0.0);
  Vec moment(2 * k, 0.0);
  dist = 0.0;
  for (std::size_t i = 0; i < q.weights.size(); ++i) {
    const double x = q.points[2 * i];
    const double y = q.points[2 * i + 1];
    std::size_t best = 0;
    double bd = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double dx = x - c.c[2 * j];
      const double dy = y - c.c[2 * j + 1];
      const double s = dx * dx + dy * dy;
      if (j == 0 || s < bd) {
        best = j;
        bd = s;
      }
    }
    mass[best] += q.weights[i];
    moment[2 * best] += x * q.weights[i];
    moment[2 * best + 1] += y * q.weights[i];
    dist += bd * q.weights[i];
  }
  return moment;
}

} // namespace

double mixture_distortion(const Codebook& c)
{
  if (c.d != 2) {
    throw InvalidArgument("the mixture lives in the plane");
  }
  Vec mass;
  double dist = 0.0;
  quadrature_moments(c, mixture_quadrature(), mass, dist);
  return dist;
}

const Codebook& mixture_optimum(std::size_t k)
{
  static std::mutex mutex;
  static std::map<std::size_t, Codebook> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(k);
  if (it != cache.end()) {
    return it->second;
  }
  if (k == 0) {
    throw InvalidArgument("k must be positive");
  }
  // spread initial centroids along the axis joining the two means
  Vec init;
  for (std::size_t j = 0; j < k; ++j) {
    init.push_back(k == 1 ? 2.5 : 5.0 * static_cast<double>(j) / static_cast<double>(k - 1));
    init.push_back(0.0);
  }
  Codebook c(k, 2, init);
  const Quadrature& q = mixture_quadrature();
  for (int it2 = 0; it2 < 500; ++it2) {
    Vec mass;
    double dist = 0.0;
    const Vec moment = quadrature_moments(c, q, mass, dist);
    double mv = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t u = 0; u < 2; ++u) {
        const double nv = moment[2 * j + u] / mass[j];
        mv = std::max(mv, std::abs(nv - c.c[2 * j + u]));
        c.c[2 * j + u] = nv;
      }
    }
    if (mv < 1e-12) {
      break;
    }
  }
  return cache.emplace(k, c).first->second;
}

// ---------------------------------------------------------------- figure 1

namespace {

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

double median_of(Vec v)
{
  if (v.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double mean_of(const Vec& v)
{
  if (v.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double s = 0.0;
  for (double x : v) {
    s += x;
  }
  return s / static_cast<double>(v.size());
}

std::size_t effective_cap(const ExperimentConfig& c, std::size_t n) { return c.cap == 0 ? n : c.cap; }

} // namespace

ResultTable run_figure1(const ExperimentConfig& config)
{
  config.validate();
  const KernelSpec K(parse_kernel_id(config.kernel), 2);
  const BandwidthNet net = build_net(config.h_minus, config.h_plus, config.a, 2, effective_cap(config, config.n));
  const GridSpec grid = spatial_grid(2, config.grid);
  KmeansOptions kopts;
  kopts.random_candidates = config.candidates;
  if (config.beta.size() != 2) {
    throw InvalidArgument("beta must have two components for the planar mixture");
  }

  const std::size_t U = config.u_values.size();
  const std::size_t R = config.replicates;
  const std::size_t C = config.constants.size();
  struct Outcome
  {
    std::optional<double> kmeans;
    std::vector<std::optional<double>> erc;
    std::vector<std::optional<double>> grad;
  };
  std::vector<Outcome> outcomes(U * R);

#pragma omp parallel for schedule(dynamic)
  for (long task = 0; task < static_cast<long>(U * R); ++task) {
    const std::size_t ui = static_cast<std::size_t>(task) / R;
    const std::size_t r = static_cast<std::size_t>(task) % R;
    const double u = config.u_values[ui];
    Outcome& out = outcomes[static_cast<std::size_t>(task)];
    out.erc.assign(C, std::nullopt);
    out.grad.assign(C, std::nullopt);
    const MixtureSample mix = gen_mixture(config.n, u, derive_seed({config.seed, bits(u), r, 0}), config.fill);
    try {
      const Codebook cb = lloyd_kmeans_baseline(mix.sample, config.k, derive_seed({config.seed, bits(u), r, 1}));
      out.kmeans = clustering_error(cb, mix.sample.clean, mix.sample.labels);
    } catch (const Error&) {
    }
    try {
      const NoiseModel g = NoiseModel::gaussian(mix.noise_sd, config.beta);
      const KmeansPrep prep =
        prepare_kmeans(mix.sample, K, g, net, config.k, grid, derive_seed({config.seed, bits(u), r, 2}), kopts);
      for (std::size_t c = 0; c < C; ++c) {
        try {
          out.erc[c] = clustering_error(erc_from_prep(prep, config.constants[c]).codebook, mix.sample.clean,
                                        mix.sample.labels);
        } catch (const Error&) {
        }
        out.grad[c] =
          clustering_error(select_kmeans(prep, config.constants[c]).codebook, mix.sample.clean, mix.sample.labels);
      }
    } catch (const Error&) {
    }
  }

  ResultTable table;
  table.param_name = "u";
  for (std::size_t ui = 0; ui < U; ++ui) {
    for (std::size_t r = 0; r < R; ++r) {
      const Outcome& o = outcomes[ui * R + r];
      const double u = config.u_values[ui];
      table.rows.push_back({"kmeans", std::nullopt, u, r, "", o.kmeans, {}, {}, {}});
      for (std::size_t c = 0; c < C; ++c) {
        table.rows.push_back({"erc", config.constants[c], u, r, "", o.erc[c], {}, {}, {}});
      }
      for (std::size_t c = 0; c < C; ++c) {
        table.rows.push_back({"gradient", config.constants[c], u, r, "", o.grad[c], {}, {}, {}});
      }
    }
  }
  add_mean_rows(table);
  if (!config.quiet) {
    for (double u : config.u_values) {
      std::clog << "u=" << u;
      for (const auto* row : table.aggregates()) {
        if (row->param == u && row->value) {
          std::clog << "  " << row->method << (row->constant ? "(" + format_number(*row->constant) + ")" : "") << "="
                    << *row->value;
        }
      }
      std::clog << '\n';
    }
  }
  return table;
}

// ---------------------------------------------------------------- rates

ResultTable run_regression_experiment(const ExperimentConfig& config)
{
  config.validate();
  const RegressionNoise noise = RegressionNoise::parse(config.reg_noise, config.reg_noise_scale);
  const KernelSpec Kr(KernelId::epanechnikov, 1);
  const KernelSpec Kc(parse_kernel_id(config.kernel), 2);
  const GridSpec grid = spatial_grid(2, config.grid);
  KmeansOptions kopts;
  kopts.random_candidates = config.candidates;
  const std::size_t R = config.replicates;
  const std::size_t Nn = config.n_values.size();

  struct Outcome
  {
    std::optional<double> point;
    Vec point_per_h;
    std::optional<double> global;
    Vec global_per_h;
    std::optional<double> cluster;
    Vec cluster_per_h;
  };
  std::vector<Outcome> outcomes(Nn * R);
  std::vector<BandwidthNet> net_point(Nn);
  std::vector<BandwidthNet> net_global(Nn);
  std::vector<BandwidthNet> net_cluster(Nn);
  for (std::size_t ni = 0; ni < Nn; ++ni) {
    const std::size_t n = config.n_values[ni];
    net_point[ni] = build_net(config.reg_h_minus, config.reg_h_plus, config.a, 1, effective_cap(config, n));
    net_global[ni] = build_net(config.reg_h_minus, config.global_h_plus, config.a, 1, effective_cap(config, n));
    net_cluster[ni] = build_net(config.h_minus, config.h_plus, config.a, 2, effective_cap(config, n));
  }
  const XGrid xg = interior_grid(1, config.x_points, config.global_h_plus);
  const Codebook& optimum = mixture_optimum(config.k);
  const double best_distortion = mixture_distortion(optimum);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  RegressionOptions ropts;
  ropts.C0 = config.C0;
  ropts.Cq = config.Cq;

  auto lq_risk = [&](const Vec& fitted) {
    double s = 0.0;
    for (std::size_t p = 0; p < xg.size(); ++p) {
      const double e = fitted[p] - f_star(config.f_global, xg.points.data() + p, 1);
      s += std::pow(std::abs(e), config.q);
    }
    return std::pow(s * xg.weight, 1.0 / config.q);
  };

#pragma omp parallel for schedule(dynamic)
  for (long task = 0; task < static_cast<long>(Nn * R); ++task) {
    const std::size_t ni = static_cast<std::size_t>(task) / R;
    const std::size_t r = static_cast<std::size_t>(task) % R;
    const std::size_t n = config.n_values[ni];
    Outcome& out = outcomes[static_cast<std::size_t>(task)];
    const Vec x0{config.x0};
    const double truth = f_star(config.f_point, x0.data(), 1);

    try {
      const BandwidthNet& net = net_point[ni];
      const RegressionSample s = gen_regression(n, config.f_point, noise, derive_seed({config.seed, n, r, 10}), 1);
      const double gamma = default_gamma(s, net, Kr);
      const double B = default_bound(s);
      const LocalFit fit = select_pointwise(x0, s, net, Kr, gamma, B, ropts);
      out.point = std::abs(fit.estimate - truth);
      for (const Bandwidth& h : net.members) {
        out.point_per_h.push_back(std::abs(local_estimate(x0.data(), h, s, Kr, gamma, B) - truth));
      }
    } catch (const Error&) {
      out.point_per_h.assign(net_point[ni].size(), nan);
    }

    try {
      const BandwidthNet& net = net_global[ni];
      const RegressionSample s = gen_regression(n, config.f_global, noise, derive_seed({config.seed, n, r, 11}), 1);
      const double gamma = default_gamma(s, net, Kr);
      const double B = default_bound(s);
      const GlobalFit fit = select_global(s, net, Kr, gamma, B, config.q, xg, ropts);
      out.global = lq_risk(fit.fitted);
      for (const Bandwidth& h : net.members) {
        Vec fitted(xg.size());
        for (std::size_t p = 0; p < xg.size(); ++p) {
          fitted[p] = local_estimate(xg.points.data() + p, h, s, Kr, gamma, B);
        }
        out.global_per_h.push_back(lq_risk(fitted));
      }
    } catch (const Error&) {
      out.global_per_h.assign(net_global[ni].size(), nan);
    }

    out.cluster_per_h.assign(net_cluster[ni].size(), nan);
    try {
      const BandwidthNet& net = net_cluster[ni];
      const MixtureSample mix =
        gen_mixture(n, config.cluster_u, derive_seed({config.seed, n, r, 12}), config.fill);
      const NoiseModel g = NoiseModel::gaussian(mix.noise_sd, config.beta);
      const KmeansPrep prep = prepare_kmeans(mix.sample, Kc, g, net, config.k, grid, derive_seed({config.seed, n, r, 13}), kopts);
      auto excess = [&](const Codebook& c) {
        return mixture_distortion(Codebook(c.k, c.d, mix.map.inverse(c.c))) - best_distortion;
      };
      out.cluster = excess(select_kmeans(prep, config.cluster_constant).codebook);
      for (std::size_t i = 0; i < prep.net.size(); ++i) {
        out.cluster_per_h[net.find(prep.net[i])] = excess(prep.fits[i].codebook);
      }
    } catch (const Error&) {
    }
  }

  ResultTable table;
  table.param_name = "n";
  table.with_ratio = true;
  struct Method
  {
    std::string name;
    std::function<std::optional<double>(const Outcome&)> selected;
    std::function<const Vec&(const Outcome&)> per_h;
    bool use_median;
  };
  const std::vector<Method> methods{
    {"pointwise", [](const Outcome& o) { return o.point; }, [](const Outcome& o) -> const Vec& { return o.point_per_h; },
     true},
    {"global", [](const Outcome& o) { return o.global; }, [](const Outcome& o) -> const Vec& { return o.global_per_h; },
     false},
    {"clustering", [](const Outcome& o) { return o.cluster; },
     [](const Outcome& o) -> const Vec& { return o.cluster_per_h; }, false},
  };

  for (const Method& m : methods) {
    for (std::size_t ni = 0; ni < Nn; ++ni) {
      const double n = static_cast<double>(config.n_values[ni]);
      // best fixed member of the net, judged on the same statistic
      std::size_t H = 0;
      for (std::size_t r = 0; r < R; ++r) {
        H = std::max(H, m.per_h(outcomes[ni * R + r]).size());
      }
      std::size_t best = 0;
      double best_val = std::numeric_limits<double>::infinity();
      for (std::size_t h = 0; h < H; ++h) {
        Vec v;
        for (std::size_t r = 0; r < R; ++r) {
          const Vec& per = m.per_h(outcomes[ni * R + r]);
          if (h < per.size() && !std::isnan(per[h])) {
            v.push_back(per[h]);
          }
        }
        const double agg = m.use_median ? median_of(v) : mean_of(v);
        if (!v.empty() && agg < best_val) {
          best_val = agg;
          best = h;
        }
      }
      Vec sel;
      Vec orc;
      for (std::size_t r = 0; r < R; ++r) {
        const Outcome& o = outcomes[ni * R + r];
        const auto s = m.selected(o);
        table.rows.push_back({m.name, std::nullopt, n, r, "", s, {}, {}, {}});
        if (s) {
          sel.push_back(*s);
        }
      }
      for (std::size_t r = 0; r < R; ++r) {
        const Vec& per = m.per_h(outcomes[ni * R + r]);
        std::optional<double> v;
        if (best < per.size() && !std::isnan(per[best])) {
          v = per[best];
          orc.push_back(*v);
        }
        table.rows.push_back({m.name + "-oracle", std::nullopt, n, r, "", v, {}, {}, {}});
      }
      for (const std::string stat : {"mean", "median"}) {
        const double a = stat == "mean" ? mean_of(sel) : median_of(sel);
        const double b = stat == "mean" ? mean_of(orc) : median_of(orc);
        auto se = [&](const Vec& v, double mean) {
          if (v.size() < 2) {
            return 0.0;
          }
          double ss = 0.0;
          for (double x : v) {
            ss += (x - mean) * (x - mean);
          }
          return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
        };
        ResultRow rs{m.name, std::nullopt, n, std::nullopt, stat, {}, {}, sel.size(), {}};
        ResultRow ro{m.name + "-oracle", std::nullopt, n, std::nullopt, stat, {}, {}, orc.size(), {}};
        if (!sel.empty()) {
          rs.value = a;
          rs.std_error = se(sel, mean_of(sel));
        }
        if (!orc.empty()) {
          ro.value = b;
          ro.std_error = se(orc, mean_of(orc));
        }
        if (!sel.empty() && !orc.empty() && b > 0.0) {
          rs.oracle_ratio = a / b;
        }
        table.rows.push_back(rs);
        table.rows.push_back(ro);
      }
      if (!config.quiet) {
        const auto* row = table.find_aggregate(m.name, std::nullopt, n, m.use_median ? "median" : "mean");
        std::clog << m.name << " n=" << n << " risk=" << (row && row->value ? *row->value : nan)
                  << " ratio=" << (row && row->oracle_ratio ? *row->oracle_ratio : nan) << '\n';
      }
    }
  }
  return table;
}

} // namespace gradbw
