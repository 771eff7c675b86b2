#include "gradbw/noisy_kmeans.hpp"

#include "gradbw/errors.hpp"
#include "gradbw/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gradbw {

Codebook::Codebook(std::size_t k_, std::size_t d_, Vec c_) : k(k_), d(d_), c(std::move(c_))
{
  if (k == 0 || d == 0 || c.size() != k * d) {
    throw InvalidArgument("codebook needs k*d coordinates");
  }
}

double Codebook::min_separation() const
{
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      double s = 0.0;
      for (std::size_t u = 0; u < d; ++u) {
        const double e = c[i * d + u] - c[j * d + u];
        s += e * e;
      }
      best = std::min(best, std::sqrt(s));
    }
  }
  return best;
}

bool Codebook::inside_unit_box() const
{
  return std::all_of(c.begin(), c.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

namespace {

void check_codebook(const Codebook& c, const DeconvDensity& f)
{
  if (c.d != f.f.grid.dim) {
    throw InvalidArgument("codebook dimension does not match the density grid");
  }
  if (c.k > 1 && c.min_separation() <= 1e-9) {
    throw DegenerateCodebook("two centroids coincide");
  }
}

Vec gradient_from_sums(const Codebook& c, const gk::CellSums& s)
{
  Vec g(c.k * c.d);
  for (std::size_t j = 0; j < c.k; ++j) {
    for (std::size_t u = 0; u < c.d; ++u) {
      g[j * c.d + u] = -2.0 * (s.moment[j * c.d + u] - c.c[j * c.d + u] * s.mass[j]);
    }
  }
  return g;
}

double norm2(const Vec& v)
{
  double s = 0.0;
  for (double x : v) {
    s += x * x;
  }
  return std::sqrt(s);
}

std::size_t draw(const Vec& weights, double total, std::mt19937_64& rng)
{
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (acc > target && weights[i] > 0.0) {
      return i;
    }
  }
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) {
      return i;
    }
  }
  return 0;
}

// k-means++ seeding over grid nodes weighted by w
std::optional<Codebook> seed_nodes(const GridSpec& grid, const Vec& w, std::size_t k, std::mt19937_64& rng)
{
  const std::size_t d = grid.dim;
  const std::size_t N = grid.size();
  Vec c;
  c.reserve(k * d);
  Vec dist(N, std::numeric_limits<double>::infinity());
  Vec weights = w;
  Vec x(d);
  for (std::size_t j = 0; j < k; ++j) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) {
      return std::nullopt;
    }
    const std::size_t pick = draw(weights, total, rng);
    grid.coords(pick, x.data());
    c.insert(c.end(), x.begin(), x.end());
    Vec y(d);
    for (std::size_t f = 0; f < N; ++f) {
      grid.coords(f, y.data());
      double s = 0.0;
      for (std::size_t u = 0; u < d; ++u) {
        s += (y[u] - x[u]) * (y[u] - x[u]);
      }
      dist[f] = std::min(dist[f], s);
      weights[f] = w[f] * dist[f];
    }
  }
  return Codebook(k, d, std::move(c));
}

// one Lloyd step; empty optional when a cell has no positive mass or a centroid leaves the box
std::optional<Codebook> lloyd_step(const Codebook& c, const gk::CellSums& s, bool require_box)
{
  Codebook next = c;
  for (std::size_t j = 0; j < c.k; ++j) {
    if (!(s.mass[j] > 0.0)) {
      return std::nullopt;
    }
    for (std::size_t u = 0; u < c.d; ++u) {
      next.c[j * c.d + u] = s.moment[j * c.d + u] / s.mass[j];
    }
  }
  if (require_box && !next.inside_unit_box()) {
    return std::nullopt;
  }
  if (c.k > 1 && next.min_separation() <= 1e-9) {
    return std::nullopt;
  }
  return next;
}

double movement(const Codebook& a, const Codebook& b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    m = std::max(m, std::abs(a.c[i] - b.c[i]));
  }
  return m;
}

} // namespace

double distortion(const Codebook& c, const DeconvDensity& f)
{
  if (c.d != f.f.grid.dim) {
    throw InvalidArgument("codebook dimension does not match the density grid");
  }
  return gk::cell_sums(f.f.grid, f.f.values, c.c, c.k, false).distortion;
}

Vec gradient_distortion(const Codebook& c, const DeconvDensity& f)
{
  check_codebook(c, f);
  return gradient_from_sums(c, gk::cell_sums(f.f.grid, f.f.values, c.c, c.k, false));
}

CodebookFit fit_codebook(const DeconvDensity& f, std::size_t k, std::uint64_t seed, int max_iter, double tol)
{
  if (k == 0) {
    throw InvalidArgument("k must be at least 1");
  }
  const GridSpec& grid = f.f.grid;
  Vec positive(f.f.values.size());
  for (std::size_t i = 0; i < positive.size(); ++i) {
    positive[i] = std::max(f.f.values[i], 0.0);
  }
  std::mt19937_64 rng(seed);
  std::optional<CodebookFit> best;
  int failed = 0;
  constexpr int restarts = 5;
  for (int r = 0; r < restarts; ++r) {
    auto init = seed_nodes(grid, positive, k, rng);
    if (!init) {
      ++failed;
      continue;
    }
    Codebook c = *init;
    int it = 0;
    bool ok = true;
    for (; it < max_iter; ++it) {
      const auto s = gk::cell_sums(grid, f.f.values, c.c, k, true);
      auto next = lloyd_step(c, s, false);
      if (!next) {
        ok = false;
        break;
      }
      const double mv = movement(c, *next);
      c = std::move(*next);
      if (mv < tol) {
        break;
      }
    }
    if (!ok) {
      ++failed;
      continue;
    }
    // fixed point of the signed density; steps are halved until the gradient shrinks
    auto sums = gk::cell_sums(grid, f.f.values, c.c, k, false);
    double gnorm = norm2(gradient_from_sums(c, sums));
    for (int p = 0; p < max_iter && gnorm > tol; ++p) {
      auto target = lloyd_step(c, sums, true);
      if (!target) {
        break;
      }
      bool moved = false;
      for (double step = 1.0; step > 1e-3; step *= 0.5) {
        Codebook trial = c;
        for (std::size_t i = 0; i < trial.c.size(); ++i) {
          trial.c[i] += step * (target->c[i] - c.c[i]);
        }
        if (k > 1 && trial.min_separation() <= 1e-9) {
          continue;
        }
        auto ts = gk::cell_sums(grid, f.f.values, trial.c, k, false);
        const double tn = norm2(gradient_from_sums(trial, ts));
        if (tn < gnorm) {
          c = std::move(trial);
          sums = std::move(ts);
          gnorm = tn;
          moved = true;
          break;
        }
      }
      ++it;
      if (!moved) {
        break;
      }
    }
    const auto s = gk::cell_sums(grid, f.f.values, c.c, k, false);
    CodebookFit fit;
    fit.codebook = c;
    fit.distortion = s.distortion;
    fit.grad_norm = norm2(gradient_from_sums(c, s));
    fit.iterations = it;
    if (!best || fit.distortion < best->distortion) {
      best = std::move(fit);
    }
  }
  if (!best) {
    throw EmptyCell("every restart produced a Voronoi cell without positive mass");
  }
  best->failed_restarts = failed;
  return *best;
}

double majorant_kmeans(const Bandwidth& h, const Bandwidth& eta, std::size_t n, std::size_t k, std::size_t d,
                       const Vec& beta, double b1_prime)
{
  if (!(b1_prime > 0.0)) {
    throw InvalidArgument("majorant constant must be positive");
  }
  double pe = 1.0;
  double pv = 1.0;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    pe *= std::pow(eta[j], -beta[j]);
    pv *= std::pow(std::max(h[j], eta[j]), -beta[j]);
  }
  const double rn = std::sqrt(static_cast<double>(n));
  return b1_prime * std::sqrt(static_cast<double>(k * d)) * (pe / rn + pv / rn);
}

// ---------------------------------------------------------------- ClusteringField

ClusteringField::ClusteringField(NoisySample sample, KernelSpec K, NoiseModel g, GridSpec grid, std::size_t k,
                                 double loss_scale)
  : sample_(std::move(sample)), K_(K), g_(std::move(g)), grid_(grid), k_(k), scale_(loss_scale)
{
}

std::shared_ptr<const DeconvDensity> ClusteringField::lookup(const Key& key) const
{
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = densities_.find(key);
    if (it != densities_.end()) {
      return it->second;
    }
  }
  std::optional<Bandwidth> eta;
  if (!key.second.empty()) {
    eta = Bandwidth(key.second);
  }
  auto f = std::make_shared<const DeconvDensity>(deconv_density(sample_, K_, Bandwidth(key.first), g_, grid_, eta));
  std::lock_guard<std::mutex> lock(mutex_);
  return densities_.emplace(key, std::move(f)).first->second;
}

std::shared_ptr<const DeconvDensity> ClusteringField::density(const Bandwidth& h) const
{
  return lookup({h.values(), {}});
}

std::shared_ptr<const DeconvDensity> ClusteringField::density_aux(const Bandwidth& h, const Bandwidth& eta) const
{
  if (K_.band_limited()) {
    // indicator transforms multiply to the indicator of the narrower band
    return lookup({max(h, eta).values(), {}});
  }
  const Vec& a = h.values();
  const Vec& b = eta.values();
  return a < b ? lookup({a, b}) : lookup({b, a});
}

Vec ClusteringField::gradient_for(const std::shared_ptr<const DeconvDensity>& f, const Key& key, const Vec& theta) const
{
  auto memo = std::make_pair(key, theta);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = gradients_.find(memo);
    if (it != gradients_.end()) {
      return it->second;
    }
  }
  Vec g = gradient_distortion(Codebook(k_, sample_.d, theta), *f);
  for (double& v : g) {
    v *= scale_;
  }
  std::lock_guard<std::mutex> lock(mutex_);
  gradients_.emplace(std::move(memo), g);
  return g;
}

Vec ClusteringField::grad(const Bandwidth& h, const Vec& theta) const
{
  return gradient_for(density(h), {h.values(), {}}, theta);
}

Vec ClusteringField::grad_aux(const Bandwidth& h, const Bandwidth& eta, const Vec& theta) const
{
  if (K_.band_limited()) {
    const Bandwidth m = max(h, eta);
    return gradient_for(density(m), {m.values(), {}}, theta);
  }
  const Vec& a = h.values();
  const Vec& b = eta.values();
  Key key = a < b ? Key{a, b} : Key{b, a};
  return gradient_for(density_aux(h, eta), key, theta);
}

// ---------------------------------------------------------------- selection

KmeansPrep prepare_kmeans(const NoisySample& sample, const KernelSpec& K, const NoiseModel& g, const BandwidthNet& net,
                          std::size_t k, const GridSpec& grid, std::uint64_t seed, const KmeansOptions& opts)
{
  if (sample.size() == 0) {
    throw InvalidArgument("sample is empty");
  }
  if (net.members.empty()) {
    throw EmptyNet("bandwidth net is empty");
  }
  KmeansPrep prep;
  prep.field = std::make_shared<ClusteringField>(sample, K, g, grid, k, opts.loss_scale);
  std::vector<std::optional<CodebookFit>> fits(net.size());
  const long N = static_cast<long>(net.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < N; ++i) {
    const auto f = prep.field->density(net[static_cast<std::size_t>(i)]);
    try {
      fits[static_cast<std::size_t>(i)] =
        fit_codebook(*f, k, derive_seed({seed, static_cast<std::uint64_t>(i)}), opts.max_iter, opts.tol);
    } catch (const EmptyCell&) {
    }
  }
  prep.net = net;
  prep.net.members.clear();
  prep.net.exponents.clear();
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (!fits[i]) {
      prep.note += "dropped " + net[i].str() + " (no fit); ";
      continue;
    }
    prep.net.members.push_back(net[i]);
    prep.net.exponents.push_back(net.exponents[i]);
    prep.candidates.points.push_back(fits[i]->codebook.c);
    prep.fits.push_back(std::move(*fits[i]));
  }
  if (prep.net.members.empty()) {
    throw EmptyCell("no bandwidth in the net produced a codebook");
  }
  if (opts.random_candidates > 0) {
    const std::size_t m = k * sample.d;
    const auto extra = random_candidates(Vec(m, 0.0), Vec(m, 1.0), opts.random_candidates, derive_seed({seed, ~0ull}));
    prep.candidates.points.insert(prep.candidates.points.end(), extra.points.begin(), extra.points.end());
  }
  prep.table = comparison_table(*prep.field, prep.net, prep.candidates);
  return prep;
}

KmeansSelection select_kmeans(const KmeansPrep& prep, double b1_prime, const KmeansOptions& opts)
{
  const auto& field = *prep.field;
  const std::size_t n = field.sample().size();
  const std::size_t d = field.sample().d;
  const Vec beta = opts.beta.empty() ? field.noise().beta : opts.beta;
  MajorantFn M;
  M.fn = [=, k = field.k()](const Bandwidth& h, const Bandwidth& eta) {
    return majorant_kmeans(h, eta, n, k, d, beta, b1_prime);
  };
  SelectionOptions so;
  so.positive_part = opts.positive_part;
  KmeansSelection out;
  out.report = select_from_table(prep.table, M, so);
  out.report.note = "kernel=" + to_string(field.kernel().id()) + "; " + prep.note;
  out.codebook = prep.fits[out.report.selected_index].codebook;
  out.kernel = to_string(field.kernel().id());
  return out;
}

KmeansSelection select_bandwidth_kmeans(const NoisySample& sample, const KernelSpec& K, const NoiseModel& g,
                                        const BandwidthNet& net, std::size_t k, double b1_prime, const GridSpec& grid,
                                        std::uint64_t seed, const KmeansOptions& opts)
{
  return select_kmeans(prepare_kmeans(sample, K, g, net, k, grid, seed, opts), b1_prime, opts);
}

// ---------------------------------------------------------------- clustering error

double clustering_error(const Codebook& c, const Vec& points, const std::vector<int>& labels)
{
  if (c.k > 8) {
    throw KTooLargeForExactMatching("exact label matching is limited to k <= 8");
  }
  const std::size_t d = c.d;
  const std::size_t n = points.size() / d;
  if (labels.size() != n || n == 0) {
    throw InvalidArgument("labels must match the points");
  }
  // confusion[label][cluster]
  std::vector<std::vector<std::size_t>> confusion(c.k, std::vector<std::size_t>(c.k, 0));
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c.k) {
      throw InvalidArgument("more distinct labels than centroids");
    }
    std::size_t best = 0;
    double best_d = 0.0;
    for (std::size_t j = 0; j < c.k; ++j) {
      double s = 0.0;
      for (std::size_t u = 0; u < d; ++u) {
        const double e = points[i * d + u] - c.c[j * d + u];
        s += e * e;
      }
      if (j == 0 || s < best_d) {
        best = j;
        best_d = s;
      }
    }
    ++confusion[static_cast<std::size_t>(labels[i])][best];
  }
  std::vector<std::size_t> perm(c.k);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best_hits = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t l = 0; l < c.k; ++l) {
      hits += confusion[l][perm[l]];
    }
    best_hits = std::max(best_hits, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(n - best_hits) / static_cast<double>(n);
}

} // namespace gradbw
