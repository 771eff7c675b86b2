#include "gradbw/errors.hpp"
#include "gradbw/noisy_kmeans.hpp"
#include "gradbw/random.hpp"

#include <cmath>
#include <limits>

namespace gradbw {

Codebook lloyd_kmeans_baseline(const NoisySample& sample, std::size_t k, std::uint64_t seed)
{
  const std::size_t d = sample.d;
  const std::size_t n = sample.size();
  if (k == 0 || n < k) {
    throw InvalidArgument("need at least k observations");
  }
  const Vec& z = sample.z;
  auto sq = [&](std::size_t i, const double* c) {
    double s = 0.0;
    for (std::size_t u = 0; u < d; ++u) {
      s += (z[i * d + u] - c[u]) * (z[i * d + u] - c[u]);
    }
    return s;
  };
  std::mt19937_64 rng(seed);
  Vec best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int r = 0; r < 5; ++r) {
    Vec c;
    Vec dist(n, std::numeric_limits<double>::infinity());
    std::size_t pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
    for (std::size_t j = 0; j < k; ++j) {
      c.insert(c.end(), z.begin() + static_cast<long>(pick * d), z.begin() + static_cast<long>((pick + 1) * d));
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dist[i] = std::min(dist[i], sq(i, c.data() + j * d));
        total += dist[i];
      }
      if (j + 1 < k) {
        const double target = uniform01(rng) * total;
        double acc = 0.0;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          acc += dist[i];
          if (acc > target) {
            pick = i;
            break;
          }
        }
      }
    }
    std::vector<std::size_t> assign(n, k);
    double sse = 0.0;
    for (int it = 0; it < 300; ++it) {
      bool changed = false;
      sse = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t a = 0;
        double ad = sq(i, c.data());
        for (std::size_t j = 1; j < k; ++j) {
          const double s = sq(i, c.data() + j * d);
          if (s < ad) {
            a = j;
            ad = s;
          }
        }
        changed |= a != assign[i];
        assign[i] = a;
        sse += ad;
      }
      if (!changed) {
        break;
      }
      Vec sum(k * d, 0.0);
      std::vector<std::size_t> count(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        ++count[assign[i]];
        for (std::size_t u = 0; u < d; ++u) {
          sum[assign[i] * d + u] += z[i * d + u];
        }
      }
      for (std::size_t j = 0; j < k; ++j) {
        if (count[j] == 0) {
          continue;
        }
        for (std::size_t u = 0; u < d; ++u) {
          c[j * d + u] = sum[j * d + u] / static_cast<double>(count[j]);
        }
      }
    }
    if (sse < best_sse) {
      best_sse = sse;
      best = c;
    }
  }
  return Codebook(k, d, best);
}

namespace {

double inverse_power(const Bandwidth& h, const Vec& beta)
{
  double p = 1.0;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    p *= std::pow(h[j], -beta[j]);
  }
  return p;
}

ErcResult erc_select(const std::vector<Bandwidth>& net, const std::vector<std::shared_ptr<const DeconvDensity>>& dens,
                     const std::vector<Codebook>& fits, std::size_t n, const Vec& beta, double constant)
{
  const std::size_t N = net.size();
  const double rn = std::sqrt(static_cast<double>(n));
  ErcResult out;
  out.criterion.assign(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    const double vh = inverse_power(net[i], beta);
    double sup = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      if (net[j][0] < net[i][0]) {
        continue;
      }
      const double diff = std::abs(distortion(fits[i], *dens[j]) - distortion(fits[j], *dens[j]));
      const double v = diff - constant * (inverse_power(net[j], beta) + vh) / rn;
      sup = std::max(sup, v);
    }
    out.criterion[i] = sup + constant * vh / rn;
  }
  out.selected_index = argmin_with_tiebreak(out.criterion, net);
  out.selected = net[out.selected_index];
  out.codebook = fits[out.selected_index];
  return out;
}

} // namespace

ErcResult erc_baseline(const NoisySample& sample, const KernelSpec& K, const NoiseModel& g,
                       const BandwidthNet& isotropic_net, std::size_t k, double constant, const GridSpec& grid,
                       std::uint64_t seed, const KmeansOptions& opts)
{
  if (isotropic_net.members.empty()) {
    throw EmptyNet("bandwidth net is empty");
  }
  for (const Bandwidth& h : isotropic_net.members) {
    if (!h.is_isotropic()) {
      throw InvalidArgument("comparison of empirical risks needs an isotropic net");
    }
  }
  const ClusteringField field(sample, K, g, grid, k);
  std::vector<Bandwidth> net;
  std::vector<std::shared_ptr<const DeconvDensity>> dens;
  std::vector<Codebook> fits;
  for (std::size_t i = 0; i < isotropic_net.size(); ++i) {
    auto f = field.density(isotropic_net[i]);
    try {
      fits.push_back(fit_codebook(*f, k, derive_seed({seed, i}), opts.max_iter, opts.tol).codebook);
    } catch (const EmptyCell&) {
      continue;
    }
    net.push_back(isotropic_net[i]);
    dens.push_back(std::move(f));
  }
  if (net.empty()) {
    throw EmptyCell("no bandwidth in the net produced a codebook");
  }
  const Vec beta = opts.beta.empty() ? g.beta : opts.beta;
  return erc_select(net, dens, fits, sample.size(), beta, constant);
}

ErcResult erc_from_prep(const KmeansPrep& prep, double constant, const KmeansOptions& opts)
{
  std::vector<Bandwidth> net;
  std::vector<std::shared_ptr<const DeconvDensity>> dens;
  std::vector<Codebook> fits;
  for (std::size_t i = 0; i < prep.net.size(); ++i) {
    if (!prep.net[i].is_isotropic()) {
      continue;
    }
    net.push_back(prep.net[i]);
    dens.push_back(prep.field->density(prep.net[i]));
    fits.push_back(prep.fits[i].codebook);
  }
  if (net.empty()) {
    throw EmptyNet("prepared net has no isotropic member");
  }
  const Vec beta = opts.beta.empty() ? prep.field->noise().beta : opts.beta;
  return erc_select(net, dens, fits, prep.field->sample().size(), beta, constant);
}

} // namespace gradbw
