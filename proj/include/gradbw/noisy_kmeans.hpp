#pragma once

#include "gradbw/grid_kernels.hpp"
#include "gradbw/grids.hpp"
#include "gradbw/kernels.hpp"
#include "gradbw/selector.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace gradbw {

/// k centroids in R^d, row-major.
struct Codebook
{
  std::size_t k = 0;
  std::size_t d = 0;
  Vec c;

  Codebook() = default;
  Codebook(std::size_t k, std::size_t d, Vec c);

  const double* centroid(std::size_t j) const { return c.data() + j * d; }
  double min_separation() const;
  bool inside_unit_box() const;
};

/// Observations Z (n x d row-major) with optional latent labels (0-based) and clean points X.
struct NoisySample
{
  std::size_t d = 0;
  Vec z;
  std::vector<int> labels;
  Vec clean;

  std::size_t size() const { return d == 0 ? 0 : z.size() / d; }
};

struct DeconvDensity
{
  GridFunction f;
  KernelId kernel = KernelId::sinc;
  Bandwidth h;
  std::optional<Bandwidth> aux_eta;
  bool auxiliary = false;
};

/// f(x) = (1/n) sum_i Ktilde(Z_i - x) on the grid nodes, Ktilde the deconvolution of K_h or of K_h * K_eta.
/// Band-limited kernels use the exact empirical characteristic function on the frequency box.
DeconvDensity deconv_density(const NoisySample& sample, const KernelSpec& K, const Bandwidth& h, const NoiseModel& g,
                             const GridSpec& grid, const std::optional<Bandwidth>& aux_eta = std::nullopt,
                             gk::Exec exec = gk::Exec::parallel);

double distortion(const Codebook& c, const DeconvDensity& f);
Vec gradient_distortion(const Codebook& c, const DeconvDensity& f);

struct CodebookFit
{
  Codebook codebook;
  double distortion = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int failed_restarts = 0;
};

CodebookFit fit_codebook(const DeconvDensity& f, std::size_t k, std::uint64_t seed, int max_iter = 200,
                         double tol = 1e-8);

double majorant_kmeans(const Bandwidth& h, const Bandwidth& eta, std::size_t n, std::size_t k, std::size_t d,
                       const Vec& beta, double b1_prime);

struct KmeansOptions
{
  int max_iter = 200;
  double tol = 1e-8;
  /// Multiplies the loss, hence every gradient.
  double loss_scale = 1.0;
  bool positive_part = false;
  /// Uniform draws in the unit box added to the fitted codebooks when taking suprema; none by default.
  std::size_t random_candidates = 0;
  /// Majorant exponents; empty means the noise model's.
  Vec beta;
};

/// Gradients of the deconvolution distortion, memoised per (density, codebook).
class ClusteringField : public GradientField
{
public:
  ClusteringField(NoisySample sample, KernelSpec K, NoiseModel g, GridSpec grid, std::size_t k, double loss_scale = 1.0);

  std::size_t dimension() const override { return k_ * sample_.d; }
  Vec grad(const Bandwidth& h, const Vec& theta) const override;
  Vec grad_aux(const Bandwidth& h, const Bandwidth& eta, const Vec& theta) const override;

  std::shared_ptr<const DeconvDensity> density(const Bandwidth& h) const;
  std::shared_ptr<const DeconvDensity> density_aux(const Bandwidth& h, const Bandwidth& eta) const;
  const NoisySample& sample() const { return sample_; }
  const KernelSpec& kernel() const { return K_; }
  const NoiseModel& noise() const { return g_; }
  const GridSpec& grid() const { return grid_; }
  std::size_t k() const { return k_; }

private:
  using Key = std::pair<Vec, Vec>;
  std::shared_ptr<const DeconvDensity> lookup(const Key& key) const;
  Vec gradient_for(const std::shared_ptr<const DeconvDensity>& f, const Key& key, const Vec& theta) const;

  NoisySample sample_;
  KernelSpec K_;
  NoiseModel g_;
  GridSpec grid_;
  std::size_t k_;
  double scale_;
  mutable std::mutex mutex_;
  mutable std::map<Key, std::shared_ptr<const DeconvDensity>> densities_;
  mutable std::map<std::pair<Key, Vec>, Vec> gradients_;
};

/// Densities, per-bandwidth codebooks and the comparison table; reusable across majorant constants.
struct KmeansPrep
{
  std::shared_ptr<ClusteringField> field;
  BandwidthNet net;
  std::vector<CodebookFit> fits;
  CandidateSet candidates;
  ComparisonTable table;
  std::string note;
};

KmeansPrep prepare_kmeans(const NoisySample& sample, const KernelSpec& K, const NoiseModel& g, const BandwidthNet& net,
                          std::size_t k, const GridSpec& grid, std::uint64_t seed, const KmeansOptions& opts = {});

struct KmeansSelection
{
  SelectionReport report;
  Codebook codebook;
  std::string kernel;
};

KmeansSelection select_kmeans(const KmeansPrep& prep, double b1_prime, const KmeansOptions& opts = {});

KmeansSelection select_bandwidth_kmeans(const NoisySample& sample, const KernelSpec& K, const NoiseModel& g,
                                        const BandwidthNet& net, std::size_t k, double b1_prime, const GridSpec& grid,
                                        std::uint64_t seed, const KmeansOptions& opts = {});

/// Fraction of points whose nearest centroid disagrees with the label, minimised over label matchings.
double clustering_error(const Codebook& c, const Vec& points, const std::vector<int>& labels);

struct PollardHessian
{
  Eigen::MatrixXd H;
  double lambda_min = 0.0;
};

/// Block Hessian of the distortion with Voronoi face integrals (d = 2).
PollardHessian pollard_hessian(const Codebook& c, const DeconvDensity& f, std::size_t face_nodes = 400);

/// Plain Lloyd on the observations with k-means++ seeding, best of 5 restarts.
Codebook lloyd_kmeans_baseline(const NoisySample& sample, std::size_t k, std::uint64_t seed);

struct ErcResult
{
  Codebook codebook;
  Bandwidth selected;
  std::size_t selected_index = 0;
  Vec criterion;
};

/// Isotropic selection by comparing empirical risks of coarser fits.
ErcResult erc_baseline(const NoisySample& sample, const KernelSpec& K, const NoiseModel& g,
                       const BandwidthNet& isotropic_net, std::size_t k, double constant, const GridSpec& grid,
                       std::uint64_t seed, const KmeansOptions& opts = {});

/// Same rule reusing the densities and fits of a prepared clustering run.
ErcResult erc_from_prep(const KmeansPrep& prep, double constant, const KmeansOptions& opts = {});

} // namespace gradbw
