#pragma once

#include "gradbw/grids.hpp"
#include "gradbw/kernels.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace gradbw {

/// Gradient empirical risks indexed by bandwidth: grad(h, theta) and the auxiliary
/// grad_aux(h, eta, theta) built from K_h * K_eta. Implementations must allow concurrent calls.
class GradientField
{
public:
  virtual ~GradientField() = default;
  virtual std::size_t dimension() const = 0;
  virtual Vec grad(const Bandwidth& h, const Vec& theta) const = 0;
  virtual Vec grad_aux(const Bandwidth& h, const Bandwidth& eta, const Vec& theta) const = 0;
};

/// Norm used to compare gradient vectors. Euclidean by default; the global regression
/// rule uses a weighted L_q norm over spatial nodes.
struct ComparisonNorm
{
  enum class Kind
  {
    euclidean,
    lq
  };
  Kind kind = Kind::euclidean;
  double q = 2.0;
  double weight = 1.0;

  static ComparisonNorm euclidean() { return {}; }
  static ComparisonNorm lq(double q, double weight) { return {Kind::lq, q, weight}; }
  double operator()(const Vec& v) const;
};

struct MajorantFn
{
  std::function<double(const Bandwidth& h, const Bandwidth& eta)> fn;
  int level = 1;

  double operator()(const Bandwidth& h, const Bandwidth& eta) const { return fn(h, eta); }
};

struct CandidateSet
{
  std::vector<Vec> points;

  std::size_t size() const { return points.size(); }
};

/// Uniform random points in a box, deterministic in the seed.
CandidateSet random_candidates(const Vec& lower, const Vec& upper, std::size_t count, std::uint64_t seed);

/// max over theta in C of |grad_aux(h, eta, theta) - grad(eta, theta)|.
double sup_diff(const GradientField& field, const Bandwidth& h, const Bandwidth& eta, const CandidateSet& C,
                const ComparisonNorm& norm = {});

/// All pairwise sup_diff values over a net: D[i][j] for (h_i, eta_j).
struct ComparisonTable
{
  std::vector<Bandwidth> net;
  std::vector<Vec> D;
  std::size_t candidates = 0;
};

ComparisonTable comparison_table(const GradientField& field, const BandwidthNet& net, const CandidateSet& C,
                                 const ComparisonNorm& norm = {});

struct SelectionOptions
{
  bool positive_part = false;
  /// Replaces sup_lambda M(lambda, h) when set.
  std::function<double(const Bandwidth& h)> sup_term;
};

/// Criterion value for net member `i` from a precomputed table.
double bv_hat(std::size_t i, const ComparisonTable& table, const MajorantFn& M, const SelectionOptions& opts = {});

double bv_hat(const Bandwidth& h, const GradientField& field, const MajorantFn& M, const BandwidthNet& net,
              const CandidateSet& C, const SelectionOptions& opts = {});

struct SelectionReport
{
  Bandwidth selected;
  std::size_t selected_index = 0;
  std::vector<Bandwidth> net;
  Vec bv;
  Vec majorant_sup;
  /// raw[i][j] = sup_diff(h_i, eta_j)
  std::vector<Vec> raw;
  std::size_t candidate_count = 0;
  std::string tie_break;
  std::string note;

  /// Rows: kind,h,eta,value with kind in {pair, bvhat, selected}.
  void write_csv(std::ostream& os) const;
};

SelectionReport select_from_table(const ComparisonTable& table, const MajorantFn& M, const SelectionOptions& opts = {});

SelectionReport select(const GradientField& field, const MajorantFn& M, const BandwidthNet& net, const CandidateSet& C,
                       const SelectionOptions& opts = {}, const ComparisonNorm& norm = {});

/// Index of the minimum with ties to the largest volume, then the lexicographically largest member.
std::size_t argmin_with_tiebreak(const Vec& values, const std::vector<Bandwidth>& members);

using GradientFn = std::function<Vec(const Vec&)>;
using RiskFn = std::function<double(const Vec&)>;

/// |G(theta) - G(theta_star)|.
double g_excess(const GradientFn& G, const Vec& theta, const Vec& theta_star);

struct GradientLinkReport
{
  double max_ratio = 0.0;
  double bound = 0.0;
  double lambda_min = 0.0;
  double kappa1 = 0.0;
  std::size_t evaluated = 0;
  bool passed = false;
};

/// Samples the ball around theta_star and compares sqrt(R - R*) / |G-excess| to 2 sqrt(m kappa1) / lambda_min.
GradientLinkReport check_gradient_link(const RiskFn& R, const GradientFn& G, const Vec& theta_star, double radius,
                                       std::size_t n_samples, std::uint64_t seed);

} // namespace gradbw
