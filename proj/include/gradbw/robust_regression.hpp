#pragma once

#include "gradbw/grid_kernels.hpp"
#include "gradbw/grids.hpp"
#include "gradbw/kernels.hpp"
#include "gradbw/selector.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace gradbw {

double huber(double z, double gamma);
double huber_prime(double z, double gamma);
int huber_second(double z, double gamma);

/// Pairs (W_i, Y_i) with W_i in [0,1]^d, W row-major.
struct RegressionSample
{
  std::size_t d = 1;
  Vec w;
  Vec y;

  std::size_t size() const { return y.size(); }
  const double* point(std::size_t i) const { return w.data() + i * d; }
};

/// Symmetric noise laws for synthetic data and for the margin check.
struct RegressionNoise
{
  enum class Kind
  {
    none,
    gaussian,
    student_t3,
    cauchy
  };
  Kind kind = Kind::none;
  double scale = 1.0;

  static RegressionNoise parse(const std::string& name, double scale);
  std::string name() const;
  /// P(|xi| <= gamma).
  double prob_within(double gamma) const;
  /// E clip(xi + a, -gamma, gamma).
  double mean_clipped(double a, double gamma) const;
};

/// Kernel weights K_h(W_i - x0), or (K_h * K_eta)(W_i - x0) when eta is given.
Vec kernel_weights(const RegressionSample& s, const KernelSpec& K, const Bandwidth& h, const double* x0,
                   const std::optional<Bandwidth>& eta = std::nullopt);

/// t -> -(scale/n) sum_i w_i rho'(Y_i - t) for fixed weights, O(log n) per evaluation.
class LocalScore
{
public:
  LocalScore(const RegressionSample& s, const Vec& weights, double gamma, double scale = 1.0);
  double operator()(double t) const;
  double total_weight() const { return total_; }

private:
  Vec ys_;
  Vec cw_;
  Vec cwy_;
  double gamma_;
  double factor_;
  double total_;
};

/// Direct evaluation of the local score at t.
double g_emp_loc(double t, const double* x0, const Bandwidth& h, const RegressionSample& s, const KernelSpec& K,
                 double gamma, const std::optional<Bandwidth>& aux_eta = std::nullopt);

/// Root of the local score on [-B, B] by bisection to 1e-10.
double local_estimate(const double* x0, const Bandwidth& h, const RegressionSample& s, const KernelSpec& K,
                      double gamma, double B);

double majorant_loc(const Bandwidth& h, const Bandwidth& eta, std::size_t n, int l, const KernelSpec& K, double vhat,
                    double C0 = 1.0);

/// Two-branch deviation bound; the global majorant is Gamma(h v eta) + Gamma(eta).
double gamma_lq(const Bandwidth& h, double q, int l, std::size_t n, const KernelSpec& K, double gamma, double Cq = 1.0);

struct RegressionOptions
{
  double C0 = 1.0;
  double Cq = 1.0;
  int l = 1;
  std::size_t t_points = 201;
  /// Multiplies the loss; scores, vhat and the sup of rho' scale with it.
  double loss_scale = 1.0;
  bool positive_part = false;
  gk::Exec exec = gk::Exec::parallel;
};

/// Uniform t-grid on [-B, B].
Vec t_grid(double B, std::size_t points);

/// Local scores at a list of points, tabulated on a t-grid and memoised per bandwidth key.
/// The gradient vector at theta = (t) holds one score per point.
class LocalScoreField : public GradientField
{
public:
  LocalScoreField(RegressionSample s, KernelSpec K, double gamma, Vec points, Vec tgrid, double loss_scale = 1.0,
                  gk::Exec exec = gk::Exec::parallel);

  std::size_t dimension() const override { return points_.size() / s_.d; }
  Vec grad(const Bandwidth& h, const Vec& theta) const override;
  Vec grad_aux(const Bandwidth& h, const Bandwidth& eta, const Vec& theta) const override;

  CandidateSet candidates() const;

private:
  using Key = std::pair<Vec, Vec>;
  std::shared_ptr<const Vec> table(const Key& key) const;
  Vec lookup(const Key& key, double t) const;

  RegressionSample s_;
  KernelSpec K_;
  double gamma_;
  Vec points_;
  Vec tgrid_;
  double scale_;
  gk::Exec exec_;
  mutable std::mutex mutex_;
  mutable std::map<Key, std::shared_ptr<const Vec>> tables_;
};

/// B = ceil(max |Y|), at least 1.
double default_bound(const RegressionSample& s);
/// 1.345 MAD / 0.6745 of residuals from a local median pilot at the net's median bandwidth.
double default_gamma(const RegressionSample& s, const BandwidthNet& net, const KernelSpec& K);
/// Mean of rho'(Y_i - pilot(W_i))^2 over a deterministic subsample of at most 256 points.
double estimate_vhat(const RegressionSample& s, const BandwidthNet& net, const KernelSpec& K, double gamma, double B);

struct LocalFit
{
  Vec x0;
  Bandwidth selected;
  double estimate = 0.0;
  double B = 0.0;
  double gamma = 0.0;
  double vhat = 0.0;
  SelectionReport report;
};

LocalFit select_pointwise(const Vec& x0, const RegressionSample& s, const BandwidthNet& net, const KernelSpec& K,
                          double gamma, double B, const RegressionOptions& opts = {});

/// Interior evaluation points: cell midpoints of [margin, 1 - margin]^d with per_axis cells.
struct XGrid
{
  std::size_t d = 1;
  Vec points;
  double weight = 0.0;

  std::size_t size() const { return points.size() / d; }
};

XGrid interior_grid(std::size_t d, std::size_t per_axis, double margin);

struct GlobalFit
{
  Bandwidth selected;
  XGrid x;
  Vec fitted;
  double q = 2.0;
  double gamma = 0.0;
  double B = 0.0;
  SelectionReport report;

  void write_csv(std::ostream& os) const;
};

GlobalFit select_global(const RegressionSample& s, const BandwidthNet& net, const KernelSpec& K, double gamma, double B,
                        double q, const XGrid& x, const RegressionOptions& opts = {});

struct MarginRow
{
  Bandwidth h;
  double estimate = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct MarginReport
{
  double expected_second = 0.0;
  double sup_error = 0.0;
  bool precondition = false;
  bool inequality = false;
  std::vector<MarginRow> rows;
};

/// Compares |theta_h - f*(x0)| with (2 / E rho'') |G(theta_h) - G(f*(x0))| for every net member,
/// G(t) = -E rho'(xi + f*(x0) - t) by numerical integration.
MarginReport check_local_margin(const Vec& x0, const RegressionSample& s, const BandwidthNet& net, const KernelSpec& K,
                                double gamma, double B, double f_star_x0, const RegressionNoise& noise);

} // namespace gradbw
