#include "gradbw/robust_regression.hpp"

#include "gradbw/errors.hpp"

#include <boost/math/distributions/cauchy.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace gradbw {

double huber(double z, double gamma)
{
  const double a = std::abs(z);
  return a <= gamma ? 0.5 * z * z : gamma * (a - 0.5 * gamma);
}

double huber_prime(double z, double gamma) { return std::clamp(z, -gamma, gamma); }

int huber_second(double z, double gamma) { return std::abs(z) <= gamma ? 1 : 0; }

// ---------------------------------------------------------------- noise

RegressionNoise RegressionNoise::parse(const std::string& name, double scale)
{
  RegressionNoise n;
  n.scale = scale;
  if (name == "none") {
    n.kind = Kind::none;
  } else if (name == "gaussian") {
    n.kind = Kind::gaussian;
  } else if (name == "student-t3" || name == "t3") {
    n.kind = Kind::student_t3;
  } else if (name == "cauchy") {
    n.kind = Kind::cauchy;
  } else {
    throw InvalidArgument("unknown regression noise: " + name);
  }
  if (n.kind != Kind::none && !(scale > 0.0)) {
    throw InvalidArgument("noise scale must be positive");
  }
  return n;
}

std::string RegressionNoise::name() const
{
  switch (kind) {
  case Kind::none:
    return "none";
  case Kind::gaussian:
    return "gaussian";
  case Kind::student_t3:
    return "student-t3";
  case Kind::cauchy:
    return "cauchy";
  }
  return "?";
}

namespace {

template <class F>
auto with_distribution(const RegressionNoise& n, F&& f)
{
  switch (n.kind) {
  case RegressionNoise::Kind::student_t3:
    return f(boost::math::students_t_distribution<double>(3.0));
  case RegressionNoise::Kind::cauchy:
    return f(boost::math::cauchy_distribution<double>(0.0, 1.0));
  default:
    return f(boost::math::normal_distribution<double>(0.0, 1.0));
  }
}

} // namespace

double RegressionNoise::prob_within(double gamma) const
{
  if (kind == Kind::none) {
    return gamma >= 0.0 ? 1.0 : 0.0;
  }
  return with_distribution(*this, [&](const auto& dist) { return 2.0 * boost::math::cdf(dist, gamma / scale) - 1.0; });
}

double RegressionNoise::mean_clipped(double a, double gamma) const
{
  if (kind == Kind::none) {
    return std::clamp(a, -gamma, gamma);
  }
  return with_distribution(*this, [&](const auto& dist) {
    const double lo = (-gamma - a) / scale;
    const double hi = (gamma - a) / scale;
    const double upper = gamma * boost::math::cdf(boost::math::complement(dist, hi));
    const double lower = gamma * boost::math::cdf(dist, lo);
    auto integrand = [&](double u) { return (scale * u + a) * boost::math::pdf(dist, u); };
    const double mid = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 15, 1e-13);
    return upper - lower + mid;
  });
}

// ---------------------------------------------------------------- scores

Vec kernel_weights(const RegressionSample& s, const KernelSpec& K, const Bandwidth& h, const double* x0,
                   const std::optional<Bandwidth>& eta)
{
  const std::size_t d = s.d;
  Vec w(s.size());
  double diff[8];
  if (eta) {
    const ConvolvedKernel conv(K, h, *eta);
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        diff[j] = s.w[i * d + j] - x0[j];
      }
      w[i] = conv(diff);
    }
  } else {
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        diff[j] = s.w[i * d + j] - x0[j];
      }
      w[i] = dilate(K, h, diff);
    }
  }
  return w;
}

LocalScore::LocalScore(const RegressionSample& s, const Vec& weights, double gamma, double scale)
  : gamma_(gamma), factor_(-scale / static_cast<double>(s.size())), total_(0.0)
{
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.y[a] < s.y[b]; });
  ys_.resize(order.size());
  cw_.assign(order.size() + 1, 0.0);
  cwy_.assign(order.size() + 1, 0.0);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t i = order[r];
    ys_[r] = s.y[i];
    cw_[r + 1] = cw_[r] + weights[i];
    cwy_[r + 1] = cwy_[r] + weights[i] * s.y[i];
  }
  total_ = cw_.back();
}

double LocalScore::operator()(double t) const
{
  const auto lo = static_cast<std::size_t>(std::lower_bound(ys_.begin(), ys_.end(), t - gamma_) - ys_.begin());
  const auto hi = static_cast<std::size_t>(std::upper_bound(ys_.begin(), ys_.end(), t + gamma_) - ys_.begin());
  const double below = cw_[lo];
  const double above = cw_.back() - cw_[hi];
  const double mid = (cwy_[hi] - cwy_[lo]) - t * (cw_[hi] - cw_[lo]);
  return factor_ * (gamma_ * (above - below) + mid);
}

double g_emp_loc(double t, const double* x0, const Bandwidth& h, const RegressionSample& s, const KernelSpec& K,
                 double gamma, const std::optional<Bandwidth>& aux_eta)
{
  const Vec w = kernel_weights(s, K, h, x0, aux_eta);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    acc += huber_prime(s.y[i] - t, gamma) * w[i];
  }
  return -acc / static_cast<double>(s.size());
}

namespace {

double bisect(const LocalScore& G, double B)
{
  if (G(-B) >= 0.0) {
    return -B;
  }
  if (G(B) <= 0.0) {
    return B;
  }
  double lo = -B;
  double hi = B;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (G(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace

double local_estimate(const double* x0, const Bandwidth& h, const RegressionSample& s, const KernelSpec& K,
                      double gamma, double B)
{
  if (!K.nonnegative()) {
    throw InvalidArgument("local estimation needs a nonnegative kernel");
  }
  if (!(gamma > 0.0) || !(B > 0.0)) {
    throw InvalidArgument("gamma and B must be positive");
  }
  const LocalScore G(s, kernel_weights(s, K, h, x0), gamma);
  if (!(G.total_weight() > 0.0)) {
    throw EmptyWindow("no observation inside the kernel window");
  }
  return bisect(G, B);
}

double majorant_loc(const Bandwidth& h, const Bandwidth& eta, std::size_t n, int l, const KernelSpec& K, double vhat,
                    double C0)
{
  const double nn = static_cast<double>(n);
  const double ll = static_cast<double>(l) * std::log(nn);
  const double a = std::sqrt(ll / (nn * max(h, eta).volume()));
  const double b = std::sqrt(ll / (nn * eta.volume()));
  return C0 * kernel_norm(K, 2.0) * std::sqrt(vhat) * (a + b);
}

double gamma_lq(const Bandwidth& h, double q, int l, std::size_t n, const KernelSpec& K, double gamma, double Cq)
{
  if (!(q >= 1.0) || std::isinf(q)) {
    throw InvalidQ("q must be a finite number >= 1");
  }
  const double nh = static_cast<double>(n) * h.volume();
  const double lead = Cq * gamma * std::sqrt(1.0 + static_cast<double>(l));
  if (q < 2.0) {
    return lead * 4.0 * kernel_norm(K, q) * std::pow(nh, -(q - 1.0) / q);
  }
  return lead * (30.0 * q / std::log(q)) * std::max(kernel_norm(K, 2.0), kernel_norm(K, q)) / std::sqrt(nh);
}

Vec t_grid(double B, std::size_t points)
{
  if (points < 2) {
    throw InvalidArgument("t-grid needs at least two points");
  }
  Vec t(points);
  for (std::size_t i = 0; i < points; ++i) {
    t[i] = -B + 2.0 * B * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return t;
}

// ---------------------------------------------------------------- field

LocalScoreField::LocalScoreField(RegressionSample s, KernelSpec K, double gamma, Vec points, Vec tgrid,
                                 double loss_scale, gk::Exec exec)
  : s_(std::move(s)), K_(K), gamma_(gamma), points_(std::move(points)), tgrid_(std::move(tgrid)), scale_(loss_scale),
    exec_(exec)
{
  if (points_.empty() || points_.size() % s_.d != 0) {
    throw InvalidArgument("evaluation points do not match the sample dimension");
  }
}

CandidateSet LocalScoreField::candidates() const
{
  CandidateSet C;
  for (double t : tgrid_) {
    C.points.push_back({t});
  }
  return C;
}

std::shared_ptr<const Vec> LocalScoreField::table(const Key& key) const
{
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = tables_.find(key);
    if (it != tables_.end()) {
      return it->second;
    }
  }
  const Bandwidth h(key.first);
  std::optional<Bandwidth> eta;
  if (!key.second.empty()) {
    eta = Bandwidth(key.second);
  }
  const std::size_t P = dimension();
  const std::size_t T = tgrid_.size();
  auto out = std::make_shared<Vec>(P * T);
  auto fill = [&](std::size_t p) {
    const LocalScore G(s_, kernel_weights(s_, K_, h, points_.data() + p * s_.d, eta), gamma_, scale_);
    for (std::size_t t = 0; t < T; ++t) {
      (*out)[p * T + t] = G(tgrid_[t]);
    }
  };
  if (exec_ == gk::Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long p = 0; p < static_cast<long>(P); ++p) {
      fill(static_cast<std::size_t>(p));
    }
  } else {
    for (std::size_t p = 0; p < P; ++p) {
      fill(p);
    }
  }
  std::lock_guard<std::mutex> lock(mutex_);
  return tables_.emplace(key, std::move(out)).first->second;
}

Vec LocalScoreField::lookup(const Key& key, double t) const
{
  const std::size_t P = dimension();
  Vec g(P);
  auto it = std::lower_bound(tgrid_.begin(), tgrid_.end(), t);
  if (it != tgrid_.end() && *it == t) {
    const auto ti = static_cast<std::size_t>(it - tgrid_.begin());
    const auto tab = table(key);
    for (std::size_t p = 0; p < P; ++p) {
      g[p] = (*tab)[p * tgrid_.size() + ti];
    }
    return g;
  }
  const Bandwidth h(key.first);
  std::optional<Bandwidth> eta;
  if (!key.second.empty()) {
    eta = Bandwidth(key.second);
  }
  for (std::size_t p = 0; p < P; ++p) {
    const LocalScore G(s_, kernel_weights(s_, K_, h, points_.data() + p * s_.d, eta), gamma_, scale_);
    g[p] = G(t);
  }
  return g;
}

Vec LocalScoreField::grad(const Bandwidth& h, const Vec& theta) const { return lookup({h.values(), {}}, theta.at(0)); }

Vec LocalScoreField::grad_aux(const Bandwidth& h, const Bandwidth& eta, const Vec& theta) const
{
  const Vec& a = h.values();
  const Vec& b = eta.values();
  return lookup(a < b ? Key{a, b} : Key{b, a}, theta.at(0));
}

// ---------------------------------------------------------------- defaults

double default_bound(const RegressionSample& s)
{
  double m = 0.0;
  for (double v : s.y) {
    m = std::max(m, std::abs(v));
  }
  return std::max(1.0, std::ceil(m));
}

namespace {

const Bandwidth& median_member(const BandwidthNet& net)
{
  if (net.members.empty()) {
    throw EmptyNet("bandwidth net is empty");
  }
  return net.members[net.size() / 2];
}

std::vector<std::size_t> subsample(std::size_t n)
{
  const std::size_t step = std::max<std::size_t>(1, (n + 255) / 256);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; i += step) {
    idx.push_back(i);
  }
  return idx;
}

double median(Vec v)
{
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(h), v.end());
  const double upper = v[h];
  if (v.size() % 2 == 1) {
    return upper;
  }
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<long>(h)));
}

} // namespace

double default_gamma(const RegressionSample& s, const BandwidthNet& net, const KernelSpec& K)
{
  const Bandwidth& pilot = median_member(net);
  const double B = default_bound(s);
  const double tiny = 1e-8 * B;
  Vec residuals;
  for (std::size_t i : subsample(s.size())) {
    try {
      residuals.push_back(s.y[i] - local_estimate(s.point(i), pilot, s, K, tiny, B));
    } catch (const EmptyWindow&) {
    }
  }
  if (residuals.empty()) {
    throw EmptyWindow("pilot fit found no observation inside any window");
  }
  const double med = median(residuals);
  for (double& r : residuals) {
    r = std::abs(r - med);
  }
  const double gamma = 1.345 * median(residuals) / 0.6745;
  return std::max(gamma, 1e-6 * B);
}

double estimate_vhat(const RegressionSample& s, const BandwidthNet& net, const KernelSpec& K, double gamma, double B)
{
  const Bandwidth& pilot = median_member(net);
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i : subsample(s.size())) {
    try {
      const double r = huber_prime(s.y[i] - local_estimate(s.point(i), pilot, s, K, gamma, B), gamma);
      acc += r * r;
      ++count;
    } catch (const EmptyWindow&) {
    }
  }
  if (count == 0) {
    throw EmptyWindow("pilot fit found no observation inside any window");
  }
  return acc / static_cast<double>(count);
}

// ---------------------------------------------------------------- rules

LocalFit select_pointwise(const Vec& x0, const RegressionSample& s, const BandwidthNet& net, const KernelSpec& K,
                          double gamma, double B, const RegressionOptions& opts)
{
  if (net.members.empty()) {
    throw EmptyNet("bandwidth net is empty");
  }
  if (x0.size() != s.d) {
    throw InvalidArgument("x0 dimension does not match the sample");
  }
  LocalFit fit;
  fit.x0 = x0;
  fit.B = B;
  fit.gamma = gamma;
  fit.vhat = opts.loss_scale * opts.loss_scale * estimate_vhat(s, net, K, gamma, B);
  const LocalScoreField field(s, K, gamma, x0, t_grid(B, opts.t_points), opts.loss_scale, opts.exec);
  MajorantFn M;
  M.level = opts.l;
  M.fn = [&, n = s.size(), vhat = fit.vhat](const Bandwidth& h, const Bandwidth& eta) {
    return majorant_loc(h, eta, n, opts.l, K, vhat, opts.C0);
  };
  SelectionOptions so;
  so.positive_part = opts.positive_part;
  fit.report = select(field, M, net, field.candidates(), so);
  fit.selected = fit.report.selected;
  fit.estimate = local_estimate(x0.data(), fit.selected, s, K, gamma, B);
  return fit;
}

XGrid interior_grid(std::size_t d, std::size_t per_axis, double margin)
{
  if (per_axis == 0 || !(margin >= 0.0) || !(margin < 0.5)) {
    throw InvalidArgument("interior grid needs per_axis >= 1 and margin in [0, 0.5)");
  }
  XGrid x;
  x.d = d;
  const double width = (1.0 - 2.0 * margin) / static_cast<double>(per_axis);
  x.weight = std::pow(width, static_cast<double>(d));
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) {
    total *= per_axis;
  }
  x.points.resize(total * d);
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t rest = f;
    for (std::size_t j = d; j-- > 0;) {
      x.points[f * d + j] = margin + (static_cast<double>(rest % per_axis) + 0.5) * width;
      rest /= per_axis;
    }
  }
  return x;
}

GlobalFit select_global(const RegressionSample& s, const BandwidthNet& net, const KernelSpec& K, double gamma, double B,
                        double q, const XGrid& x, const RegressionOptions& opts)
{
  if (net.members.empty()) {
    throw EmptyNet("bandwidth net is empty");
  }
  if (!(q >= 1.0) || std::isinf(q)) {
    throw InvalidQ("q must be a finite number >= 1");
  }
  if (x.d != s.d || x.size() == 0) {
    throw InvalidArgument("evaluation grid does not match the sample");
  }
  double margin = 0.0;
  for (const Bandwidth& h : net.members) {
    margin = std::max(margin, *std::max_element(h.values().begin(), h.values().end()));
  }
  for (double v : x.points) {
    if (v < margin - 1e-12 || v > 1.0 - margin + 1e-12) {
      throw InvalidArgument("evaluation points must keep a margin of the largest bandwidth from the boundary");
    }
  }
  GlobalFit fit;
  fit.x = x;
  fit.q = q;
  fit.gamma = gamma;
  fit.B = B;
  const LocalScoreField field(s, K, gamma, x.points, t_grid(B, opts.t_points), opts.loss_scale, opts.exec);
  const double rho_sup = gamma * opts.loss_scale;
  const std::size_t n = s.size();
  auto Gam = [&](const Bandwidth& h) { return gamma_lq(h, q, opts.l, n, K, rho_sup, opts.Cq); };
  MajorantFn M;
  M.level = opts.l;
  M.fn = [&](const Bandwidth& h, const Bandwidth& eta) { return Gam(max(h, eta)) + Gam(eta); };
  SelectionOptions so;
  so.positive_part = opts.positive_part;
  so.sup_term = [&](const Bandwidth& h) { return 2.0 * Gam(h); };
  fit.report = select(field, M, net, field.candidates(), so, ComparisonNorm::lq(q, x.weight));
  fit.selected = fit.report.selected;
  fit.fitted.resize(x.size());
  for (std::size_t p = 0; p < x.size(); ++p) {
    fit.fitted[p] = local_estimate(x.points.data() + p * x.d, fit.selected, s, K, gamma, B);
  }
  return fit;
}

void GlobalFit::write_csv(std::ostream& os) const
{
  for (std::size_t j = 0; j < x.d; ++j) {
    os << 'x' << j + 1 << ',';
  }
  os << "fitted\n" << std::setprecision(17);
  for (std::size_t p = 0; p < x.size(); ++p) {
    for (std::size_t j = 0; j < x.d; ++j) {
      os << x.points[p * x.d + j] << ',';
    }
    os << fitted[p] << '\n';
  }
}

MarginReport check_local_margin(const Vec& x0, const RegressionSample& s, const BandwidthNet& net, const KernelSpec& K,
                                double gamma, double B, double f_star_x0, const RegressionNoise& noise)
{
  MarginReport rep;
  rep.expected_second = noise.prob_within(gamma);
  auto G = [&](double t) { return -noise.mean_clipped(f_star_x0 - t, gamma); };
  const double g_star = G(f_star_x0);
  rep.inequality = true;
  for (const Bandwidth& h : net.members) {
    MarginRow row;
    row.h = h;
    try {
      row.estimate = local_estimate(x0.data(), h, s, K, gamma, B);
    } catch (const EmptyWindow&) {
      continue;
    }
    row.lhs = std::abs(row.estimate - f_star_x0);
    row.rhs = 2.0 / rep.expected_second * std::abs(G(row.estimate) - g_star);
    row.holds = row.lhs <= row.rhs + 1e-12;
    rep.inequality = rep.inequality && row.holds;
    rep.sup_error = std::max(rep.sup_error, row.lhs);
    rep.rows.push_back(row);
  }
  rep.precondition = rep.sup_error <= rep.expected_second / 4.0;
  return rep;
}

} // namespace gradbw
