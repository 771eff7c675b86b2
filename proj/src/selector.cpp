#include "gradbw/selector.hpp"

#include "gradbw/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

namespace gradbw {

double ComparisonNorm::operator()(const Vec& v) const
{
  if (kind == Kind::euclidean) {
    double s = 0.0;
    for (double x : v) {
      s += x * x;
    }
    return std::sqrt(s);
  }
  if (std::isinf(q)) {
    double m = 0.0;
    for (double x : v) {
      m = std::max(m, std::abs(x));
    }
    return m;
  }
  double s = 0.0;
  for (double x : v) {
    s += std::pow(std::abs(x), q);
  }
  return std::pow(s * weight, 1.0 / q);
}

CandidateSet random_candidates(const Vec& lower, const Vec& upper, std::size_t count, std::uint64_t seed)
{
  if (lower.size() != upper.size()) {
    throw InvalidArgument("candidate box bounds differ in dimension");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  CandidateSet C;
  C.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec p(lower.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
      p[j] = lower[j] + (upper[j] - lower[j]) * unif(rng);
    }
    C.points.push_back(std::move(p));
  }
  return C;
}

double sup_diff(const GradientField& field, const Bandwidth& h, const Bandwidth& eta, const CandidateSet& C,
                const ComparisonNorm& norm)
{
  if (C.points.empty()) {
    throw InvalidArgument("candidate set is empty");
  }
  double best = 0.0;
  for (const Vec& theta : C.points) {
    Vec a = field.grad_aux(h, eta, theta);
    const Vec b = field.grad(eta, theta);
    for (std::size_t u = 0; u < a.size(); ++u) {
      a[u] -= b[u];
    }
    best = std::max(best, norm(a));
  }
  return best;
}

ComparisonTable comparison_table(const GradientField& field, const BandwidthNet& net, const CandidateSet& C,
                                 const ComparisonNorm& norm)
{
  if (net.members.empty()) {
    throw EmptyNet("cannot compare over an empty net");
  }
  ComparisonTable t;
  t.net = net.members;
  t.candidates = C.size();
  const std::size_t N = net.size();
  t.D.assign(N, Vec(N, 0.0));
  const long pairs = static_cast<long>(N * N);
#pragma omp parallel for schedule(dynamic)
  for (long p = 0; p < pairs; ++p) {
    const auto i = static_cast<std::size_t>(p) / N;
    const auto j = static_cast<std::size_t>(p) % N;
    t.D[i][j] = sup_diff(field, net.members[i], net.members[j], C, norm);
  }
  return t;
}

namespace {

double sup_majorant(std::size_t i, const ComparisonTable& table, const MajorantFn& M, const SelectionOptions& opts)
{
  if (opts.sup_term) {
    return opts.sup_term(table.net[i]);
  }
  double s = -std::numeric_limits<double>::infinity();
  for (const Bandwidth& lambda : table.net) {
    s = std::max(s, M(lambda, table.net[i]));
  }
  return s;
}

} // namespace

double bv_hat(std::size_t i, const ComparisonTable& table, const MajorantFn& M, const SelectionOptions& opts)
{
  double inner = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < table.net.size(); ++j) {
    inner = std::max(inner, table.D[i][j] - M(table.net[i], table.net[j]));
  }
  if (opts.positive_part) {
    inner = std::max(inner, 0.0);
  }
  return inner + sup_majorant(i, table, M, opts);
}

double bv_hat(const Bandwidth& h, const GradientField& field, const MajorantFn& M, const BandwidthNet& net,
              const CandidateSet& C, const SelectionOptions& opts)
{
  const std::size_t i = net.find(h);
  if (i == net.size()) {
    throw InvalidArgument("bandwidth " + h.str() + " is not a net member");
  }
  ComparisonTable t;
  t.net = net.members;
  t.candidates = C.size();
  t.D.assign(net.size(), Vec(net.size(), 0.0));
  for (std::size_t j = 0; j < net.size(); ++j) {
    t.D[i][j] = sup_diff(field, h, net.members[j], C);
  }
  return bv_hat(i, t, M, opts);
}

std::size_t argmin_with_tiebreak(const Vec& values, const std::vector<Bandwidth>& members)
{
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) {
      best = i;
    } else if (values[i] == values[best]) {
      const double vi = members[i].volume();
      const double vb = members[best].volume();
      if (vi > vb || (vi == vb && members[best] < members[i])) {
        best = i;
      }
    }
  }
  return best;
}

SelectionReport select_from_table(const ComparisonTable& table, const MajorantFn& M, const SelectionOptions& opts)
{
  if (table.net.empty()) {
    throw EmptyNet("cannot select from an empty net");
  }
  SelectionReport r;
  r.net = table.net;
  r.raw = table.D;
  r.candidate_count = table.candidates;
  const std::size_t N = table.net.size();
  r.bv.resize(N);
  r.majorant_sup.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    r.bv[i] = bv_hat(i, table, M, opts);
    r.majorant_sup[i] = sup_majorant(i, table, M, opts);
  }
  r.selected_index = argmin_with_tiebreak(r.bv, r.net);
  r.selected = r.net[r.selected_index];
  const std::size_t ties = static_cast<std::size_t>(std::count(r.bv.begin(), r.bv.end(), r.bv[r.selected_index]));
  r.tie_break = ties > 1 ? "tie among " + std::to_string(ties) + " members; kept the coarsest" : "unique minimum";
  return r;
}

SelectionReport select(const GradientField& field, const MajorantFn& M, const BandwidthNet& net, const CandidateSet& C,
                       const SelectionOptions& opts, const ComparisonNorm& norm)
{
  return select_from_table(comparison_table(field, net, C, norm), M, opts);
}

void SelectionReport::write_csv(std::ostream& os) const
{
  os << "kind,h,eta,value\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < net.size(); ++i) {
    for (std::size_t j = 0; j < net.size(); ++j) {
      os << "pair," << net[i].str() << ',' << net[j].str() << ',' << raw[i][j] << '\n';
    }
  }
  for (std::size_t i = 0; i < net.size(); ++i) {
    os << "bvhat," << net[i].str() << ",," << bv[i] << '\n';
  }
  os << "selected," << selected.str() << ",," << bv[selected_index] << '\n';
}

double g_excess(const GradientFn& G, const Vec& theta, const Vec& theta_star)
{
  const Vec a = G(theta);
  const Vec b = G(theta_star);
  double s = 0.0;
  for (std::size_t u = 0; u < a.size(); ++u) {
    s += (a[u] - b[u]) * (a[u] - b[u]);
  }
  return std::sqrt(s);
}

namespace {

Eigen::MatrixXd fd_hessian(const GradientFn& G, const Vec& at, double step)
{
  const auto m = static_cast<Eigen::Index>(at.size());
  Eigen::MatrixXd H(m, m);
  for (Eigen::Index b = 0; b < m; ++b) {
    Vec p = at;
    Vec q = at;
    p[static_cast<std::size_t>(b)] += step;
    q[static_cast<std::size_t>(b)] -= step;
    const Vec gp = G(p);
    const Vec gq = G(q);
    for (Eigen::Index a = 0; a < m; ++a) {
      H(a, b) = (gp[static_cast<std::size_t>(a)] - gq[static_cast<std::size_t>(a)]) / (2.0 * step);
    }
  }
  return 0.5 * (H + H.transpose());
}

} // namespace

GradientLinkReport check_gradient_link(const RiskFn& R, const GradientFn& G, const Vec& theta_star, double radius,
                                       std::size_t n_samples, std::uint64_t seed)
{
  if (!(radius > 0.0) || theta_star.empty()) {
    throw InvalidArgument("gradient link check needs a positive radius and a nonempty parameter");
  }
  const std::size_t m = theta_star.size();
  const double step = 0.1 * radius;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  GradientLinkReport rep;
  const Eigen::MatrixXd H0 = fd_hessian(G, theta_star, step);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H0);
  rep.lambda_min = eig.eigenvalues().minCoeff();
  if (rep.lambda_min <= 1e-10) {
    throw SingularHessian("Hessian at the minimiser is not positive definite");
  }
  rep.kappa1 = H0.cwiseAbs().maxCoeff();

  const double r_star = R(theta_star);
  for (std::size_t s = 0; s < n_samples; ++s) {
    Vec dir(m);
    double norm = 0.0;
    for (double& v : dir) {
      v = normal(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    const double rad = radius * std::pow(unif(rng), 1.0 / static_cast<double>(m));
    Vec theta(m);
    for (std::size_t u = 0; u < m; ++u) {
      theta[u] = theta_star[u] + rad * dir[u] / norm;
    }
    const double ge = g_excess(G, theta, theta_star);
    rep.kappa1 = std::max(rep.kappa1, fd_hessian(G, theta, step).cwiseAbs().maxCoeff());
    if (ge < 1e-12) {
      continue;
    }
    const double ratio = std::sqrt(std::max(R(theta) - r_star, 0.0)) / ge;
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    ++rep.evaluated;
  }
  rep.bound = 2.0 * std::sqrt(static_cast<double>(m) * rep.kappa1) / rep.lambda_min;
  rep.passed = rep.max_ratio <= rep.bound;
  return rep;
}

} // namespace gradbw
