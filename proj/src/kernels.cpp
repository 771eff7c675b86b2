#include "gradbw/kernels.hpp"

#include "gradbw/errors.hpp"
#include "gradbw/fft.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace gradbw {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

double sinc1(double x)
{
  x = std::abs(x);
  if (x < 1e-8) {
    return (1.0 - x * x / 6.0) / pi;
  }
  return std::sin(x) / (pi * x);
}

double epan_fourier(double t)
{
  t = std::abs(t);
  if (t < 5e-2) {
    const double t2 = t * t;
    return 1.0 - t2 / 10.0 + t2 * t2 / 280.0 - t2 * t2 * t2 / 15120.0;
  }
  return 3.0 * (std::sin(t) - t * std::cos(t)) / (t * t * t);
}

// integral of f over [0, upper] in chunks of length `chunk`, fixed 20-point Gauss rule per chunk
template <class F>
double chunked(F f, double upper, double chunk)
{
  double acc = 0.0;
  const auto pieces = static_cast<std::size_t>(std::ceil(upper / chunk));
  for (std::size_t i = 0; i < pieces; ++i) {
    const double a = static_cast<double>(i) * chunk;
    const double b = std::min(upper, a + chunk);
    acc += boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
  }
  return acc;
}

std::size_t wrap_index(long i, std::size_t M)
{
  const long m = static_cast<long>(M);
  long r = i % m;
  return static_cast<std::size_t>(r < 0 ? r + m : r);
}

} // namespace

// ---------------------------------------------------------------- Bandwidth

Bandwidth::Bandwidth(Vec h) : h_(std::move(h))
{
  if (h_.empty()) {
    throw InvalidArgument("bandwidth must have at least one component");
  }
  for (double v : h_) {
    if (!(v > 0.0) || v > 1.0) {
      throw InvalidArgument("bandwidth components must lie in (0, 1]");
    }
  }
}

Bandwidth Bandwidth::isotropic(double h, std::size_t d) { return Bandwidth(Vec(d, h)); }

double Bandwidth::volume() const
{
  double p = 1.0;
  for (double v : h_) {
    p *= v;
  }
  return p;
}

bool Bandwidth::is_isotropic() const
{
  return std::all_of(h_.begin(), h_.end(), [&](double v) { return v == h_.front(); });
}

Bandwidth max(const Bandwidth& a, const Bandwidth& b)
{
  if (a.dim() != b.dim()) {
    throw InvalidArgument("bandwidth dimension mismatch");
  }
  Vec out(a.dim());
  for (std::size_t j = 0; j < a.dim(); ++j) {
    out[j] = std::max(a[j], b[j]);
  }
  return Bandwidth(std::move(out));
}

std::string Bandwidth::str() const
{
  std::ostringstream os;
  os.precision(6);
  for (std::size_t j = 0; j < h_.size(); ++j) {
    os << (j ? ";" : "") << h_[j];
  }
  return os.str();
}

// ---------------------------------------------------------------- KernelSpec

KernelId parse_kernel_id(const std::string& name)
{
  if (name == "sinc" || name == "sinc-product") {
    return KernelId::sinc;
  }
  if (name == "epanechnikov" || name == "epanechnikov-product") {
    return KernelId::epanechnikov;
  }
  if (name == "gaussian" || name == "gaussian-product") {
    return KernelId::gaussian;
  }
  throw InvalidArgument("unknown kernel: " + name);
}

std::string to_string(KernelId id)
{
  switch (id) {
  case KernelId::sinc:
    return "sinc-product";
  case KernelId::epanechnikov:
    return "epanechnikov-product";
  case KernelId::gaussian:
    return "gaussian-product";
  }
  return "?";
}

KernelSpec::KernelSpec(KernelId id, std::size_t dim) : id_(id), dim_(dim)
{
  if (dim == 0) {
    throw InvalidArgument("kernel dimension must be positive");
  }
}

int KernelSpec::order() const
{
  return id_ == KernelId::sinc ? std::numeric_limits<int>::max() : 1;
}

std::optional<Vec> KernelSpec::fourier_support() const
{
  if (id_ == KernelId::sinc) {
    return Vec(dim_, 1.0);
  }
  return std::nullopt;
}

double KernelSpec::spatial_support() const { return id_ == KernelId::epanechnikov ? 1.0 : inf; }

double KernelSpec::eval1(double x) const
{
  x = std::abs(x);
  switch (id_) {
  case KernelId::sinc:
    return sinc1(x);
  case KernelId::epanechnikov:
    return x <= 1.0 ? 0.75 * (1.0 - x * x) : 0.0;
  case KernelId::gaussian:
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi);
  }
  return 0.0;
}

double KernelSpec::fourier1(double t) const
{
  t = std::abs(t);
  switch (id_) {
  case KernelId::sinc:
    return t <= 1.0 ? 1.0 : 0.0;
  case KernelId::epanechnikov:
    return epan_fourier(t);
  case KernelId::gaussian:
    return std::exp(-0.5 * t * t);
  }
  return 0.0;
}

double KernelSpec::eval(const double* x) const
{
  double p = 1.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    p *= eval1(x[j]);
  }
  return p;
}

double KernelSpec::fourier(const double* t) const
{
  double p = 1.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    p *= fourier1(t[j]);
  }
  return p;
}

double dilate1(const KernelSpec& K, double h, double x) { return K.eval1(x / h) / h; }

double dilate(const KernelSpec& K, const Bandwidth& h, const double* x)
{
  double p = 1.0;
  for (std::size_t j = 0; j < K.dim(); ++j) {
    p *= K.eval1(x[j] / h[j]);
  }
  return p / h.volume();
}

// ---------------------------------------------------------------- ConvolvedKernel

ConvolvedKernel::ConvolvedKernel(KernelSpec K, Bandwidth h, Bandwidth eta)
  : K_(K), h_(std::move(h)), eta_(std::move(eta))
{
  if (h_.dim() != K_.dim() || eta_.dim() != K_.dim()) {
    throw InvalidArgument("bandwidth dimension does not match kernel");
  }
}

ConvolvedKernel convolved_kernel(const KernelSpec& K, const Bandwidth& h, const Bandwidth& eta)
{
  return ConvolvedKernel(K, h, eta);
}

double ConvolvedKernel::factor(std::size_t j, double x) const
{
  const double lo = std::min(h_[j], eta_[j]);
  const double hi = std::max(h_[j], eta_[j]);
  x = std::abs(x);
  switch (K_.id()) {
  case KernelId::sinc:
    return dilate1(K_, hi, x);
  case KernelId::gaussian: {
    const double s = std::sqrt(lo * lo + hi * hi);
    return dilate1(K_, s, x);
  }
  case KernelId::epanechnikov: {
    // integrand k_hi(x - y) k_lo(y) is a quartic on the overlap, so 3-point Gauss-Legendre is exact
    const double a = std::max(-lo, x - hi);
    const double b = std::min(lo, x + hi);
    if (b <= a) {
      return 0.0;
    }
    static const double node = std::sqrt(0.6);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    auto f = [&](double y) { return dilate1(K_, hi, x - y) * dilate1(K_, lo, y); };
    return half * (5.0 / 9.0 * f(mid - half * node) + 8.0 / 9.0 * f(mid) + 5.0 / 9.0 * f(mid + half * node));
  }
  }
  return 0.0;
}

double ConvolvedKernel::operator()(const double* x) const
{
  double p = 1.0;
  for (std::size_t j = 0; j < K_.dim(); ++j) {
    p *= factor(j, x[j]);
  }
  return p;
}

double ConvolvedKernel::fourier(const double* t) const
{
  double p = 1.0;
  for (std::size_t j = 0; j < K_.dim(); ++j) {
    p *= K_.fourier1(h_[j] * t[j]) * K_.fourier1(eta_[j] * t[j]);
  }
  return p;
}

double ConvolvedKernel::via_fourier(const double* x) const
{
  double p = 1.0;
  for (std::size_t j = 0; j < K_.dim(); ++j) {
    const double a = h_[j];
    const double b = eta_[j];
    auto f = [&](double t) { return std::cos(t * x[j]) * K_.fourier1(a * t) * K_.fourier1(b * t); };
    double upper = 0.0;
    switch (K_.id()) {
    case KernelId::sinc:
      upper = 1.0 / std::max(a, b);
      break;
    case KernelId::gaussian:
      upper = std::sqrt(80.0 / (a * a + b * b));
      break;
    case KernelId::epanechnikov:
      upper = std::cbrt(3e10 / (a * a * b * b));
      break;
    }
    const double chunk = pi / std::max({std::abs(x[j]), a, b});
    p *= chunked(f, upper, chunk) / pi;
  }
  return p;
}

// ---------------------------------------------------------------- NoiseModel

NoiseId parse_noise_id(const std::string& name)
{
  if (name == "none") {
    return NoiseId::none;
  }
  if (name == "laplace" || name == "laplace-product") {
    return NoiseId::laplace;
  }
  if (name == "gaussian" || name == "gaussian-product") {
    return NoiseId::gaussian;
  }
  throw InvalidArgument("unknown noise model: " + name);
}

std::string to_string(NoiseId id)
{
  switch (id) {
  case NoiseId::none:
    return "none";
  case NoiseId::laplace:
    return "laplace-product";
  case NoiseId::gaussian:
    return "gaussian-product";
  }
  return "?";
}

NoiseModel NoiseModel::none(std::size_t d)
{
  NoiseModel g;
  g.id = NoiseId::none;
  g.scale.assign(d, 0.0);
  g.beta.assign(d, 0.0);
  g.rho = 1.0;
  return g;
}

NoiseModel NoiseModel::laplace(Vec sigma)
{
  NoiseModel g;
  g.id = NoiseId::laplace;
  g.beta.assign(sigma.size(), 2.0);
  g.rho = 1.0;
  for (double s : sigma) {
    if (!(s > 0.0)) {
      throw InvalidArgument("noise scale must be positive");
    }
    g.rho *= std::min(1.0, 1.0 / (s * s));
  }
  g.scale = std::move(sigma);
  return g;
}

NoiseModel NoiseModel::gaussian(Vec sigma, Vec effective_beta)
{
  if (sigma.size() != effective_beta.size()) {
    throw InvalidArgument("noise scale and beta dimensions differ");
  }
  for (double s : sigma) {
    if (s < 0.0) {
      throw InvalidArgument("noise scale must be nonnegative");
    }
  }
  NoiseModel g;
  g.id = NoiseId::gaussian;
  g.scale = std::move(sigma);
  g.beta = std::move(effective_beta);
  g.rho = 1.0;
  return g;
}

double NoiseModel::fourier1(std::size_t j, double t) const
{
  switch (id) {
  case NoiseId::none:
    return 1.0;
  case NoiseId::laplace: {
    const double st = scale[j] * t;
    return 1.0 / (1.0 + st * st);
  }
  case NoiseId::gaussian: {
    const double st = scale[j] * t;
    return std::exp(-0.5 * st * st);
  }
  }
  return 1.0;
}

double NoiseModel::fourier(const double* t) const
{
  double p = 1.0;
  for (std::size_t j = 0; j < scale.size(); ++j) {
    p *= fourier1(j, t[j]);
  }
  return p;
}

// ---------------------------------------------------------------- grids

std::size_t GridSpec::size() const
{
  std::size_t s = 1;
  for (std::size_t j = 0; j < dim; ++j) {
    s *= m;
  }
  return s;
}

double GridSpec::cell_volume() const { return std::pow(1.0 / static_cast<double>(m), static_cast<double>(dim)); }

void GridSpec::coords(std::size_t flat, double* out) const
{
  for (std::size_t j = dim; j-- > 0;) {
    out[j] = node(flat % m);
    flat /= m;
  }
}

double GridSpec::frequency(std::size_t k) const
{
  const long M = static_cast<long>(lattice());
  const long kk = static_cast<long>(k) < M / 2 ? static_cast<long>(k) : static_cast<long>(k) - M;
  return 2.0 * pi * static_cast<double>(kk) / period();
}

double GridSpec::nyquist() const { return pi * static_cast<double>(m); }

GridFunction::GridFunction(GridSpec g) : grid(g), values(g.size(), 0.0) {}

GridFunction::GridFunction(GridSpec g, Vec v) : grid(g), values(std::move(v))
{
  if (values.size() != grid.size()) {
    throw InvalidArgument("grid function value count does not match the grid");
  }
}

double GridFunction::riemann_sum() const
{
  double s = 0.0;
  for (double v : values) {
    s += v;
  }
  return s * grid.cell_volume();
}

// ---------------------------------------------------------------- deconvolution kernel

double KernelLattice::at(const std::vector<long>& offset) const
{
  const std::size_t M = lattice();
  std::size_t flat = 0;
  for (long o : offset) {
    flat = flat * M + wrap_index(o, M);
  }
  return values[flat];
}

double KernelLattice::riemann_sum() const
{
  double s = 0.0;
  for (double v : values) {
    s += v;
  }
  return s * grid.cell_volume();
}

std::vector<std::complex<double>> KernelLattice::transform() const
{
  fft::cvec data(values.begin(), values.end());
  fft::transform(data, grid.dim, lattice(), -1);
  const double dv = grid.cell_volume();
  for (auto& z : data) {
    z *= dv;
  }
  return data;
}

void check_nyquist(const KernelSpec& K, const Bandwidth& h, const GridSpec& grid)
{
  const auto S = K.fourier_support();
  if (!S) {
    return;
  }
  for (std::size_t j = 0; j < K.dim(); ++j) {
    if ((*S)[j] / h[j] >= grid.nyquist()) {
      throw GridTooCoarse("grid of " + std::to_string(grid.m) + " nodes per axis cannot resolve bandwidth " + h.str());
    }
  }
}

KernelLattice deconv_kernel_on_grid(const KernelSpec& K, const Bandwidth& h, const NoiseModel& g, const GridSpec& grid)
{
  if (h.dim() != K.dim() || grid.dim != K.dim() || g.dim() != K.dim()) {
    throw InvalidArgument("dimension mismatch between kernel, bandwidth, noise and grid");
  }
  KernelLattice out;
  out.grid = grid;
  const std::size_t M = grid.lattice();
  std::size_t total = 1;
  for (std::size_t j = 0; j < grid.dim; ++j) {
    total *= M;
  }
  std::vector<std::size_t> idx(grid.dim);
  auto unflatten = [&](std::size_t flat) {
    for (std::size_t j = grid.dim; j-- > 0;) {
      idx[j] = flat % M;
      flat /= M;
    }
  };

  if (!K.band_limited()) {
    if (g.id != NoiseId::none) {
      throw NonBandLimited(to_string(K.id()) + " has unbounded Fourier support and cannot be deconvolved");
    }
    out.values.resize(total);
    Vec x(grid.dim);
    for (std::size_t f = 0; f < total; ++f) {
      unflatten(f);
      for (std::size_t j = 0; j < grid.dim; ++j) {
        const long kk = static_cast<long>(idx[j]) < static_cast<long>(M / 2) ? static_cast<long>(idx[j])
                                                                             : static_cast<long>(idx[j]) - static_cast<long>(M);
        x[j] = static_cast<double>(kk) / static_cast<double>(grid.m);
      }
      out.values[f] = dilate(K, h, x);
    }
    return out;
  }

  check_nyquist(K, h, grid);
  // separable spectrum, one factor per axis
  std::vector<Vec> axis(grid.dim, Vec(M));
  for (std::size_t j = 0; j < grid.dim; ++j) {
    for (std::size_t k = 0; k < M; ++k) {
      const double t = grid.frequency(k);
      const double fk = K.fourier1(h[j] * t);
      axis[j][k] = fk == 0.0 ? 0.0 : fk / g.fourier1(j, t);
    }
  }
  out.spectrum.resize(total);
  for (std::size_t f = 0; f < total; ++f) {
    unflatten(f);
    double p = 1.0;
    for (std::size_t j = 0; j < grid.dim; ++j) {
      p *= axis[j][idx[j]];
    }
    out.spectrum[f] = p;
  }
  fft::cvec data = out.spectrum;
  fft::transform(data, grid.dim, M, +1);
  const double scale = std::pow(grid.period(), -static_cast<double>(grid.dim));
  out.values.resize(total);
  for (std::size_t f = 0; f < total; ++f) {
    out.values[f] = data[f].real() * scale;
  }
  out.spectral = true;
  return out;
}

double deconv_kernel_at(const KernelSpec& K, const Bandwidth& h, const NoiseModel& g, const Vec& x)
{
  if (!K.band_limited()) {
    if (g.id != NoiseId::none) {
      throw NonBandLimited(to_string(K.id()) + " has unbounded Fourier support and cannot be deconvolved");
    }
    return dilate(K, h, x);
  }
  const Vec S = *K.fourier_support();
  double p = 1.0;
  for (std::size_t j = 0; j < K.dim(); ++j) {
    auto f = [&](double t) { return std::cos(t * x[j]) * K.fourier1(h[j] * t) / g.fourier1(j, t); };
    const double upper = S[j] / h[j];
    // the sinc transform is an indicator; stop just inside the band edge
    const double b = K.id() == KernelId::sinc ? upper * (1.0 - 1e-15) : upper;
    p *= boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, b, 15, 1e-14) / pi;
  }
  return p;
}

// ---------------------------------------------------------------- norms

double kernel_norm(const KernelSpec& K, double q)
{
  if (!(q >= 1.0)) {
    throw InvalidArgument("norm exponent must be at least 1");
  }
  double one = 0.0;
  const bool infinite = std::isinf(q);
  switch (K.id()) {
  case KernelId::epanechnikov:
    if (infinite) {
      one = 0.75;
    } else {
      const double integral = std::sqrt(pi) * boost::math::tgamma(q + 1.0) / boost::math::tgamma(q + 1.5);
      one = 0.75 * std::pow(integral, 1.0 / q);
    }
    break;
  case KernelId::gaussian:
    if (infinite) {
      one = 1.0 / std::sqrt(2.0 * pi);
    } else {
      one = std::pow(2.0 * pi, (1.0 - q) / (2.0 * q)) * std::pow(q, -1.0 / (2.0 * q));
    }
    break;
  case KernelId::sinc:
    if (infinite) {
      one = 1.0 / pi;
    } else if (q == 1.0) {
      throw DivergentNorm("the sinc kernel is not integrable");
    } else if (q == 2.0) {
      one = 1.0 / std::sqrt(pi);
    } else {
      const double periods = 4000.0;
      auto f = [&](double x) { return std::pow(std::abs(sinc1(x)), q); };
      double body = chunked(f, periods * pi, pi);
      // tail: |sin|^q averages to its period mean, x^-q integrates in closed form
      const double mean = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                            [&](double x) { return std::pow(std::sin(x), q); }, 0.0, pi, 15, 1e-14) /
                          pi;
      const double tail = mean * std::pow(pi, -q) * std::pow(periods * pi, 1.0 - q) / (q - 1.0);
      one = std::pow(2.0 * (body + tail), 1.0 / q);
    }
    break;
  }
  return std::pow(one, static_cast<double>(K.dim()));
}

} // namespace gradbw
