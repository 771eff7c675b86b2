#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gradbw {

using Vec = std::vector<double>;

/// Anisotropic bandwidth: one strictly positive scale per coordinate, each <= 1.
class Bandwidth
{
public:
  Bandwidth() = default;
  explicit Bandwidth(Vec h);
  static Bandwidth isotropic(double h, std::size_t d);

  std::size_t dim() const { return h_.size(); }
  double operator[](std::size_t j) const { return h_[j]; }
  const Vec& values() const { return h_; }
  /// Product of the components.
  double volume() const;
  bool is_isotropic() const;

  /// Componentwise maximum.
  friend Bandwidth max(const Bandwidth& a, const Bandwidth& b);
  friend bool operator==(const Bandwidth& a, const Bandwidth& b) { return a.h_ == b.h_; }
  friend bool operator<(const Bandwidth& a, const Bandwidth& b) { return a.h_ < b.h_; }

  std::string str() const;

private:
  Vec h_;
};

enum class KernelId
{
  sinc,
  epanechnikov,
  gaussian
};

KernelId parse_kernel_id(const std::string& name);
std::string to_string(KernelId id);

/// Product kernel K(x) = prod_j k(x_j) with a closed-form one-dimensional factor.
class KernelSpec
{
public:
  KernelSpec(KernelId id, std::size_t dim);

  KernelId id() const { return id_; }
  std::size_t dim() const { return dim_; }
  /// Order r. The sinc kernel has every order; it reports a large sentinel.
  int order() const;
  bool band_limited() const { return id_ == KernelId::sinc; }
  /// Per-axis Fourier support S when band-limited.
  std::optional<Vec> fourier_support() const;
  bool nonnegative() const { return id_ != KernelId::sinc; }
  /// Half-width of the spatial support of the 1-d factor (infinite when unbounded).
  double spatial_support() const;

  double eval1(double x) const;
  double fourier1(double t) const;
  double eval(const double* x) const;
  double eval(const Vec& x) const { return eval(x.data()); }
  double fourier(const double* t) const;
  double fourier(const Vec& t) const { return fourier(t.data()); }

private:
  KernelId id_;
  std::size_t dim_;
};

/// K_h(x) = K(x/h) / prod(h).
double dilate(const KernelSpec& K, const Bandwidth& h, const double* x);
inline double dilate(const KernelSpec& K, const Bandwidth& h, const Vec& x) { return dilate(K, h, x.data()); }

/// One-dimensional factor of the dilated kernel.
double dilate1(const KernelSpec& K, double h, double x);

/// Evaluator for K_h * K_eta. Spatial values use closed forms; the Fourier side is
/// the product of the dilated transforms.
class ConvolvedKernel
{
public:
  ConvolvedKernel(KernelSpec K, Bandwidth h, Bandwidth eta);

  double operator()(const double* x) const;
  double operator()(const Vec& x) const { return (*this)(x.data()); }
  double fourier(const double* t) const;
  double fourier(const Vec& t) const { return fourier(t.data()); }
  /// One-dimensional factor on axis j.
  double factor(std::size_t j, double x) const;
  /// Same value through numerical inversion of the Fourier transform (test oracle route).
  double via_fourier(const double* x) const;

  const KernelSpec& kernel() const { return K_; }
  const Bandwidth& h() const { return h_; }
  const Bandwidth& eta() const { return eta_; }

private:
  KernelSpec K_;
  Bandwidth h_;
  Bandwidth eta_;
};

ConvolvedKernel convolved_kernel(const KernelSpec& K, const Bandwidth& h, const Bandwidth& eta);

enum class NoiseId
{
  none,
  laplace,
  gaussian
};

NoiseId parse_noise_id(const std::string& name);
std::string to_string(NoiseId id);

/// Product noise density described by its Fourier transform.
struct NoiseModel
{
  NoiseId id = NoiseId::none;
  Vec scale;
  Vec beta;
  double rho = 1.0;

  static NoiseModel none(std::size_t d);
  static NoiseModel laplace(Vec sigma);
  /// Gaussian noise violates polynomial decay; beta is an effective exponent for majorants.
  static NoiseModel gaussian(Vec sigma, Vec effective_beta);

  std::size_t dim() const { return scale.size(); }
  double fourier1(std::size_t j, double t) const;
  double fourier(const double* t) const;
  double fourier(const Vec& t) const { return fourier(t.data()); }
};

/// Uniform grid of cell midpoints on [0,1]^d. FFT work happens on a zero-padded
/// lattice of padding*m nodes per axis with period `padding`.
struct GridSpec
{
  std::size_t dim = 1;
  std::size_t m = 256;
  std::size_t padding = 2;

  std::size_t size() const;
  double node(std::size_t i) const { return (static_cast<double>(i) + 0.5) / static_cast<double>(m); }
  double cell_volume() const;
  /// Coordinates of flat node index `flat` (last axis fastest).
  void coords(std::size_t flat, double* out) const;
  std::size_t lattice() const { return padding * m; }
  double period() const { return static_cast<double>(padding); }
  /// Angular frequency of lattice index k (in FFT order).
  double frequency(std::size_t k) const;
  double nyquist() const;
};

struct GridFunction
{
  GridSpec grid;
  Vec values;

  GridFunction() = default;
  explicit GridFunction(GridSpec g);
  GridFunction(GridSpec g, Vec v);

  double riemann_sum() const;
  double at(std::size_t flat) const { return values[flat]; }
};

/// Deconvolution kernel sampled on the padded lattice at offsets i/m, i in
/// [-lattice/2, lattice/2) per axis, stored in FFT (wrapped) order.
struct KernelLattice
{
  GridSpec grid;
  Vec values;
  /// Sampled transform F[K](h t)/F[g](t) on the lattice frequencies (FFT order),
  /// empty when the kernel was evaluated in the spatial domain.
  std::vector<std::complex<double>> spectrum;
  bool spectral = false;

  std::size_t lattice() const { return grid.lattice(); }
  /// Value at signed per-axis offset indices.
  double at(const std::vector<long>& offset) const;
  double riemann_sum() const;
  /// Discrete transform of the values times the cell volume, in FFT order.
  std::vector<std::complex<double>> transform() const;
};

/// F[K_h] / F[g] inverted on the lattice. Band-limited kernels go through the FFT;
/// other kernels are only accepted with g = none and are sampled directly.
KernelLattice deconv_kernel_on_grid(const KernelSpec& K, const Bandwidth& h, const NoiseModel& g, const GridSpec& grid);

/// Pointwise value of the continuous deconvolution kernel by quadrature of the inverse transform.
double deconv_kernel_at(const KernelSpec& K, const Bandwidth& h, const NoiseModel& g, const Vec& x);

/// Throws GridTooCoarse if the lattice cannot carry frequencies up to S/h.
void check_nyquist(const KernelSpec& K, const Bandwidth& h, const GridSpec& grid);

/// L_q norm of the kernel; q = infinity is accepted.
double kernel_norm(const KernelSpec& K, double q);

} // namespace gradbw
