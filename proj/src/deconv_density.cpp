#include "gradbw/errors.hpp"
#include "gradbw/noisy_kmeans.hpp"

#include <cmath>

namespace gradbw {

DeconvDensity deconv_density(const NoisySample& sample, const KernelSpec& K, const Bandwidth& h, const NoiseModel& g,
                             const GridSpec& grid, const std::optional<Bandwidth>& aux_eta, gk::Exec exec)
{
  const std::size_t d = sample.d;
  if (d == 0 || sample.size() == 0) {
    throw InvalidArgument("sample is empty");
  }
  if (d > 8) {
    throw UnsupportedDimension("grid pipeline supports at most 8 dimensions");
  }
  if (K.dim() != d || h.dim() != d || grid.dim != d || g.dim() != d || (aux_eta && aux_eta->dim() != d)) {
    throw InvalidArgument("dimension mismatch between sample, kernel, bandwidth, noise and grid");
  }

  DeconvDensity out;
  out.kernel = K.id();
  out.h = h;
  out.aux_eta = aux_eta;
  out.auxiliary = aux_eta.has_value();

  if (!K.band_limited()) {
    if (g.id != NoiseId::none) {
      throw NonBandLimited(to_string(K.id()) + " has unbounded Fourier support and cannot be deconvolved");
    }
    Vec values;
    if (aux_eta) {
      const ConvolvedKernel conv(K, h, *aux_eta);
      values = gk::spatial_sum(grid, sample.z, [&](const double* x) { return conv(x); }, exec);
    } else {
      values = gk::spatial_sum(grid, sample.z, [&](const double* x) { return dilate(K, h, x); }, exec);
    }
    out.f = GridFunction(grid, std::move(values));
    return out;
  }

  check_nyquist(K, h, grid);
  if (aux_eta) {
    check_nyquist(K, *aux_eta, grid);
  }
  // frequencies of the padded lattice where the multiplier is nonzero, per axis
  std::vector<Vec> freqs(d);
  std::vector<Vec> mult(d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k < grid.lattice(); ++k) {
      const double t = grid.frequency(k);
      double fk = K.fourier1(h[j] * t);
      if (aux_eta) {
        fk *= K.fourier1((*aux_eta)[j] * t);
      }
      if (fk == 0.0) {
        continue;
      }
      freqs[j].push_back(t);
      mult[j].push_back(fk / g.fourier1(j, t));
    }
  }
  gk::cvec coeffs = gk::empirical_cf(sample.z, d, freqs, exec);
  const double norm = std::pow(grid.period(), -static_cast<double>(d));
  for (std::size_t f = 0; f < coeffs.size(); ++f) {
    std::size_t rest = f;
    double p = norm;
    for (std::size_t j = d; j-- > 0;) {
      p *= mult[j][rest % freqs[j].size()];
      rest /= freqs[j].size();
    }
    coeffs[f] *= p;
  }
  out.f = GridFunction(grid, gk::synthesize(grid, freqs, coeffs, exec));
  return out;
}

} // namespace gradbw
