#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace gradbw::fft {

using cvec = std::vector<std::complex<double>>;

/// In-place d-dimensional transform on a cube of side n (last axis fastest).
/// sign = -1 is the forward transform, +1 the unnormalised inverse.
void transform(cvec& data, std::size_t dim, std::size_t n, int sign);

} // namespace gradbw::fft
