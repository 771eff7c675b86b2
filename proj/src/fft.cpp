#include "gradbw/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace gradbw::fft {

namespace {
std::mutex planner_mutex;
}

void transform(cvec& data, std::size_t dim, std::size_t n, int sign)
{
  std::vector<int> dims(dim, static_cast<int>(n));
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    // the planner is not thread safe; execution is
    std::lock_guard<std::mutex> lock(planner_mutex);
    plan = fftw_plan_dft(static_cast<int>(dim), dims.data(), ptr, ptr, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                         FFTW_ESTIMATE);
  }
  if (plan == nullptr) {
    throw std::runtime_error("fftw planning failed");
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex);
  fftw_destroy_plan(plan);
}

} // namespace gradbw::fft
