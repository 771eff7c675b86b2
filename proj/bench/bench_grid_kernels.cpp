#include "gradbw/grid_kernels.hpp"
#include "gradbw/random.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace gradbw;

namespace {

Vec random_points(std::size_t n, std::size_t d, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  Vec p(n * d);
  for (double& v : p) {
    v = uniform01(rng);
  }
  return p;
}

Vec bump(const GridSpec& grid)
{
  Vec f(grid.size());
  double x[2];
  for (std::size_t i = 0; i < f.size(); ++i) {
    grid.coords(i, x);
    f[i] = std::exp(-10.0 * ((x[0] - 0.4) * (x[0] - 0.4) + (x[1] - 0.6) * (x[1] - 0.6))) - 0.05;
  }
  return f;
}

std::vector<Vec> band(std::size_t count)
{
  Vec axis;
  for (std::size_t i = 0; i < count; ++i) {
    axis.push_back(2.0 * 3.141592653589793 * (static_cast<double>(i) - static_cast<double>(count / 2)));
  }
  return {axis, axis};
}

void cell_sums(benchmark::State& state, gk::Exec exec)
{
  const GridSpec grid{2, static_cast<std::size_t>(state.range(0)), 2};
  const Vec f = bump(grid);
  const Vec c{0.3, 0.4, 0.7, 0.6, 0.5, 0.2};
  for (auto _ : state) {
    benchmark::DoNotOptimize(gk::cell_sums(grid, f, c, 3, false, exec));
  }
}

void empirical_cf(benchmark::State& state, gk::Exec exec)
{
  const Vec z = random_points(static_cast<std::size_t>(state.range(0)), 2, 3);
  const auto freqs = band(25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gk::empirical_cf(z, 2, freqs, exec));
  }
}

void synthesize(benchmark::State& state, gk::Exec exec)
{
  const GridSpec grid{2, static_cast<std::size_t>(state.range(0)), 2};
  const auto freqs = band(25);
  gk::cvec coeffs(freqs[0].size() * freqs[1].size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    coeffs[i] = {1.0 / (1.0 + static_cast<double>(i)), 0.5 / (2.0 + static_cast<double>(i))};
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(gk::synthesize(grid, freqs, coeffs, exec));
  }
}

} // namespace

BENCHMARK_CAPTURE(cell_sums, serial, gk::Exec::serial)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(cell_sums, parallel, gk::Exec::parallel)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK_CAPTURE(empirical_cf, serial, gk::Exec::serial)->Arg(200)->Arg(2000);
BENCHMARK_CAPTURE(empirical_cf, parallel, gk::Exec::parallel)->Arg(200)->Arg(2000);
BENCHMARK_CAPTURE(synthesize, serial, gk::Exec::serial)->Arg(64)->Arg(128);
BENCHMARK_CAPTURE(synthesize, parallel, gk::Exec::parallel)->Arg(64)->Arg(128);

BENCHMARK_MAIN();
