#include "gradbw/experiments.hpp"
#include "gradbw/grid_kernels.hpp"
#include "gradbw/random.hpp"

#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

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

Vec signed_field(const GridSpec& grid)
{
  Vec f(grid.size());
  Vec x(grid.dim);
  for (std::size_t i = 0; i < f.size(); ++i) {
    grid.coords(i, x.data());
    double s = 0.0;
    for (double v : x) {
      s += (v - 0.45) * (v - 0.45);
    }
    f[i] = std::exp(-8.0 * s) - 0.1;
  }
  return f;
}

class Threads
{
public:
  explicit Threads(int n) : saved_(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved_); }

private:
  int saved_;
};

void close(const Vec& a, const Vec& b, double tol)
{
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i] - b[i]) <= tol * (1.0 + std::abs(b[i])));
  }
}

} // namespace

TEST_CASE("cell sums agree with the serial reference")
{
  for (std::size_t d : {1u, 2u, 3u}) {
    const GridSpec grid{d, d == 3 ? 16u : 64u, 2};
    const Vec f = signed_field(grid);
    const std::size_t k = 3;
    const Vec c = random_points(k, d, 10 + d);
    for (bool positive : {false, true}) {
      const auto p = gk::cell_sums(grid, f, c, k, positive, gk::Exec::parallel);
      const auto s = gk::serial::cell_sums(grid, f, c, k, positive);
      close(p.mass, s.mass, 1e-12);
      close(p.moment, s.moment, 1e-12);
      CHECK(std::abs(p.distortion - s.distortion) <= 1e-12 * (1.0 + std::abs(s.distortion)));
      CHECK(gk::cell_sums(grid, f, c, k, positive, gk::Exec::serial).mass == s.mass);
    }
    CHECK(gk::voronoi_labels(grid, c, k) == gk::serial::voronoi_labels(grid, c, k));
  }
}

TEST_CASE("Fourier sums agree with the serial reference")
{
  const Vec pts = random_points(300, 2, 3);
  Vec axis;
  for (int i = -12; i <= 12; ++i) {
    axis.push_back(std::numbers::pi * i);
  }
  const std::vector<Vec> freqs{axis, axis};
  const gk::cvec p = gk::empirical_cf(pts, 2, freqs);
  const gk::cvec s = gk::serial::empirical_cf(pts, 2, freqs);
  REQUIRE(p.size() == s.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(std::abs(p[i] - s[i]) <= 1e-13);
  }
  // direct evaluation of one coefficient
  std::complex<double> direct = 0.0;
  for (std::size_t i = 0; i < 300; ++i) {
    direct += std::exp(std::complex<double>(0.0, -(axis[3] * pts[2 * i] + axis[20] * pts[2 * i + 1])));
  }
  CHECK(std::abs(p[3 * axis.size() + 20] - direct / 300.0) <= 1e-13);

  const GridSpec grid{2, 32, 2};
  const Vec a = gk::synthesize(grid, freqs, p);
  const Vec b = gk::serial::synthesize(grid, freqs, s);
  close(a, b, 1e-12);
}

TEST_CASE("spatial sums agree with the serial path")
{
  const GridSpec grid{2, 48, 2};
  const Vec pts = random_points(200, 2, 4);
  auto K = [](const double* x) { return std::exp(-50.0 * (x[0] * x[0] + x[1] * x[1])); };
  close(gk::spatial_sum(grid, pts, K, gk::Exec::parallel), gk::spatial_sum(grid, pts, K, gk::Exec::serial), 1e-12);
}

TEST_CASE("parallel results do not depend on the thread count")
{
  const GridSpec grid{2, 96, 2};
  const Vec f = signed_field(grid);
  const Vec c = random_points(4, 2, 7);
  const Vec pts = random_points(500, 2, 8);
  Vec axis;
  for (int i = -20; i <= 20; ++i) {
    axis.push_back(std::numbers::pi * i);
  }
  const std::vector<Vec> freqs{axis, axis};
  gk::CellSums ref;
  gk::cvec cf;
  Vec syn;
  {
    Threads t(1);
    ref = gk::cell_sums(grid, f, c, 4, false);
    cf = gk::empirical_cf(pts, 2, freqs);
    syn = gk::synthesize(grid, freqs, cf);
  }
  for (int n : {2, 3, 5}) {
    Threads t(n);
    const auto s = gk::cell_sums(grid, f, c, 4, false);
    CHECK(s.mass == ref.mass);
    CHECK(s.moment == ref.moment);
    CHECK(s.distortion == ref.distortion);
    CHECK(gk::empirical_cf(pts, 2, freqs) == cf);
    CHECK(gk::synthesize(grid, freqs, cf) == syn);
  }
}

TEST_CASE("figure1 output does not depend on the thread count")
{
  ExperimentConfig c;
  c.replicates = 2;
  c.u_values = {2.0, 9.0};
  c.constants = {1.0};
  c.seed = 7;
  c.quiet = true;
  auto run = [&](int threads) {
    Threads t(threads);
    std::ostringstream os;
    run_figure1(c).write_csv(os);
    return os.str();
  };
  const std::string one = run(1);
  CHECK(run(3) == one);
  CHECK(run(4) == one);
}
