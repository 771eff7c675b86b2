#pragma once

#include "gradbw/noisy_kmeans.hpp"
#include "gradbw/robust_regression.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gradbw {

/// Isotropic affine map x -> (x - center) * scale + 0.5.
struct AffineMap
{
  Vec center;
  double scale = 1.0;

  Vec apply(const Vec& points) const;
  Vec inverse(const Vec& points) const;
};

/// Fits the bounding box of `points` (n x d) into a centred window of width `fill`.
AffineMap fit_unit_box(const Vec& points, std::size_t d, double fill);

struct MixtureSample
{
  /// Rescaled observations, labels and rescaled clean points.
  NoisySample sample;
  AffineMap map;
  /// Noise standard deviations in rescaled units.
  Vec noise_sd;
  Vec z_raw;
  Vec x_raw;
};

/// Two-component Gaussian mixture in the plane, means (0,0) and (5,0), identity covariance,
/// observed with N(0, diag(1, u)) errors.
MixtureSample gen_mixture(std::size_t n, double u, std::uint64_t seed, double fill = 0.6);

/// Regression functions: zero, sine, lipschitz, bump.
double f_star(const std::string& id, const double* x, std::size_t d);

RegressionSample gen_regression(std::size_t n, const std::string& f_star_id, const RegressionNoise& noise,
                                std::uint64_t seed, std::size_t d = 1);

struct ExperimentConfig
{
  std::string experiment = "figure1";
  std::size_t n = 200;
  std::size_t replicates = 100;
  std::uint64_t seed = 1;
  std::vector<double> u_values{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> constants{0.1, 1.0, 10.0};
  // clustering
  std::size_t k = 2;
  std::string kernel = "sinc";
  Vec beta{1.0, 1.0};
  double h_minus = 0.03;
  double h_plus = 0.12;
  double a = 0.7;
  std::size_t cap = 0;
  std::size_t grid = 128;
  double fill = 0.6;
  std::size_t candidates = 0;
  // rates
  std::vector<std::size_t> n_values{250, 500, 1000, 2000, 4000};
  std::string f_point = "lipschitz";
  std::string f_global = "sine";
  std::string reg_noise = "student-t3";
  double reg_noise_scale = 0.5;
  double x0 = 0.5;
  double q = 2.0;
  double C0 = 1.0;
  double Cq = 1.0;
  double reg_h_minus = 0.02;
  double reg_h_plus = 0.5;
  double global_h_plus = 0.25;
  std::size_t x_points = 50;
  double cluster_u = 1.0;
  double cluster_constant = 1.0;
  std::string output;
  bool quiet = false;

  void validate() const;
};

/// Flat `key = value` lines, `#` comments, comma-separated lists.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

struct ResultRow
{
  std::string method;
  std::optional<double> constant;
  double param = 0.0;
  /// Replicate index for raw rows; empty for aggregates.
  std::optional<std::size_t> replicate;
  /// Empty for raw rows, "mean" or "median" for aggregates.
  std::string statistic;
  std::optional<double> value;
  std::optional<double> std_error;
  std::optional<std::size_t> count;
  std::optional<double> oracle_ratio;
};

struct ResultTable
{
  std::string param_name = "u";
  bool with_ratio = false;
  std::vector<ResultRow> rows;

  std::vector<const ResultRow*> raw() const;
  std::vector<const ResultRow*> aggregates() const;
  const ResultRow* find_aggregate(const std::string& method, std::optional<double> constant, double param,
                                  const std::string& statistic) const;
  void write_csv(std::ostream& os) const;
  void write_csv(const std::string& path) const;
};

/// Appends mean and standard-error rows for every (method, constant, param) cell, in first-seen order.
void add_mean_rows(ResultTable& table);

ResultTable run_figure1(const ExperimentConfig& config);

ResultTable run_regression_experiment(const ExperimentConfig& config);

/// True distortion of a codebook (original units) under the clean mixture, by grid quadrature.
double mixture_distortion(const Codebook& c);
/// Optimal codebook of the clean mixture for k centroids (Lloyd on the quadrature grid).
const Codebook& mixture_optimum(std::size_t k);

/// Spearman rank correlation.
double spearman(const Vec& a, const Vec& b);

/// Delimited numeric table with a header row (comma, tab or blank separated).
struct DataFile
{
  std::vector<std::string> columns;
  std::vector<Vec> rows;
};

DataFile read_data(const std::string& path);

/// Shortest representation that round-trips.
std::string format_number(double v);

} // namespace gradbw
