#include "gradbw/errors.hpp"
#include "gradbw/experiments.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace gradbw {

namespace {

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) {
      throw std::invalid_argument(v);
    }
    return x;
  } catch (const std::exception&) {
    throw InvalidArgument("config key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::size_t to_size(const std::string& key, const std::string& v)
{
  const double x = to_double(key, v);
  if (x < 0.0 || x != static_cast<double>(static_cast<std::size_t>(x))) {
    throw InvalidArgument("config key '" + key + "' expects a nonnegative integer, got '" + v + "'");
  }
  return static_cast<std::size_t>(x);
}

std::vector<std::string> split_list(const std::string& v)
{
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

Vec to_list(const std::string& key, const std::string& v)
{
  Vec out;
  for (const auto& item : split_list(v)) {
    out.push_back(to_double(key, item));
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v)
{
  if (v == "true" || v == "1" || v == "yes") {
    return true;
  }
  if (v == "false" || v == "0" || v == "no") {
    return false;
  }
  throw InvalidArgument("config key '" + key + "' expects a boolean, got '" + v + "'");
}

void apply(ExperimentConfig& c, const std::string& key, const std::string& v)
{
  if (key == "experiment") {
    c.experiment = v;
  } else if (key == "n") {
    c.n = to_size(key, v);
  } else if (key == "replicates" || key == "reps") {
    c.replicates = to_size(key, v);
  } else if (key == "seed") {
    c.seed = to_size(key, v);
  } else if (key == "u") {
    c.u_values = to_list(key, v);
  } else if (key == "constants") {
    c.constants = to_list(key, v);
  } else if (key == "k") {
    c.k = to_size(key, v);
  } else if (key == "kernel") {
    c.kernel = v;
  } else if (key == "beta") {
    c.beta = to_list(key, v);
  } else if (key == "h_minus") {
    c.h_minus = to_double(key, v);
  } else if (key == "h_plus") {
    c.h_plus = to_double(key, v);
  } else if (key == "a") {
    c.a = to_double(key, v);
  } else if (key == "cap") {
    c.cap = to_size(key, v);
  } else if (key == "grid") {
    c.grid = to_size(key, v);
  } else if (key == "fill") {
    c.fill = to_double(key, v);
  } else if (key == "candidates") {
    c.candidates = to_size(key, v);
  } else if (key == "n_values") {
    c.n_values.clear();
    for (const auto& item : split_list(v)) {
      c.n_values.push_back(to_size(key, item));
    }
  } else if (key == "f_point") {
    c.f_point = v;
  } else if (key == "f_global") {
    c.f_global = v;
  } else if (key == "reg_noise") {
    c.reg_noise = v;
  } else if (key == "reg_noise_scale") {
    c.reg_noise_scale = to_double(key, v);
  } else if (key == "x0") {
    c.x0 = to_double(key, v);
  } else if (key == "q") {
    c.q = to_double(key, v);
  } else if (key == "C0") {
    c.C0 = to_double(key, v);
  } else if (key == "Cq") {
    c.Cq = to_double(key, v);
  } else if (key == "reg_h_minus") {
    c.reg_h_minus = to_double(key, v);
  } else if (key == "reg_h_plus") {
    c.reg_h_plus = to_double(key, v);
  } else if (key == "global_h_plus") {
    c.global_h_plus = to_double(key, v);
  } else if (key == "x_points") {
    c.x_points = to_size(key, v);
  } else if (key == "cluster_u") {
    c.cluster_u = to_double(key, v);
  } else if (key == "cluster_constant") {
    c.cluster_constant = to_double(key, v);
  } else if (key == "output") {
    c.output = v;
  } else if (key == "quiet") {
    c.quiet = to_bool(key, v);
  } else {
    throw InvalidArgument("unknown config key '" + key + "'");
  }
}

} // namespace

void ExperimentConfig::validate() const
{
  if (replicates < 1) {
    throw InvalidArgument("replicates must be at least 1");
  }
  if (n < 10) {
    throw InvalidArgument("n must be at least 10");
  }
  if (std::any_of(constants.begin(), constants.end(), [](double c) { return !(c > 0.0); })) {
    throw InvalidArgument("constants must be positive");
  }
  if (experiment == "figure1" && (u_values.empty() || constants.empty())) {
    throw InvalidArgument("figure1 needs at least one u value and one constant");
  }
  if (experiment == "rates" && n_values.empty()) {
    throw InvalidArgument("rates needs at least one sample size");
  }
  if (grid < 8) {
    throw InvalidArgument("grid needs at least 8 nodes per axis");
  }
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base)
{
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + " is not of the form key = value");
    }
    apply(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base)
{
  std::ifstream in(path);
  if (!in) {
    throw InvalidArgument("cannot open config file " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

} // namespace gradbw
