#include "gradbw/errors.hpp"
#include "gradbw/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

namespace gradbw {

std::string format_number(double v)
{
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

template <class T, class F>
std::string opt(const std::optional<T>& v, F&& fmt)
{
  return v ? fmt(*v) : std::string("NA");
}

std::string num(double v) { return format_number(v); }

std::vector<std::string> tokenize(const std::string& line)
{
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || ch == '\t' || ch == ' ' || ch == ';') {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) {
    out.push_back(cur);
  }
  return out;
}

} // namespace

std::vector<const ResultRow*> ResultTable::raw() const
{
  std::vector<const ResultRow*> out;
  for (const auto& r : rows) {
    if (r.statistic.empty()) {
      out.push_back(&r);
    }
  }
  return out;
}

std::vector<const ResultRow*> ResultTable::aggregates() const
{
  std::vector<const ResultRow*> out;
  for (const auto& r : rows) {
    if (!r.statistic.empty()) {
      out.push_back(&r);
    }
  }
  return out;
}

const ResultRow* ResultTable::find_aggregate(const std::string& method, std::optional<double> constant, double param,
                                             const std::string& statistic) const
{
  for (const auto& r : rows) {
    if (r.statistic == statistic && r.method == method && r.constant == constant && r.param == param) {
      return &r;
    }
  }
  return nullptr;
}

void ResultTable::write_csv(std::ostream& os) const
{
  os << "method,constant," << param_name << ",replicate,aggregate,statistic,value,std_error,count";
  if (with_ratio) {
    os << ",oracle_ratio";
  }
  os << '\n';
  for (const auto& r : rows) {
    os << r.method << ',' << (r.constant ? num(*r.constant) : std::string()) << ',' << num(r.param) << ','
       << (r.replicate ? std::to_string(*r.replicate) : std::string()) << ',' << (r.statistic.empty() ? 0 : 1) << ','
       << r.statistic << ',' << opt(r.value, num) << ',' << (r.statistic.empty() ? std::string() : opt(r.std_error, num))
       << ',' << (r.count ? std::to_string(*r.count) : std::string());
    if (with_ratio) {
      os << ',' << (r.oracle_ratio ? num(*r.oracle_ratio) : std::string());
    }
    os << '\n';
  }
}

void ResultTable::write_csv(const std::string& path) const
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InvalidArgument("cannot write " + path);
  }
  write_csv(out);
}

void add_mean_rows(ResultTable& table)
{
  using Cell = std::tuple<std::string, std::optional<double>, double>;
  std::vector<Cell> order;
  std::map<Cell, Vec> values;
  std::map<Cell, std::size_t> seen;
  for (const auto& r : table.rows) {
    if (!r.statistic.empty()) {
      continue;
    }
    Cell c{r.method, r.constant, r.param};
    if (!seen.count(c)) {
      seen[c] = order.size();
      order.push_back(c);
      values[c];
    }
    if (r.value) {
      values[c].push_back(*r.value);
    }
  }
  for (const auto& c : order) {
    const Vec& v = values[c];
    ResultRow row;
    row.method = std::get<0>(c);
    row.constant = std::get<1>(c);
    row.param = std::get<2>(c);
    row.statistic = "mean";
    row.count = v.size();
    if (!v.empty()) {
      double sum = 0.0;
      for (double x : v) {
        sum += x;
      }
      const double mean = sum / static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) {
        ss += (x - mean) * (x - mean);
      }
      row.value = mean;
      row.std_error = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())) : 0.0;
    }
    table.rows.push_back(row);
  }
}

double spearman(const Vec& a, const Vec& b)
{
  if (a.size() != b.size() || a.size() < 2) {
    throw InvalidArgument("spearman needs two equal-length series of at least two values");
  }
  auto ranks = [](const Vec& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    Vec r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) {
        ++j;
      }
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t t = i; t <= j; ++t) {
        r[idx[t]] = avg;
      }
      i = j + 1;
    }
    return r;
  };
  const Vec ra = ranks(a);
  const Vec rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) {
    return 0.0;
  }
  return sab / std::sqrt(saa * sbb);
}

DataFile read_data(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw InvalidArgument("cannot open data file " + path);
  }
  DataFile df;
  std::string line;
  while (std::getline(in, line)) {
    if (!tokenize(line).empty()) {
      df.columns = tokenize(line);
      break;
    }
  }
  if (df.columns.empty()) {
    throw InvalidArgument("data file " + path + " has no header row");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = tokenize(line);
    if (tok.empty()) {
      continue;
    }
    if (tok.size() != df.columns.size()) {
      throw InvalidArgument("data file " + path + " line " + std::to_string(lineno) + " has " +
                            std::to_string(tok.size()) + " fields, header has " + std::to_string(df.columns.size()));
    }
    Vec row;
    for (const auto& t : tok) {
      try {
        row.push_back(std::stod(t));
      } catch (const std::exception&) {
        throw InvalidArgument("data file " + path + " line " + std::to_string(lineno) + ": not a number: " + t);
      }
    }
    df.rows.push_back(std::move(row));
  }
  if (df.rows.empty()) {
    throw InvalidArgument("data file " + path + " has no observations");
  }
  return df;
}

} // namespace gradbw
