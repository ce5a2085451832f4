#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bridgekit/errors.hpp"
#include "bridgekit/numerics.hpp"
#include "bridgekit/rng.hpp"

namespace bridgekit {

struct Dataset {
  Matrix x;
  Vector y;
  // Set by standardize(); consumers that require centered/scaled data check it.
  bool standardized = false;

  int n() const { return static_cast<int>(x.rows()); }
  int p() const { return static_cast<int>(x.cols()); }
};

struct StandardizationParams {
  Vector x_means;
  Vector x_scales;  // population scale: sqrt(sum (x - mean)^2 / n)
  double y_mean = 0.0;
};

// Centers y, centers each covariate and scales it so the standardized column
// satisfies sum x_ij^2 = n.  y is centered but never rescaled.
inline std::pair<Dataset, StandardizationParams> standardize(
    const Dataset& data) {
  const int n = data.n();
  const int p = data.p();
  if (n < 2) throw WrongShape("standardize: need at least 2 observations");
  if (static_cast<int>(data.y.size()) != n)
    throw DimensionMismatch("standardize: y length does not match X rows");

  StandardizationParams params;
  params.x_means = data.x.colwise().mean();
  params.x_scales.resize(p);
  params.y_mean = data.y.mean();

  Dataset out;
  out.x.resize(n, p);
  out.y = data.y.array() - params.y_mean;
  for (int j = 0; j < p; ++j) {
    Vector centered = data.x.col(j).array() - params.x_means[j];
    double scale = std::sqrt(centered.squaredNorm() / n);
    if (scale < 1e-12 * std::max(1.0, std::abs(params.x_means[j])))
      throw ConstantColumn("standardize: column " + std::to_string(j + 1) +
                           " has zero sample variance");
    params.x_scales[j] = scale;
    out.x.col(j) = centered / scale;
  }
  out.standardized = true;
  return {std::move(out), std::move(params)};
}

// Maps raw data into the coordinate system defined by params (train-set
// transform applied to new data).  The result is not marked standardized:
// its own column sums are generally nonzero.
inline Dataset apply_standardization(const Dataset& raw,
                                     const StandardizationParams& params) {
  if (raw.p() != static_cast<int>(params.x_means.size()))
    throw DimensionMismatch("apply_standardization: column count mismatch");
  Dataset out;
  out.x = (raw.x.rowwise() - params.x_means.transpose()).array().rowwise() /
          params.x_scales.transpose().array();
  out.y = raw.y.array() - params.y_mean;
  return out;
}

struct SimulationSetting {
  enum class Design { kAr1, kGroupedBlocks };
  int id = 0;
  int n_train = 0;
  int n_test = 0;
  Vector beta_true;
  double sigma = 0.0;
  double rho = 0.0;  // AR(1) neighbor correlation; unused for grouped design
  Design design = Design::kAr1;

  int p() const { return static_cast<int>(beta_true.size()); }
};

inline SimulationSetting simulation_setting(int id) {
  auto coef = [](std::initializer_list<std::pair<double, int>> runs) {
    std::vector<double> v;
    for (auto [value, count] : runs) v.insert(v.end(), count, value);
    return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()))
        .eval();
  };
  SimulationSetting s;
  s.id = id;
  switch (id) {
    case 1:
      s.n_train = 20;
      s.n_test = 200;
      s.beta_true = coef({{3, 1}, {15, 1}, {7.5, 1}, {5, 1}, {2, 1}, {0, 5}});
      s.sigma = 3.0;
      s.rho = 0.5;
      break;
    case 2:
      s.n_train = 20;
      s.n_test = 200;
      s.beta_true = coef({{10, 10}});
      s.sigma = 3.0;
      s.rho = 0.5;
      break;
    case 3:
      s.n_train = 20;
      s.n_test = 200;
      s.beta_true = coef({{5, 1}, {0, 7}});
      s.sigma = 2.0;
      s.rho = 0.5;
      break;
    case 4:
      s.n_train = 100;
      s.n_test = 400;
      s.beta_true = coef({{0, 10}, {5, 10}, {0, 10}, {3, 10}});
      s.sigma = 3.0;
      s.rho = 0.95;
      break;
    case 5:
      s.n_train = 100;
      s.n_test = 400;
      s.beta_true = coef({{10, 35}, {0, 5}});
      s.sigma = 3.0;
      s.design = SimulationSetting::Design::kGroupedBlocks;
      break;
    default:
      throw UnknownSetting("simulation setting must be 1..5, got " +
                           std::to_string(id));
  }
  return s;
}

struct GeneratedData {
  Dataset train;  // raw (not standardized)
  Dataset test;
};

namespace detail {

// One design row.  AR(1) uses the exact recursion x_1 = z_1,
// x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j, which is the Cholesky map of the
// rho^|i-j| covariance.  The grouped design draws, in order, the 7 block
// factors, the 35 block noises, then the 5 free N(0,1) tail columns.
inline void fill_design_row(const SimulationSetting& s, Rng& rng,
                            Eigen::RowVectorXd& row) {
  if (s.design == SimulationSetting::Design::kAr1) {
    const double carry = std::sqrt(1.0 - s.rho * s.rho);
    double prev = 0.0;
    for (int j = 0; j < s.p(); ++j) {
      double z = rng.normal();
      prev = (j == 0) ? z : s.rho * prev + carry * z;
      row[j] = prev;
    }
  } else {
    double z[7];
    for (double& zk : z) zk = rng.normal();
    for (int j = 0; j < 35; ++j) row[j] = z[j / 5] + 0.1 * rng.normal();
    for (int j = 35; j < 40; ++j) row[j] = rng.normal();
  }
}

inline Dataset draw_block(const SimulationSetting& s, int n, Rng& rng) {
  Dataset d;
  d.x.resize(n, s.p());
  Eigen::RowVectorXd row(s.p());
  for (int i = 0; i < n; ++i) {
    fill_design_row(s, rng, row);
    d.x.row(i) = row;
  }
  d.y = d.x * s.beta_true;
  for (int i = 0; i < n; ++i) d.y[i] += s.sigma * rng.normal();
  return d;
}

}  // namespace detail

// Draw order is fixed so results are reproducible: all training rows, then
// the training noise vector, then test rows, then test noise.
inline GeneratedData generate_setting(const SimulationSetting& s,
                                      std::uint64_t seed) {
  Rng rng(seed);
  GeneratedData g;
  g.train = detail::draw_block(s, s.n_train, rng);
  g.test = detail::draw_block(s, s.n_test, rng);
  return g;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    auto first = field.find_first_not_of(" \t\r");
    auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos
                         ? std::string()
                         : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_cell(const std::string& cell, int line, int column) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw ParseError("not a number: '" + cell + "'", line, column);
  return value;
}

inline bool looks_numeric(const std::string& cell) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (line_no == 1 && !fields.empty() && !looks_numeric(fields[0])) {
      table.header = fields;
      continue;
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c)
      row.push_back(parse_cell(fields[c], line_no, static_cast<int>(c) + 1));
    if (!table.rows.empty() && row.size() != table.rows.front().size())
      throw WrongShape(path + ": row " + std::to_string(line_no) + " has " +
                       std::to_string(row.size()) + " fields, expected " +
                       std::to_string(table.rows.front().size()));
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw WrongShape(path + ": no data rows");
  if (!table.header.empty() && table.header.size() != table.rows.front().size())
    throw WrongShape(path + ": header/data column count mismatch");
  return table;
}

inline Dataset table_to_dataset(const CsvTable& table, int y_column) {
  const int n = static_cast<int>(table.rows.size());
  const int cols = static_cast<int>(table.rows.front().size());
  Dataset d;
  d.x.resize(n, cols - 1);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    int k = 0;
    for (int c = 0; c < cols; ++c) {
      if (c == y_column)
        d.y[i] = table.rows[i][c];
      else
        d.x(i, k++) = table.rows[i][c];
    }
  }
  return d;
}

}  // namespace detail

// The 1973 McDonald-Schwing pollution/mortality data: 60 metropolitan areas,
// 15 covariates, age-adjusted mortality last.  Shape is enforced.
inline Dataset load_pollution(const std::string& path) {
  auto table = detail::read_csv(path);
  if (table.rows.front().size() != 16)
    throw WrongShape(path + ": expected 16 columns (15 covariates + mort)");
  if (table.rows.size() != 60)
    throw WrongShape(path + ": expected 60 rows, got " +
                     std::to_string(table.rows.size()));
  return detail::table_to_dataset(table, 15);
}

// Generic reader for fit/select inputs.  Accepts either a leading response
// column headed "y" (y,x1,...,xp) or the pollution layout with a trailing
// "mort" column; a headerless file is treated as y-first.
inline Dataset read_dataset_csv(const std::string& path) {
  auto table = detail::read_csv(path);
  if (table.rows.front().size() < 2)
    throw WrongShape(path + ": need a response and at least one covariate");
  int y_column = 0;
  if (!table.header.empty()) {
    if (table.header.back() == "mort")
      y_column = static_cast<int>(table.header.size()) - 1;
    else if (table.header.front() != "y")
      throw WrongShape(path +
                       ": header must start with 'y' or end with 'mort'");
  }
  return detail::table_to_dataset(table, y_column);
}

}  // namespace bridgekit
