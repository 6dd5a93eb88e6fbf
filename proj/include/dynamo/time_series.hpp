// Time-series container, CSV ingestion and lagged-view construction.
#pragma once

#include <Eigen/Dense>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "dynamo/errors.hpp"

namespace dynamo {

// T x d observations on the normalized time grid tau_t = t/T (t is 1-based).
// Immutable after construction; safe to share read-only across threads.
struct TimeSeriesMatrix {
  Eigen::MatrixXd values;                // T x d
  std::vector<std::string> variable_names;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  // Normalized time of 1-based index t.
  double tau(Eigen::Index t) const {
    return static_cast<double>(t) / static_cast<double>(values.rows());
  }

  void validate() const {
    if (values.rows() == 0 || values.cols() == 0) {
      throw DataError("time series is empty");
    }
    if (!values.allFinite()) {
      throw DataError("time series contains non-finite entries");
    }
    if (static_cast<Eigen::Index>(variable_names.size()) != values.cols()) {
      throw DataError("variable_names length does not match column count");
    }
    std::unordered_set<std::string> seen;
    for (const auto& name : variable_names) {
      if (name.empty()) throw DataError("empty variable name");
      if (!seen.insert(name).second) {
        throw DataError("duplicate variable name: " + name);
      }
    }
  }
};

// Row k predicts target time t = L+1+k (1-based):
//   rows.row(k)            = [x_{t-1}, x_{t-2}, ..., x_{t-L}]
//   aligned_targets.row(k) = x_t
struct LaggedView {
  int L = 0;
  Eigen::MatrixXd rows;             // (T-L) x (L*d)
  Eigen::MatrixXd aligned_targets;  // (T-L) x d
  std::vector<std::string> variable_names;

  Eigen::Index n() const { return aligned_targets.rows(); }
  Eigen::Index d() const { return aligned_targets.cols(); }
  // Total length of the originating series.
  Eigen::Index source_length() const { return aligned_targets.rows() + L; }
};

inline LaggedView build_lagged(const TimeSeriesMatrix& series, int L) {
  const Eigen::Index T = series.rows();
  const Eigen::Index d = series.cols();
  if (L < 1 || L >= T) {
    throw DataError("lag L=" + std::to_string(L) +
                    " must satisfy 1 <= L < T=" + std::to_string(T));
  }
  LaggedView view;
  view.L = L;
  view.variable_names = series.variable_names;
  view.rows.resize(T - L, static_cast<Eigen::Index>(L) * d);
  view.aligned_targets.resize(T - L, d);
  for (Eigen::Index k = 0; k < T - L; ++k) {
    const Eigen::Index t = k + L;  // 0-based target row
    view.aligned_targets.row(k) = series.values.row(t);
    for (int lag = 1; lag <= L; ++lag) {
      view.rows.block(k, static_cast<Eigen::Index>(lag - 1) * d, 1, d) =
          series.values.row(t - lag);
    }
  }
  return view;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_cell(const std::string& raw, std::size_t row1,
                         std::size_t col1) {
  const std::string s = trim(raw);
  const std::string where =
      " at row " + std::to_string(row1) + ", column " + std::to_string(col1);
  if (s.empty()) throw DataError("empty cell" + where);
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw DataError("cannot parse '" + s + "' as a number" + where);
  }
  if (pos != s.size()) {
    throw DataError("trailing characters in '" + s + "'" + where);
  }
  if (!std::isfinite(v)) {
    throw DataError("non-finite value '" + s + "'" + where);
  }
  return v;
}

}  // namespace detail

// Reads a UTF-8 comma-separated file, one row per time point, optionally with
// a single header row. Headerless files get generated names v1..vd.
inline TimeSeriesMatrix load_csv(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  std::vector<std::string> names;
  std::vector<std::vector<double>> data;
  std::string line;
  std::size_t lineno = 0;
  std::size_t ncols = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (has_header && names.empty() && data.empty()) {
      for (auto& c : cells) names.push_back(detail::trim(c));
      ncols = names.size();
      continue;
    }
    if (ncols == 0) ncols = cells.size();
    if (cells.size() != ncols) {
      throw DataError("ragged row at line " + std::to_string(lineno) +
                      ": expected " + std::to_string(ncols) + " cells, got " +
                      std::to_string(cells.size()));
    }
    std::vector<double> row(ncols);
    for (std::size_t j = 0; j < ncols; ++j) {
      row[j] = detail::parse_cell(cells[j], data.size() + 1, j + 1);
    }
    data.push_back(std::move(row));
  }
  if (data.empty()) throw DataError("no data rows in " + path);

  TimeSeriesMatrix series;
  series.values.resize(static_cast<Eigen::Index>(data.size()),
                       static_cast<Eigen::Index>(ncols));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < ncols; ++j) {
      series.values(static_cast<Eigen::Index>(i),
                    static_cast<Eigen::Index>(j)) = data[i][j];
    }
  }
  if (names.empty()) {
    for (std::size_t j = 1; j <= ncols; ++j) {
      names.push_back("v" + std::to_string(j));
    }
  }
  series.variable_names = std::move(names);
  series.validate();
  return series;
}

inline void save_csv(const TimeSeriesMatrix& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out.precision(17);
  for (std::size_t j = 0; j < series.variable_names.size(); ++j) {
    out << (j ? "," : "") << series.variable_names[j];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < series.rows(); ++i) {
    for (Eigen::Index j = 0; j < series.cols(); ++j) {
      out << (j ? "," : "") << series.values(i, j);
    }
    out << '\n';
  }
}

}  // namespace dynamo
