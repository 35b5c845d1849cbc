#pragma once
// File interchange: sample CSVs (samples as rows, header x1..xp,y1..yq),
// JSON serialization of fit results, and shortest-round-trip number
// formatting shared by both.

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "mmrn/fit.hpp"
#include "mmrn/simulate.hpp"
#include "mmrn/svs.hpp"

namespace mmrn {

using Json = nlohmann::json;

// ===== Number and cell formatting =====

/// Shortest decimal string that parses back to exactly the same double.
[[nodiscard]] inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline void trim(std::string& s) {
  const auto notSpace = [](unsigned char c) {
    return c != ' ' && c != '\t' && c != '\r';
  };
  while (!s.empty() && !notSpace(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && !notSpace(s[i])) ++i;
  s.erase(0, i);
}

[[nodiscard]] inline std::vector<std::string> split_csv_line(
    const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    trim(cell);
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[nodiscard]] inline double parse_double(const std::string& cell,
                                         const std::string& where) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || end != begin + cell.size()) {
    throw std::runtime_error(where + ": not a number: '" + cell + "'");
  }
  return v;
}

}  // namespace detail

// ===== Sample CSV =====

inline void write_sample_csv(const std::string& path, const SampleSet& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (int j = 0; j < data.p(); ++j) out << "x" << (j + 1) << ",";
  for (int j = 0; j < data.q(); ++j) {
    out << "y" << (j + 1) << (j + 1 < data.q() ? "," : "\n");
  }
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.p(); ++j) {
      out << format_double(data.X(i, j)) << ",";
    }
    for (int j = 0; j < data.q(); ++j) {
      out << format_double(data.Y(i, j)) << (j + 1 < data.q() ? "," : "\n");
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Parse a sample CSV. The header must list every predictor column x1..xp
/// before the response columns y1..yq; errors carry 1-based line numbers.
[[nodiscard]] inline SampleSet read_sample_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ":1: empty file");
  }
  const auto header = detail::split_csv_line(line);
  int p = 0;
  int q = 0;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const std::string& name = header[j];
    const bool isX = !name.empty() && name[0] == 'x';
    const bool isY = !name.empty() && name[0] == 'y';
    if (isX && q == 0) {
      ++p;
    } else if (isY) {
      ++q;
    } else {
      throw std::runtime_error(path + ":1: bad header column '" + name +
                               "' (expect x1..xp then y1..yq)");
    }
  }
  if (p == 0 || q == 0) {
    throw std::runtime_error(path +
                             ":1: need at least one x and one y column");
  }

  std::vector<double> cells;
  int n = 0;
  for (int lineNo = 2; std::getline(in, line); ++lineNo) {
    std::string probe = line;
    detail::trim(probe);
    if (probe.empty()) continue;  // ignore trailing blank lines
    const auto fields = detail::split_csv_line(line);
    if (static_cast<int>(fields.size()) != p + q) {
      throw std::runtime_error(path + ":" + std::to_string(lineNo) +
                               ": expected " + std::to_string(p + q) +
                               " fields, got " +
                               std::to_string(fields.size()));
    }
    for (const auto& cell : fields) {
      cells.push_back(
          detail::parse_double(cell, path + ":" + std::to_string(lineNo)));
    }
    ++n;
  }
  if (n < 2) {
    throw std::runtime_error(path + ": need at least 2 sample rows");
  }
  Matrix X(n, p), Y(n, q);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) X(i, j) = cells[i * (p + q) + j];
    for (int j = 0; j < q; ++j) Y(i, j) = cells[i * (p + q) + p + j];
  }
  return SampleSet(X, Y);
}

// ===== JSON =====

/// Dense matrix as {rows, cols, data} with column-major data.
[[nodiscard]] inline Json matrix_to_json(const Matrix& M) {
  Json j;
  j["rows"] = M.rows();
  j["cols"] = M.cols();
  std::vector<double> data(static_cast<std::size_t>(M.size()));
  Eigen::Map<Matrix>(data.data(), M.rows(), M.cols()) = M;
  j["data"] = data;
  return j;
}

[[nodiscard]] inline Matrix matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::runtime_error("matrix json: data length mismatch");
  }
  Matrix M(rows, cols);
  Eigen::Map<const Matrix> map(data.data(), rows, cols);
  M = map;
  return M;
}

[[nodiscard]] inline Json fit_result_to_json(const FitResult& r) {
  Json j;
  j["betaHat"] = matrix_to_json(r.betaHat);
  j["gammaHat"] = matrix_to_json(r.gammaHat);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["finalObjective"] = r.finalObjective;
  j["dcov"] = r.dcov;
  j["objectiveTrace"] = r.objectiveTrace;
  j["gradNorms"] = r.gradNorms;
  j["lineSearchCounts"] = r.lineSearchCounts;
  j["fallbackSteps"] = r.fallbackSteps;
  j["ridge"] = r.ridge;
  j["sirFallback"] = r.sirFallback;
  return j;
}

[[nodiscard]] inline Json sparse_result_to_json(const SparseFitResult& r) {
  Json j;
  j["fit"] = fit_result_to_json(r.fit);
  j["betaHat"] = matrix_to_json(r.betaHat);  // truncated estimate
  j["activeRows"] = r.activeRows;
  j["lambdaUsed"] = r.lambdaUsed;
  j["bicValue"] = r.bicValue;
  std::vector<double> rowNorms(static_cast<std::size_t>(r.fit.betaHat.rows()));
  for (Eigen::Index i = 0; i < r.fit.betaHat.rows(); ++i) {
    rowNorms[static_cast<std::size_t>(i)] = r.fit.betaHat.row(i).norm();
  }
  j["rowNorms"] = rowNorms;
  std::vector<double> theta(r.theta.data(), r.theta.data() + r.theta.size());
  j["theta"] = theta;
  return j;
}

[[nodiscard]] inline Json bic_selection_to_json(const BicSelection& sel) {
  Json j;
  j["bestLambda"] = sel.bestLambda;
  j["best"] = sparse_result_to_json(sel.best);
  Json path = Json::array();
  for (const auto& e : sel.path) {
    Json entry;
    entry["lambda"] = e.lambda;
    entry["bic"] = e.bic;
    entry["activeRows"] = e.activeRows;
    entry["dcov"] = e.dcov;
    entry["converged"] = e.converged;
    entry["failed"] = e.failed;
    path.push_back(std::move(entry));
  }
  j["path"] = std::move(path);
  return j;
}

[[nodiscard]] inline Json truth_to_json(const GroundTruth& truth,
                                        std::uint64_t seed) {
  Json j;
  j["betaTrue"] = matrix_to_json(truth.betaTrue);
  j["activeSet"] = truth.activeSet;
  j["seed"] = seed;
  return j;
}

inline void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

[[nodiscard]] inline Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  Json j;
  in >> j;
  return j;
}

}  // namespace mmrn
