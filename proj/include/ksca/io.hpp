#pragma once

// Matrix CSV files (headerless, one matrix row per line) and JSON documents
// for dataset sidecars and subspace checkpoints.

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ksca/datagen.hpp"
#include "ksca/errors.hpp"
#include "ksca/numerics.hpp"
#include "ksca/subspace_id.hpp"

namespace ksca::io {

using json = nlohmann::json;

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_matrix_csv(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  std::string line;
  for (Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) line += ',';
      line += format_double(m(i, j));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline Matrix parse_matrix_csv(std::istream& in, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto first = field.find_first_not_of(" \t");
      const auto last = field.find_last_not_of(" \t");
      if (first == std::string::npos) throw InvalidInput(name + ":" + std::to_string(line_no) + ": empty field");
      const std::string token = field.substr(first, last - first + 1);
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(token.c_str(), &end);
      if (end != token.c_str() + token.size() || errno == ERANGE)
        throw InvalidInput(name + ":" + std::to_string(line_no) + ": not a number '" + token + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InvalidInput(name + ":" + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput(name + ": no data");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  require_finite(m, name.c_str());
  return m;
}

inline Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_matrix_csv(in, path.string());
}

inline json matrix_to_json(const Eigen::Ref<const Matrix>& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& rows, Index expected_rows, Index expected_cols) {
  if (!rows.is_array() || static_cast<Index>(rows.size()) != expected_rows)
    throw InvalidInput("matrix json: expected " + std::to_string(expected_rows) + " rows");
  Matrix m(expected_rows, expected_cols);
  for (Index i = 0; i < expected_rows; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != expected_cols)
      throw InvalidInput("matrix json: expected " + std::to_string(expected_cols) + " columns");
    for (Index j = 0; j < expected_cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  require_finite(m, "matrix json");
  return m;
}

/// Dataset sidecar: {m, n, k, T, sigma_off, seed, support_mode, supports}.
inline json dataset_sidecar(const GenConfig& cfg, const std::vector<std::vector<int>>& supports) {
  return json{{"m", cfg.m},
              {"n", cfg.n},
              {"k", cfg.sparsity()},
              {"T", cfg.T},
              {"sigma_off", cfg.sigma_off},
              {"seed", cfg.seed},
              {"support_mode", to_string(cfg.support_mode)},
              {"supports", supports}};
}

struct Sidecar {
  GenConfig config;
  std::vector<std::vector<int>> supports;
};

inline Sidecar parse_sidecar(const json& j) {
  try {
    Sidecar s;
    s.config.m = j.at("m").get<int>();
    s.config.n = j.at("n").get<int>();
    s.config.k = j.at("k").get<int>();
    s.config.T = j.at("T").get<Index>();
    s.config.sigma_off = j.at("sigma_off").get<double>();
    s.config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("support_mode")) s.config.support_mode = support_mode_from_string(j["support_mode"].get<std::string>());
    s.supports = j.at("supports").get<std::vector<std::vector<int>>>();
    return s;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("sidecar: ") + e.what());
  }
}

inline json ocs_to_json(const OcsSet& ocs) {
  json subspaces = json::array();
  for (std::size_t i = 0; i < ocs.size(); ++i)
    subspaces.push_back({{"span", matrix_to_json(ocs.spans[i])},
                         {"basis", matrix_to_json(ocs.bases[i])},
                         {"inlier_count", ocs.inlier_counts[i]}});
  return json{{"m", ocs.m}, {"k", ocs.k}, {"count", ocs.size()}, {"subspaces", std::move(subspaces)}};
}

/// Inverse of ocs_to_json; inlier index lists are not checkpointed.
inline OcsSet ocs_from_json(const json& j) {
  try {
    OcsSet ocs;
    ocs.m = j.at("m").get<int>();
    ocs.k = j.at("k").get<int>();
    if (ocs.m < 2 || ocs.k < 1 || ocs.k >= ocs.m) throw InvalidInput("ocs json: invalid m/k");
    for (const auto& s : j.at("subspaces")) {
      ocs.spans.push_back(matrix_from_json(s.at("span"), ocs.m, ocs.k));
      ocs.bases.push_back(matrix_from_json(s.at("basis"), ocs.m, ocs.m - ocs.k));
      ocs.inlier_counts.push_back(s.at("inlier_count").get<Index>());
      ocs.inliers.emplace_back();
    }
    return ocs;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("ocs json: ") + e.what());
  }
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

} // namespace ksca::io
