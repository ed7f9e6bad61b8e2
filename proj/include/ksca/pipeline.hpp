#pragma once

// Mixtures in, estimated mixing matrix out: subspace search followed by
// either the RANSAC or the exhaustive EVD mixing-vector stage.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "ksca/errors.hpp"
#include "ksca/mixing_id.hpp"
#include "ksca/numerics.hpp"
#include "ksca/subspace_id.hpp"

namespace ksca {

enum class Algorithm { ransac, evd };

inline const char* to_string(Algorithm a) { return a == Algorithm::evd ? "evd" : "ransac"; }

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "ransac") return Algorithm::ransac;
  if (s == "evd") return Algorithm::evd;
  throw ConfigError("unknown algorithm '" + s + "' (expected ransac or evd)");
}

struct PipelineConfig {
  int n = 0;
  std::optional<int> k;  // defaults to m - 1
  Algorithm algorithm = Algorithm::ransac;
  double sigma_off = 0.0;  // noise level used to pick default thresholds
  std::optional<double> th1;
  std::optional<double> th2;
  std::optional<double> th3;
  std::optional<int> max_outer;
  std::optional<Index> min_inliers;
  std::optional<int> max_iterations;
  std::uint64_t seed = 1;
};

enum class PipelineStatus { ok, subspace_shortfall, identification_timeout, incomplete_ocs };

inline const char* to_string(PipelineStatus s) {
  switch (s) {
    case PipelineStatus::ok: return "ok";
    case PipelineStatus::subspace_shortfall: return "subspace_shortfall";
    case PipelineStatus::identification_timeout: return "identification_timeout";
    case PipelineStatus::incomplete_ocs: return "incomplete_ocs";
  }
  return "unknown";
}

struct IdentifyReport {
  Matrix mixing;  // m x (vectors found)
  OcsSet ocs;
  PipelineStatus status = PipelineStatus::ok;
  Algorithm algorithm = Algorithm::ransac;
  int m = 0;
  int n = 0;
  int k = 0;
  double th1 = 0.0;
  double th2 = 0.0;
  double th3 = 0.0;
  Index min_inliers = 0;
  Index mixing_min_inliers = 0;
  int subspace_iterations = 0;
  int max_outer = 0;
  int outer_passes = 0;
  std::vector<int> cluster_counts;
  double ocs_ms = 0.0;
  double mixing_ms = 0.0;
  double runtime_ms = 0.0;

  bool complete() const { return status == PipelineStatus::ok; }
};

/// Runs both stages. Shortfalls are reported in the status and never thrown;
/// configuration errors still throw.
inline IdentifyReport identify(const Eigen::Ref<const Matrix>& X, const PipelineConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const int m = static_cast<int>(X.rows());
  const int k = cfg.k.value_or(m - 1);
  if (m < 2) throw ConfigError("identify: need at least two mixtures");
  if (cfg.n <= m) throw ConfigError("identify: n must exceed m");
  if (k < 1 || k > m - 1) throw ConfigError("identify: k must satisfy 1 <= k <= m-1");

  IdentifyReport report;
  report.m = m;
  report.n = cfg.n;
  report.k = k;
  report.algorithm = (k == m - 1) ? cfg.algorithm : Algorithm::evd;

  RansacConfig sub = default_subspace_config(m, cfg.n, k, X.cols(), cfg.sigma_off, derive_seed(cfg.seed, 100));
  if (cfg.th1) sub.dist_threshold = *cfg.th1;
  if (cfg.min_inliers) sub.min_inliers = *cfg.min_inliers;
  if (cfg.max_iterations) sub.max_iterations = *cfg.max_iterations;
  report.th1 = sub.dist_threshold;
  report.min_inliers = sub.min_inliers;
  report.subspace_iterations = sub.max_iterations;

  try {
    report.ocs = identify_ocs(X, cfg.n, k, sub);
  } catch (const SubspaceShortfall& e) {
    report.ocs = e.partial();
    report.status = PipelineStatus::subspace_shortfall;
  }
  const auto after_ocs = clock::now();
  report.ocs_ms = std::chrono::duration<double, std::milli>(after_ocs - start).count();

  if (report.algorithm == Algorithm::evd) {
    try {
      report.mixing = identify_mixing_evd(report.ocs, cfg.n, k);
    } catch (const IncompleteOcs&) {
      report.mixing.resize(m, 0);
      report.status = PipelineStatus::incomplete_ocs;
    }
  } else {
    MixingRansacConfig mix = default_mixing_config(m, cfg.n, k, cfg.sigma_off, derive_seed(cfg.seed, 200));
    if (cfg.th2) mix.ransac.dist_threshold = *cfg.th2;
    if (cfg.th3) mix.th3 = *cfg.th3;
    if (cfg.max_outer) mix.max_outer = *cfg.max_outer;
    report.th2 = mix.ransac.dist_threshold;
    report.th3 = mix.th3;
    report.max_outer = mix.max_outer;
    const auto f = static_cast<Index>(binomial(cfg.n - 1, k - 1));
    const auto c = static_cast<Index>(binomial(cfg.n, k));
    const Index present = static_cast<Index>(report.ocs.size()) * (m - k);
    // Every missing complement column can cost a mixing vector at most one
    // orthogonal column, so a partial set lowers the reachable consensus.
    const Index missing = c * (m - k) - present;
    if (missing > 0) {
      const Index reachable = std::max<Index>(m, f - missing);
      mix.ransac.min_inliers = std::min(mix.ransac.min_inliers, reachable);
      if (mix.ransac.stop_at > 0) mix.ransac.stop_at = std::min(mix.ransac.stop_at, reachable);
    }
    report.mixing_min_inliers = mix.ransac.min_inliers;
    if (present < mix.ransac.min_inliers) {
      report.mixing.resize(m, 0);
      if (report.status == PipelineStatus::ok) report.status = PipelineStatus::incomplete_ocs;
    } else {
      try {
        auto found = identify_mixing_ransac(report.ocs, cfg.n, k, mix);
        report.mixing = std::move(found.mixing);
        report.outer_passes = found.outer_passes;
        report.cluster_counts = found.clusters.counts();
      } catch (const IdentificationTimeout& e) {
        report.mixing = e.partial().mixing;
        report.outer_passes = e.partial().outer_passes;
        report.cluster_counts = e.partial().clusters.counts();
        if (report.status == PipelineStatus::ok) report.status = PipelineStatus::identification_timeout;
      }
    }
  }
  const auto end = clock::now();
  report.mixing_ms = std::chrono::duration<double, std::milli>(end - after_ocs).count();
  report.runtime_ms = std::chrono::duration<double, std::milli>(end - start).count();
  return report;
}

inline nlohmann::json report_to_json(const IdentifyReport& r) {
  return nlohmann::json{{"status", to_string(r.status)},
                        {"algorithm", to_string(r.algorithm)},
                        {"m", r.m},
                        {"n", r.n},
                        {"k", r.k},
                        {"vectors_found", r.mixing.cols()},
                        {"subspaces_found", r.ocs.size()},
                        {"subspace_inlier_counts", r.ocs.inlier_counts},
                        {"thresholds", {{"th1", r.th1}, {"th2", r.th2}, {"th3", r.th3}}},
                        {"min_inliers", r.min_inliers},
                        {"mixing_min_inliers", r.mixing_min_inliers},
                        {"subspace_iterations", r.subspace_iterations},
                        {"max_outer", r.max_outer},
                        {"outer_passes", r.outer_passes},
                        {"cluster_counts", r.cluster_counts},
                        {"ocs_ms", r.ocs_ms},
                        {"mixing_ms", r.mixing_ms},
                        {"runtime_ms", r.runtime_ms}};
}

} // namespace ksca
