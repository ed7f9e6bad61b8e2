#pragma once

// Stage one: find the C(n,k) k-dimensional subspaces the mixture columns lie
// on, and their orthogonal complements, by repeated RANSAC with inlier
// removal.

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ksca/combinatorics.hpp"
#include "ksca/errors.hpp"
#include "ksca/numerics.hpp"
#include "ksca/random.hpp"
#include "ksca/ransac.hpp"

namespace ksca {

/// The identified subspaces. spans[i] (m x k) and bases[i] (m x (m-k)) are
/// orthonormal and mutually orthogonal; they are stored in discovery order.
struct OcsSet {
  int m = 0;
  int k = 0;
  std::vector<Matrix> spans;
  std::vector<Matrix> bases;
  std::vector<Index> inlier_counts;
  std::vector<std::vector<Index>> inliers;  // claimed mixture columns, pairwise disjoint

  std::size_t size() const { return bases.size(); }
  int complement_dim() const { return m - k; }
};

class SubspaceShortfall : public Error {
public:
  SubspaceShortfall(OcsSet partial, std::size_t expected)
      : Error("subspace identification found " + std::to_string(partial.size()) + " of " +
              std::to_string(expected) + " subspaces"),
        partial_(std::move(partial)),
        expected_(expected) {}

  const OcsSet& partial() const { return partial_; }
  std::size_t found() const { return partial_.size(); }
  std::size_t expected() const { return expected_; }

private:
  OcsSet partial_;
  std::size_t expected_;
};

/// Th1: 1e-12 when noiseless, else m * sigma_off^2.
inline double default_subspace_threshold(int m, double sigma_off) {
  return sigma_off > 0.0 ? m * sigma_off * sigma_off : 1e-12;
}

/// RANSAC settings for subspace search: l = k, omega guess 1/c for the
/// iteration budget, min_inliers = max(k+1, floor(T/(4c))).
inline RansacConfig default_subspace_config(int m, int n, int k, Index T, double sigma_off, std::uint64_t seed) {
  const auto c = static_cast<double>(binomial(n, k));
  RansacConfig cfg;
  cfg.sample_size = k;
  cfg.dist_threshold = default_subspace_threshold(m, sigma_off);
  cfg.success_prob = 0.999;
  cfg.max_iterations = iteration_budget(1.0 / c, k, cfg.success_prob);
  cfg.min_inliers = std::max<Index>(k + 1, static_cast<Index>(0.25 * static_cast<double>(T) / c));
  cfg.seed = seed;
  return cfg;
}

/// Runs the subspace search on the mixtures X (m x T). cfg.sample_size is
/// forced to k; iteration i uses the RANSAC seed derive_seed(cfg.seed, i).
/// Throws SubspaceShortfall, carrying everything found so far, when a round
/// ends without consensus.
inline OcsSet identify_ocs(const Eigen::Ref<const Matrix>& X, int n, int k, RansacConfig cfg) {
  require_finite(X, "identify_ocs");
  const int m = static_cast<int>(X.rows());
  if (k < 1 || k > m - 1) throw ConfigError("identify_ocs: k must satisfy 1 <= k <= m-1");
  if (n <= k) throw ConfigError("identify_ocs: n must exceed k");
  cfg.sample_size = k;
  cfg.validate();
  const std::uint64_t c = binomial(n, k);

  std::vector<Index> usable;
  const Matrix unit = normalize_columns(X, usable);
  if (static_cast<std::uint64_t>(usable.size()) < c * static_cast<std::uint64_t>(cfg.min_inliers))
    throw ConfigError("identify_ocs: " + std::to_string(usable.size()) + " usable columns, need at least " +
                      std::to_string(c * cfg.min_inliers));

  OcsSet out;
  out.m = m;
  out.k = k;

  // `remaining` holds positions into `unit` / `usable` that are still unclaimed.
  std::vector<Index> remaining(usable.size());
  for (std::size_t j = 0; j < remaining.size(); ++j) remaining[j] = static_cast<Index>(j);

  const OcsEstimator estimator(k);
  for (std::uint64_t i = 0; i < c; ++i) {
    RansacConfig round = cfg;
    round.seed = derive_seed(cfg.seed, i);
    const Matrix candidates = detail::select_columns(unit, remaining);
    const auto found = ransac(estimator, candidates, round);
    if (!found) throw SubspaceShortfall(std::move(out), c);

    std::vector<Index> claimed;
    claimed.reserve(found->inliers.size());
    for (Index pos : found->inliers) claimed.push_back(usable[remaining[pos]]);

    const auto svd = left_singular_vectors(detail::select_columns(X, claimed));
    out.spans.push_back(svd.u.leftCols(k));
    out.bases.push_back(svd.u.rightCols(m - k));
    out.inlier_counts.push_back(static_cast<Index>(claimed.size()));
    out.inliers.push_back(std::move(claimed));

    std::vector<Index> next;
    next.reserve(remaining.size() - found->inliers.size());
    auto in = found->inliers.begin();
    for (Index pos = 0; pos < static_cast<Index>(remaining.size()); ++pos) {
      if (in != found->inliers.end() && *in == pos) {
        ++in;
        continue;
      }
      next.push_back(remaining[pos]);
    }
    remaining = std::move(next);
  }
  return out;
}

} // namespace ksca
