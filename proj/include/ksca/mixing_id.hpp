#pragma once

// Stage two: recover the mixing columns from the orthogonal complements.
// Each mixing vector is orthogonal to the f = C(n-1, k-1) complements of the
// supports it belongs to. identify_mixing_evd enumerates f-combinations;
// identify_mixing_ransac searches them with RANSAC and a generative
// clustering of the resulting normals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "ksca/combinatorics.hpp"
#include "ksca/errors.hpp"
#include "ksca/numerics.hpp"
#include "ksca/random.hpp"
#include "ksca/ransac.hpp"
#include "ksca/subspace_id.hpp"

namespace ksca {

struct AcdResult {
  double distance = 0.0;  // 1 - |cos|, in [0, 1]
  int sign = 1;           // sign of <a, p>
};

/// Absolute cosine distance between two nonzero vectors.
inline AcdResult acd(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& p) {
  const double na = a.norm();
  const double np = p.norm();
  if (na == 0.0 || np == 0.0) throw ZeroVector("acd: zero vector");
  const double dot = a.dot(p);
  const double cosine = std::clamp(dot / (na * np), -1.0, 1.0);
  return {1.0 - std::abs(cosine), dot < 0.0 ? -1 : 1};
}

/// Horizontal concatenation of the complement bases.
struct FlattenedOcs {
  Matrix matrix;                     // m x ((m-k) * c)
  std::vector<int> group_of_column;  // source subspace of each column
};

inline FlattenedOcs flatten(const OcsSet& ocs) {
  const Index b = ocs.complement_dim();
  FlattenedOcs out;
  out.matrix.resize(ocs.m, b * static_cast<Index>(ocs.size()));
  for (std::size_t i = 0; i < ocs.size(); ++i) {
    out.matrix.middleCols(static_cast<Index>(i) * b, b) = ocs.bases[i];
    for (Index j = 0; j < b; ++j) out.group_of_column.push_back(static_cast<int>(i));
  }
  return out;
}

/// Online clustering of candidate normals by absolute cosine distance.
class ClusterState {
public:
  explicit ClusterState(double th3) : th3_(th3) {}

  /// Merges p into the closest center when its ACD is below th3, otherwise
  /// opens a new center. Returns the index of the touched center.
  std::size_t absorb(const Eigen::Ref<const Vector>& p) {
    Vector unit = p / p.norm();
    if (centers_.empty()) {
      centers_.push_back(std::move(unit));
      counts_.push_back(1);
      return 0;
    }
    std::size_t closest = 0;
    AcdResult best{2.0, 1};
    for (std::size_t j = 0; j < centers_.size(); ++j) {
      const auto d = acd(centers_[j], unit);
      if (d.distance < best.distance) {
        best = d;
        closest = j;
      }
    }
    if (best.distance < th3_) {
      Vector merged = (centers_[closest] + static_cast<double>(best.sign) * unit) / 2.0;
      centers_[closest] = merged / merged.norm();
      ++counts_[closest];
      return closest;
    }
    centers_.push_back(static_cast<double>(best.sign) * unit);
    counts_.push_back(1);
    return centers_.size() - 1;
  }

  const std::vector<Vector>& centers() const { return centers_; }
  const std::vector<int>& counts() const { return counts_; }
  double th3() const { return th3_; }
  std::size_t size() const { return centers_.size(); }

  /// Centers as matrix columns, each sign-normalized.
  Matrix as_matrix(int m) const {
    Matrix out(m, static_cast<Index>(centers_.size()));
    for (std::size_t j = 0; j < centers_.size(); ++j) {
      out.col(static_cast<Index>(j)) = centers_[j];
      normalize_sign(out.col(static_cast<Index>(j)));
    }
    return out;
  }

private:
  std::vector<Vector> centers_;
  std::vector<int> counts_;
  double th3_;
};

struct EvdIdentification {
  Matrix mixing;                // m x n, sign-normalized, ascending eigenvalue order
  Vector eigenvalues;           // the n smallest recorded minimum eigenvalues
  std::uint64_t combinations = 0;
};

inline constexpr std::uint64_t kMaxEvdCombinations = 1000000;

/// Exhaustive route: for every f-combination of complements, the eigenvector
/// of the smallest eigenvalue of sum(P_i P_i^T); keeps the n best.
inline EvdIdentification identify_mixing_evd_report(const OcsSet& ocs, int n, int k,
                                                    std::uint64_t max_combinations = kMaxEvdCombinations) {
  if (k < 1 || n <= k) throw ConfigError("identify_mixing_evd: need 1 <= k < n");
  if (ocs.k != k) throw ConfigError("identify_mixing_evd: OcsSet was built for a different k");
  const std::uint64_t c = binomial(n, k);
  if (ocs.size() < c)
    throw IncompleteOcs("identify_mixing_evd: " + std::to_string(ocs.size()) + " of " + std::to_string(c) +
                        " subspaces available");
  const std::uint64_t f = binomial(n - 1, k - 1);
  std::uint64_t g = 0;
  try {
    g = binomial(c, f);
  } catch (const DomainError&) {
    throw CombinatorialBudgetExceeded("identify_mixing_evd: C(c, f) overflows");
  }
  if (g > max_combinations)
    throw CombinatorialBudgetExceeded("identify_mixing_evd: " + std::to_string(g) + " combinations exceed budget " +
                                      std::to_string(max_combinations));

  const int m = ocs.m;
  std::vector<Matrix> gram;
  gram.reserve(c);
  for (std::size_t i = 0; i < c; ++i) gram.push_back(ocs.bases[i] * ocs.bases[i].transpose());

  // Max-heap on (eigenvalue, combination index) keeps the n smallest.
  using Entry = std::pair<double, std::uint64_t>;
  std::priority_queue<Entry> best;
  std::vector<std::pair<std::uint64_t, Vector>> kept;

  std::vector<int> combo(static_cast<std::size_t>(f));
  for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = static_cast<int>(i);
  std::uint64_t index = 0;
  Matrix r(m, m);
  do {
    r.setZero();
    for (int i : combo) r += gram[i];
    Eigen::SelfAdjointEigenSolver<Matrix> solver(r);
    if (solver.info() != Eigen::Success) throw ConvergenceFailure("identify_mixing_evd: EVD failed");
    const double lambda = solver.eigenvalues()(0);
    const Entry entry{lambda, index};
    if (best.size() < static_cast<std::size_t>(n) || entry < best.top()) {
      best.push(entry);
      kept.emplace_back(index, solver.eigenvectors().col(0));
      if (best.size() > static_cast<std::size_t>(n)) {
        const auto dropped = best.top().second;
        best.pop();
        std::erase_if(kept, [dropped](const auto& e) { return e.first == dropped; });
      }
    }
    ++index;
  } while (next_combination(combo, static_cast<int>(c)));

  std::vector<Entry> ordered;
  while (!best.empty()) {
    ordered.push_back(best.top());
    best.pop();
  }
  std::reverse(ordered.begin(), ordered.end());

  EvdIdentification out;
  out.combinations = g;
  out.mixing.resize(m, static_cast<Index>(ordered.size()));
  out.eigenvalues.resize(static_cast<Index>(ordered.size()));
  for (std::size_t j = 0; j < ordered.size(); ++j) {
    const auto it = std::find_if(kept.begin(), kept.end(), [&](const auto& e) { return e.first == ordered[j].second; });
    out.mixing.col(static_cast<Index>(j)) = it->second / it->second.norm();
    normalize_sign(out.mixing.col(static_cast<Index>(j)));
    out.eigenvalues(static_cast<Index>(j)) = ordered[j].first;
  }
  return out;
}

inline Matrix identify_mixing_evd(const OcsSet& ocs, int n, int k,
                                  std::uint64_t max_combinations = kMaxEvdCombinations) {
  return identify_mixing_evd_report(ocs, n, k, max_combinations).mixing;
}

struct MixingRansacConfig {
  RansacConfig ransac;  // sample_size is forced to m - 1
  double th3 = 1e-4;
  int max_outer = 250;
};

/// Th2: 1e-8 when noiseless, else 10 * sigma_off^2.
inline double default_mixing_threshold(double sigma_off) {
  return sigma_off > 0.0 ? 10.0 * sigma_off * sigma_off : 1e-8;
}

/// Defaults for the RANSAC route: l = m-1, min_inliers = f, the first trial
/// reaching f inliers wins, iteration budget from omega = f/c, th3 = 1e-4,
/// max_outer = 50 n.
inline MixingRansacConfig default_mixing_config(int m, int n, int k, double sigma_off, std::uint64_t seed) {
  const auto c = static_cast<double>(binomial(n, k));
  const auto f = static_cast<Index>(binomial(n - 1, k - 1));
  MixingRansacConfig cfg;
  cfg.ransac.sample_size = m - 1;
  cfg.ransac.dist_threshold = default_mixing_threshold(sigma_off);
  cfg.ransac.success_prob = 0.999;
  const double omega = std::min(0.5, static_cast<double>(f) / c);
  cfg.ransac.max_iterations = iteration_budget(omega, m - 1, cfg.ransac.success_prob);
  cfg.ransac.min_inliers = std::max<Index>(f, m - 1);
  cfg.ransac.stop_at = cfg.ransac.min_inliers;
  cfg.ransac.seed = seed;
  cfg.th3 = 1e-4;
  cfg.max_outer = 50 * n;
  return cfg;
}

struct MixingIdentification {
  Matrix mixing;  // m x (clusters found), sign-normalized
  ClusterState clusters{1e-4};
  std::vector<Vector> normals;  // every accepted candidate, in order
  std::vector<std::vector<Index>> consensus;  // flattened-column inliers per accepted candidate
  int outer_passes = 0;
};

class IdentificationTimeout : public Error {
public:
  explicit IdentificationTimeout(MixingIdentification partial)
      : Error("mixing identification stopped after " + std::to_string(partial.outer_passes) + " passes with " +
              std::to_string(partial.clusters.size()) + " vectors"),
        partial_(std::move(partial)) {}

  const MixingIdentification& partial() const { return partial_; }
  std::size_t clusters_found() const { return partial_.clusters.size(); }

private:
  MixingIdentification partial_;
};

/// RANSAC route (k = m-1 only). Each outer pass runs RANSAC over the
/// flattened complement vectors, takes the left singular vector of the
/// smallest singular value of the consensus set as candidate normal and
/// clusters it. The candidate order is reshuffled after every pass. Throws
/// IdentificationTimeout when max_outer passes end with fewer than n vectors.
inline MixingIdentification identify_mixing_ransac(const OcsSet& ocs, int n, int k, MixingRansacConfig cfg) {
  const int m = ocs.m;
  if (k != m - 1)
    throw ConfigError("identify_mixing_ransac: requires k = m-1; use identify_mixing_evd for k < m-1");
  if (ocs.k != k) throw ConfigError("identify_mixing_ransac: OcsSet was built for a different k");
  if (n < 1) throw ConfigError("identify_mixing_ransac: n must be positive");
  if (!(cfg.th3 > 0.0 && cfg.th3 <= 1.0)) throw ConfigError("identify_mixing_ransac: th3 must lie in (0, 1]");
  if (cfg.max_outer < 1) throw ConfigError("identify_mixing_ransac: max_outer must be >= 1");
  cfg.ransac.sample_size = m - 1;
  cfg.ransac.validate();

  const FlattenedOcs flat = flatten(ocs);
  const Index columns = flat.matrix.cols();
  const auto f = static_cast<Index>(binomial(n - 1, k - 1));
  if (columns < std::min<Index>(f, cfg.ransac.min_inliers))
    throw ConfigError("identify_mixing_ransac: " + std::to_string(columns) + " complement vectors, need at least " +
                      std::to_string(f));

  MixingIdentification out;
  out.clusters = ClusterState(cfg.th3);

  Rng shuffle_rng(derive_seed(cfg.ransac.seed, 0));
  std::vector<Index> order(static_cast<std::size_t>(columns));
  for (Index j = 0; j < columns; ++j) order[j] = j;

  const OcsEstimator estimator(m - 1);
  while (out.clusters.size() < static_cast<std::size_t>(n) && out.outer_passes < cfg.max_outer) {
    RansacConfig pass = cfg.ransac;
    pass.seed = derive_seed(cfg.ransac.seed, static_cast<std::uint64_t>(out.outer_passes) + 1);
    ++out.outer_passes;

    const Matrix candidates = detail::select_columns(flat.matrix, order);
    if (const auto found = ransac(estimator, candidates, pass)) {
      std::vector<Index> members;
      members.reserve(found->inliers.size());
      for (Index pos : found->inliers) members.push_back(order[pos]);
      std::sort(members.begin(), members.end());

      const auto svd = left_singular_vectors(detail::select_columns(flat.matrix, members));
      const Vector normal = svd.u.col(m - 1);
      out.clusters.absorb(normal);
      out.normals.push_back(normal);
      out.consensus.push_back(std::move(members));
    }
    std::shuffle(order.begin(), order.end(), shuffle_rng);
  }

  out.mixing = out.clusters.as_matrix(m);
  if (out.clusters.size() < static_cast<std::size_t>(n)) throw IdentificationTimeout(std::move(out));
  return out;
}

} // namespace ksca
