#pragma once

// Random sample consensus over column data. The generic engine takes an
// estimator supplying the fitting, degenerate and distance functions; the
// orthogonal-complement estimator below is the one both identification
// stages use.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ksca/errors.hpp"
#include "ksca/numerics.hpp"
#include "ksca/random.hpp"

namespace ksca {

struct RansacConfig {
  int sample_size = 2;             // l
  double dist_threshold = 1e-8;    // Th1 / Th2
  int max_iterations = 1000;       // counted over non-degenerate samples
  double success_prob = 0.999;     // pr
  Index min_inliers = 3;
  Index stop_at = 0;               // stop at the first trial with this many inliers (0: never)
  std::uint64_t seed = 1;

  void validate() const {
    if (sample_size < 1) throw ConfigError("ransac: sample size must be >= 1");
    if (!(dist_threshold > 0.0)) throw ConfigError("ransac: distance threshold must be positive");
    if (max_iterations < 1) throw ConfigError("ransac: max_iterations must be >= 1");
    if (!(success_prob > 0.0 && success_prob < 1.0)) throw ConfigError("ransac: success_prob must lie in (0,1)");
    if (min_inliers < sample_size) throw ConfigError("ransac: min_inliers must be >= sample size");
  }
};

/// ceil(log(1 - pr) / log(1 - omega^l)): trials needed to draw one all-inlier
/// sample with probability pr. Saturates at INT_MAX when omega^l underflows.
inline int expected_iterations(double omega, int l, double pr) {
  if (!(omega > 0.0 && omega <= 1.0) || l < 1 || !(pr > 0.0 && pr <= 1.0))
    throw DomainError("expected_iterations: arguments out of range");
  const double all_inlier = std::pow(omega, l);
  if (all_inlier >= 1.0) throw DomainError("expected_iterations: omega^l == 1");
  if (pr >= 1.0) throw DomainError("expected_iterations: pr == 1");
  const double denom = std::log1p(-all_inlier);
  if (denom == 0.0) return std::numeric_limits<int>::max();
  const double n = std::ceil(std::log1p(-pr) / denom);
  if (n >= static_cast<double>(std::numeric_limits<int>::max())) return std::numeric_limits<int>::max();
  return std::max(1, static_cast<int>(n));
}

/// Iteration budget for an inlier-fraction guess, capped.
inline int iteration_budget(double omega_hat, int l, double pr = 0.999, int cap = 10000) {
  return std::min(cap, expected_iterations(omega_hat, l, pr));
}

template <class E>
concept RansacEstimator = requires(const E& e, const Matrix& data, const typename E::Model& model) {
  typename E::Model;
  { e.sample_size() } -> std::convertible_to<int>;
  { e.is_degenerate(data) } -> std::convertible_to<bool>;
  { e.fit(data) } -> std::same_as<typename E::Model>;
  { e.refit(data) } -> std::same_as<typename E::Model>;
  { e.score_all(model, data) } -> std::convertible_to<Vector>;
};

template <class Model>
struct RansacResult {
  Model model;
  std::vector<Index> inliers;  // sorted column indices into the input data
  int trials = 0;
  int degenerate_draws = 0;
  int winning_trial = -1;
};

namespace detail {

inline Matrix select_columns(const Eigen::Ref<const Matrix>& data, const std::vector<Index>& cols) {
  Matrix out(data.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = data.col(cols[j]);
  return out;
}

inline Matrix select_columns(const Eigen::Ref<const Matrix>& data, const std::vector<int>& cols) {
  Matrix out(data.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = data.col(cols[j]);
  return out;
}

inline std::vector<Index> below(const Vector& scores, double threshold) {
  std::vector<Index> out;
  for (Index j = 0; j < scores.size(); ++j)
    if (scores(j) < threshold) out.push_back(j);
  return out;
}

} // namespace detail

/// Generic RANSAC. Degenerate samples are redrawn without consuming the
/// trial budget, up to 10 * max_iterations redraws. The winner has the most
/// inliers, ties going to the earlier trial; with cfg.stop_at set, the first
/// trial reaching that many inliers wins outright. The winner is refit on its
/// inliers until the inlier set is stable.
/// Returns nullopt (no consensus) when the best inlier count is below
/// cfg.min_inliers.
template <RansacEstimator E>
std::optional<RansacResult<typename E::Model>> ransac(const E& estimator, const Matrix& data,
                                                      const RansacConfig& cfg) {
  using Model = typename E::Model;
  cfg.validate();
  const int l = estimator.sample_size();
  const Index q = data.cols();
  if (q < l) return std::nullopt;

  Rng rng(cfg.seed);
  const long degenerate_cap = 10L * cfg.max_iterations;

  std::optional<Model> best;
  std::vector<Index> best_inliers;
  int trials = 0;
  int degenerate = 0;
  int winning = -1;

  while (trials < cfg.max_iterations) {
    const auto sample = sample_distinct(rng, static_cast<int>(q), l);
    const Matrix sel = detail::select_columns(data, sample);
    if (estimator.is_degenerate(sel)) {
      if (++degenerate > degenerate_cap) break;
      continue;
    }
    Model model = estimator.fit(sel);
    const Vector scores = estimator.score_all(model, data);
    auto inliers = detail::below(scores, cfg.dist_threshold);
    if (inliers.size() > best_inliers.size()) {
      best = std::move(model);
      best_inliers = std::move(inliers);
      winning = trials;
    }
    ++trials;
    if (cfg.stop_at > 0 && static_cast<Index>(best_inliers.size()) >= cfg.stop_at) break;
  }

  if (!best || static_cast<Index>(best_inliers.size()) < cfg.min_inliers) return std::nullopt;

  RansacResult<Model> result{*best, best_inliers, trials, degenerate, winning};
  std::vector<Index> current = best_inliers;
  constexpr int kMaxRefits = 10;
  for (int round = 0; round < kMaxRefits; ++round) {
    Model refit = estimator.refit(detail::select_columns(data, current));
    auto scored = detail::below(estimator.score_all(refit, data), cfg.dist_threshold);
    if (static_cast<Index>(scored.size()) < cfg.min_inliers) break;
    result.model = std::move(refit);
    result.inliers = scored;
    if (scored == current) break;
    current = std::move(scored);
  }
  return result;
}

/// Orthogonal-complement model of a sampled span: projector = I - B B^T,
/// where B is an orthonormal basis of the span.
struct OcsModel {
  OrthonormalBasis span;  // m x l
  Matrix complement;      // m x (m - l), orthonormal
  Matrix projector;       // m x m

  static OcsModel from_span(OrthonormalBasis basis) {
    OcsModel model;
    model.complement = orthogonal_complement(basis);
    model.projector = complement_projector(basis);
    model.span = std::move(basis);
    return model;
  }
};

/// Eq.-style fitting function: Gram-Schmidt on the sampled columns.
inline OcsModel fit_ocs_model(const Eigen::Ref<const Matrix>& selected) {
  return OcsModel::from_span(gram_schmidt(selected));
}

/// True when the sampled columns are rank deficient.
inline bool is_degenerate(const Eigen::Ref<const Matrix>& selected, double tol = kRankTol) {
  if (selected.cols() == 0) return true;
  return rank_of(selected, tol) < selected.cols();
}

/// Squared norm of the projection of x onto the model's complement.
inline double score(const OcsModel& model, const Eigen::Ref<const Vector>& x) {
  return (model.projector * x).squaredNorm();
}

/// score() for every column, using the complement basis (||N^T x|| = ||N N^T x||).
inline Vector score_all(const OcsModel& model, const Eigen::Ref<const Matrix>& data) {
  const Index b = model.complement.cols();
  if (b == 0) return Vector::Zero(data.cols());
  // One matrix-vector product per complement direction; this vectorizes,
  // colwise().squaredNorm() over short dynamic columns does not.
  Vector scores(data.cols());
  Vector proj(data.cols());
  scores.noalias() = data.transpose() * model.complement.col(0);
  scores = scores.array().square();
  for (Index r = 1; r < b; ++r) {
    proj.noalias() = data.transpose() * model.complement.col(r);
    scores.array() += proj.array().square();
  }
  return scores;
}

/// Best-fit l-dimensional span (top-l left singular vectors) of the columns.
inline OcsModel refit_ocs_model(const Eigen::Ref<const Matrix>& columns, int l) {
  const auto svd = left_singular_vectors(columns);
  return OcsModel::from_span(OrthonormalBasis(svd.u.leftCols(l)));
}

class OcsEstimator {
public:
  using Model = OcsModel;

  explicit OcsEstimator(int l) : l_(l) {}

  int sample_size() const { return l_; }
  bool is_degenerate(const Matrix& selected) const { return ksca::is_degenerate(selected); }
  Model fit(const Matrix& selected) const { return fit_ocs_model(selected); }
  Model refit(const Matrix& columns) const { return refit_ocs_model(columns, l_); }
  Vector score_all(const Model& model, const Matrix& data) const { return ksca::score_all(model, data); }

private:
  int l_;
};

/// Columns with norm below this are dropped before scoring.
inline constexpr double kMinColumnNorm = 1e-8;

/// Unit-normalizes the columns that are long enough; `kept` receives their
/// original indices.
inline Matrix normalize_columns(const Eigen::Ref<const Matrix>& data, std::vector<Index>& kept) {
  kept.clear();
  for (Index j = 0; j < data.cols(); ++j)
    if (data.col(j).norm() >= kMinColumnNorm) kept.push_back(j);
  Matrix out(data.rows(), static_cast<Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const auto col = data.col(kept[j]);
    out.col(static_cast<Index>(j)) = col / col.norm();
  }
  return out;
}

/// RANSAC search for one l-dimensional subspace among the columns of `data`.
/// Columns are unit-normalized first; returned inlier indices refer to the
/// columns of `data`.
inline std::optional<RansacResult<OcsModel>> run(const Eigen::Ref<const Matrix>& data, const RansacConfig& cfg) {
  require_finite(data, "ransac data");
  std::vector<Index> kept;
  const Matrix unit = normalize_columns(data, kept);
  auto result = ransac(OcsEstimator(cfg.sample_size), unit, cfg);
  if (!result) return std::nullopt;
  for (auto& j : result->inliers) j = kept[j];
  return result;
}

} // namespace ksca
