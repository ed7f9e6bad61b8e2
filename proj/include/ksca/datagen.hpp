#pragma once

// Synthetic k-sparse mixtures with known ground truth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ksca/combinatorics.hpp"
#include "ksca/errors.hpp"
#include "ksca/numerics.hpp"
#include "ksca/random.hpp"

namespace ksca {

enum class SupportMode { uniform, balanced };

inline const char* to_string(SupportMode mode) {
  return mode == SupportMode::balanced ? "balanced" : "uniform";
}

inline SupportMode support_mode_from_string(const std::string& s) {
  if (s == "uniform") return SupportMode::uniform;
  if (s == "balanced") return SupportMode::balanced;
  throw ConfigError("unknown support mode '" + s + "'");
}

/// Active entries are redrawn while |value| is below this floor.
inline constexpr double kActiveFloor = 0.1;

struct GenConfig {
  int m = 3;
  int n = 5;
  std::optional<int> k;  // defaults to m - 1
  Index T = 2000;
  double sigma_off = 0.0;
  std::uint64_t seed = 1;
  SupportMode support_mode = SupportMode::uniform;

  int sparsity() const { return k.value_or(m - 1); }
  std::uint64_t subspace_count() const { return binomial(n, sparsity()); }

  /// Throws ConfigError on invalid settings; returns non-fatal warnings.
  std::vector<std::string> validate() const {
    const int kk = sparsity();
    if (m < 2) throw ConfigError("m must be at least 2");
    if (n <= m) throw ConfigError("n must exceed m (underdetermined mixture)");
    if (kk < 1 || kk > m - 1) throw ConfigError("k must satisfy 1 <= k <= m-1");
    if (!(sigma_off >= 0.0) || !std::isfinite(sigma_off)) throw ConfigError("sigma_off must be a finite value >= 0");
    const std::uint64_t c = subspace_count();
    if (T < 1 || static_cast<std::uint64_t>(T) < c * static_cast<std::uint64_t>(kk + 1))
      throw ConfigError("T must be at least C(n,k)*(k+1) = " + std::to_string(c * (kk + 1)));
    std::vector<std::string> warnings;
    if (sigma_off >= 0.1)
      warnings.push_back("sigma_off >= 0.1: inactive sources are no longer small compared with active ones");
    return warnings;
  }
};

/// Random m x n matrix with unit-norm Gaussian columns. Every m-subset of
/// columns has full rank and every pair satisfies |cos| < 0.99; offending
/// columns are redrawn.
inline Matrix gen_mixing_matrix(int m, int n, std::uint64_t seed) {
  if (m < 2 || n <= m) throw ConfigError("gen_mixing_matrix: need n > m >= 2");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto draw_column = [&](Matrix& a, int j) {
    for (;;) {
      for (int i = 0; i < m; ++i) a(i, j) = normal(rng);
      const double norm = a.col(j).norm();
      if (norm > 1e-6) {
        a.col(j) /= norm;
        return;
      }
    }
  };

  Matrix a(m, n);
  for (int j = 0; j < n; ++j) draw_column(a, j);

  const auto subsets = k_subsets(n, m);
  constexpr int kMaxRounds = 1000;
  for (int round = 0; round < kMaxRounds; ++round) {
    int offending = -1;
    for (int i = 0; i < n && offending < 0; ++i)
      for (int j = i + 1; j < n; ++j)
        if (std::abs(a.col(i).dot(a.col(j))) >= 0.99) {
          offending = j;
          break;
        }
    if (offending < 0) {
      Matrix sub(m, m);
      for (const auto& s : subsets) {
        for (int c = 0; c < m; ++c) sub.col(c) = a.col(s[c]);
        if (rank_of(sub, 1e-8) < m) {
          offending = s.back();
          break;
        }
      }
    }
    if (offending < 0) return a;
    draw_column(a, offending);
  }
  throw GenerationFailure("gen_mixing_matrix: could not draw a well-conditioned matrix");
}

struct SparseSources {
  Matrix S;                                // n x T
  std::vector<std::vector<int>> supports;  // per column, sorted source indices
};

/// Exactly-k-sparse sources: active entries standard normal (|s| >= 0.1),
/// inactive entries N(0, sigma_off^2).
inline SparseSources gen_sparse_sources(const GenConfig& cfg) {
  cfg.validate();
  const int k = cfg.sparsity();
  const auto all_supports = k_subsets(cfg.n, k);
  const auto c = static_cast<Index>(all_supports.size());

  Rng rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<Index> which(cfg.T);
  if (cfg.support_mode == SupportMode::balanced) {
    for (Index t = 0; t < cfg.T; ++t) which[t] = t % c;
    std::shuffle(which.begin(), which.end(), rng);
  } else {
    std::uniform_int_distribution<Index> pick(0, c - 1);
    for (auto& w : which) w = pick(rng);
  }

  SparseSources out;
  out.S = Matrix::Zero(cfg.n, cfg.T);
  out.supports.reserve(cfg.T);
  for (Index t = 0; t < cfg.T; ++t) {
    const auto& support = all_supports[which[t]];
    std::size_t next = 0;
    for (int q = 0; q < cfg.n; ++q) {
      if (next < support.size() && support[next] == q) {
        double v = 0.0;
        do {
          v = normal(rng);
        } while (std::abs(v) < kActiveFloor);
        out.S(q, t) = v;
        ++next;
      } else if (cfg.sigma_off > 0.0) {
        out.S(q, t) = cfg.sigma_off * normal(rng);
      }
    }
    out.supports.push_back(support);
  }
  return out;
}

/// X = A * S.
inline Matrix mix(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& s) {
  if (a.cols() != s.rows())
    throw ShapeMismatch("mix: A has " + std::to_string(a.cols()) + " columns but S has " +
                        std::to_string(s.rows()) + " rows");
  require_finite(a, "mix(A)");
  require_finite(s, "mix(S)");
  return a * s;
}

struct Dataset {
  GenConfig config;
  Matrix A;
  Matrix S;
  Matrix X;
  std::vector<std::vector<int>> supports;
};

/// Mixing matrix, sources and mixtures from independent streams of cfg.seed.
inline Dataset generate_dataset(const GenConfig& cfg) {
  cfg.validate();
  Dataset d;
  d.config = cfg;
  d.A = gen_mixing_matrix(cfg.m, cfg.n, derive_seed(cfg.seed, 0));
  GenConfig source_cfg = cfg;
  source_cfg.seed = derive_seed(cfg.seed, 1);
  auto sources = gen_sparse_sources(source_cfg);
  d.S = std::move(sources.S);
  d.supports = std::move(sources.supports);
  d.X = mix(d.A, d.S);
  return d;
}

} // namespace ksca
