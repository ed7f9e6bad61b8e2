#pragma once

// Column matching and error metrics between a true and an estimated mixing
// matrix. Estimation is only defined up to column order and sign, so the
// estimate is first aligned by an optimal assignment on angular cost.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ksca/errors.hpp"
#include "ksca/numerics.hpp"

namespace ksca {

/// Deviation below which a column counts as accurately identified, degrees.
inline constexpr double kAccuracyCutoffDeg = 0.1;

/// Angle between the lines spanned by u and v, in [0, pi/2] radians.
/// Uses 2*atan2(|u'-v'|, |u'+v'|) on the sign-aligned unit vectors, which
/// stays accurate for tiny angles where acos(|cos|) does not.
inline double line_angle(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw ZeroVector("line_angle: zero vector");
  Vector a = u / nu;
  Vector b = v / nv;
  if (a.dot(b) < 0.0) b = -b;
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

inline double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Minimum-cost assignment of every row to a distinct column (rows <= cols).
/// Kuhn-Munkres with potentials, O(rows^2 * cols).
inline std::vector<int> hungarian_assignment(const Matrix& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  if (rows > cols) throw ShapeMismatch("hungarian_assignment: more rows than columns");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<int> p(cols + 1, 0), way(cols + 1, 0);
  for (int i = 1; i <= rows; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(rows, -1);
  for (int j = 1; j <= cols; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

/// Same contract as hungarian_assignment, by exhaustive search.
inline std::vector<int> exhaustive_assignment(const Matrix& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  if (rows > cols) throw ShapeMismatch("exhaustive_assignment: more rows than columns");
  std::vector<int> current(rows, -1), best(rows, -1);
  std::vector<char> taken(cols, false);
  double best_cost = std::numeric_limits<double>::infinity();
  auto search = [&](auto&& self, int row, double acc) -> void {
    if (acc >= best_cost) return;
    if (row == rows) {
      best_cost = acc;
      best = current;
      return;
    }
    for (int j = 0; j < cols; ++j) {
      if (taken[j]) continue;
      taken[j] = true;
      current[row] = j;
      self(self, row + 1, acc + cost(row, j));
      taken[j] = false;
    }
  };
  search(search, 0, 0.0);
  return best;
}

struct MatchResult {
  std::vector<int> true_of_estimated;  // estimated column -> true column, -1 if unmatched
  std::vector<int> signs;              // +-1 per estimated column
  std::vector<double> angle_deg;       // per estimated column; NaN if unmatched
  std::vector<int> unmatched_true;     // true columns with no estimate
  Index accurate_count = 0;            // matched columns with angle < cutoff
  double cutoff_deg = kAccuracyCutoffDeg;

  bool is_accurate(std::size_t j) const { return true_of_estimated[j] >= 0 && angle_deg[j] < cutoff_deg; }
};

/// Aligns the columns of `estimated` with those of `truth` by minimizing the
/// total deviation angle. Exhaustive for up to 8 columns, Hungarian beyond.
inline MatchResult match_columns(const Eigen::Ref<const Matrix>& truth, const Eigen::Ref<const Matrix>& estimated,
                                 double cutoff_deg = kAccuracyCutoffDeg) {
  if (truth.rows() != estimated.rows())
    throw ShapeMismatch("match_columns: matrices have different row counts");
  require_finite(truth, "match_columns(A)");
  require_finite(estimated, "match_columns(Ahat)");
  const Index n = truth.cols();
  const Index e = estimated.cols();

  // Rows of the cost matrix are the smaller side so every row gets a partner.
  const bool est_rows = e <= n;
  const Index rows = est_rows ? e : n;
  const Index cols = est_rows ? n : e;
  Matrix cost(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      cost(i, j) = est_rows ? line_angle(estimated.col(i), truth.col(j)) : line_angle(truth.col(i), estimated.col(j));

  const auto assignment = cols <= 8 ? exhaustive_assignment(cost) : hungarian_assignment(cost);

  MatchResult out;
  out.cutoff_deg = cutoff_deg;
  out.true_of_estimated.assign(static_cast<std::size_t>(e), -1);
  out.signs.assign(static_cast<std::size_t>(e), 1);
  out.angle_deg.assign(static_cast<std::size_t>(e), std::numeric_limits<double>::quiet_NaN());
  for (Index i = 0; i < rows; ++i) {
    const Index est = est_rows ? i : assignment[i];
    const Index tru = est_rows ? assignment[i] : i;
    out.true_of_estimated[est] = static_cast<int>(tru);
  }
  std::vector<char> covered(static_cast<std::size_t>(n), false);
  for (Index j = 0; j < e; ++j) {
    const int t = out.true_of_estimated[j];
    if (t < 0) continue;
    covered[t] = true;
    out.signs[j] = truth.col(t).dot(estimated.col(j)) < 0.0 ? -1 : 1;
    out.angle_deg[j] = rad_to_deg(line_angle(truth.col(t), estimated.col(j)));
    if (out.angle_deg[j] < cutoff_deg) ++out.accurate_count;
  }
  for (Index t = 0; t < n; ++t)
    if (!covered[t]) out.unmatched_true.push_back(static_cast<int>(t));
  return out;
}

/// Sum of deviation angles (degrees) over all matched pairs.
inline double bas(const Eigen::Ref<const Matrix>& truth, const Eigen::Ref<const Matrix>& estimated,
                  const MatchResult& match) {
  (void)truth;
  (void)estimated;
  double total = 0.0;
  for (std::size_t j = 0; j < match.true_of_estimated.size(); ++j)
    if (match.true_of_estimated[j] >= 0) total += match.angle_deg[j];
  return total;
}

/// BAS restricted to the accurately identified pairs.
inline double bas_accurate(const MatchResult& match) {
  double total = 0.0;
  for (std::size_t j = 0; j < match.true_of_estimated.size(); ++j)
    if (match.is_accurate(j)) total += match.angle_deg[j];
  return total;
}

/// ||A - Ahat|| over matched columns, Ahat permuted and sign-aligned. Columns
/// are unit-normalized first.
inline double frob_error(const Eigen::Ref<const Matrix>& truth, const Eigen::Ref<const Matrix>& estimated,
                         const MatchResult& match) {
  double sum = 0.0;
  for (std::size_t j = 0; j < match.true_of_estimated.size(); ++j) {
    const int t = match.true_of_estimated[j];
    if (t < 0) continue;
    const Vector a = truth.col(t).normalized();
    const Vector b = static_cast<double>(match.signs[j]) * estimated.col(static_cast<Index>(j)).normalized();
    sum += (a - b).squaredNorm();
  }
  return std::sqrt(sum);
}

} // namespace ksca
