#include <gtest/gtest.h>

#include <numeric>

#include "ksca/combinatorics.hpp"
#include "ksca/datagen.hpp"
#include "ksca/evaluation.hpp"
#include "ksca/mixing_id.hpp"
#include "ksca/subspace_id.hpp"
#include "test_support.hpp"

using namespace ksca;
using ksca::testing::gaussian;

namespace {

// Exact complement bases built from the true mixing matrix.
OcsSet exact_ocs(const Matrix& a, int k) {
  const int m = static_cast<int>(a.rows());
  OcsSet ocs;
  ocs.m = m;
  ocs.k = k;
  for (const auto& subset : k_subsets(static_cast<int>(a.cols()), k)) {
    Matrix cols(m, k);
    for (int c = 0; c < k; ++c) cols.col(c) = a.col(subset[c]);
    const OrthonormalBasis span = gram_schmidt(cols);
    ocs.spans.push_back(span.matrix());
    ocs.bases.push_back(orthogonal_complement(span));
    ocs.inlier_counts.push_back(0);
    ocs.inliers.emplace_back();
  }
  return ocs;
}

double max_angle_rad(const Matrix& a, const Matrix& b) {
  const MatchResult match = match_columns(a, b);
  double worst = 0.0;
  for (std::size_t j = 0; j < match.angle_deg.size(); ++j) {
    if (match.true_of_estimated[j] < 0) return 10.0;
    worst = std::max(worst, match.angle_deg[j] * std::numbers::pi / 180.0);
  }
  return match.unmatched_true.empty() ? worst : 10.0;
}

} // namespace

TEST(Acd, Examples) {
  Vector a(3), p(3);
  a << 1, 2, 3;
  EXPECT_NEAR(acd(a, a).distance, 0.0, 1e-15);
  p << 2, -1, 0;
  EXPECT_NEAR(acd(a, p).distance, 1.0, 1e-15);
  const auto anti = acd(a, -a);
  EXPECT_NEAR(anti.distance, 0.0, 1e-15);
  EXPECT_EQ(anti.sign, -1);
  EXPECT_THROW(acd(a, Vector::Zero(3)), ZeroVector);
}

TEST(Flatten, ColumnCountAndGroups) {
  const Matrix a = gen_mixing_matrix(4, 6, 3);
  const OcsSet ocs = exact_ocs(a, 2);
  const FlattenedOcs flat = flatten(ocs);
  EXPECT_EQ(flat.matrix.cols(), 2 * 15);
  EXPECT_EQ(flat.group_of_column.size(), 30u);
  EXPECT_EQ(flat.group_of_column[29], 14);
}

TEST(ClusterState, MergesAndRenormalizes) {
  ClusterState state(1e-4);
  Vector e0 = Vector::Unit(3, 0);
  EXPECT_EQ(state.absorb(e0), 0u);
  EXPECT_EQ(state.absorb(-2.0 * e0), 0u);
  EXPECT_EQ(state.absorb(Vector::Unit(3, 1)), 1u);
  Vector near = e0;
  near(2) = 1e-3;
  EXPECT_EQ(state.absorb(near), 0u);
  EXPECT_EQ(state.size(), 2u);
  EXPECT_EQ(state.counts(), (std::vector<int>{3, 1}));
  for (const Vector& c : state.centers()) EXPECT_NEAR(c.norm(), 1.0, 1e-15);
  EXPECT_GT(state.centers()[0](2), 0.0);
}

TEST(IdentifyMixingEvd, RecoversThreeByFour) {
  const Matrix a = gen_mixing_matrix(3, 4, 8);
  const auto report = identify_mixing_evd_report(exact_ocs(a, 2), 4, 2);
  EXPECT_EQ(report.combinations, 20u);
  EXPECT_LT(max_angle_rad(a, report.mixing), 1e-6);
  EXPECT_LT(report.eigenvalues.maxCoeff(), 1e-14);
}

TEST(IdentifyMixingEvd, FromIdentifiedSubspaces) {
  GenConfig g;
  g.m = 3;
  g.n = 4;
  g.seed = 19;
  const Dataset d = generate_dataset(g);
  const OcsSet ocs = identify_ocs(d.X, 4, 2, default_subspace_config(3, 4, 2, 2000, 0.0, 3));
  EXPECT_LT(max_angle_rad(d.A, identify_mixing_evd(ocs, 4, 2)), 1e-6);
}

TEST(IdentifyMixingEvd, CombinationCounts) {
  EXPECT_EQ(binomial(5, 2), 10u);
  EXPECT_EQ(binomial(4, 1), 4u);
  const Matrix a = gen_mixing_matrix(3, 5, 4);
  EXPECT_EQ(identify_mixing_evd_report(exact_ocs(a, 2), 5, 2).combinations, 210u);
  EXPECT_THROW(identify_mixing_evd(exact_ocs(a, 2), 5, 2, 100), CombinatorialBudgetExceeded);
}

TEST(IdentifyMixingEvd, LowerSparsity) {
  const Matrix a = gen_mixing_matrix(4, 5, 6);
  EXPECT_LT(max_angle_rad(a, identify_mixing_evd(exact_ocs(a, 2), 5, 2)), 1e-6);
}

TEST(IdentifyMixingEvd, IncompleteOcs) {
  const Matrix a = gen_mixing_matrix(3, 5, 4);
  OcsSet ocs = exact_ocs(a, 2);
  ocs.bases.pop_back();
  ocs.spans.pop_back();
  EXPECT_THROW(identify_mixing_evd(ocs, 5, 2), IncompleteOcs);
}

TEST(IdentifyMixingEvd, OrderInvariant) {
  const Matrix a = gen_mixing_matrix(3, 5, 12);
  const OcsSet ocs = exact_ocs(a, 2);
  const Matrix reference = identify_mixing_evd(ocs, 5, 2);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::size_t> perm(ocs.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    OcsSet shuffled = ocs;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      shuffled.bases[i] = ocs.bases[perm[i]];
      shuffled.spans[i] = ocs.spans[perm[i]];
    }
    EXPECT_LT(max_angle_rad(reference, identify_mixing_evd(shuffled, 5, 2)), 1e-9);
  }
}

TEST(IdentifyMixingRansac, MatchesEvdOnNoiselessPipeline) {
  GenConfig g;
  g.m = 3;
  g.n = 5;
  g.seed = 23;
  const Dataset d = generate_dataset(g);
  const OcsSet ocs = identify_ocs(d.X, 5, 2, default_subspace_config(3, 5, 2, 2000, 0.0, 3));
  const auto found = identify_mixing_ransac(ocs, 5, 2, default_mixing_config(3, 5, 2, 0.0, 7));
  const Matrix evd = identify_mixing_evd(ocs, 5, 2);
  EXPECT_LT(max_angle_rad(evd, found.mixing), 1e-6);
  EXPECT_LT(max_angle_rad(d.A, found.mixing), 1e-6);
}

TEST(IdentifyMixingRansac, SingleClusterTarget) {
  std::mt19937_64 rng(2);
  const Vector a = ksca::testing::unit(3, rng);
  OcsSet ocs;
  ocs.m = 3;
  ocs.k = 2;
  for (int i = 0; i < 6; ++i) {
    Vector v = gaussian(3, 1, rng).col(0);
    v -= a.dot(v) * a;
    ocs.bases.push_back(v.normalized());
    ocs.spans.push_back(Matrix::Zero(3, 2));
  }
  const auto found = identify_mixing_ransac(ocs, 1, 2, default_mixing_config(3, 1, 2, 0.0, 1));
  ASSERT_EQ(found.mixing.cols(), 1);
  EXPECT_EQ(found.outer_passes, 1);
  EXPECT_GT(std::abs(found.mixing.col(0).dot(a)), 1 - 1e-12);
}

TEST(IdentifyMixingRansac, AcceptedNormalsHaveConsensus) {
  GenConfig g;
  g.m = 4;
  g.n = 6;
  g.sigma_off = 1e-3;
  g.seed = 29;
  const Dataset d = generate_dataset(g);
  OcsSet ocs;
  try {
    ocs = identify_ocs(d.X, 6, 3, default_subspace_config(4, 6, 3, 2000, 1e-3, 3));
  } catch (const SubspaceShortfall& e) {
    ocs = e.partial();
  }
  const auto cfg = default_mixing_config(4, 6, 3, 1e-3, 5);
  MixingIdentification found;
  try {
    found = identify_mixing_ransac(ocs, 6, 3, cfg);
  } catch (const IdentificationTimeout& e) {
    found = e.partial();
  }
  const FlattenedOcs flat = flatten(ocs);
  const auto f = static_cast<Index>(binomial(5, 2));
  ASSERT_FALSE(found.normals.empty());
  for (const Vector& p : found.normals) {
    const Vector dots = (flat.matrix.transpose() * p).cwiseAbs();
    EXPECT_GE((dots.array() < std::sqrt(cfg.ransac.dist_threshold)).count(), f);
  }
  for (const Vector& c : found.clusters.centers()) EXPECT_NEAR(c.norm(), 1.0, 1e-12);
}

TEST(IdentifyMixingRansac, TimeoutCarriesPartial) {
  const Matrix a = gen_mixing_matrix(3, 5, 4);
  auto cfg = default_mixing_config(3, 5, 2, 0.0, 1);
  cfg.max_outer = 1;
  try {
    identify_mixing_ransac(exact_ocs(a, 2), 5, 2, cfg);
    FAIL() << "expected a timeout";
  } catch (const IdentificationTimeout& e) {
    EXPECT_EQ(e.clusters_found(), 1u);
    EXPECT_EQ(e.partial().mixing.cols(), 1);
  }
}

TEST(IdentifyMixingRansac, RequiresMaximalSparsity) {
  const Matrix a = gen_mixing_matrix(4, 5, 6);
  EXPECT_THROW(identify_mixing_ransac(exact_ocs(a, 2), 5, 2, default_mixing_config(4, 5, 2, 0.0, 1)), ConfigError);
}

TEST(IdentifyMixingRansac, Deterministic) {
  const Matrix a = gen_mixing_matrix(3, 6, 14);
  const OcsSet ocs = exact_ocs(a, 2);
  const auto cfg = default_mixing_config(3, 6, 2, 0.0, 77);
  const auto first = identify_mixing_ransac(ocs, 6, 2, cfg);
  const auto second = identify_mixing_ransac(ocs, 6, 2, cfg);
  EXPECT_TRUE((first.mixing.array() == second.mixing.array()).all());
  EXPECT_EQ(first.outer_passes, second.outer_passes);
}
