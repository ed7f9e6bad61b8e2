#include <gtest/gtest.h>

#include "property_checks.hpp"

using namespace ksca::testing;

namespace {

void expect_clean(const PropertyOutcome& p) {
  EXPECT_GE(p.cases, 1000);
  EXPECT_TRUE(p.passed()) << p.name << ": " << p.failures << " of " << p.cases << " failed, worst " << p.worst;
}

} // namespace

TEST(Properties, GramSchmidtOrthonormal) { expect_clean(check_gram_schmidt_orthonormal(2000, 1)); }
TEST(Properties, ProjectorIdempotent) { expect_clean(check_projector_idempotent(2000, 2)); }
TEST(Properties, ScorePythagoras) { expect_clean(check_score_pythagoras(2000, 3)); }
TEST(Properties, AcdRange) { expect_clean(check_acd_range(2000, 4)); }
TEST(Properties, BasInvariance) { expect_clean(check_bas_invariance(1000, 5)); }
TEST(Properties, SvdReconstruction) { expect_clean(check_svd_reconstruction(1000, 6)); }
TEST(Properties, EvdResidual) { expect_clean(check_evd_residual(1000, 7)); }
TEST(Properties, PipelineReproducible) { expect_clean(check_pipeline_reproducible(1000, 8)); }
