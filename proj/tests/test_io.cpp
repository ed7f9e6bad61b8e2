#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "ksca/datagen.hpp"
#include "ksca/io.hpp"
#include "ksca/subspace_id.hpp"
#include "test_support.hpp"

using namespace ksca;
using ksca::testing::TempDir;

TEST(Csv, RoundTripIsExact) {
  std::mt19937_64 rng(1);
  Matrix m = ksca::testing::gaussian(3, 17, rng);
  m(0, 0) = 1e-300;
  m(1, 0) = -0.0;
  TempDir dir("csv");
  io::write_matrix_csv(dir.path() / "m.csv", m);
  const Matrix back = io::read_matrix_csv(dir.path() / "m.csv");
  EXPECT_TRUE((back.array() == m.array()).all());
}

TEST(Csv, RejectsMalformedInput) {
  std::istringstream ragged("1,2,3\n4,5\n");
  EXPECT_THROW(io::parse_matrix_csv(ragged, "ragged"), InvalidInput);
  std::istringstream text("1,abc\n");
  EXPECT_THROW(io::parse_matrix_csv(text, "text"), InvalidInput);
  std::istringstream nan("1,nan\n");
  EXPECT_THROW(io::parse_matrix_csv(nan, "nan"), InvalidInput);
  std::istringstream empty("");
  EXPECT_THROW(io::parse_matrix_csv(empty, "empty"), InvalidInput);
  EXPECT_THROW(io::read_matrix_csv("/nonexistent/x.csv"), IoError);
}

TEST(Sidecar, RoundTrip) {
  GenConfig cfg;
  cfg.m = 3;
  cfg.n = 4;
  cfg.T = 100;
  cfg.sigma_off = 0.001;
  cfg.seed = 0xFFFFFFFFFFFFFFFFull;
  cfg.support_mode = SupportMode::balanced;
  const auto src = gen_sparse_sources(cfg);
  const auto parsed = io::parse_sidecar(io::dataset_sidecar(cfg, src.supports));
  EXPECT_EQ(parsed.config.m, 3);
  EXPECT_EQ(parsed.config.n, 4);
  EXPECT_EQ(parsed.config.sparsity(), 2);
  EXPECT_EQ(parsed.config.T, 100);
  EXPECT_EQ(parsed.config.sigma_off, 0.001);
  EXPECT_EQ(parsed.config.seed, cfg.seed);
  EXPECT_EQ(parsed.config.support_mode, SupportMode::balanced);
  EXPECT_EQ(parsed.supports, src.supports);
  EXPECT_THROW(io::parse_sidecar(io::json{{"m", 3}}), InvalidInput);
}

TEST(OcsJson, RoundTrip) {
  GenConfig g;
  g.m = 3;
  g.n = 4;
  g.seed = 2;
  const Dataset d = generate_dataset(g);
  const OcsSet ocs = identify_ocs(d.X, 4, 2, default_subspace_config(3, 4, 2, 2000, 0.0, 1));
  const OcsSet back = io::ocs_from_json(io::json::parse(io::ocs_to_json(ocs).dump()));
  ASSERT_EQ(back.size(), ocs.size());
  for (std::size_t i = 0; i < ocs.size(); ++i) {
    EXPECT_TRUE((back.bases[i].array() == ocs.bases[i].array()).all());
    EXPECT_TRUE((back.spans[i].array() == ocs.spans[i].array()).all());
    EXPECT_EQ(back.inlier_counts[i], ocs.inlier_counts[i]);
  }
}

TEST(Json, ReadErrors) {
  TempDir dir("json");
  EXPECT_THROW(io::read_json(dir.path() / "missing.json"), IoError);
  std::ofstream(dir.path() / "bad.json") << "{not json";
  EXPECT_THROW(io::read_json(dir.path() / "bad.json"), InvalidInput);
}
