#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "ksca/bench.hpp"
#include "ksca/datagen.hpp"
#include "ksca/evaluation.hpp"
#include "ksca/io.hpp"
#include "ksca/pipeline.hpp"

namespace ksca::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("KSCA_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("KSCA_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  return 1;
}

std::vector<std::pair<int, int>> parse_sizes(const std::vector<std::string>& items) {
  std::vector<std::pair<int, int>> out;
  for (const auto& item : items) {
    const auto x = item.find_first_of("x,:");
    if (x == std::string::npos) throw ConfigError("size '" + item + "' is not of the form MxN");
    try {
      out.emplace_back(std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1)));
    } catch (const std::exception&) {
      throw ConfigError("size '" + item + "' is not of the form MxN");
    }
  }
  return out;
}

struct GenArgs {
  int m = 3;
  int n = 5;
  std::optional<int> k;
  long T = 2000;
  double sigma_off = 0.0;
  std::optional<std::uint64_t> seed;
  std::string support_mode = "uniform";
  std::string out = ".";
};

int cmd_gen(const GenArgs& a, std::ostream& out, std::ostream& err) {
  GenConfig cfg;
  cfg.m = a.m;
  cfg.n = a.n;
  cfg.k = a.k;
  cfg.T = a.T;
  cfg.sigma_off = a.sigma_off;
  cfg.seed = a.seed.value_or(default_seed());
  cfg.support_mode = support_mode_from_string(a.support_mode);
  for (const auto& w : cfg.validate()) err << "warning: " << w << '\n';

  const Dataset d = generate_dataset(cfg);
  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  io::write_matrix_csv(dir / "X.csv", d.X);
  io::write_matrix_csv(dir / "A.csv", d.A);
  io::write_matrix_csv(dir / "S.csv", d.S);
  io::write_json(dir / "dataset.json", io::dataset_sidecar(cfg, d.supports));
  out << "wrote X.csv (" << d.X.rows() << "x" << d.X.cols() << "), A.csv (" << d.A.rows() << "x" << d.A.cols()
      << "), S.csv (" << d.S.rows() << "x" << d.S.cols() << ") and dataset.json to " << dir.string() << '\n';
  return kOk;
}

struct IdentifyArgs {
  std::string input;
  int n = 0;
  std::optional<int> k;
  std::string algorithm = "ransac";
  double sigma_off = 0.0;
  std::optional<double> th1, th2, th3;
  std::optional<int> max_outer;
  std::optional<long> min_inliers;
  std::optional<int> max_iterations;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

int cmd_identify(const IdentifyArgs& a, std::ostream& out, std::ostream& err) {
  const Matrix X = io::read_matrix_csv(a.input);
  PipelineConfig cfg;
  cfg.n = a.n;
  cfg.k = a.k;
  cfg.algorithm = algorithm_from_string(a.algorithm);
  cfg.sigma_off = a.sigma_off;
  cfg.th1 = a.th1;
  cfg.th2 = a.th2;
  cfg.th3 = a.th3;
  cfg.max_outer = a.max_outer;
  if (a.min_inliers) cfg.min_inliers = *a.min_inliers;
  cfg.max_iterations = a.max_iterations;
  cfg.seed = a.seed.value_or(default_seed());

  const IdentifyReport report = identify(X, cfg);
  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  io::write_matrix_csv(dir / "Ahat.csv", report.mixing);
  json j = report_to_json(report);
  j["partial"] = !report.complete();
  j["input"] = a.input;
  j["seed"] = cfg.seed;
  io::write_json(dir / "report.json", j);
  io::write_json(dir / "ocs.json", io::ocs_to_json(report.ocs));

  out << "status " << to_string(report.status) << ": " << report.mixing.cols() << " of " << report.n
      << " mixing vectors, " << report.ocs.size() << " subspaces, " << report.runtime_ms << " ms\n";
  if (!report.complete()) {
    err << "identification incomplete (" << to_string(report.status) << "); partial results written\n";
    return kShortfall;
  }
  return kOk;
}

struct EvalArgs {
  std::string truth;
  std::string estimate;
  std::optional<std::string> out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Matrix A = io::read_matrix_csv(a.truth);
  const Matrix Ahat = io::read_matrix_csv(a.estimate);
  if (A.rows() != Ahat.rows()) throw ConfigError("eval: truth and estimate have different row counts");
  const MatchResult match = match_columns(A, Ahat);
  json angles = json::array();
  for (double v : match.angle_deg) angles.push_back(std::isnan(v) ? json(nullptr) : json(v));
  const json j{{"bas_deg", bas(A, Ahat, match)},
               {"bas_accurate_deg", bas_accurate(match)},
               {"frob", frob_error(A, Ahat, match)},
               {"n_accurate", match.accurate_count},
               {"n_true", A.cols()},
               {"n_estimated", Ahat.cols()},
               {"true_of_estimated", match.true_of_estimated},
               {"signs", match.signs},
               {"angle_deg", angles},
               {"unmatched_true", match.unmatched_true},
               {"accuracy_cutoff_deg", match.cutoff_deg}};
  if (a.out) io::write_json(*a.out, j);
  out << j.dump(2) << '\n';
  return kOk;
}

struct BenchArgs {
  std::string preset;
  std::vector<std::string> sizes;
  std::optional<int> k;
  std::optional<long> T;
  std::vector<double> sigma_offs;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::string algorithm = "ransac";
  std::string support_mode = "uniform";
  std::optional<double> th1, th2, th3;
  std::optional<int> max_outer;
  bool no_runtime = false;
  int jobs = 1;
  std::string out = "bench_out";
};

bench::ExperimentSpec spec_from(const BenchArgs& a) {
  bench::ExperimentSpec spec;
  if (a.preset == "table1") {
    spec.sizes = {{3, 5}};
    spec.sigma_offs = {0.0};
  } else if (a.preset == "fig3a") {
    spec.sizes = {{3, 4}, {3, 5}, {3, 6}, {4, 5}, {4, 6}};
    spec.sigma_offs = {1e-4, 1e-3, 1e-2};
  } else if (a.preset == "fig3b") {
    spec.sizes = {{3, 4}, {3, 5}, {3, 6}, {4, 5}, {4, 6}};
    spec.sigma_offs = {1e-3};
  } else if (!a.preset.empty()) {
    throw ConfigError("unknown preset '" + a.preset + "' (expected table1, fig3a or fig3b)");
  }
  if (!a.sizes.empty()) spec.sizes = parse_sizes(a.sizes);
  if (!a.sigma_offs.empty()) spec.sigma_offs = a.sigma_offs;
  spec.k = a.k;
  if (a.T) spec.T = *a.T;
  if (a.trials) spec.trials = *a.trials;
  spec.seed = a.seed.value_or(default_seed());
  spec.algorithm = algorithm_from_string(a.algorithm);
  spec.support_mode = support_mode_from_string(a.support_mode);
  spec.th1 = a.th1;
  spec.th2 = a.th2;
  spec.th3 = a.th3;
  spec.max_outer = a.max_outer;
  spec.record_runtime = !a.no_runtime;
  spec.jobs = a.jobs;
  return spec;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const auto spec = spec_from(a);
  const auto rows = bench::run(spec);
  bench::write_outputs(a.out, spec, rows);
  bench::write_summary_csv(out, bench::aggregate(rows));
  return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixing-matrix identification for k-sparse underdetermined mixtures"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic dataset (X.csv, A.csv, S.csv, dataset.json)");
  g->add_option("--m", gen.m, "Number of mixtures")->capture_default_str();
  g->add_option("--n", gen.n, "Number of sources")->capture_default_str();
  g->add_option("--k", gen.k, "Active sources per sample (default m-1)");
  g->add_option("--T", gen.T, "Number of samples")->capture_default_str();
  g->add_option("--sigma-off", gen.sigma_off, "Std-dev of inactive source entries")->capture_default_str();
  g->add_option("--seed", gen.seed, "RNG seed (default $KSCA_SEED or 1)");
  g->add_option("--support-mode", gen.support_mode, "uniform or balanced")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->capture_default_str();

  IdentifyArgs ident;
  auto* id = app.add_subcommand("identify", "Estimate the mixing matrix from X.csv");
  id->add_option("--input", ident.input, "Mixture matrix CSV (m rows, T columns)")->required();
  id->add_option("--n", ident.n, "Number of sources")->required();
  id->add_option("--k", ident.k, "Active sources per sample (default m-1)");
  id->add_option("--algorithm", ident.algorithm, "ransac or evd")->capture_default_str();
  id->add_option("--sigma-off", ident.sigma_off, "Expected inactive-source noise, used for default thresholds")
      ->capture_default_str();
  id->add_option("--th1", ident.th1, "Subspace search distance threshold");
  id->add_option("--th2", ident.th2, "Mixing-vector search distance threshold");
  id->add_option("--th3", ident.th3, "Clustering ACD threshold");
  id->add_option("--max-outer", ident.max_outer, "Outer passes of the mixing-vector search");
  id->add_option("--min-inliers", ident.min_inliers, "Minimum consensus per subspace");
  id->add_option("--max-iterations", ident.max_iterations, "RANSAC trials per subspace");
  id->add_option("--seed", ident.seed, "RNG seed (default $KSCA_SEED or 1)");
  id->add_option("--out", ident.out, "Output directory")->capture_default_str();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Compare an estimated mixing matrix with the truth");
  e->add_option("--truth", ev.truth, "True mixing matrix CSV")->required();
  e->add_option("--estimate", ev.estimate, "Estimated mixing matrix CSV")->required();
  e->add_option("--out", ev.out, "Also write the JSON report here");

  BenchArgs be;
  auto* b = app.add_subcommand("bench", "Run seeded Monte Carlo trials and write CSV summaries");
  b->add_option("--preset", be.preset, "table1, fig3a or fig3b");
  b->add_option("--sizes", be.sizes, "(m,n) pairs as MxN")->delimiter(',');
  b->add_option("--k", be.k, "Fixed k (default m-1 per size)");
  b->add_option("--T", be.T, "Samples per trial (default 2000)");
  b->add_option("--sigma-off", be.sigma_offs, "Noise levels")->delimiter(',');
  b->add_option("--trials", be.trials, "Trials per (size, noise level) (default 100)");
  b->add_option("--seed", be.seed, "Base seed (default $KSCA_SEED or 1)");
  b->add_option("--algorithm", be.algorithm, "ransac or evd")->capture_default_str();
  b->add_option("--support-mode", be.support_mode, "uniform or balanced")->capture_default_str();
  b->add_option("--th1", be.th1, "Subspace search distance threshold");
  b->add_option("--th2", be.th2, "Mixing-vector search distance threshold");
  b->add_option("--th3", be.th3, "Clustering ACD threshold");
  b->add_option("--max-outer", be.max_outer, "Outer passes of the mixing-vector search");
  b->add_flag("--no-runtime", be.no_runtime, "Write runtime_ms as 0 so output files are byte-reproducible");
  b->add_option("--jobs", be.jobs, "Worker threads")->capture_default_str();
  b->add_option("--out", be.out, "Output directory")->capture_default_str();

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << '\n';
    return kConfigError;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out, err);
    if (id->parsed()) return cmd_identify(ident, out, err);
    if (e->parsed()) return cmd_eval(ev, out);
    if (b->parsed()) return cmd_bench(be, out);
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << '\n';
    return kConfigError;
  } catch (const IoError& ex) {
    err << "io error: " << ex.what() << '\n';
    return kIoError;
  } catch (const InvalidInput& ex) {
    err << "input error: " << ex.what() << '\n';
    return kIoError;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

} // namespace ksca::cli
