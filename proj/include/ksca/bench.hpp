#pragma once

// Monte Carlo experiment driver: generate, identify and score many seeded
// trials, then aggregate. Output rows depend only on the spec and seeds;
// trial order in the output never depends on thread scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ksca/datagen.hpp"
#include "ksca/errors.hpp"
#include "ksca/evaluation.hpp"
#include "ksca/io.hpp"
#include "ksca/pipeline.hpp"
#include "ksca/random.hpp"

namespace ksca::bench {

struct ExperimentSpec {
  std::vector<std::pair<int, int>> sizes{{3, 5}};  // (m, n)
  std::optional<int> k;                            // fixed k, else m-1 per row
  Index T = 2000;
  std::vector<double> sigma_offs{0.0};
  int trials = 100;
  std::uint64_t seed = 1;
  Algorithm algorithm = Algorithm::ransac;
  SupportMode support_mode = SupportMode::uniform;
  std::optional<double> th1;
  std::optional<double> th2;
  std::optional<double> th3;
  std::optional<int> max_outer;
  bool record_runtime = true;
  int jobs = 1;

  void validate() const {
    if (trials < 1) throw ConfigError("bench: trials must be >= 1");
    if (sizes.empty()) throw ConfigError("bench: no (m, n) pairs");
    if (sigma_offs.empty()) throw ConfigError("bench: no sigma_off levels");
    if (jobs < 1) throw ConfigError("bench: jobs must be >= 1");
    for (const auto& [m, n] : sizes) {
      GenConfig g;
      g.m = m;
      g.n = n;
      g.k = k;
      g.T = T;
      for (double s : sigma_offs) {
        g.sigma_off = s;
        g.validate();
      }
    }
  }
};

struct TrialRow {
  int m = 0;
  int n = 0;
  int k = 0;
  Index T = 0;
  double sigma_off = 0.0;
  std::uint64_t seed = 0;
  double bas_deg = 0.0;           // over all matched columns
  double frob = 0.0;
  Index n_accurate = 0;
  double runtime_ms = 0.0;
  double bas_accurate_deg = 0.0;  // over accurately identified columns only
  Index n_found = 0;
  std::string status;
};

inline const char* kTrialHeader =
    "m,n,k,T,sigma_off,seed,bas_deg,frob,n_accurate,runtime_ms,bas_accurate_deg,n_found,status";

/// Seed of one trial; the dataset uses it directly, identification uses
/// derive_seed(seed, 7).
inline std::uint64_t trial_seed(std::uint64_t base, std::size_t row, int trial) {
  return derive_seed(derive_seed(base, row), static_cast<std::uint64_t>(trial));
}

inline TrialRow run_trial(int m, int n, double sigma_off, std::uint64_t seed, const ExperimentSpec& spec) {
  TrialRow row;
  row.m = m;
  row.n = n;
  row.k = spec.k.value_or(m - 1);
  row.T = spec.T;
  row.sigma_off = sigma_off;
  row.seed = seed;
  try {
    GenConfig g;
    g.m = m;
    g.n = n;
    g.k = row.k;
    g.T = spec.T;
    g.sigma_off = sigma_off;
    g.seed = seed;
    g.support_mode = spec.support_mode;
    const Dataset data = generate_dataset(g);

    PipelineConfig pc;
    pc.n = n;
    pc.k = row.k;
    pc.algorithm = spec.algorithm;
    pc.sigma_off = sigma_off;
    pc.th1 = spec.th1;
    pc.th2 = spec.th2;
    pc.th3 = spec.th3;
    pc.max_outer = spec.max_outer;
    pc.seed = derive_seed(seed, 7);
    const IdentifyReport report = identify(data.X, pc);

    row.status = to_string(report.status);
    row.runtime_ms = spec.record_runtime ? report.runtime_ms : 0.0;
    row.n_found = report.mixing.cols();
    if (row.n_found > 0) {
      const MatchResult match = match_columns(data.A, report.mixing);
      row.bas_deg = bas(data.A, report.mixing, match);
      row.bas_accurate_deg = bas_accurate(match);
      row.frob = frob_error(data.A, report.mixing, match);
      row.n_accurate = match.accurate_count;
    }
  } catch (const Error& e) {
    row.status = std::string("error: ") + e.what();
  }
  return row;
}

/// All trials of the spec, ordered by (size row, sigma level, trial).
inline std::vector<TrialRow> run(const ExperimentSpec& spec) {
  spec.validate();
  struct Job {
    int m, n;
    double sigma;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  std::size_t row_index = 0;
  for (const auto& [m, n] : spec.sizes)
    for (double s : spec.sigma_offs) {
      for (int t = 0; t < spec.trials; ++t) jobs.push_back({m, n, s, trial_seed(spec.seed, row_index, t)});
      ++row_index;
    }

  std::vector<TrialRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++)
      rows[i] = run_trial(jobs[i].m, jobs[i].n, jobs[i].sigma, jobs[i].seed, spec);
  };
  const int threads = std::min<int>(spec.jobs, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  return rows;
}

struct Aggregate {
  int m = 0;
  int n = 0;
  int k = 0;
  Index T = 0;
  double sigma_off = 0.0;
  int trials = 0;
  int complete = 0;                 // trials with status ok
  double mean_bas = 0.0;
  double median_bas = 0.0;
  double mean_log10_bas = 0.0;      // log10(max(bas, 1e-16))
  double mean_bas_accurate = 0.0;   // per-trial BAS over accurate columns, averaged
  double mean_angle_accurate = 0.0; // pooled mean deviation of accurate columns
  double mean_frob = 0.0;
  double median_frob = 0.0;
  double mean_n_accurate = 0.0;     // average accurately identified vectors per trial
  double accurate_fraction = 0.0;   // mean_n_accurate / n
  int all_accurate_trials = 0;      // trials with n accurate vectors
  double mean_runtime_ms = 0.0;
  double max_runtime_ms = 0.0;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Aggregates one group of rows (same m, n, k, T, sigma_off).
inline Aggregate aggregate_group(const std::vector<TrialRow>& rows) {
  Aggregate a;
  if (rows.empty()) return a;
  a.m = rows.front().m;
  a.n = rows.front().n;
  a.k = rows.front().k;
  a.T = rows.front().T;
  a.sigma_off = rows.front().sigma_off;
  a.trials = static_cast<int>(rows.size());
  std::vector<double> bases, frobs;
  double accurate_total = 0.0;
  double accurate_angle_sum = 0.0;
  for (const auto& r : rows) {
    if (r.status == "ok") ++a.complete;
    bases.push_back(r.bas_deg);
    frobs.push_back(r.frob);
    a.mean_bas += r.bas_deg;
    a.mean_log10_bas += std::log10(std::max(r.bas_deg, 1e-16));
    a.mean_bas_accurate += r.bas_accurate_deg;
    a.mean_frob += r.frob;
    a.mean_n_accurate += static_cast<double>(r.n_accurate);
    accurate_total += static_cast<double>(r.n_accurate);
    accurate_angle_sum += r.bas_accurate_deg;
    if (r.n_accurate == r.n) ++a.all_accurate_trials;
    a.mean_runtime_ms += r.runtime_ms;
    a.max_runtime_ms = std::max(a.max_runtime_ms, r.runtime_ms);
  }
  const double t = a.trials;
  a.mean_bas /= t;
  a.mean_log10_bas /= t;
  a.mean_bas_accurate /= t;
  a.mean_frob /= t;
  a.mean_n_accurate /= t;
  a.mean_runtime_ms /= t;
  a.accurate_fraction = a.mean_n_accurate / a.n;
  a.mean_angle_accurate = accurate_total > 0 ? accurate_angle_sum / accurate_total : std::nan("");
  a.median_bas = median(bases);
  a.median_frob = median(frobs);
  return a;
}

/// Groups consecutive rows sharing (m, n, k, T, sigma_off), preserving order.
inline std::vector<Aggregate> aggregate(const std::vector<TrialRow>& rows) {
  std::vector<Aggregate> out;
  std::vector<TrialRow> group;
  auto same = [](const TrialRow& a, const TrialRow& b) {
    return a.m == b.m && a.n == b.n && a.k == b.k && a.T == b.T && a.sigma_off == b.sigma_off;
  };
  for (const auto& r : rows) {
    if (!group.empty() && !same(group.front(), r)) {
      out.push_back(aggregate_group(group));
      group.clear();
    }
    group.push_back(r);
  }
  if (!group.empty()) out.push_back(aggregate_group(group));
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_trials_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  using io::format_double;
  out << kTrialHeader << '\n';
  for (const auto& r : rows)
    out << r.m << ',' << r.n << ',' << r.k << ',' << r.T << ',' << format_double(r.sigma_off) << ',' << r.seed << ','
        << format_double(r.bas_deg) << ',' << format_double(r.frob) << ',' << r.n_accurate << ','
        << format_double(r.runtime_ms) << ',' << format_double(r.bas_accurate_deg) << ',' << r.n_found << ','
        << csv_field(r.status) << '\n';
}

inline const char* kSummaryHeader =
    "m,n,k,T,sigma_off,trials,complete,mean_bas,median_bas,mean_log10_bas,mean_bas_accurate,mean_angle_accurate,"
    "mean_frob,median_frob,mean_n_accurate,accurate_fraction,all_accurate_trials,mean_runtime_ms,max_runtime_ms";

inline void write_summary_csv(std::ostream& out, const std::vector<Aggregate>& aggs) {
  using io::format_double;
  out << kSummaryHeader << '\n';
  for (const auto& a : aggs)
    out << a.m << ',' << a.n << ',' << a.k << ',' << a.T << ',' << format_double(a.sigma_off) << ',' << a.trials << ','
        << a.complete << ',' << format_double(a.mean_bas) << ',' << format_double(a.median_bas) << ','
        << format_double(a.mean_log10_bas) << ',' << format_double(a.mean_bas_accurate) << ','
        << format_double(a.mean_angle_accurate) << ',' << format_double(a.mean_frob) << ','
        << format_double(a.median_frob) << ',' << format_double(a.mean_n_accurate) << ','
        << format_double(a.accurate_fraction) << ',' << a.all_accurate_trials << ','
        << format_double(a.mean_runtime_ms) << ',' << format_double(a.max_runtime_ms) << '\n';
}

inline const char* kPlotHeader = "m,n,label,mean_log10_bas,median_bas,mean_bas_accurate,mean_n_accurate,accurate_fraction";

/// Plot-ready series for one sigma_off level: BAS against [m,n].
inline void write_plot_csv(std::ostream& out, const std::vector<Aggregate>& aggs, double sigma_off) {
  using io::format_double;
  out << kPlotHeader << '\n';
  for (const auto& a : aggs) {
    if (a.sigma_off != sigma_off) continue;
    out << a.m << ',' << a.n << ",\"[" << a.m << ',' << a.n << "]\"," << format_double(a.mean_log10_bas) << ','
        << format_double(a.median_bas) << ',' << format_double(a.mean_bas_accurate) << ','
        << format_double(a.mean_n_accurate) << ',' << format_double(a.accurate_fraction) << '\n';
  }
}

inline std::string plot_file_name(double sigma_off) { return "plot_sigma_" + io::format_double(sigma_off) + ".csv"; }

/// Writes trials.csv, summary.csv and one plot_sigma_<level>.csv per level.
inline void write_outputs(const std::filesystem::path& dir, const ExperimentSpec& spec,
                          const std::vector<TrialRow>& rows) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  auto open = [](const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw IoError("cannot open '" + p.string() + "' for writing");
    return f;
  };
  const auto aggs = aggregate(rows);
  {
    auto f = open(dir / "trials.csv");
    write_trials_csv(f, rows);
  }
  {
    auto f = open(dir / "summary.csv");
    write_summary_csv(f, aggs);
  }
  for (double s : spec.sigma_offs) {
    auto f = open(dir / plot_file_name(s));
    write_plot_csv(f, aggs, s);
  }
}

/// Parses a trials.csv produced by write_trials_csv.
inline std::vector<TrialRow> read_trials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTrialHeader) throw InvalidInput("trials csv: unexpected header");
  std::vector<TrialRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        f.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    f.push_back(std::move(cur));
    if (f.size() != 13) throw InvalidInput("trials csv: expected 13 fields");
    TrialRow r;
    r.m = std::stoi(f[0]);
    r.n = std::stoi(f[1]);
    r.k = std::stoi(f[2]);
    r.T = std::stol(f[3]);
    r.sigma_off = std::stod(f[4]);
    r.seed = std::stoull(f[5]);
    r.bas_deg = std::stod(f[6]);
    r.frob = std::stod(f[7]);
    r.n_accurate = std::stol(f[8]);
    r.runtime_ms = std::stod(f[9]);
    r.bas_accurate_deg = std::stod(f[10]);
    r.n_found = std::stol(f[11]);
    r.status = f[12];
    rows.push_back(std::move(r));
  }
  return rows;
}

} // namespace ksca::bench
