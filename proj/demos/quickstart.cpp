// Generate one noiseless 3x5 instance, identify A from the mixtures alone,
// and report the error.

#include <iostream>

#include "ksca/datagen.hpp"
#include "ksca/evaluation.hpp"
#include "ksca/pipeline.hpp"

int main() {
  ksca::GenConfig gen;
  gen.m = 3;
  gen.n = 5;
  gen.T = 2000;
  gen.seed = 42;
  const ksca::Dataset data = ksca::generate_dataset(gen);

  ksca::PipelineConfig cfg;
  cfg.n = gen.n;
  cfg.seed = 7;
  const ksca::IdentifyReport report = ksca::identify(data.X, cfg);

  const auto match = ksca::match_columns(data.A, report.mixing);
  std::cout << "status:   " << ksca::to_string(report.status) << '\n'
            << "A:\n" << data.A << "\nAhat:\n" << report.mixing << '\n'
            << "BAS:      " << ksca::bas(data.A, report.mixing, match) << " deg\n"
            << "||A-Ahat||_F: " << ksca::frob_error(data.A, report.mixing, match) << '\n'
            << "runtime:  " << report.runtime_ms << " ms\n";
  return report.complete() ? 0 : 1;
}
