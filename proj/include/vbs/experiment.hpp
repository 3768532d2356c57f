#pragma once

#include <string>
#include <vector>

#include "vbs/config.hpp"
#include "vbs/harness.hpp"

namespace vbs {

// Everything produced for one seed of one experiment.
struct SeedOutputs {
  std::uint64_t seed = 0;
  std::vector<Context> contexts;        // shared environment realization
  OracleResult oracle;
  double ideal_min_watts = 0.0;
  std::vector<RunResult> runs;          // solo: one per decider; meta: the pool run
  std::vector<RunResult> thinned_solo;  // meta decomposition references
};

struct ExperimentResult {
  std::vector<std::string> run_labels;
  std::vector<SeedOutputs> seeds;
  double delta = 0.0;
  double idle_watts = 0.0;
};

// Runs all seeds (in parallel up to `threads`; 0 means hardware default).
// Results are deterministic functions of the config regardless of threads.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                int threads = 0);

// Writes the CSV artifacts and manifest for one experiment into
// config.output_dir (for sweeps: one subdirectory per delta plus a sweep
// summary). Returns the list of files written, relative to output_dir.
std::vector<std::string> write_experiment(const ExperimentConfig& config,
                                          const ExperimentResult& result);

// run + write; returns output_dir.
std::string execute_experiment(const ExperimentConfig& config,
                               int threads = 0, bool quiet = true);

}  // namespace vbs
