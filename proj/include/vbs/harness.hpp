#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vbs/deciders.hpp"
#include "vbs/environment.hpp"
#include "vbs/meta.hpp"
#include "vbs/policy_space.hpp"

namespace vbs {

// Columnar per-round log of one run (one seed, one decider or one meta pool).
struct RunResult {
  std::string label;
  std::uint64_t seed = 0;
  std::vector<std::int32_t> arms;
  std::vector<std::int8_t> algos;   // meta runs; 0 for solo
  std::vector<double> rewards;      // scaled, [0, 1]
  std::vector<double> utilities;    // raw utility
  std::vector<double> watts;
  std::vector<std::int8_t> xi;      // feedback gate; 1 for solo
  std::vector<std::int64_t> decide_ns;

  // Run-wide invariant diagnostics.
  DistributionDiag policy_diag;   // BSvBS distribution, when present
  DistributionDiag meta_diag;     // meta distribution, when applicable
  double max_rho = 0.0;
  std::vector<long> feedback_granted;  // per algorithm (meta runs)
  std::vector<long> feedback_blocked;
  std::vector<long> times_chosen;

  long horizon() const { return static_cast<long>(rewards.size()); }
  double cumulative_reward() const;
  double mean_watts() const;
};

// Best fixed arm in hindsight on a realized context sequence.
struct OracleResult {
  std::size_t arm = 0;
  double cumulative_reward = 0.0;
  std::vector<double> prefix;  // cumulative reward of that arm per round
};

struct RegretReport {
  std::size_t oracle_arm = 0;
  double oracle_cumulative = 0.0;
  std::vector<double> regret;      // R_t per round
  std::vector<double> avg_regret;  // R_t / t
  double final_regret = 0.0;
  double final_avg_regret = 0.0;
  // Meta decomposition (filled when solo thinned references are available).
  std::optional<double> meta_regret;        // R^M
  std::optional<double> meta_vs_best_algo;  // R^M1
  std::optional<double> best_algo_vs_best_policy;  // R^M2
  std::optional<std::size_t> best_algo;
};

// Realized context sequence for one seed.
std::vector<Context> make_contexts(const RewardEngine& engine,
                                   const ScenarioSpec& scenario, long horizon,
                                   std::uint64_t env_seed);

// Exhaustive best fixed arm on the realized sequence (lowest index wins
// ties). The per-arm totals accumulate in round order, matching a naive
// arm-by-arm summation bit for bit.
OracleResult oracle_best_fixed(const RewardEngine& engine,
                               const std::vector<Context>& contexts);

// Same contract for an explicit reward matrix (rewards[t][arm]).
OracleResult oracle_best_fixed(const std::vector<std::vector<double>>& rewards);

// Per-round minimum achievable watts, averaged over the sequence.
double ideal_min_watts(const RewardEngine& engine,
                       const std::vector<Context>& contexts);

// One decider against one realized sequence. The decider observes the
// previous round's context (there is nothing else to observe before the
// round plays out); rewards are measured under the current round's context.
RunResult run_solo(Decider& decider, const RewardEngine& engine,
                   const std::vector<Context>& contexts, std::uint64_t seed,
                   double thin_probability = 1.0);

// Meta run over a decider pool on one realized sequence.
RunResult run_meta(std::vector<std::unique_ptr<Decider>>& pool,
                   MetaLearner& meta, const RewardEngine& engine,
                   const std::vector<Context>& contexts, std::uint64_t seed);

// R_t = oracle prefix - run prefix, per round.
RegretReport regret_curve(const RunResult& run, const OracleResult& oracle);

// Eq-style split of the meta regret: R^M = R^M1 + R^M2 with the best
// algorithm estimated by thinned solo runs on the same realization.
RegretReport meta_regret_decomposition(
    const RunResult& meta_run, const std::vector<RunResult>& thinned_solo,
    const OracleResult& oracle);

// Percent power saved by `algo` against `competitor`, idle subtracted from
// both. Throws std::domain_error when the competitor sits at idle.
double power_saving(double algo_mean_watts, double competitor_mean_watts,
                    double idle_watts);

// Selection frequencies over the trailing `window` rounds (full log if the
// window is larger), in arm-index (grid) order.
std::vector<double> selection_histogram(const std::vector<std::int32_t>& arms,
                                        std::size_t num_arms, long window);

// Median of decide_ns over rounds [lo, hi) (1-based lo, exclusive hi).
double median_decide_ns(const RunResult& run, long lo, long hi);

// Per-seed derived streams used by reporting.
std::vector<double> prefix_sums(const std::vector<double>& x);

}  // namespace vbs
