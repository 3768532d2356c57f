#include "vbs/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "vbs/kernels.hpp"

namespace vbs {

namespace {

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

double RunResult::cumulative_reward() const {
  return kernels::sum(rewards.data(), rewards.size());
}

double RunResult::mean_watts() const {
  if (watts.empty()) return 0.0;
  return kernels::sum(watts.data(), watts.size()) /
         static_cast<double>(watts.size());
}

std::vector<Context> make_contexts(const RewardEngine& engine,
                                   const ScenarioSpec& scenario, long horizon,
                                   std::uint64_t env_seed) {
  std::vector<Context> contexts;
  contexts.reserve(static_cast<std::size_t>(horizon));
  if (scenario.kind == ScenarioSpec::Kind::kTrace) {
    if (!engine.has_trace())
      throw std::invalid_argument("trace scenario requires a trace engine");
    for (long t = 1; t <= horizon; ++t)
      contexts.push_back(engine.trace().context_at(t));
    return contexts;
  }
  Rng rng(Rng::derive(env_seed, 0));
  for (long t = 1; t <= horizon; ++t)
    contexts.push_back(generate_context(scenario, t, rng));
  return contexts;
}

OracleResult oracle_best_fixed(const RewardEngine& engine,
                               const std::vector<Context>& contexts) {
  const std::size_t n = engine.space().size();
  std::vector<double> acc(n, 0.0), row(n, 0.0);
  RoundTables scratch;
  for (const Context& c : contexts) {
    engine.evaluate_all(c, scratch, row.data());
    kernels::add_inplace(acc.data(), row.data(), n);
  }
  OracleResult res;
  res.arm = kernels::argmax(acc.data(), n);
  res.cumulative_reward = acc[res.arm];
  res.prefix.reserve(contexts.size());
  double running = 0.0;
  for (const Context& c : contexts) {
    running += engine.evaluate_arm(res.arm, c).scaled;
    res.prefix.push_back(running);
  }
  return res;
}

OracleResult oracle_best_fixed(
    const std::vector<std::vector<double>>& rewards) {
  if (rewards.empty()) throw std::invalid_argument("empty reward matrix");
  const std::size_t n = rewards.front().size();
  std::vector<double> acc(n, 0.0);
  for (const auto& row : rewards) {
    if (row.size() != n)
      throw std::invalid_argument("ragged reward matrix");
    kernels::add_inplace(acc.data(), row.data(), n);
  }
  OracleResult res;
  res.arm = kernels::argmax(acc.data(), n);
  res.cumulative_reward = acc[res.arm];
  double running = 0.0;
  for (const auto& row : rewards) {
    running += row[res.arm];
    res.prefix.push_back(running);
  }
  return res;
}

double ideal_min_watts(const RewardEngine& engine,
                       const std::vector<Context>& contexts) {
  double total = 0.0;
  for (const Context& c : contexts) total += engine.min_watts(c);
  return total / static_cast<double>(contexts.size());
}

RunResult run_solo(Decider& decider, const RewardEngine& engine,
                   const std::vector<Context>& contexts, std::uint64_t seed,
                   double thin_probability) {
  const long horizon = static_cast<long>(contexts.size());
  RunResult run;
  run.label = std::string(decider.name());
  run.seed = seed;
  run.arms.reserve(horizon);
  run.algos.assign(horizon, 0);
  run.rewards.reserve(horizon);
  run.utilities.reserve(horizon);
  run.watts.reserve(horizon);
  run.xi.reserve(horizon);
  run.decide_ns.reserve(horizon);
  run.feedback_granted.assign(1, 0);
  run.feedback_blocked.assign(1, 0);
  run.times_chosen.assign(1, horizon);

  Rng algo_rng(Rng::derive(seed, 1));
  Rng gate_rng(Rng::derive(seed, 2));
  const bool thinned = thin_probability < 1.0;

  for (long t = 1; t <= horizon; ++t) {
    const std::optional<Context> observed =
        t >= 2 ? std::optional<Context>(contexts[t - 2]) : std::nullopt;
    const std::int64_t t0 = now_ns();
    const std::size_t arm = decider.decide(observed, algo_rng);
    run.decide_ns.push_back(now_ns() - t0);

    const Context& applied = contexts[t - 1];
    const Outcome o = engine.evaluate_arm(arm, applied);
    run.arms.push_back(static_cast<std::int32_t>(arm));
    run.rewards.push_back(o.scaled);
    run.utilities.push_back(o.utility);
    run.watts.push_back(o.watts);

    const bool allow = !thinned || gate_rng.bernoulli(thin_probability);
    if (allow) {
      decider.learn(arm, o.scaled, applied);
      run.feedback_granted[0] += 1;
    } else {
      run.feedback_blocked[0] += 1;
    }
    run.xi.push_back(allow ? 1 : 0);
  }
  if (const DistributionDiag* d = decider.distribution_diag())
    run.policy_diag = *d;
  return run;
}

RunResult run_meta(std::vector<std::unique_ptr<Decider>>& pool,
                   MetaLearner& meta, const RewardEngine& engine,
                   const std::vector<Context>& contexts, std::uint64_t seed) {
  const long horizon = static_cast<long>(contexts.size());
  RunResult run;
  run.label = "metbs";
  run.seed = seed;
  run.arms.reserve(horizon);
  run.algos.reserve(horizon);
  run.rewards.reserve(horizon);
  run.utilities.reserve(horizon);
  run.watts.reserve(horizon);
  run.xi.reserve(horizon);
  run.decide_ns.reserve(horizon);

  Rng rng(Rng::derive(seed, 3));

  for (long t = 1; t <= horizon; ++t) {
    const std::optional<Context> observed =
        t >= 2 ? std::optional<Context>(contexts[t - 2]) : std::nullopt;
    const Context& applied = contexts[t - 1];
    Outcome outcome;
    const MetaStepLog log = meta.step(
        pool, observed,
        [&](std::size_t arm) {
          outcome = engine.evaluate_arm(arm, applied);
          return std::make_pair(outcome.scaled, applied);
        },
        rng);
    run.arms.push_back(static_cast<std::int32_t>(log.arm));
    run.algos.push_back(static_cast<std::int8_t>(log.algo));
    run.rewards.push_back(log.reward);
    run.utilities.push_back(outcome.utility);
    run.watts.push_back(outcome.watts);
    run.xi.push_back(log.feedback_allowed ? 1 : 0);
    run.decide_ns.push_back(log.decide_ns);
  }
  for (const auto& d : pool) {
    if (const DistributionDiag* diag = d->distribution_diag()) {
      run.policy_diag.min_floor_margin = std::min(
          run.policy_diag.min_floor_margin, diag->min_floor_margin);
      run.policy_diag.max_sum_deviation = std::max(
          run.policy_diag.max_sum_deviation, diag->max_sum_deviation);
    }
  }
  run.meta_diag = meta.distribution_diag();
  run.max_rho = meta.max_rho();
  run.feedback_granted = meta.granted();
  run.feedback_blocked = meta.blocked();
  run.times_chosen = meta.chosen();
  return run;
}

std::vector<double> prefix_sums(const std::vector<double>& x) {
  std::vector<double> out;
  out.reserve(x.size());
  double running = 0.0;
  for (double v : x) {
    running += v;
    out.push_back(running);
  }
  return out;
}

RegretReport regret_curve(const RunResult& run, const OracleResult& oracle) {
  if (oracle.prefix.size() != run.rewards.size())
    throw std::invalid_argument(
        "regret aggregation: run length does not match the oracle");
  RegretReport rep;
  rep.oracle_arm = oracle.arm;
  rep.oracle_cumulative = oracle.cumulative_reward;
  rep.regret.reserve(run.rewards.size());
  rep.avg_regret.reserve(run.rewards.size());
  double running = 0.0;
  for (std::size_t t = 0; t < run.rewards.size(); ++t) {
    running += run.rewards[t];
    const double r = oracle.prefix[t] - running;
    rep.regret.push_back(r);
    rep.avg_regret.push_back(r / static_cast<double>(t + 1));
  }
  rep.final_regret = rep.regret.empty() ? 0.0 : rep.regret.back();
  rep.final_avg_regret = rep.avg_regret.empty() ? 0.0 : rep.avg_regret.back();
  return rep;
}

RegretReport meta_regret_decomposition(
    const RunResult& meta_run, const std::vector<RunResult>& thinned_solo,
    const OracleResult& oracle) {
  if (thinned_solo.empty())
    throw std::invalid_argument("decomposition needs at least one solo run");
  for (const RunResult& solo : thinned_solo)
    if (solo.horizon() != meta_run.horizon())
      throw std::invalid_argument(
          "regret aggregation: solo run length does not match the meta run");
  RegretReport rep = regret_curve(meta_run, oracle);
  std::size_t best = 0;
  double best_cum = thinned_solo[0].cumulative_reward();
  for (std::size_t j = 1; j < thinned_solo.size(); ++j) {
    const double cum = thinned_solo[j].cumulative_reward();
    if (cum > best_cum) {
      best = j;
      best_cum = cum;
    }
  }
  const double meta_cum = meta_run.cumulative_reward();
  rep.best_algo = best;
  rep.meta_vs_best_algo = best_cum - meta_cum;
  rep.best_algo_vs_best_policy = oracle.cumulative_reward - best_cum;
  rep.meta_regret = *rep.meta_vs_best_algo + *rep.best_algo_vs_best_policy;
  return rep;
}

double power_saving(double algo_mean_watts, double competitor_mean_watts,
                    double idle_watts) {
  const double denom = competitor_mean_watts - idle_watts;
  if (std::abs(denom) < 1e-12)
    throw std::domain_error("competitor consumption equals idle");
  return 100.0 * (1.0 - (algo_mean_watts - idle_watts) / denom);
}

std::vector<double> selection_histogram(const std::vector<std::int32_t>& arms,
                                        std::size_t num_arms, long window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  const long total = static_cast<long>(arms.size());
  const long take = std::min(window, total);
  std::vector<double> freq(num_arms, 0.0);
  for (long i = total - take; i < total; ++i)
    freq[static_cast<std::size_t>(arms[static_cast<std::size_t>(i)])] += 1.0;
  if (take > 0)
    for (double& f : freq) f /= static_cast<double>(take);
  return freq;
}

double median_decide_ns(const RunResult& run, long lo, long hi) {
  lo = std::max<long>(lo, 1);
  hi = std::min<long>(hi, run.horizon() + 1);
  if (hi <= lo) throw std::invalid_argument("empty latency range");
  std::vector<std::int64_t> v(run.decide_ns.begin() + (lo - 1),
                              run.decide_ns.begin() + (hi - 1));
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return static_cast<double>(v[mid]);
}

}  // namespace vbs
