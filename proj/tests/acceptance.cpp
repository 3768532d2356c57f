// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit status is nonzero if any
// criterion fails. Expected runtime is a few minutes on a 2-core desk
// machine; heavyweight runs are shared between criteria.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "vbs/config.hpp"
#include "vbs/deciders.hpp"
#include "vbs/environment.hpp"
#include "vbs/experiment.hpp"
#include "vbs/exp3.hpp"
#include "vbs/harness.hpp"
#include "vbs/kernels.hpp"
#include "vbs/meta.hpp"
#include "vbs/rng.hpp"

using namespace vbs;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

ExperimentConfig solo_config(const ScenarioSpec& scenario, long horizon,
                             int num_seeds,
                             std::vector<DeciderSpec> deciders) {
  ExperimentConfig cfg;
  cfg.scenario = scenario;
  cfg.space_preset = "paper1080";
  cfg.deciders = std::move(deciders);
  cfg.horizon = horizon;
  for (int i = 0; i < num_seeds; ++i) cfg.seeds.push_back(1 + i);
  cfg.histogram_window = std::max<long>(1, horizon / 10);
  return cfg;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Trailing mean reward of one algorithm over its own chosen rounds within
// [t - window, t). Returns NaN when the algorithm was never chosen there.
double trailing_algo_reward(const RunResult& run, std::size_t algo, long t,
                            long window) {
  const long lo = std::max<long>(0, t - window);
  double sum = 0.0;
  long count = 0;
  for (long i = lo; i < t; ++i) {
    if (run.algos[static_cast<std::size_t>(i)] ==
        static_cast<std::int8_t>(algo)) {
      sum += run.rewards[static_cast<std::size_t>(i)];
      ++count;
    }
  }
  return count == 0 ? std::nan("") : sum / static_cast<double>(count);
}

double trailing_selection_freq(const RunResult& run, std::size_t algo, long t,
                               long window) {
  const long lo = std::max<long>(0, t - window);
  long count = 0;
  for (long i = lo; i < t; ++i)
    if (run.algos[static_cast<std::size_t>(i)] ==
        static_cast<std::int8_t>(algo))
      ++count;
  return static_cast<double>(count) / static_cast<double>(t - lo);
}

}  // namespace

// --------------------------------------------------------------------------

static void criterion_1() {
  const double gamma = exp3::tune_gamma(1080, 50000);
  const double eta = tune_eta(2, 50000, 0.5, 1.0);
  const bool pass = std::abs(gamma - 0.2963) <= 0.0005 &&
                    std::abs(eta - 0.0342) <= 0.0005 &&
                    std::abs(gamma - 0.29) < 0.01 && std::abs(eta - 0.04) < 0.01;
  report("C1 tuning-formulas", pass,
         fmt("gamma(1080,50k)=%.4f (want 0.2963+-0.0005), "
             "eta(2,50k,1/2)=%.4f (want 0.0342+-0.0005)",
             gamma, eta));
}

struct BigRuns {
  ExperimentResult a, b, c;
};

static BigRuns run_big_scenarios() {
  BigRuns runs;
  runs.a = run_experiment(
      solo_config(ScenarioSpec::static_peak(), 50000, 10, {{.name = "bsvbs"}}),
      0);
  runs.b = run_experiment(solo_config(ScenarioSpec::stationary_default(),
                                      50000, 10, {{.name = "bsvbs"}}),
                          0);
  runs.c = run_experiment(solo_config(ScenarioSpec::pingpong_default(), 50000,
                                      10, {{.name = "bsvbs"}}),
                          0);
  return runs;
}

static void criterion_2(const BigRuns& runs) {
  std::vector<double> final_regret;
  for (const auto& seed : runs.a.seeds)
    final_regret.push_back(seed.oracle.cumulative_reward -
                           seed.runs[0].cumulative_reward());
  const double mean_rt = mean(final_regret);
  const double bound = exp3::exp3_regret_bound(1080, 50000);
  const double cap = std::min(50000.0, bound);
  const bool pass = mean_rt <= cap && mean_rt <= 0.7 * bound;
  report("C2 exp3-bound-compliance", pass,
         fmt("mean R_T=%.0f, min(T,bound)=%.0f, 70%% of bound=%.0f "
             "(%.1f%% below bound)",
             mean_rt, cap, 0.7 * bound, 100.0 * (1.0 - mean_rt / bound)));
}

static void criterion_3(const BigRuns& runs) {
  bool pass = true;
  std::string detail;
  const char* names[3] = {"A", "B", "C"};
  const ExperimentResult* results[3] = {&runs.a, &runs.b, &runs.c};
  for (int k = 0; k < 3; ++k) {
    std::vector<double> early, late;
    for (const auto& seed : results[k]->seeds) {
      const RegretReport rep = regret_curve(seed.runs[0], seed.oracle);
      early.push_back(rep.avg_regret[12499]);
      late.push_back(rep.avg_regret[49999]);
    }
    const double e = mean(early), l = mean(late);
    pass = pass && l < e;
    detail += fmt("%s: R/t@12.5k=%.4f -> @50k=%.4f  ", names[k], e, l);
  }
  report("C3 sublinearity", pass, detail);
}

static void criterion_4() {
  bool pass = true;
  // Policy-level estimator over four arms.
  {
    exp3::State s(4, 0.23);
    s.log_weights = {0.0, -0.7, -1.9, -0.1};
    const auto y = exp3::distribution(s);
    const double f[4] = {0.37, 0.91, 0.04, 0.66};
    for (std::size_t x = 0; x < 4; ++x) {
      double expect = 0.0;
      for (std::size_t chosen = 0; chosen < 4; ++chosen) {
        const auto phi = exp3::feedback_estimator(s, chosen, f[chosen]);
        expect += y[chosen] * phi[x];
      }
      pass = pass && std::abs(expect - f[x]) <= 1e-12;
    }
  }
  // Meta-level estimator over three algorithms.
  {
    exp3::State s(3, 0.04);
    s.log_weights = {0.0, -0.4, -2.2};
    const auto y = exp3::distribution(s);
    const double f[3] = {0.55, 0.12, 0.98};
    for (std::size_t j = 0; j < 3; ++j) {
      double expect = 0.0;
      for (std::size_t chosen = 0; chosen < 3; ++chosen) {
        const auto phi = exp3::feedback_estimator(s, chosen, f[chosen]);
        expect += y[chosen] * phi[j];
      }
      pass = pass && std::abs(expect - f[j]) <= 1e-12;
    }
  }
  report("C4 estimator-unbiasedness", pass,
         "exact enumeration, |X|=4 and A=3, tolerance 1e-12");
}

static void criterion_5(const BigRuns& runs,
                        const std::vector<const ExperimentResult*>& metas) {
  double min_margin_b = 1e300, max_dev_b = 0.0;
  for (const ExperimentResult* r : {&runs.a, &runs.b, &runs.c})
    for (const auto& seed : r->seeds) {
      min_margin_b =
          std::min(min_margin_b, seed.runs[0].policy_diag.min_floor_margin);
      max_dev_b =
          std::max(max_dev_b, seed.runs[0].policy_diag.max_sum_deviation);
    }
  double min_margin_m = 1e300, max_dev_m = 0.0, max_rho = 0.0;
  for (const ExperimentResult* r : metas)
    for (const auto& seed : r->seeds) {
      min_margin_m =
          std::min(min_margin_m, seed.runs[0].meta_diag.min_floor_margin);
      max_dev_m =
          std::max(max_dev_m, seed.runs[0].meta_diag.max_sum_deviation);
      max_rho = std::max(max_rho, seed.runs[0].max_rho);
    }
  const bool pass = min_margin_b >= -1e-12 && max_dev_b <= 1e-9 &&
                    min_margin_m >= -1e-12 && max_dev_m <= 1e-9 &&
                    max_rho <= 1.0;
  report("C5 distribution-floors", pass,
         fmt("min(y-floor): policy %.2e, meta %.2e; max|sum-1|: %.2e/%.2e; "
             "max rho=%.6f",
             min_margin_b, min_margin_m, max_dev_b, max_dev_m, max_rho));
}

static ExperimentResult run_compare() {
  ExperimentConfig cfg;
  cfg.scenario = ScenarioSpec::pingpong_default();
  cfg.space_preset = "paper16";
  DeciderSpec gp{.name = "gpucb"};
  gp.gp.window = 80;
  cfg.deciders = {{.name = "bsvbs"}, gp, {.name = "random"}, {.name = "ucb1"},
                  {.name = "greedy"}};
  cfg.horizon = 50000;
  for (int i = 0; i < 10; ++i) cfg.seeds.push_back(1 + i);
  cfg.histogram_window = 5000;
  return run_experiment(cfg, 0);
}

static void criterion_6(const ExperimentResult& cmp) {
  std::map<std::string, double> mean_rt;
  std::map<std::string, double> mean_half;
  for (std::size_t r = 0; r < cmp.run_labels.size(); ++r) {
    std::vector<double> finals, halves;
    for (const auto& seed : cmp.seeds) {
      const RegretReport rep = regret_curve(seed.runs[r], seed.oracle);
      finals.push_back(rep.final_regret);
      halves.push_back(rep.regret[24999]);
    }
    mean_rt[cmp.run_labels[r]] = mean(finals);
    mean_half[cmp.run_labels[r]] = mean(halves);
  }
  const double b = mean_rt["bsvbs"];
  const bool beats = b < mean_rt["greedy"] && b < mean_rt["ucb1"] &&
                     b < mean_rt["gpucb"];
  const double g_rate_full = mean_rt["greedy"] / 50000.0;
  const double g_rate_half = mean_half["greedy"] / 25000.0;
  const bool linear =
      std::abs(g_rate_full - g_rate_half) <= 0.1 * std::abs(g_rate_half);
  report("C6 adversarial-comparison", beats && linear,
         fmt("mean R_T: bsvbs=%.0f greedy=%.0f ucb1=%.0f gpucb=%.0f "
             "random=%.0f; greedy rate full/half=%.5f/%.5f",
             b, mean_rt["greedy"], mean_rt["ucb1"], mean_rt["gpucb"],
             mean_rt["random"], g_rate_full, g_rate_half));
}

// Meta pool mirroring the metbs presets: single-environment runs use the
// wide-window GP configuration, the mixed run the short-window one.
static GpUcbParams meta_gp_params(bool mixed) {
  GpUcbParams gp;
  if (mixed) {
    gp.window = 60;
    gp.noise_var = 0.005;
    gp.context_length_scale = 0.4;
  } else {
    gp.window = 150;
    gp.noise_var = 0.02;
    gp.context_length_scale = 0.6;
  }
  return gp;
}

static ExperimentResult run_meta_scenario(const ScenarioSpec& scenario,
                                          long horizon, int seeds,
                                          const GpUcbParams& gp_params) {
  ExperimentConfig cfg;
  cfg.scenario = scenario;
  cfg.space_preset = "paper16";
  DeciderSpec gp{.name = "gpucb"};
  gp.gp = gp_params;
  cfg.deciders = {{.name = "bsvbs"}, gp};
  cfg.meta.enabled = true;
  cfg.meta.eta = 0.04;
  cfg.meta.decompose = false;  // criteria 7-9 do not need the split
  cfg.horizon = horizon;
  for (int i = 0; i < seeds; ++i) cfg.seeds.push_back(1 + i);
  cfg.histogram_window = std::max<long>(1, horizon / 10);
  return run_experiment(cfg, 0);
}

static void criterion_7(const ExperimentResult& stat,
                        const ExperimentResult& adv) {
  // Pool order: 0 = bsvbs, 1 = gpucb.
  std::vector<double> gp_share, b_share;
  for (const auto& seed : stat.seeds) {
    long gp = 0;
    for (long t = 30000; t < 50000; ++t)
      if (seed.runs[0].algos[static_cast<std::size_t>(t)] == 1) ++gp;
    gp_share.push_back(gp / 20000.0);
  }
  for (const auto& seed : adv.seeds) {
    long b = 0;
    for (long t = 30000; t < 50000; ++t)
      if (seed.runs[0].algos[static_cast<std::size_t>(t)] == 0) ++b;
    b_share.push_back(b / 20000.0);
  }
  const double gp_mean = mean(gp_share);
  const double b_mean = mean(b_share);
  const bool pass = gp_mean >= 0.75 && b_mean >= 0.75;
  report("C7 meta-selection", pass,
         fmt("stationary: gpucb picked %.1f%% of last 20k (want >=75%%); "
             "adversarial: bsvbs picked %.1f%% (want >=75%%)",
             100 * gp_mean, 100 * b_mean));
}

static void criterion_8(const ExperimentResult& mixed) {
  bool pass = true;
  std::string detail;
  for (const auto& seed : mixed.seeds) {
    const RunResult& run = seed.runs[0];
    long crossover = -1;
    for (long t = 5000; t <= run.horizon(); t += 100) {
      const double rb = trailing_algo_reward(run, 0, t, 2000);
      const double rg = trailing_algo_reward(run, 1, t, 2000);
      if (!std::isnan(rb) && !std::isnan(rg) && rb > rg) {
        crossover = t;
        break;
      }
    }
    if (crossover < 0) {
      pass = false;
      detail += fmt("s%llu: no crossover; ",
                    static_cast<unsigned long long>(seed.seed));
      continue;
    }
    long reacted = -1;
    for (long t = crossover; t <= std::min(run.horizon(), crossover + 10000);
         t += 100) {
      if (trailing_selection_freq(run, 0, t, 2000) > 0.6) {
        reacted = t;
        break;
      }
    }
    if (reacted < 0) pass = false;
    detail += fmt("s%llu: crossover@%ld react@%ld; ",
                  static_cast<unsigned long long>(seed.seed), crossover,
                  reacted);
  }
  report("C8 mixed-adaptation", pass, detail);
}

static void criterion_9(const ExperimentResult& stat,
                        const ExperimentResult& adv) {
  const double p = 0.04 / 2.0;
  const double se = std::sqrt(p * (1 - p) / 50000.0);
  bool pass = true;
  std::string detail;
  for (const auto* result : {&stat, &adv}) {
    for (const auto& seed : result->seeds) {
      for (std::size_t j = 0; j < 2; ++j) {
        const double rate =
            static_cast<double>(seed.runs[0].feedback_granted[j]) / 50000.0;
        if (std::abs(rate - p) > 3 * se) {
          pass = false;
          detail += fmt("s%llu algo%zu rate=%.5f; ",
                        static_cast<unsigned long long>(seed.seed), j, rate);
        }
      }
    }
  }
  if (detail.empty())
    detail = fmt("all granted-feedback rates within %.5f +- %.5f", p, 3 * se);
  report("C9 feedback-blocking-rate", pass, detail);
}

static void criterion_10(const BigRuns& runs, const ExperimentResult& cmp) {
  // Pool BSvBS decide latencies over all scenario-A seeds.
  std::vector<std::int64_t> early, late;
  for (const auto& seed : runs.a.seeds) {
    const auto& ns = seed.runs[0].decide_ns;
    early.insert(early.end(), ns.begin() + 1000, ns.begin() + 6000);
    late.insert(late.end(), ns.begin() + 45000, ns.begin() + 50000);
  }
  auto median = [](std::vector<std::int64_t>& v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    return static_cast<double>(v[mid]);
  };
  const double early_med = median(early);
  const double late_med = median(late);
  const bool flat = late_med <= 2.0 * early_med;

  // GP-UCB beyond its window versus BSvBS in the same comparison runs.
  std::vector<std::int64_t> gp_ns, b_ns;
  std::size_t gp_idx = 0, b_idx = 0;
  for (std::size_t r = 0; r < cmp.run_labels.size(); ++r) {
    if (cmp.run_labels[r] == "gpucb") gp_idx = r;
    if (cmp.run_labels[r] == "bsvbs") b_idx = r;
  }
  for (const auto& seed : cmp.seeds) {
    const auto& g = seed.runs[gp_idx].decide_ns;
    const auto& b = seed.runs[b_idx].decide_ns;
    gp_ns.insert(gp_ns.end(), g.begin() + 200, g.end());
    b_ns.insert(b_ns.end(), b.begin() + 200, b.end());
  }
  const double gp_med = median(gp_ns);
  const double b_med = median(b_ns);
  const bool slower = gp_med > b_med;
  report("C10 inference-time", flat && slower,
         fmt("bsvbs median ns early=%.0f late=%.0f (flat if <=2x); "
             "gpucb median=%.0f > bsvbs median=%.0f past the window",
             early_med, late_med, gp_med, b_med));
}

static void criterion_11() {
  Rng rng(404);
  bool pass = true;
  for (int trial = 0; trial < 200 && pass; ++trial) {
    const std::size_t arms = 1 + rng.uniform_int(0, 5);
    const long horizon = 1 + rng.uniform_int(0, 49);
    std::vector<std::vector<double>> rewards(horizon,
                                             std::vector<double>(arms));
    for (auto& row : rewards)
      for (auto& v : row) v = rng.uniform01();
    const OracleResult fast = oracle_best_fixed(rewards);
    std::size_t best_arm = 0;
    double best_sum = -1.0;
    for (std::size_t a = 0; a < arms; ++a) {
      double sum = 0.0;
      for (long t = 0; t < horizon; ++t) sum += rewards[t][a];
      if (sum > best_sum) {
        best_sum = sum;
        best_arm = a;
      }
    }
    pass = fast.arm == best_arm && fast.cumulative_reward == best_sum;
  }
  report("C11 oracle-correctness", pass,
         "200 random instances, |X|<=6, T<=50, exact match vs double loop");
}

static void criterion_12() {
  ExperimentConfig cfg = preset_config("scenarioA-bsvbs");
  cfg.horizon = 2000;
  cfg.seeds = {1, 2};
  cfg.histogram_window = 200;
  const fs::path base = fs::temp_directory_path() / "vbs_acceptance_det";
  fs::remove_all(base);
  std::vector<std::string> files;
  for (int run = 0; run < 2; ++run) {
    ExperimentConfig copy = cfg;
    copy.output_dir = (base / ("run" + std::to_string(run))).string();
    const ExperimentResult result = run_experiment(copy, run == 0 ? 2 : 1);
    files = write_experiment(copy, result);
  }
  bool pass = true;
  std::string mismatch;
  for (const auto& rel : files) {
    if (rel.find("timing") != std::string::npos) continue;
    if (rel == "config.resolved.json" || rel == "manifest.json") continue;
    std::ifstream a(base / "run0" / rel, std::ios::binary);
    std::ifstream b(base / "run1" / rel, std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    if (sa.str() != sb.str() || sa.str().empty()) {
      pass = false;
      mismatch = rel;
      break;
    }
  }
  fs::remove_all(base);
  report("C12 determinism", pass,
         pass ? "preset rerun is byte-identical (timing files excluded)"
              : "mismatch in " + mismatch);
}

int main() {
  std::printf("acceptance suite (kernel isa: %s)\n",
              kernels::isa_name(kernels::active_isa()));
  criterion_1();
  criterion_4();
  criterion_11();

  std::printf("... running bundled-grid 50k-round scenarios\n");
  const BigRuns big = run_big_scenarios();
  criterion_2(big);
  criterion_3(big);

  std::printf("... running adversarial comparison\n");
  const ExperimentResult cmp = run_compare();
  criterion_6(cmp);
  criterion_10(big, cmp);

  std::printf("... running meta-learner scenarios\n");
  const ExperimentResult meta_stat = run_meta_scenario(
      ScenarioSpec::stationary_default(), 50000, 3, meta_gp_params(false));
  const ExperimentResult meta_adv = run_meta_scenario(
      ScenarioSpec::pingpong_default(), 50000, 3, meta_gp_params(false));
  criterion_7(meta_stat, meta_adv);
  criterion_9(meta_stat, meta_adv);

  std::printf("... running mixed-environment adaptation\n");
  const ExperimentResult meta_mixed = run_meta_scenario(
      ScenarioSpec::mixed_default(5000), 20000, 3, meta_gp_params(true));
  criterion_8(meta_mixed);

  criterion_5(big, {&meta_stat, &meta_adv, &meta_mixed});
  criterion_12();

  if (g_failures == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  return 1;
}
