#include "vbs/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "vbs/csvio.hpp"
#include "vbs/exp3.hpp"
#include "vbs/kernels.hpp"
#include "vbs/meta.hpp"
#include "vbs/version.hpp"

namespace vbs {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

RewardEngine build_engine(const ExperimentConfig& config,
                          const PolicySpace& space) {
  if (config.scenario.kind == ScenarioSpec::Kind::kTrace)
    return RewardEngine(config.engine, space,
                        TraceTable::load_csv(config.scenario.trace_path));
  return RewardEngine(config.engine, space);
}

SeedOutputs run_seed(const ExperimentConfig& config, const PolicySpace& space,
                     const RewardEngine& engine, std::uint64_t seed) {
  SeedOutputs out;
  out.seed = seed;
  out.contexts = make_contexts(engine, config.scenario, config.horizon, seed);
  out.oracle = oracle_best_fixed(engine, out.contexts);
  out.ideal_min_watts = ideal_min_watts(engine, out.contexts);

  if (!config.meta.enabled) {
    for (std::size_t j = 0; j < config.deciders.size(); ++j) {
      auto decider = make_decider(config.deciders[j], space, config.horizon);
      out.runs.push_back(run_solo(*decider, engine, out.contexts,
                                  Rng::derive(seed, 16 + j)));
    }
    return out;
  }

  std::vector<std::unique_ptr<Decider>> pool;
  for (const auto& spec : config.deciders)
    pool.push_back(make_decider(spec, space, config.horizon));
  MetaLearner meta(pool.size(), config.meta.eta);
  out.runs.push_back(
      run_meta(pool, meta, engine, out.contexts, Rng::derive(seed, 8)));

  if (config.meta.decompose) {
    const double thin =
        config.meta.eta / static_cast<double>(config.deciders.size());
    for (std::size_t j = 0; j < config.deciders.size(); ++j) {
      auto fresh = make_decider(config.deciders[j], space, config.horizon);
      RunResult solo = run_solo(*fresh, engine, out.contexts,
                                Rng::derive(seed, 32 + j), thin);
      solo.label += "-thinned";
      out.thinned_solo.push_back(std::move(solo));
    }
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << text;
}

struct LabelView {
  std::string label;
  // One run per seed, aligned with the seeds order.
  std::vector<const RunResult*> runs;
};

std::vector<LabelView> collect_labels(const ExperimentResult& result) {
  std::vector<LabelView> views;
  if (result.seeds.empty()) return views;
  const auto& first = result.seeds.front();
  for (std::size_t r = 0; r < first.runs.size(); ++r) {
    LabelView v;
    v.label = first.runs[r].label;
    for (const auto& seed : result.seeds) v.runs.push_back(&seed.runs[r]);
    views.push_back(std::move(v));
  }
  for (std::size_t r = 0; r < first.thinned_solo.size(); ++r) {
    LabelView v;
    v.label = first.thinned_solo[r].label;
    for (const auto& seed : result.seeds)
      v.runs.push_back(&seed.thinned_solo[r]);
    views.push_back(std::move(v));
  }
  return views;
}

double run_bound(const ExperimentConfig& config, std::size_t num_arms, long t,
                 bool is_meta) {
  if (is_meta)
    return meta_regret_bound(config.deciders.size(), t, config.meta.beta);
  return exp3::exp3_regret_bound(num_arms, t);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, int threads) {
  const PolicySpace space = config.build_space();
  const RewardEngine engine = build_engine(config, space);

  ExperimentResult result;
  result.delta = config.engine.delta;
  result.idle_watts = config.engine.idle_watts;
  if (config.meta.enabled) {
    result.run_labels.push_back("metbs");
  } else {
    for (const auto& d : config.deciders) result.run_labels.push_back(d.name);
  }

  const std::size_t num_seeds = config.seeds.size();
  result.seeds.resize(num_seeds);

  unsigned pool_size = threads > 0
                           ? static_cast<unsigned>(threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  pool_size = std::min<unsigned>(pool_size, num_seeds);

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= num_seeds) return;
      try {
        result.seeds[i] = run_seed(config, space, engine, config.seeds[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (pool_size <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < pool_size; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return result;
}

std::vector<std::string> write_experiment(const ExperimentConfig& config,
                                          const ExperimentResult& result) {
  const PolicySpace space = config.build_space();
  const fs::path out_dir = config.output_dir;
  fs::create_directories(out_dir);
  std::vector<std::string> files;

  write_text(out_dir / "config.resolved.json", config.resolved_json());
  files.push_back("config.resolved.json");

  const auto views = collect_labels(result);
  const long horizon = config.horizon;
  auto num = CsvWriter::format_number;

  for (const auto& view : views) {
    const bool is_meta = view.label == "metbs";
    fs::create_directories(out_dir / view.label);

    std::vector<std::vector<double>> regret_per_seed, avg_regret_per_seed;
    for (std::size_t s = 0; s < result.seeds.size(); ++s) {
      const SeedOutputs& seed = result.seeds[s];
      const RunResult& run = *view.runs[s];
      const RegretReport rep = regret_curve(run, seed.oracle);
      regret_per_seed.push_back(rep.regret);
      avg_regret_per_seed.push_back(rep.avg_regret);

      CsvWriter rounds({"t", "demand_dl", "demand_ul", "cqi_dl", "cqi_ul",
                        "algo", "arm", "reward", "utility", "watts", "xi"});
      for (long t = 0; t < horizon; ++t) {
        const Context& c = seed.contexts[static_cast<std::size_t>(t)];
        rounds.add_number_row(
            {static_cast<double>(t + 1), c.demand_dl, c.demand_ul,
             static_cast<double>(c.cqi_dl), static_cast<double>(c.cqi_ul),
             static_cast<double>(run.algos.empty() ? 0 : run.algos[t]),
             static_cast<double>(run.arms[t]), run.rewards[t],
             run.utilities[t], run.watts[t], static_cast<double>(run.xi[t])});
      }
      const std::string rounds_name =
          view.label + "/rounds_s" + std::to_string(seed.seed) + ".csv";
      rounds.write_file((out_dir / rounds_name).string());
      files.push_back(rounds_name);

      CsvWriter regret({"t", "regret", "avg_regret", "bound"});
      for (long t = 0; t < horizon; ++t)
        regret.add_number_row(
            {static_cast<double>(t + 1), rep.regret[t], rep.avg_regret[t],
             run_bound(config, space.size(), t + 1, is_meta)});
      const std::string regret_name =
          view.label + "/regret_s" + std::to_string(seed.seed) + ".csv";
      regret.write_file((out_dir / regret_name).string());
      files.push_back(regret_name);

      // Wall-clock latencies; excluded from byte-identity guarantees.
      CsvWriter timing({"t", "decide_ns"});
      for (long t = 0; t < horizon; ++t)
        timing.add_number_row({static_cast<double>(t + 1),
                               static_cast<double>(run.decide_ns[t])});
      const std::string timing_name =
          view.label + "/timing_s" + std::to_string(seed.seed) + ".csv";
      timing.write_file((out_dir / timing_name).string());
      files.push_back(timing_name);
    }

    {
      CsvWriter agg({"t", "mean_regret", "std_regret", "mean_avg_regret",
                     "std_avg_regret", "bound"});
      std::vector<double> col(result.seeds.size());
      for (long t = 0; t < horizon; ++t) {
        for (std::size_t s = 0; s < result.seeds.size(); ++s)
          col[s] = regret_per_seed[s][static_cast<std::size_t>(t)];
        const double m = mean_of(col);
        const double sd = std_of(col, m);
        for (std::size_t s = 0; s < result.seeds.size(); ++s)
          col[s] = avg_regret_per_seed[s][static_cast<std::size_t>(t)];
        const double ma = mean_of(col);
        const double sda = std_of(col, ma);
        agg.add_number_row({static_cast<double>(t + 1), m, sd, ma, sda,
                            run_bound(config, space.size(), t + 1, is_meta)});
      }
      const std::string agg_name = view.label + "/aggregate.csv";
      agg.write_file((out_dir / agg_name).string());
      files.push_back(agg_name);
    }

    {
      std::vector<double> freq(space.size(), 0.0);
      for (const RunResult* run : view.runs) {
        const auto f = selection_histogram(run->arms, space.size(),
                                           config.histogram_window);
        for (std::size_t a = 0; a < f.size(); ++a) freq[a] += f[a];
      }
      for (double& f : freq) f /= static_cast<double>(view.runs.size());
      CsvWriter heat({"arm", "tx_power_dl", "mcs_dl", "prb_dl", "mcs_ul",
                      "prb_ul", "freq"});
      for (std::size_t a = 0; a < space.size(); ++a) {
        const Policy p = space.policy_at(a);
        heat.add_number_row({static_cast<double>(a), p.tx_power_dl,
                             static_cast<double>(p.mcs_dl), p.prb_ratio_dl,
                             static_cast<double>(p.mcs_ul), p.prb_ratio_ul,
                             freq[a]});
      }
      const std::string heat_name = view.label + "/heatmap.csv";
      heat.write_file((out_dir / heat_name).string());
      files.push_back(heat_name);
    }
  }

  {
    CsvWriter summary(
        {"label", "seed", "cum_reward", "final_regret", "final_avg_regret",
         "oracle_arm", "oracle_cum", "mean_watts", "ideal_min_watts",
         "times_chosen", "feedback_granted", "feedback_blocked", "meta_regret",
         "meta_vs_best_algo", "best_algo_vs_best_policy", "best_algo"});
    for (const auto& view : views) {
      std::vector<double> cums, regrets, avgs, watts;
      for (std::size_t s = 0; s < result.seeds.size(); ++s) {
        const SeedOutputs& seed = result.seeds[s];
        const RunResult& run = *view.runs[s];
        const double cum = run.cumulative_reward();
        const double reg = seed.oracle.cumulative_reward - cum;
        cums.push_back(cum);
        regrets.push_back(reg);
        avgs.push_back(reg / static_cast<double>(horizon));
        watts.push_back(run.mean_watts());

        std::string meta_r, meta_m1, meta_m2, best_algo;
        if (view.label == "metbs" && !seed.thinned_solo.empty()) {
          const RegretReport rep =
              meta_regret_decomposition(run, seed.thinned_solo, seed.oracle);
          meta_r = num(*rep.meta_regret);
          meta_m1 = num(*rep.meta_vs_best_algo);
          meta_m2 = num(*rep.best_algo_vs_best_policy);
          best_algo = config.deciders[*rep.best_algo].name;
        }
        summary.add_row(
            {view.label, std::to_string(seed.seed), num(cum), num(reg),
             num(reg / static_cast<double>(horizon)),
             std::to_string(seed.oracle.arm),
             num(seed.oracle.cumulative_reward), num(run.mean_watts()),
             num(seed.ideal_min_watts), std::to_string(horizon),
             std::to_string(
                 run.feedback_granted.empty() ? 0L : run.feedback_granted[0]),
             std::to_string(
                 run.feedback_blocked.empty() ? 0L : run.feedback_blocked[0]),
             meta_r, meta_m1, meta_m2, best_algo});

        if (view.label == "metbs") {
          for (std::size_t j = 0; j < config.deciders.size(); ++j) {
            summary.add_row({view.label + "/" + config.deciders[j].name,
                             std::to_string(seed.seed), "", "", "", "", "", "",
                             "", std::to_string(run.times_chosen[j]),
                             std::to_string(run.feedback_granted[j]),
                             std::to_string(run.feedback_blocked[j]), "", "",
                             "", ""});
          }
        }
      }
      summary.add_row({view.label, "mean", num(mean_of(cums)),
                       num(mean_of(regrets)), num(mean_of(avgs)), "", "",
                       num(mean_of(watts)), "", "", "", "", "", "", "", ""});
    }
    summary.write_file((out_dir / "summary.csv").string());
    files.push_back("summary.csv");
  }

  {
    CsvWriter saving({"algo", "competitor", "saving_pct"});
    std::vector<double> label_watts;
    for (const auto& view : views) {
      std::vector<double> w;
      for (const RunResult* run : view.runs) w.push_back(run->mean_watts());
      label_watts.push_back(mean_of(w));
    }
    std::vector<double> ideal;
    for (const auto& seed : result.seeds) ideal.push_back(seed.ideal_min_watts);
    const double ideal_mean = mean_of(ideal);
    for (std::size_t a = 0; a < views.size(); ++a) {
      for (std::size_t b = 0; b < views.size(); ++b) {
        if (a == b) continue;
        if (std::abs(label_watts[b] - result.idle_watts) < 1e-12) continue;
        saving.add_row({views[a].label, views[b].label,
                        num(power_saving(label_watts[a], label_watts[b],
                                         result.idle_watts))});
      }
      if (std::abs(ideal_mean - result.idle_watts) >= 1e-12)
        saving.add_row({views[a].label, "ideal-min",
                        num(power_saving(label_watts[a], ideal_mean,
                                         result.idle_watts))});
    }
    saving.write_file((out_dir / "power_saving.csv").string());
    files.push_back("power_saving.csv");
  }

  {
    json manifest;
    manifest["tool"] = std::string("vbs ") + kVersion;
    manifest["output_dir"] = config.output_dir;
    manifest["labels"] = result.run_labels;
    json seeds = json::array();
    for (const auto& s : config.seeds) seeds.push_back(s);
    manifest["seeds"] = seeds;
    manifest["files"] = files;
    json figures = json::array();
    for (const auto& view : views) {
      figures.push_back({{"id", "regret-curve/" + view.label},
                         {"title", "cumulative regret with reference bound"},
                         {"csv", view.label + "/aggregate.csv"}});
      figures.push_back({{"id", "selection-heatmap/" + view.label},
                         {"title", "trailing-window policy selection"},
                         {"csv", view.label + "/heatmap.csv"}});
    }
    figures.push_back({{"id", "power-saving"},
                       {"title", "pairwise power savings"},
                       {"csv", "power_saving.csv"}});
    manifest["figures"] = figures;
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    files.push_back("manifest.json");
  }

  return files;
}

std::string execute_experiment(const ExperimentConfig& config, int threads,
                               bool quiet) {
  if (config.delta_grid.empty()) {
    const ExperimentResult result = run_experiment(config, threads);
    write_experiment(config, result);
    if (!quiet) std::fprintf(stderr, "wrote %s\n", config.output_dir.c_str());
    return config.output_dir;
  }

  fs::create_directories(config.output_dir);
  CsvWriter sweep({"delta", "label", "mean_reward", "mean_utility",
                   "mean_watts", "mean_regret"});
  auto num = CsvWriter::format_number;
  for (double delta : config.delta_grid) {
    ExperimentConfig sub = config;
    sub.delta_grid.clear();
    sub.engine.delta = delta;
    char tag[32];
    std::snprintf(tag, sizeof(tag), "delta_%g", delta);
    sub.output_dir = (fs::path(config.output_dir) / tag).string();
    const ExperimentResult result = run_experiment(sub, threads);
    write_experiment(sub, result);
    for (std::size_t r = 0; r < result.run_labels.size(); ++r) {
      std::vector<double> rewards, utils, watts, regrets;
      for (const auto& seed : result.seeds) {
        const RunResult& run = seed.runs[r];
        rewards.push_back(run.cumulative_reward() /
                          static_cast<double>(config.horizon));
        utils.push_back(
            kernels::sum(run.utilities.data(), run.utilities.size()) /
            static_cast<double>(config.horizon));
        watts.push_back(run.mean_watts());
        regrets.push_back(seed.oracle.cumulative_reward -
                          run.cumulative_reward());
      }
      sweep.add_row({num(delta), result.run_labels[r], num(mean_of(rewards)),
                     num(mean_of(utils)), num(mean_of(watts)),
                     num(mean_of(regrets))});
    }
    if (!quiet) std::fprintf(stderr, "finished delta=%g\n", delta);
  }
  sweep.write_file((fs::path(config.output_dir) / "sweep_summary.csv").string());

  json manifest;
  manifest["tool"] = std::string("vbs ") + kVersion;
  manifest["figures"] = json::array(
      {{{"id", "delta-tradeoff"},
        {"title", "utility and power versus the energy weight"},
        {"csv", "sweep_summary.csv"}}});
  write_text(fs::path(config.output_dir) / "manifest.json",
             manifest.dump(2) + "\n");
  return config.output_dir;
}

}  // namespace vbs
