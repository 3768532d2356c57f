#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "vbs/config.hpp"
#include "vbs/csvio.hpp"
#include "vbs/experiment.hpp"
#include "vbs/version.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void apply_overrides(vbs::ExperimentConfig& config, const std::string& out_dir,
                     long horizon, long seeds) {
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (horizon > 0) {
    config.horizon = horizon;
    if (config.scenario.kind == vbs::ScenarioSpec::Kind::kMixed &&
        config.scenario.switch_round >= horizon)
      config.scenario.switch_round = horizon / 2;
    if (config.histogram_window > horizon)
      config.histogram_window = std::max<long>(1, horizon / 10);
  }
  if (seeds > 0) {
    const std::uint64_t base = config.seeds.empty() ? 1 : config.seeds.front();
    config.seeds.clear();
    for (long i = 0; i < seeds; ++i)
      config.seeds.push_back(base + static_cast<std::uint64_t>(i));
  }
}

int run_config(vbs::ExperimentConfig config, const std::string& out_dir,
               long horizon, long seeds, int threads, bool quiet) {
  apply_overrides(config, out_dir, horizon, seeds);
  const std::string written = vbs::execute_experiment(config, threads, quiet);
  if (!quiet) std::printf("outputs in %s\n", written.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vbS threshold-policy learning simulator"};
  app.require_subcommand(1);

  std::string config_path, preset_name, out_dir;
  long horizon = 0, seeds = 0;
  int threads = 0;
  bool quiet = false;
  bool emit = false;

  if (const char* env_out = std::getenv("VBS_OUT_DIR")) out_dir = env_out;

  app.set_version_flag("--version", [] { return vbs::version_report(); });
  app.add_flag("--quiet", quiet, "suppress progress output");
  app.add_option("--threads", threads, "worker threads for seed replicates");

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "JSON experiment config")->required();
  run->add_option("--out", out_dir, "output directory override");
  run->add_option("--horizon", horizon, "horizon override");
  run->add_option("--seeds", seeds, "number of seed replicates");

  auto* preset = app.add_subcommand("preset", "run a canned experiment");
  preset->add_option("name", preset_name, "preset name")->required();
  preset->add_option("--out", out_dir, "output directory override");
  preset->add_option("--horizon", horizon, "horizon override");
  preset->add_option("--seeds", seeds, "number of seed replicates");
  preset->add_flag("--emit", emit, "print the preset config instead of running");

  auto* oracle = app.add_subcommand(
      "oracle", "compute only the best fixed policy for a config");
  oracle->add_option("config", config_path, "JSON experiment config")
      ->required();
  oracle->add_option("--out", out_dir, "output directory override");
  oracle->add_option("--horizon", horizon, "horizon override");
  oracle->add_option("--seeds", seeds, "number of seed replicates");

  app.add_subcommand("version", "print version and bundled table hash");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("version")) {
      std::printf("%s", vbs::version_report().c_str());
      return 0;
    }
    if (app.got_subcommand("preset")) {
      for (const auto& name : vbs::preset_names()) {
        if (name == preset_name) {
          if (emit) {
            std::printf("%s", vbs::preset_json(name).c_str());
            return 0;
          }
          return run_config(vbs::preset_config(name), out_dir, horizon, seeds,
                            threads, quiet);
        }
      }
      std::fprintf(stderr, "error: unknown preset '%s'\n", preset_name.c_str());
      std::fprintf(stderr, "known presets:\n");
      for (const auto& name : vbs::preset_names())
        std::fprintf(stderr, "  %s\n", name.c_str());
      return 2;
    }
    if (app.got_subcommand("run")) {
      return run_config(vbs::validate_config(read_file(config_path)), out_dir,
                        horizon, seeds, threads, quiet);
    }
    if (app.got_subcommand("oracle")) {
      vbs::ExperimentConfig config =
          vbs::validate_config(read_file(config_path));
      apply_overrides(config, out_dir, horizon, seeds);
      const vbs::PolicySpace space = config.build_space();
      const vbs::RewardEngine engine =
          config.scenario.kind == vbs::ScenarioSpec::Kind::kTrace
              ? vbs::RewardEngine(
                    config.engine, space,
                    vbs::TraceTable::load_csv(config.scenario.trace_path))
              : vbs::RewardEngine(config.engine, space);
      vbs::CsvWriter csv({"seed", "arm", "tx_power_dl", "mcs_dl", "prb_dl",
                          "mcs_ul", "prb_ul", "cumulative_reward"});
      for (const auto seed : config.seeds) {
        const auto contexts =
            vbs::make_contexts(engine, config.scenario, config.horizon, seed);
        const auto oracle = vbs::oracle_best_fixed(engine, contexts);
        const vbs::Policy p = space.policy_at(oracle.arm);
        csv.add_number_row({static_cast<double>(seed),
                            static_cast<double>(oracle.arm), p.tx_power_dl,
                            static_cast<double>(p.mcs_dl), p.prb_ratio_dl,
                            static_cast<double>(p.mcs_ul), p.prb_ratio_ul,
                            oracle.cumulative_reward});
        if (!quiet)
          std::printf("seed %llu: arm %zu cumulative %.6f\n",
                      static_cast<unsigned long long>(seed), oracle.arm,
                      oracle.cumulative_reward);
      }
      std::filesystem::create_directories(config.output_dir);
      csv.write_file(config.output_dir + "/oracle.csv");
      return 0;
    }
  } catch (const vbs::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    for (const auto& issue : e.issues())
      std::fprintf(stderr, "  - %s\n", issue.c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
