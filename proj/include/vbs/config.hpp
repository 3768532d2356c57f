#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbs/deciders.hpp"
#include "vbs/environment.hpp"
#include "vbs/policy_space.hpp"

namespace vbs {

// Every violation found during validation, one per line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string what, std::vector<std::string> issues)
      : std::runtime_error(std::move(what)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

struct MetaSettings {
  bool enabled = false;
  double eta = 0.0;      // resolved during validation when absent
  double beta = 0.5;     // regret exponent of the strongest pool member
  double c = 1.0;        // constant of the eta tuning rule
  bool decompose = true; // run thinned solo references for the split
};

// Fully-resolved experiment description. Tuning defaults (gamma, eta) are
// filled in during validation so the resolved form is auditable.
struct ExperimentConfig {
  ScenarioSpec scenario;
  std::string space_preset;  // "paper1080", "paper16" or "" for explicit sets
  std::vector<double> space_p_dl;
  std::vector<int> space_m_dl;
  std::vector<double> space_b_dl;
  std::vector<int> space_m_ul;
  std::vector<double> space_b_ul;

  std::vector<DeciderSpec> deciders;
  MetaSettings meta;
  EngineParams engine;               // delta folded in
  std::vector<double> delta_grid;    // empty unless sweeping
  long horizon = 0;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  long histogram_window = 0;  // 0 -> horizon / 10

  PolicySpace build_space() const;
  std::string resolved_json() const;  // deterministic dump for auditing
};

// Parses and validates a JSON config document. Unknown keys are rejected;
// all violations are reported together in one ConfigError.
ExperimentConfig validate_config(const std::string& json_text);

// Canned experiment configurations. Throws std::invalid_argument for
// unknown names.
ExperimentConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

// JSON text of a preset before resolution (what `preset --emit` prints).
std::string preset_json(const std::string& name);

}  // namespace vbs
