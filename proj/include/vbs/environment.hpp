#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vbs/policy_space.hpp"
#include "vbs/rng.hpp"

namespace vbs {

// Per-round environment draw: traffic demands (Mbps) and channel qualities.
struct Context {
  double demand_dl = 0.0;
  double demand_ul = 0.0;
  int cqi_dl = 15;
  int cqi_ul = 15;

  bool operator==(const Context&) const = default;
};

// Constant value (lo == hi) or uniform draw over [lo, hi]; integer fields
// draw uniformly from the integers {lo, ..., hi}.
struct FieldDist {
  double lo = 0.0;
  double hi = 0.0;
  bool integer = false;

  static FieldDist constant(double v) { return {v, v, false}; }
  static FieldDist uniform(double lo, double hi) { return {lo, hi, false}; }
  static FieldDist uniform_int(int lo, int hi) {
    return {static_cast<double>(lo), static_cast<double>(hi), true};
  }

  double draw(Rng& rng) const;
};

struct ContextDists {
  FieldDist demand_dl, demand_ul, cqi_dl, cqi_ul;
  Context draw(Rng& rng) const;
};

// Which per-round context process drives a run.
struct ScenarioSpec {
  enum class Kind { kStatic, kStationary, kPingpong, kMixed, kTrace };

  Kind kind = Kind::kStatic;
  ContextDists base;         // static / stationary / mixed pre-switch
  ContextDists odd, even;    // ping-pong / mixed post-switch
  long switch_round = 0;     // mixed only; rounds <= switch_round use `base`
  std::string trace_path;    // trace replay

  static ScenarioSpec static_peak();        // fixed peak demands and CQIs
  static ScenarioSpec stationary_default(); // i.i.d. draws, low CQIs
  static ScenarioSpec pingpong_default();   // alternating high/low rounds
  static ScenarioSpec mixed_default(long switch_round = 5000);
};

// Context for round t (1-based). Draw order is fixed:
// demand_dl, demand_ul, cqi_dl, cqi_ul.
Context generate_context(const ScenarioSpec& spec, long t, Rng& rng);

// One measured sample of a replayable campaign.
struct TraceRecord {
  Policy policy;
  Context context;
  double tput_dl = 0.0;  // Mbps
  double tput_ul = 0.0;  // Mbps
  double power_w = 0.0;
};

// Indexed measurement table. Lookup returns the record with the exact same
// policy whose context is nearest under a normalized L1 metric
// (|dd|/32 + |du|/23 + |dc_dl|/15 + |dc_ul|/15), ties broken by lowest
// record index.
class TraceTable {
 public:
  static TraceTable from_records(std::vector<TraceRecord> records);
  static TraceTable load_csv(const std::string& path);

  std::size_t size() const { return records_.size(); }
  const TraceRecord& record(std::size_t i) const { return records_[i]; }

  // Throws std::out_of_range if no record carries this policy.
  const TraceRecord& lookup(const Policy& p, const Context& c) const;

  // Replay context for round t (1-based, cyclic over the record order).
  const Context& context_at(long t) const;

  double min_power() const { return min_power_; }
  double max_power() const { return max_power_; }

  static double context_distance(const Context& a, const Context& b);

 private:
  std::vector<TraceRecord> records_;
  double min_power_ = 0.0;
  double max_power_ = 0.0;
};

// Coefficients of the surrogate throughput/power models.
struct EngineParams {
  double delta = 1.5;          // energy-priority weight, > 0
  double idle_watts = 10.0;    // platform floor
  double amplifier_watts = 3.0;// fixed RF amplifier draw while DL is enabled
  double alpha_mcs = 0.04;     // W per effective MCS unit
  double alpha_prb = 0.1;      // W per provisioned PRB-ratio unit under load
  double decode_base = 0.2;    // W per Mbps decoded at CQI 15
  double decode_slope = 0.2;   // relative decode increase per CQI step below 15
  int tti_per_round = 1000;    // subframes per scheduling round
};

// Round outcome for one (policy, context) pair.
struct Outcome {
  double r_dl = 0.0;      // transmitted DL, Mbps
  double r_ul = 0.0;      // transmitted UL, Mbps
  double watts = 0.0;     // total power
  double utility = 0.0;   // raw utility (log terms)
  double raw = 0.0;       // utility/power blend before [0,1] mapping
  double scaled = 0.0;    // reward in [0,1]
};

// Context-dependent per-round tables for evaluating every arm at once.
// The scaled reward of an arm decomposes as
//   (bias + reward_dl[dl_combo]) + reward_ul[ul_combo],
// which evaluate_all exploits through a gather kernel.
struct RoundTables {
  std::vector<double> reward_dl;  // one entry per (mcs_dl, prb_dl) pair
  std::vector<double> reward_ul;  // one entry per (mcs_ul, prb_ul) pair
  std::vector<double> watts_dl;   // DL share of above-idle watts
  std::vector<double> watts_ul;   // UL share of above-idle watts
  double bias = 0.0;
};

// Maps (policy, context) to transmitted data, power and the normalized
// reward. Immutable after construction and shareable across runs.
class RewardEngine {
 public:
  RewardEngine(EngineParams params, PolicySpace space);
  RewardEngine(EngineParams params, PolicySpace space, TraceTable trace);

  const PolicySpace& space() const { return space_; }
  const EngineParams& params() const { return params_; }
  bool has_trace() const { return trace_.has_value(); }
  const TraceTable& trace() const { return *trace_; }

  // Bits deliverable in one round at the given thresholds and channel
  // quality. Effective MCS is min(mcs_threshold, cqi_max_mcs(cqi)); the PRB
  // count is llround(prb_ratio * 50).
  static long long capacity_bits(int mcs_threshold, double prb_ratio, int cqi,
                                 int tti_per_round);

  // Transmitted data per direction, Mbps: min(demand, capacity).
  std::pair<double, double> transmitted_data(const Policy& p,
                                             const Context& c) const;

  // Total watts for a round given the transmitted load.
  double power_cost(const Policy& p, const Context& c, double r_dl,
                    double r_ul) const;

  // Sum over directions with positive demand of log(1 + r/d); 0 otherwise.
  static double utility(double r_dl, double r_ul, double d_dl, double d_ul);

  // Scaled-utility minus delta * scaled-power.
  double raw_reward(const Policy& p, const Context& c) const;

  // Affine map of [f_min, f_max] onto [0, 1]; throws std::out_of_range for
  // raw values outside the certified bounds.
  double scale_reward(double raw) const;

  // Certified bounds on raw_reward over the policy space and context domain.
  std::pair<double, double> reward_bounds() const {
    return {f_min_, f_max_};
  }

  // Ceiling used to normalize power: no policy/context can exceed it.
  double power_ceiling() const { return power_ceiling_; }

  Outcome evaluate(const Policy& p, const Context& c) const;
  Outcome evaluate_arm(std::size_t arm, const Context& c) const;

  // Fills the per-combo tables for a context.
  void round_tables(const Context& c, RoundTables& tables) const;

  // Scaled reward of every arm, bit-identical to evaluate_arm(...).scaled.
  // `scratch` avoids per-round allocation; its contents are overwritten.
  void evaluate_all(const Context& c, RoundTables& scratch, double* out) const;

  // Minimum achievable watts over the whole space for this context.
  double min_watts(const Context& c) const;

 private:
  void validate_and_calibrate();
  double scaled_reward_parts(const Policy& p, const Context& c,
                             double* part_dl, double* part_ul) const;
  void dl_part(int mcs, double prb, const Context& c, double* reward_part,
               double* watts_part) const;
  void ul_part(int mcs, double prb, const Context& c, double* reward_part,
               double* watts_part) const;
  Outcome evaluate_trace(const Policy& p, const Context& c) const;

  EngineParams params_;
  PolicySpace space_;
  std::optional<TraceTable> trace_;

  double power_floor_ = 0.0;    // idle watts (or trace minimum)
  double power_ceiling_ = 0.0;  // certified maximum (or trace maximum)
  double f_min_ = 0.0;
  double f_max_ = 0.0;
  double inv_power_range_ = 0.0;
  double inv_two_ln2_ = 0.0;
  double scale_cu_ = 0.0;  // utility -> scaled-reward coefficient
  double scale_cp_ = 0.0;  // watts -> scaled-reward coefficient
  double bias_ = 0.0;      // constant term of the scaled reward

  std::vector<std::int32_t> dl_combo_of_arm_;
  std::vector<std::int32_t> ul_combo_of_arm_;
  std::vector<int> dl_combo_mcs_, ul_combo_mcs_;
  std::vector<double> dl_combo_prb_, ul_combo_prb_;
};

}  // namespace vbs
