#include "vbs/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "vbs/capacity_table.hpp"
#include "vbs/kernels.hpp"

namespace vbs {

namespace {

constexpr double kRoundSeconds = 1.0;

double mbps_from_bits(long long bits_per_round) {
  return static_cast<double>(bits_per_round) / (kRoundSeconds * 1e6);
}

}  // namespace

// ---------------------------------------------------------------------------
// Scenarios

double FieldDist::draw(Rng& rng) const {
  if (lo == hi) return lo;
  if (integer)
    return static_cast<double>(
        rng.uniform_int(std::llround(lo), std::llround(hi)));
  return rng.uniform(lo, hi);
}

Context ContextDists::draw(Rng& rng) const {
  Context c;
  c.demand_dl = demand_dl.draw(rng);
  c.demand_ul = demand_ul.draw(rng);
  c.cqi_dl = static_cast<int>(cqi_dl.draw(rng));
  c.cqi_ul = static_cast<int>(cqi_ul.draw(rng));
  return c;
}

ScenarioSpec ScenarioSpec::static_peak() {
  ScenarioSpec s;
  s.kind = Kind::kStatic;
  s.base = {FieldDist::constant(32.0), FieldDist::constant(23.0),
            FieldDist::constant(15), FieldDist::constant(15)};
  return s;
}

ScenarioSpec ScenarioSpec::stationary_default() {
  ScenarioSpec s;
  s.kind = Kind::kStationary;
  s.base = {FieldDist::uniform(29.0, 32.0), FieldDist::uniform(20.0, 23.0),
            FieldDist::uniform_int(1, 3), FieldDist::uniform_int(1, 3)};
  return s;
}

ScenarioSpec ScenarioSpec::pingpong_default() {
  ScenarioSpec s;
  s.kind = Kind::kPingpong;
  s.odd = {FieldDist::uniform(29.0, 32.0), FieldDist::uniform(20.0, 23.0),
           FieldDist::uniform_int(13, 15), FieldDist::uniform_int(13, 15)};
  s.even = {FieldDist::uniform(0.01, 1.0), FieldDist::uniform(0.01, 1.0),
            FieldDist::uniform_int(1, 3), FieldDist::uniform_int(1, 3)};
  return s;
}

ScenarioSpec ScenarioSpec::mixed_default(long switch_round) {
  ScenarioSpec s = pingpong_default();
  s.kind = Kind::kMixed;
  s.base = stationary_default().base;
  s.switch_round = switch_round;
  return s;
}

Context generate_context(const ScenarioSpec& spec, long t, Rng& rng) {
  if (t < 1) throw std::invalid_argument("round index must be >= 1");
  switch (spec.kind) {
    case ScenarioSpec::Kind::kStatic:
    case ScenarioSpec::Kind::kStationary:
      return spec.base.draw(rng);
    case ScenarioSpec::Kind::kPingpong:
      return (t % 2 == 1) ? spec.odd.draw(rng) : spec.even.draw(rng);
    case ScenarioSpec::Kind::kMixed:
      if (t <= spec.switch_round) return spec.base.draw(rng);
      return (t % 2 == 1) ? spec.odd.draw(rng) : spec.even.draw(rng);
    case ScenarioSpec::Kind::kTrace:
      throw std::logic_error("trace scenarios replay contexts from the table");
  }
  throw std::logic_error("unknown scenario kind");
}

// ---------------------------------------------------------------------------
// Trace table

TraceTable TraceTable::from_records(std::vector<TraceRecord> records) {
  if (records.empty()) throw std::invalid_argument("trace table is empty");
  TraceTable t;
  t.records_ = std::move(records);
  t.min_power_ = std::numeric_limits<double>::infinity();
  t.max_power_ = -std::numeric_limits<double>::infinity();
  for (const auto& r : t.records_) {
    t.min_power_ = std::min(t.min_power_, r.power_w);
    t.max_power_ = std::max(t.max_power_, r.power_w);
  }
  return t;
}

TraceTable TraceTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("trace file is empty: " + path);
  const std::string expected =
      "tx_power_dl,mcs_dl,prb_dl,mcs_ul,prb_ul,demand_dl,demand_ul,"
      "cqi_dl,cqi_ul,tput_dl,tput_ul,power_w";
  if (line != expected)
    throw std::runtime_error("trace file header mismatch; expected: " +
                             expected);
  std::vector<TraceRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    TraceRecord r;
    char c;
    double mcs_dl = 0, mcs_ul = 0, cqi_dl = 0, cqi_ul = 0;
    row >> r.policy.tx_power_dl >> c >> mcs_dl >> c >> r.policy.prb_ratio_dl >>
        c >> mcs_ul >> c >> r.policy.prb_ratio_ul >> c >> r.context.demand_dl >>
        c >> r.context.demand_ul >> c >> cqi_dl >> c >> cqi_ul >> c >>
        r.tput_dl >> c >> r.tput_ul >> c >> r.power_w;
    if (!row) throw std::runtime_error("trace file: bad row: " + line);
    r.policy.mcs_dl = static_cast<int>(mcs_dl);
    r.policy.mcs_ul = static_cast<int>(mcs_ul);
    r.context.cqi_dl = static_cast<int>(cqi_dl);
    r.context.cqi_ul = static_cast<int>(cqi_ul);
    records.push_back(r);
  }
  return from_records(std::move(records));
}

double TraceTable::context_distance(const Context& a, const Context& b) {
  return std::abs(a.demand_dl - b.demand_dl) / 32.0 +
         std::abs(a.demand_ul - b.demand_ul) / 23.0 +
         std::abs(a.cqi_dl - b.cqi_dl) / 15.0 +
         std::abs(a.cqi_ul - b.cqi_ul) / 15.0;
}

const TraceRecord& TraceTable::lookup(const Policy& p, const Context& c) const {
  const TraceRecord* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& r : records_) {
    if (!(r.policy == p)) continue;
    const double d = context_distance(r.context, c);
    if (d < best_dist) {
      best_dist = d;
      best = &r;
    }
  }
  if (!best)
    throw std::out_of_range("trace table has no record for the given policy");
  return *best;
}

const Context& TraceTable::context_at(long t) const {
  if (t < 1) throw std::invalid_argument("round index must be >= 1");
  return records_[static_cast<std::size_t>((t - 1) %
                                           static_cast<long>(records_.size()))]
      .context;
}

// ---------------------------------------------------------------------------
// Reward engine

RewardEngine::RewardEngine(EngineParams params, PolicySpace space)
    : params_(params), space_(std::move(space)) {
  validate_and_calibrate();
}

RewardEngine::RewardEngine(EngineParams params, PolicySpace space,
                           TraceTable trace)
    : params_(params), space_(std::move(space)), trace_(std::move(trace)) {
  validate_and_calibrate();
}

void RewardEngine::validate_and_calibrate() {
  if (!(params_.delta > 0.0))
    throw std::invalid_argument("delta must be > 0");
  if (params_.idle_watts < 0 || params_.amplifier_watts < 0 ||
      params_.alpha_mcs < 0 || params_.alpha_prb < 0 ||
      params_.decode_base < 0 || params_.decode_slope < 0)
    throw std::invalid_argument("power coefficients must be nonnegative");
  if (params_.tti_per_round < 1)
    throw std::invalid_argument("tti_per_round must be >= 1");
  for (int m : space_.set_m_dl())
    if (m < 0 || m > capacity::kMaxMcs)
      throw std::domain_error("mcs_dl outside the capacity table domain");
  for (int m : space_.set_m_ul())
    if (m < 0 || m > capacity::kMaxMcs)
      throw std::domain_error("mcs_ul outside the capacity table domain");

  // Joint (mcs, prb) combos in the same order as PolicySpace::combo_of.
  const auto& md = space_.set_m_dl();
  const auto& bd = space_.set_b_dl();
  const auto& mu = space_.set_m_ul();
  const auto& bu = space_.set_b_ul();
  for (int m : md)
    for (double b : bd) {
      dl_combo_mcs_.push_back(m);
      dl_combo_prb_.push_back(b);
    }
  for (int m : mu)
    for (double b : bu) {
      ul_combo_mcs_.push_back(m);
      ul_combo_prb_.push_back(b);
    }
  dl_combo_of_arm_.resize(space_.size());
  ul_combo_of_arm_.resize(space_.size());
  for (std::size_t a = 0; a < space_.size(); ++a) {
    const auto combo = space_.combo_of(a);
    dl_combo_of_arm_[a] = static_cast<std::int32_t>(combo.dl);
    ul_combo_of_arm_[a] = static_cast<std::int32_t>(combo.ul);
  }

  if (trace_) {
    power_floor_ = trace_->min_power();
    power_ceiling_ = trace_->max_power();
    if (power_ceiling_ <= power_floor_) power_ceiling_ = power_floor_ + 1.0;
  } else {
    // Certify the power ceiling over the policy grid and the full CQI range
    // with saturated demand (the watts model is maximal when every direction
    // is busy and transmitting at capacity).
    double max_dl = 0.0, max_ul = 0.0;
    for (int cqi = 0; cqi <= 15; ++cqi) {
      Context busy{1e9, 1e9, cqi, cqi};
      for (std::size_t i = 0; i < dl_combo_mcs_.size(); ++i) {
        double rp, wp;
        dl_part(dl_combo_mcs_[i], dl_combo_prb_[i], busy, &rp, &wp);
        max_dl = std::max(max_dl, wp);
      }
      for (std::size_t i = 0; i < ul_combo_mcs_.size(); ++i) {
        double rp, wp;
        ul_part(ul_combo_mcs_[i], ul_combo_prb_[i], busy, &rp, &wp);
        max_ul = std::max(max_ul, wp);
      }
    }
    power_floor_ = params_.idle_watts;
    power_ceiling_ = params_.idle_watts + max_dl + max_ul;
    if (power_ceiling_ <= power_floor_) power_ceiling_ = power_floor_ + 1.0;
  }

  inv_power_range_ = 1.0 / (power_ceiling_ - power_floor_);
  inv_two_ln2_ = 1.0 / (2.0 * std::log(2.0));
  f_min_ = -params_.delta;
  f_max_ = 1.0;
  const double cf = 1.0 / (1.0 + params_.delta);
  scale_cu_ = inv_two_ln2_ * cf;
  scale_cp_ = params_.delta * inv_power_range_ * cf;
  bias_ = params_.delta * cf;
}

long long RewardEngine::capacity_bits(int mcs_threshold, double prb_ratio,
                                      int cqi, int tti_per_round) {
  if (prb_ratio < 0.0 || prb_ratio > 1.0)
    throw std::domain_error("prb ratio out of range [0, 1]");
  const int eff_mcs = std::min(mcs_threshold, capacity::cqi_max_mcs(cqi));
  if (eff_mcs < 0 || mcs_threshold > capacity::kMaxMcs)
    throw std::domain_error("mcs index out of range [0, 28]");
  const int nprb =
      static_cast<int>(std::llround(prb_ratio * capacity::kPrbGrid));
  return capacity::bits_per_tti(eff_mcs, nprb) * tti_per_round;
}

// DL share of the round: reward part of the arm decomposition plus the DL
// above-idle watts. Shared by the single-arm and all-arms paths so the two
// stay bit-identical.
void RewardEngine::dl_part(int mcs, double prb, const Context& c,
                           double* reward_part, double* watts_part) const {
  const int eff_mcs = std::min(mcs, capacity::cqi_max_mcs(c.cqi_dl));
  const int nprb =
      static_cast<int>(std::llround(prb * capacity::kPrbGrid));
  const double cap_mbps = mbps_from_bits(capacity::bits_per_tti(eff_mcs, nprb) *
                                         params_.tti_per_round);
  const double r = std::min(c.demand_dl, cap_mbps);
  const double u = c.demand_dl > 0.0 ? std::log1p(r / c.demand_dl) : 0.0;
  const double active = (c.demand_dl + c.demand_ul) > 0.0 ? 1.0 : 0.0;
  const double dl_on = prb > 0.0 ? 1.0 : 0.0;
  const double w = params_.amplifier_watts * dl_on +
                   params_.alpha_mcs * (dl_on * eff_mcs) +
                   params_.alpha_prb * prb * active;
  *watts_part = w;
  *reward_part = std::fma(u, scale_cu_, -(w * scale_cp_));
}

void RewardEngine::ul_part(int mcs, double prb, const Context& c,
                           double* reward_part, double* watts_part) const {
  const int eff_mcs = std::min(mcs, capacity::cqi_max_mcs(c.cqi_ul));
  const int nprb =
      static_cast<int>(std::llround(prb * capacity::kPrbGrid));
  const double cap_mbps = mbps_from_bits(capacity::bits_per_tti(eff_mcs, nprb) *
                                         params_.tti_per_round);
  const double r = std::min(c.demand_ul, cap_mbps);
  const double u = c.demand_ul > 0.0 ? std::log1p(r / c.demand_ul) : 0.0;
  const double active = (c.demand_dl + c.demand_ul) > 0.0 ? 1.0 : 0.0;
  const double ul_on = prb > 0.0 ? 1.0 : 0.0;
  const double decode =
      params_.decode_base * (1.0 + params_.decode_slope * (15 - c.cqi_ul));
  const double w = params_.alpha_mcs * (ul_on * eff_mcs) +
                   params_.alpha_prb * prb * active + decode * r;
  *watts_part = w;
  *reward_part = std::fma(u, scale_cu_, -(w * scale_cp_));
}

std::pair<double, double> RewardEngine::transmitted_data(
    const Policy& p, const Context& c) const {
  if (trace_) {
    const auto& rec = trace_->lookup(p, c);
    return {std::min(rec.tput_dl, c.demand_dl),
            std::min(rec.tput_ul, c.demand_ul)};
  }
  const double cap_dl = mbps_from_bits(capacity_bits(
      p.mcs_dl, p.prb_ratio_dl, c.cqi_dl, params_.tti_per_round));
  const double cap_ul = mbps_from_bits(capacity_bits(
      p.mcs_ul, p.prb_ratio_ul, c.cqi_ul, params_.tti_per_round));
  return {std::min(c.demand_dl, cap_dl), std::min(c.demand_ul, cap_ul)};
}

double RewardEngine::power_cost(const Policy& p, const Context& c, double r_dl,
                                double r_ul) const {
  if (trace_) return trace_->lookup(p, c).power_w;
  const int eff_dl = std::min(p.mcs_dl, capacity::cqi_max_mcs(c.cqi_dl));
  const int eff_ul = std::min(p.mcs_ul, capacity::cqi_max_mcs(c.cqi_ul));
  const double active = (c.demand_dl + c.demand_ul) > 0.0 ? 1.0 : 0.0;
  const double dl_on = p.prb_ratio_dl > 0.0 ? 1.0 : 0.0;
  const double ul_on = p.prb_ratio_ul > 0.0 ? 1.0 : 0.0;
  const double decode =
      params_.decode_base * (1.0 + params_.decode_slope * (15 - c.cqi_ul));
  (void)r_dl;
  return params_.idle_watts + params_.amplifier_watts * dl_on +
         params_.alpha_mcs * (dl_on * eff_dl + ul_on * eff_ul) +
         params_.alpha_prb * (p.prb_ratio_dl + p.prb_ratio_ul) * active +
         decode * r_ul;
}

double RewardEngine::utility(double r_dl, double r_ul, double d_dl,
                             double d_ul) {
  if (r_dl < 0 || r_ul < 0 || d_dl < 0 || d_ul < 0)
    throw std::domain_error("utility arguments must be nonnegative");
  double u = 0.0;
  if (d_dl > 0.0) u += std::log1p(r_dl / d_dl);
  if (d_ul > 0.0) u += std::log1p(r_ul / d_ul);
  return u;
}

double RewardEngine::raw_reward(const Policy& p, const Context& c) const {
  const Outcome o = evaluate(p, c);
  return o.raw;
}

double RewardEngine::scale_reward(double raw) const {
  if (raw < f_min_ - 1e-12 || raw > f_max_ + 1e-12)
    throw std::out_of_range("raw reward outside the certified bounds");
  return (raw - f_min_) / (f_max_ - f_min_);
}

Outcome RewardEngine::evaluate_trace(const Policy& p, const Context& c) const {
  const auto& rec = trace_->lookup(p, c);
  Outcome o;
  o.r_dl = std::min(rec.tput_dl, c.demand_dl);
  o.r_ul = std::min(rec.tput_ul, c.demand_ul);
  o.watts = rec.power_w;
  o.utility = utility(o.r_dl, o.r_ul, c.demand_dl, c.demand_ul);
  const double u_s = o.utility * inv_two_ln2_;
  const double p_s = (o.watts - power_floor_) * inv_power_range_;
  o.raw = u_s - params_.delta * p_s;
  o.scaled = (o.raw - f_min_) / (f_max_ - f_min_);
  return o;
}

Outcome RewardEngine::evaluate(const Policy& p, const Context& c) const {
  if (c.cqi_dl < 0 || c.cqi_dl > 15 || c.cqi_ul < 0 || c.cqi_ul > 15)
    throw std::domain_error("cqi out of range [0, 15]");
  if (c.demand_dl < 0 || c.demand_ul < 0)
    throw std::domain_error("demands must be nonnegative");
  if (trace_) return evaluate_trace(p, c);

  Outcome o;
  const auto [r_dl, r_ul] = transmitted_data(p, c);
  o.r_dl = r_dl;
  o.r_ul = r_ul;
  o.utility = utility(r_dl, r_ul, c.demand_dl, c.demand_ul);

  double part_dl, part_ul, w_dl, w_ul;
  dl_part(p.mcs_dl, p.prb_ratio_dl, c, &part_dl, &w_dl);
  ul_part(p.mcs_ul, p.prb_ratio_ul, c, &part_ul, &w_ul);
  o.watts = params_.idle_watts + w_dl + w_ul;
  const double u_s = o.utility * inv_two_ln2_;
  const double p_s = (w_dl + w_ul) * inv_power_range_;
  o.raw = u_s - params_.delta * p_s;
  o.scaled = (bias_ + part_dl) + part_ul;
  return o;
}

Outcome RewardEngine::evaluate_arm(std::size_t arm, const Context& c) const {
  return evaluate(space_.policy_at(arm), c);
}

void RewardEngine::round_tables(const Context& c, RoundTables& tables) const {
  tables.bias = bias_;
  tables.reward_dl.resize(dl_combo_mcs_.size());
  tables.watts_dl.resize(dl_combo_mcs_.size());
  tables.reward_ul.resize(ul_combo_mcs_.size());
  tables.watts_ul.resize(ul_combo_mcs_.size());
  if (trace_) return;  // trace rewards are not separable; see evaluate_all
  for (std::size_t i = 0; i < dl_combo_mcs_.size(); ++i)
    dl_part(dl_combo_mcs_[i], dl_combo_prb_[i], c, &tables.reward_dl[i],
            &tables.watts_dl[i]);
  for (std::size_t i = 0; i < ul_combo_mcs_.size(); ++i)
    ul_part(ul_combo_mcs_[i], ul_combo_prb_[i], c, &tables.reward_ul[i],
            &tables.watts_ul[i]);
}

void RewardEngine::evaluate_all(const Context& c, RoundTables& scratch,
                                double* out) const {
  if (trace_) {
    for (std::size_t a = 0; a < space_.size(); ++a)
      out[a] = evaluate_arm(a, c).scaled;
    return;
  }
  round_tables(c, scratch);
  kernels::gather2_add(scratch.reward_dl.data(), dl_combo_of_arm_.data(),
                       scratch.reward_ul.data(), ul_combo_of_arm_.data(),
                       scratch.bias, out, space_.size());
}

double RewardEngine::min_watts(const Context& c) const {
  if (trace_) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < space_.size(); ++a)
      best = std::min(best, evaluate_arm(a, c).watts);
    return best;
  }
  // The grid is a full cartesian product, so the minima decouple.
  double min_dl = std::numeric_limits<double>::infinity();
  double min_ul = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dl_combo_mcs_.size(); ++i) {
    double rp, wp;
    dl_part(dl_combo_mcs_[i], dl_combo_prb_[i], c, &rp, &wp);
    min_dl = std::min(min_dl, wp);
  }
  for (std::size_t i = 0; i < ul_combo_mcs_.size(); ++i) {
    double rp, wp;
    ul_part(ul_combo_mcs_[i], ul_combo_prb_[i], c, &rp, &wp);
    min_ul = std::min(min_ul, wp);
  }
  return params_.idle_watts + min_dl + min_ul;
}

}  // namespace vbs
