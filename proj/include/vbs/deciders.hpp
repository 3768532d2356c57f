#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vbs/environment.hpp"
#include "vbs/exp3.hpp"
#include "vbs/policy_space.hpp"
#include "vbs/rng.hpp"

namespace vbs {

// Floor/normalization diagnostics collected while a decider emits sampling
// distributions; the run harness folds them into run-wide invariant checks.
struct DistributionDiag {
  double min_floor_margin = 1e300;  // min over rounds of (min_i y_i - rate/n)
  double max_sum_deviation = 0.0;   // max over rounds of |sum_i y_i - 1|
};

// Contract shared by every policy decider. decide() carries no learning side
// effects (the meta layer may sample a decider without ever granting it
// feedback), and learn() is invoked only when feedback is allowed. `measured`
// is the context that applied while the reward was collected; context-aware
// deciders store it with the sample, the others ignore it.
class Decider {
 public:
  virtual ~Decider() = default;
  virtual std::size_t decide(const std::optional<Context>& observed,
                             Rng& rng) = 0;
  virtual void learn(std::size_t arm, double reward, const Context& measured) = 0;
  virtual std::string_view name() const = 0;
  // Hash of the learning state; decide() must leave it unchanged.
  virtual std::uint64_t fingerprint() const = 0;
  virtual const DistributionDiag* distribution_diag() const { return nullptr; }
};

// Exp3-style adversarial learner over the policy arms.
class BsvbsDecider : public Decider {
 public:
  BsvbsDecider(std::size_t num_arms, double gamma);

  std::size_t decide(const std::optional<Context>&, Rng& rng) override;
  void learn(std::size_t arm, double reward, const Context&) override;
  std::string_view name() const override { return "bsvbs"; }
  std::uint64_t fingerprint() const override;
  const DistributionDiag* distribution_diag() const override { return &diag_; }

  const exp3::State& state() const { return state_; }
  // Distribution implied by the current weights (recomputed, not cached).
  std::vector<double> current_distribution() const;

 private:
  exp3::State state_;
  std::vector<double> y_;  // distribution of the latest decide
  DistributionDiag diag_;
};

// Uniform selection; learning is a no-op.
class RandomDecider : public Decider {
 public:
  explicit RandomDecider(std::size_t num_arms);
  std::size_t decide(const std::optional<Context>&, Rng& rng) override;
  void learn(std::size_t, double, const Context&) override {}
  std::string_view name() const override { return "random"; }
  std::uint64_t fingerprint() const override { return 0x72616e646f6dULL; }

 private:
  std::size_t num_arms_;
};

// Classic optimism-under-uncertainty index policy for stationary rewards.
// Arms without a learned sample are forced in index order; afterwards the
// score is mean + sqrt(2 ln t / count) with t the number of learned samples,
// ties resolved toward the lowest index.
class Ucb1Decider : public Decider {
 public:
  explicit Ucb1Decider(std::size_t num_arms);
  std::size_t decide(const std::optional<Context>&, Rng& rng) override;
  void learn(std::size_t arm, double reward, const Context&) override;
  std::string_view name() const override { return "ucb1"; }
  std::uint64_t fingerprint() const override;

  std::vector<double> scores() const;  // exposed for tests

 private:
  std::vector<double> sums_;
  std::vector<long> counts_;
  long total_ = 0;
  mutable std::vector<double> score_buf_;
};

// Pure exploitation after one initial sweep over the arms: the sweep
// estimates freeze once every arm has a sample, after which the decider locks
// onto their argmax (the best solution found so far). An optional epsilon
// adds uniform exploration (0 by default).
class GreedyDecider : public Decider {
 public:
  GreedyDecider(std::size_t num_arms, double epsilon0 = 0.0);
  std::size_t decide(const std::optional<Context>&, Rng& rng) override;
  void learn(std::size_t arm, double reward, const Context&) override;
  std::string_view name() const override { return "greedy"; }
  std::uint64_t fingerprint() const override;

 private:
  bool sweep_complete() const;

  std::vector<double> sums_;
  std::vector<long> counts_;
  double epsilon0_;
  mutable std::vector<double> mean_buf_;
};

struct GpUcbParams {
  std::size_t window = 300;      // sliding cap on stored samples
  double length_scale = 0.4;     // squared-exponential scale, policy features
  double context_length_scale = 0.4;  // scale for the context features
  double signal_var = 1.0;
  double noise_var = 0.005;
  double jitter = 1e-6;          // added to the Gram diagonal
  // The canonical 2 ln(n t^2 pi^2 / 6) confidence schedule never leaves the
  // exploration phase at this surrogate's reward gaps; it is scaled down the
  // way practical deployments do.
  double beta_scale = 0.02;
};

// Exact Gaussian-process regression over normalized (policy, context)
// features with an upper-confidence decision rule. Contextual by design:
// it scores arms against the context observed at decision time, and stores
// samples under the context that actually applied. Cost per decide is
// O(window^2) per arm, which is the point of comparison against the O(n)
// weight-based learners.
class GpUcbDecider : public Decider {
 public:
  GpUcbDecider(const PolicySpace& space, GpUcbParams params);

  std::size_t decide(const std::optional<Context>& observed, Rng& rng) override;
  void learn(std::size_t arm, double reward, const Context& measured) override;
  std::string_view name() const override { return "gpucb"; }
  std::uint64_t fingerprint() const override;

  std::size_t history_size() const { return ys_.size(); }
  // Posterior at one (arm, context) point; exposed for tests.
  std::pair<double, double> posterior(std::size_t arm,
                                      const Context& c) const;

 private:
  static constexpr std::size_t kDims = 9;

  void features(std::size_t arm, const Context& c, double* out) const;
  void rebuild_factorization();
  void extend_factorization();
  double beta() const;
  void scores_at(const Context& c, std::vector<double>& out) const;

  GpUcbParams params_;
  std::size_t num_arms_ = 0;
  std::vector<double> arm_feat_;   // num_arms x 5 policy features
  double demand_dl_norm_, demand_ul_norm_;

  std::vector<double> feat_cols_;  // kDims blocks of length ys_.size()
  std::vector<double> ys_;
  std::vector<double> chol_;       // lower-triangular factor, row-major
  std::vector<double> z_;          // solve(L, ys)

  mutable std::vector<double> q_, sq_, kv_, v_, score_;
};

// Decider construction from a registry name ("bsvbs", "random", "ucb1",
// "greedy", "gpucb"); used by the config layer.
struct DeciderSpec {
  std::string name;
  std::optional<double> gamma;     // bsvbs
  std::optional<double> epsilon0;  // greedy
  GpUcbParams gp;                  // gpucb
};

std::unique_ptr<Decider> make_decider(const DeciderSpec& spec,
                                      const PolicySpace& space, long horizon);

}  // namespace vbs
