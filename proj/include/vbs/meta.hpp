#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "vbs/deciders.hpp"
#include "vbs/exp3.hpp"
#include "vbs/rng.hpp"

namespace vbs {

// Exponential-weights selection over algorithm instances with Bernoulli
// feedback gating: the chosen algorithm learns only when the gate opens,
// which equalizes the learning rate across algorithms at eta / A per round.

// c * T^(-(1-beta)/(2-beta)) * A^((1-beta)/(2-beta)) * (ln A)^(1/2 * 1{beta=0}),
// clamped to (0, 1]. beta is the regret exponent of the strongest algorithm
// in the pool (1/2 for an Exp3-style learner).
double tune_eta(std::size_t num_algos, long horizon, double beta,
                double c = 1.0);

// Reference curve for meta-run regret plots (unit constant):
// t^(1/(2-beta)) * A^(1/(2-beta)) * (ln A)^(1/2 * 1{beta=0}).
double meta_regret_bound(std::size_t num_algos, long horizon, double beta);

// Probability that the feedback gate opens for the chosen algorithm.
// Always in (0, 1] because y_chosen >= eta/A.
double blocking_probability(double eta, std::size_t num_algos,
                            double y_chosen);

struct MetaStepLog {
  std::size_t algo = 0;
  std::size_t arm = 0;
  double reward = 0.0;
  bool feedback_allowed = false;
  std::int64_t decide_ns = 0;  // latency of the chosen algorithm's decide
};

class MetaLearner {
 public:
  MetaLearner(std::size_t num_algos, double eta);

  // One round: select an algorithm, let it decide, update the meta weights
  // from the realized reward, then gate that algorithm's learning.
  // `env_reward` maps the played arm to (scaled reward, measured context).
  MetaStepLog step(std::vector<std::unique_ptr<Decider>>& deciders,
                   const std::optional<Context>& observed,
                   const std::function<std::pair<double, Context>(std::size_t)>&
                       env_reward,
                   Rng& rng);

  const exp3::State& state() const { return state_; }
  std::vector<double> current_distribution() const;
  double eta() const { return state_.rate; }

  const std::vector<long>& granted() const { return granted_; }
  const std::vector<long>& blocked() const { return blocked_; }
  const std::vector<long>& chosen() const { return chosen_; }

  const DistributionDiag& distribution_diag() const { return diag_; }
  double max_rho() const { return max_rho_; }

 private:
  exp3::State state_;
  std::vector<double> y_;
  std::vector<long> granted_, blocked_, chosen_;
  DistributionDiag diag_;
  double max_rho_ = 0.0;
};

}  // namespace vbs
