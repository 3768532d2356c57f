#include "vbs/meta.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "vbs/kernels.hpp"

namespace vbs {

double tune_eta(std::size_t num_algos, long horizon, double beta, double c) {
  if (num_algos < 2) throw std::invalid_argument("num_algos must be >= 2");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (beta < 0.0 || beta > 1.0)
    throw std::invalid_argument("beta must lie in [0, 1]");
  if (!(c > 0.0)) throw std::invalid_argument("c must be > 0");
  const double expo = (1.0 - beta) / (2.0 - beta);
  const double a = static_cast<double>(num_algos);
  double eta = c * std::pow(static_cast<double>(horizon), -expo) *
               std::pow(a, expo);
  if (beta == 0.0) eta *= std::sqrt(std::log(a));
  return std::min(1.0, eta);
}

double meta_regret_bound(std::size_t num_algos, long horizon, double beta) {
  if (num_algos < 1) throw std::invalid_argument("num_algos must be >= 1");
  if (beta < 0.0 || beta > 1.0)
    throw std::invalid_argument("beta must lie in [0, 1]");
  const double expo = 1.0 / (2.0 - beta);
  const double a = static_cast<double>(num_algos);
  double b = std::pow(static_cast<double>(horizon), expo) * std::pow(a, expo);
  if (beta == 0.0) b *= std::sqrt(std::log(a));
  return b;
}

double blocking_probability(double eta, std::size_t num_algos,
                            double y_chosen) {
  if (!(y_chosen > 0.0)) throw std::invalid_argument("y_chosen must be > 0");
  return std::min(1.0, eta / (static_cast<double>(num_algos) * y_chosen));
}

MetaLearner::MetaLearner(std::size_t num_algos, double eta)
    : state_(num_algos, eta),
      y_(num_algos, 0.0),
      granted_(num_algos, 0),
      blocked_(num_algos, 0),
      chosen_(num_algos, 0) {
  if (num_algos < 1) throw std::invalid_argument("meta pool is empty");
}

std::vector<double> MetaLearner::current_distribution() const {
  return exp3::distribution(state_);
}

MetaStepLog MetaLearner::step(
    std::vector<std::unique_ptr<Decider>>& deciders,
    const std::optional<Context>& observed,
    const std::function<std::pair<double, Context>(std::size_t)>& env_reward,
    Rng& rng) {
  const std::size_t a = state_.size();
  if (deciders.size() != a)
    throw std::invalid_argument("decider pool size mismatch");

  exp3::distribution(state_, y_.data());
  const double floor = state_.rate / static_cast<double>(a);
  double min_y = y_[0];
  for (std::size_t i = 1; i < a; ++i) min_y = std::min(min_y, y_[i]);
  diag_.min_floor_margin = std::min(diag_.min_floor_margin, min_y - floor);
  diag_.max_sum_deviation = std::max(
      diag_.max_sum_deviation, std::abs(kernels::sum(y_.data(), a) - 1.0));

  MetaStepLog log;
  log.algo = exp3::sample(y_.data(), a, rng);
  chosen_[log.algo] += 1;

  // Only the winner produces a recommendation; unchosen deciders are not
  // touched in any way this round.
  const auto t0 = std::chrono::steady_clock::now();
  log.arm = deciders[log.algo]->decide(observed, rng);
  log.decide_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  const auto [reward, measured] = env_reward(log.arm);
  log.reward = reward;

  const double phi = reward / y_[log.algo];
  exp3::update_sparse(state_, log.algo, phi);

  const double rho = blocking_probability(state_.rate, a, y_[log.algo]);
  max_rho_ = std::max(max_rho_, rho);
  log.feedback_allowed = rng.bernoulli(rho);
  if (log.feedback_allowed) {
    deciders[log.algo]->learn(log.arm, reward, measured);
    granted_[log.algo] += 1;
  } else {
    blocked_[log.algo] += 1;
  }
  return log;
}

}  // namespace vbs
