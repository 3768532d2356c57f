#pragma once

#include <cstddef>
#include <vector>

#include "vbs/rng.hpp"

namespace vbs::exp3 {

// Exponential-weights state over n options with a uniform exploration floor.
// Weights live in the log domain and are max-normalized to 0 after every
// update; the feedback estimator can reach reward / (rate/n), which would
// overflow linear weights within a few hundred rounds.
struct State {
  std::vector<double> log_weights;
  double rate = 0.0;  // exploration share, (0, 1]
  long round = 1;

  State(std::size_t n, double rate_in);
  std::size_t size() const { return log_weights.size(); }
};

// y(i) = rate/n + (1 - rate) * w(i) / sum(w). `y` must hold size() doubles.
void distribution(const State& s, double* y);
std::vector<double> distribution(const State& s);

// Importance-weighted feedback: value reward / y(chosen) at the chosen index,
// zero elsewhere.
std::vector<double> feedback_estimator(const State& s, std::size_t chosen,
                                       double reward);

// log w(i) += rate * estimator(i) / n, then shift all entries so the maximum
// is back at 0. The shift leaves the distribution unchanged.
void update(State& s, const std::vector<double>& estimator);

// Same update for the usual one-hot estimator.
void update_sparse(State& s, std::size_t chosen, double phi);

// Inverse-CDF draw over an explicit distribution with a single uniform.
std::size_t sample(const double* y, std::size_t n, Rng& rng);

// min{1, sqrt(n ln n / ((e-1) T))}
double tune_gamma(std::size_t num_arms, long horizon);

// 2 sqrt(e-1) sqrt(T n ln n)
double exp3_regret_bound(std::size_t num_arms, long horizon);

}  // namespace vbs::exp3
