#include "vbs/exp3.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "vbs/kernels.hpp"

namespace vbs::exp3 {

State::State(std::size_t n, double rate_in)
    : log_weights(n, 0.0), rate(rate_in) {
  if (n < 1) throw std::invalid_argument("state needs at least one option");
  if (!(rate > 0.0) || rate > 1.0)
    throw std::invalid_argument("exploration rate must lie in (0, 1]");
}

void distribution(const State& s, double* y) {
  const std::size_t n = s.size();
  kernels::exp_vec(s.log_weights.data(), y, n);
  const double total = kernels::sum(y, n);
  const double floor = s.rate / static_cast<double>(n);
  kernels::affine(y, (1.0 - s.rate) / total, floor, y, n);
}

std::vector<double> distribution(const State& s) {
  std::vector<double> y(s.size());
  distribution(s, y.data());
  return y;
}

std::vector<double> feedback_estimator(const State& s, std::size_t chosen,
                                       double reward) {
  if (chosen >= s.size()) throw std::out_of_range("chosen index out of range");
  if (reward < 0.0 || reward > 1.0)
    throw std::invalid_argument("reward must lie in [0, 1]");
  std::vector<double> y = distribution(s);
  assert(y[chosen] > 0.0);  // guaranteed by the rate/n floor
  std::vector<double> phi(s.size(), 0.0);
  phi[chosen] = reward / y[chosen];
  return phi;
}

void update(State& s, const std::vector<double>& estimator) {
  if (estimator.size() != s.size())
    throw std::invalid_argument("estimator size mismatch");
  const double scale = s.rate / static_cast<double>(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    if (estimator[i] != 0.0) s.log_weights[i] += scale * estimator[i];
  const double shift = kernels::max_value(s.log_weights.data(), s.size());
  if (shift != 0.0)
    kernels::sub_scalar_inplace(s.log_weights.data(), shift, s.size());
  ++s.round;
}

void update_sparse(State& s, std::size_t chosen, double phi) {
  s.log_weights[chosen] += s.rate / static_cast<double>(s.size()) * phi;
  // Entries never decrease between shifts, so the previous maximum (0) can
  // only be displaced by the entry just touched.
  const double shift = s.log_weights[chosen];
  if (shift > 0.0)
    kernels::sub_scalar_inplace(s.log_weights.data(), shift, s.size());
  ++s.round;
}

std::size_t sample(const double* y, std::size_t n, Rng& rng) {
  return kernels::inverse_cdf(y, n, rng.uniform01());
}

double tune_gamma(std::size_t num_arms, long horizon) {
  if (num_arms < 2) throw std::invalid_argument("num_arms must be >= 2");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const double n = static_cast<double>(num_arms);
  const double value =
      std::sqrt(n * std::log(n) /
                ((std::exp(1.0) - 1.0) * static_cast<double>(horizon)));
  return std::min(1.0, value);
}

double exp3_regret_bound(std::size_t num_arms, long horizon) {
  if (num_arms < 1) throw std::invalid_argument("num_arms must be >= 1");
  if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
  const double n = static_cast<double>(num_arms);
  return 2.0 * std::sqrt(std::exp(1.0) - 1.0) *
         std::sqrt(static_cast<double>(horizon) * n * std::log(n));
}

}  // namespace vbs::exp3
