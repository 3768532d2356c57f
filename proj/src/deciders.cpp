#include "vbs/deciders.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vbs/hash.hpp"
#include "vbs/kernels.hpp"

namespace vbs {

namespace {

void check_reward(double reward) {
  if (!(reward >= 0.0 && reward <= 1.0))
    throw std::invalid_argument("reward must lie in [0, 1]");
}

}  // namespace

// ---------------------------------------------------------------------------
// BSvBS

BsvbsDecider::BsvbsDecider(std::size_t num_arms, double gamma)
    : state_(num_arms, gamma), y_(num_arms, 0.0) {
  if (num_arms < 2) throw std::invalid_argument("bsvbs needs >= 2 arms");
}

std::size_t BsvbsDecider::decide(const std::optional<Context>&, Rng& rng) {
  const std::size_t n = state_.size();
  exp3::distribution(state_, y_.data());
  const double floor = state_.rate / static_cast<double>(n);
  double min_y = y_[0];
  for (std::size_t i = 1; i < n; ++i) min_y = std::min(min_y, y_[i]);
  diag_.min_floor_margin = std::min(diag_.min_floor_margin, min_y - floor);
  diag_.max_sum_deviation = std::max(
      diag_.max_sum_deviation, std::abs(kernels::sum(y_.data(), n) - 1.0));
  return exp3::sample(y_.data(), n, rng);
}

void BsvbsDecider::learn(std::size_t arm, double reward, const Context&) {
  check_reward(reward);
  if (arm >= state_.size()) throw std::out_of_range("arm index out of range");
  const double phi = reward / y_[arm];
  exp3::update_sparse(state_, arm, phi);
}

std::uint64_t BsvbsDecider::fingerprint() const {
  std::uint64_t h = fnv1a64(state_.log_weights);
  h = fnv1a64(&state_.round, sizeof(state_.round), h);
  return h;
}

std::vector<double> BsvbsDecider::current_distribution() const {
  return exp3::distribution(state_);
}

// ---------------------------------------------------------------------------
// Random

RandomDecider::RandomDecider(std::size_t num_arms) : num_arms_(num_arms) {
  if (num_arms < 1) throw std::invalid_argument("random needs >= 1 arm");
}

std::size_t RandomDecider::decide(const std::optional<Context>&, Rng& rng) {
  return static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(num_arms_) - 1));
}

// ---------------------------------------------------------------------------
// UCB1

Ucb1Decider::Ucb1Decider(std::size_t num_arms)
    : sums_(num_arms, 0.0), counts_(num_arms, 0), score_buf_(num_arms, 0.0) {
  if (num_arms < 1) throw std::invalid_argument("ucb1 needs >= 1 arm");
}

std::vector<double> Ucb1Decider::scores() const {
  std::vector<double> s(sums_.size(), 0.0);
  const double lt = std::log(static_cast<double>(std::max<long>(total_, 1)));
  for (std::size_t i = 0; i < sums_.size(); ++i) {
    s[i] = counts_[i] == 0
               ? std::numeric_limits<double>::infinity()
               : sums_[i] / static_cast<double>(counts_[i]) +
                     std::sqrt(2.0 * lt / static_cast<double>(counts_[i]));
  }
  return s;
}

std::size_t Ucb1Decider::decide(const std::optional<Context>&, Rng&) {
  for (std::size_t i = 0; i < counts_.size(); ++i)
    if (counts_[i] == 0) return i;  // initialization sweep
  const double lt = std::log(static_cast<double>(total_));
  for (std::size_t i = 0; i < counts_.size(); ++i)
    score_buf_[i] = sums_[i] / static_cast<double>(counts_[i]) +
                    std::sqrt(2.0 * lt / static_cast<double>(counts_[i]));
  return kernels::argmax(score_buf_.data(), score_buf_.size());
}

void Ucb1Decider::learn(std::size_t arm, double reward, const Context&) {
  check_reward(reward);
  if (arm >= sums_.size()) throw std::out_of_range("arm index out of range");
  sums_[arm] += reward;
  counts_[arm] += 1;
  total_ += 1;
}

std::uint64_t Ucb1Decider::fingerprint() const {
  std::uint64_t h = fnv1a64(sums_);
  h = fnv1a64(counts_.data(), counts_.size() * sizeof(long), h);
  return fnv1a64(&total_, sizeof(total_), h);
}

// ---------------------------------------------------------------------------
// Greedy

GreedyDecider::GreedyDecider(std::size_t num_arms, double epsilon0)
    : sums_(num_arms, 0.0),
      counts_(num_arms, 0),
      epsilon0_(epsilon0),
      mean_buf_(num_arms, 0.0) {
  if (num_arms < 1) throw std::invalid_argument("greedy needs >= 1 arm");
  if (epsilon0 < 0.0 || epsilon0 > 1.0)
    throw std::invalid_argument("epsilon0 must lie in [0, 1]");
}

bool GreedyDecider::sweep_complete() const {
  for (long c : counts_)
    if (c == 0) return false;
  return true;
}

std::size_t GreedyDecider::decide(const std::optional<Context>&, Rng& rng) {
  for (std::size_t i = 0; i < counts_.size(); ++i)
    if (counts_[i] == 0) return i;  // initialization sweep
  if (epsilon0_ > 0.0 && rng.bernoulli(epsilon0_))
    return static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(counts_.size()) - 1));
  for (std::size_t i = 0; i < counts_.size(); ++i)
    mean_buf_[i] = sums_[i] / static_cast<double>(counts_[i]);
  return kernels::argmax(mean_buf_.data(), mean_buf_.size());
}

void GreedyDecider::learn(std::size_t arm, double reward, const Context&) {
  check_reward(reward);
  if (arm >= sums_.size()) throw std::out_of_range("arm index out of range");
  // Estimates freeze once the sweep completes: exploitation rounds do not
  // revise the incumbent, which is what locks the decider onto one arm.
  if (sweep_complete()) return;
  sums_[arm] += reward;
  counts_[arm] += 1;
}

std::uint64_t GreedyDecider::fingerprint() const {
  std::uint64_t h = fnv1a64(sums_);
  return fnv1a64(counts_.data(), counts_.size() * sizeof(long), h);
}

// ---------------------------------------------------------------------------
// GP-UCB surrogate

GpUcbDecider::GpUcbDecider(const PolicySpace& space, GpUcbParams params)
    : params_(params), num_arms_(space.size()) {
  if (num_arms_ < 1) throw std::invalid_argument("gpucb needs >= 1 arm");
  if (params_.window < 1) throw std::invalid_argument("gp window must be >= 1");
  if (!(params_.length_scale > 0.0) || !(params_.context_length_scale > 0.0))
    throw std::invalid_argument("gp length scales must be > 0");
  if (!(params_.beta_scale > 0.0))
    throw std::invalid_argument("gp beta scale must be > 0");
  const double pmax = std::max(space.set_p_dl().back(), 1e-9);
  demand_dl_norm_ = 32.0;
  demand_ul_norm_ = 23.0;
  arm_feat_.resize(num_arms_ * 5);
  const double inv_l = 1.0 / params_.length_scale;
  for (std::size_t a = 0; a < num_arms_; ++a) {
    const Policy p = space.policy_at(a);
    double* f = &arm_feat_[a * 5];
    f[0] = p.tx_power_dl / pmax * inv_l;
    f[1] = p.mcs_dl / 28.0 * inv_l;
    f[2] = p.prb_ratio_dl * inv_l;
    f[3] = p.mcs_ul / 28.0 * inv_l;
    f[4] = p.prb_ratio_ul * inv_l;
  }
  q_.resize(kDims);
}

void GpUcbDecider::features(std::size_t arm, const Context& c,
                            double* out) const {
  const double* pf = &arm_feat_[arm * 5];
  const double inv_lc = 1.0 / params_.context_length_scale;
  out[0] = pf[0];
  out[1] = pf[1];
  out[2] = pf[2];
  out[3] = pf[3];
  out[4] = pf[4];
  out[5] = c.demand_dl / demand_dl_norm_ * inv_lc;
  out[6] = c.demand_ul / demand_ul_norm_ * inv_lc;
  out[7] = c.cqi_dl / 15.0 * inv_lc;
  out[8] = c.cqi_ul / 15.0 * inv_lc;
}

double GpUcbDecider::beta() const {
  // Grows with the information the learner has actually received.
  const double m = static_cast<double>(ys_.size()) + 1.0;
  const double pi2_6 = std::numbers::pi * std::numbers::pi / 6.0;
  return params_.beta_scale * 2.0 *
         std::log(static_cast<double>(num_arms_) * m * m * pi2_6);
}

void GpUcbDecider::rebuild_factorization() {
  const std::size_t w = ys_.size();
  chol_.assign(w * w, 0.0);
  std::vector<double>& k = chol_;  // build the Gram in place, then factor
  sq_.resize(w);
  for (std::size_t i = 0; i < w; ++i) {
    double qi[kDims];
    for (std::size_t d = 0; d < kDims; ++d) qi[d] = feat_cols_[d * w + i];
    kernels::sqdist_dimmajor(feat_cols_.data(), w, kDims, qi, sq_.data());
    for (std::size_t j = 0; j <= i; ++j)
      k[i * w + j] = params_.signal_var * std::exp(-0.5 * sq_[j]);
    k[i * w + i] += params_.noise_var + params_.jitter;
  }
  // In-place Cholesky with escalating jitter on failure.
  double extra = 0.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    std::vector<double> l = k;
    bool ok = true;
    for (std::size_t i = 0; i < w && ok; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        const double acc = kernels::dot(&l[i * w], &l[j * w], j);
        if (i == j) {
          const double d = l[i * w + i] + extra - acc;
          if (d <= 0.0) {
            ok = false;
            break;
          }
          l[i * w + i] = std::sqrt(d);
        } else {
          l[i * w + j] = (l[i * w + j] - acc) / l[j * w + j];
        }
      }
    }
    if (ok) {
      for (std::size_t i = 0; i < w; ++i)
        for (std::size_t j = i + 1; j < w; ++j) l[i * w + j] = 0.0;
      chol_ = std::move(l);
      z_.assign(w, 0.0);
      for (std::size_t i = 0; i < w; ++i)
        z_[i] = (ys_[i] - kernels::dot(&chol_[i * w], z_.data(), i)) /
                chol_[i * w + i];
      return;
    }
    extra = extra == 0.0 ? params_.jitter * 10.0 : extra * 10.0;
  }
  throw std::runtime_error("gp factorization failed despite jitter");
}

void GpUcbDecider::extend_factorization() {
  // Append one row to L and z; valid only while nothing was evicted.
  const std::size_t w = ys_.size();
  const std::size_t m = w - 1;  // previous size
  std::vector<double> grown((m + 1) * (m + 1), 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= i; ++j) grown[i * w + j] = chol_[i * m + j];
  double qn[kDims];
  for (std::size_t d = 0; d < kDims; ++d) qn[d] = feat_cols_[d * w + m];
  sq_.resize(w);
  kernels::sqdist_dimmajor(feat_cols_.data(), w, kDims, qn, sq_.data());
  kv_.resize(w);
  for (std::size_t i = 0; i < w; ++i)
    kv_[i] = params_.signal_var * std::exp(-0.5 * sq_[i]);
  kv_[m] += params_.noise_var + params_.jitter;
  // Forward-substitute the new row.
  for (std::size_t j = 0; j < m; ++j)
    grown[m * w + j] =
        (kv_[j] - kernels::dot(&grown[m * w], &grown[j * w], j)) /
        grown[j * w + j];
  const double diag = kv_[m] - kernels::dot(&grown[m * w], &grown[m * w], m);
  if (diag <= 0.0) {
    chol_.clear();
    rebuild_factorization();
    return;
  }
  grown[m * w + m] = std::sqrt(diag);
  chol_ = std::move(grown);
  z_.push_back((ys_[m] - kernels::dot(&chol_[m * w], z_.data(), m)) /
               chol_[m * w + m]);
}

void GpUcbDecider::learn(std::size_t arm, double reward,
                         const Context& measured) {
  check_reward(reward);
  if (arm >= num_arms_) throw std::out_of_range("arm index out of range");
  double f[kDims];
  features(arm, measured, f);
  const std::size_t w_old = ys_.size();
  const bool evict = w_old == params_.window;

  std::vector<double> cols((evict ? w_old : w_old + 1) * kDims);
  const std::size_t w_new = evict ? w_old : w_old + 1;
  const std::size_t skip = evict ? 1 : 0;
  for (std::size_t d = 0; d < kDims; ++d) {
    for (std::size_t i = skip; i < w_old; ++i)
      cols[d * w_new + (i - skip)] = feat_cols_[d * w_old + i];
    cols[d * w_new + (w_new - 1)] = f[d];
  }
  feat_cols_ = std::move(cols);
  if (evict) ys_.erase(ys_.begin());
  ys_.push_back(reward);

  if (evict) {
    rebuild_factorization();
  } else {
    extend_factorization();
  }
}

void GpUcbDecider::scores_at(const Context& c, std::vector<double>& out) const {
  const std::size_t w = ys_.size();
  out.resize(num_arms_);
  const double sqrt_beta = std::sqrt(beta());
  sq_.resize(w);
  kv_.resize(w);
  v_.resize(w);
  for (std::size_t a = 0; a < num_arms_; ++a) {
    features(a, c, q_.data());
    kernels::sqdist_dimmajor(feat_cols_.data(), w, kDims, q_.data(),
                             sq_.data());
    kernels::affine(sq_.data(), -0.5, std::log(params_.signal_var), kv_.data(),
                    w);
    kernels::exp_vec(kv_.data(), kv_.data(), w);
    for (std::size_t i = 0; i < w; ++i)
      v_[i] = (kv_[i] - kernels::dot(&chol_[i * w], v_.data(), i)) /
              chol_[i * w + i];
    const double mean = kernels::dot(v_.data(), z_.data(), w);
    const double var =
        std::max(0.0, params_.signal_var - kernels::dot(v_.data(), v_.data(), w));
    out[a] = mean + sqrt_beta * std::sqrt(var);
  }
}

std::size_t GpUcbDecider::decide(const std::optional<Context>& observed,
                                 Rng&) {
  if (ys_.empty()) return 0;  // symmetric prior; lowest index
  const Context c = observed.value_or(Context{});
  scores_at(c, score_);
  return kernels::argmax(score_.data(), score_.size());
}

std::pair<double, double> GpUcbDecider::posterior(std::size_t arm,
                                                  const Context& c) const {
  const std::size_t w = ys_.size();
  if (w == 0) return {0.0, std::sqrt(params_.signal_var)};
  features(arm, c, q_.data());
  sq_.resize(w);
  kv_.resize(w);
  v_.resize(w);
  kernels::sqdist_dimmajor(feat_cols_.data(), w, kDims, q_.data(), sq_.data());
  for (std::size_t i = 0; i < w; ++i)
    kv_[i] = params_.signal_var * std::exp(-0.5 * sq_[i]);
  for (std::size_t i = 0; i < w; ++i)
    v_[i] = (kv_[i] - kernels::dot(&chol_[i * w], v_.data(), i)) /
            chol_[i * w + i];
  const double mean = kernels::dot(v_.data(), z_.data(), w);
  const double var =
      std::max(0.0, params_.signal_var - kernels::dot(v_.data(), v_.data(), w));
  return {mean, std::sqrt(var)};
}

std::uint64_t GpUcbDecider::fingerprint() const {
  std::uint64_t h = fnv1a64(ys_);
  h = fnv1a64(feat_cols_, h);
  return h;
}

// ---------------------------------------------------------------------------

std::unique_ptr<Decider> make_decider(const DeciderSpec& spec,
                                      const PolicySpace& space, long horizon) {
  const std::size_t n = space.size();
  if (spec.name == "bsvbs") {
    const double gamma =
        spec.gamma.value_or(exp3::tune_gamma(n, horizon));
    return std::make_unique<BsvbsDecider>(n, gamma);
  }
  if (spec.name == "random") return std::make_unique<RandomDecider>(n);
  if (spec.name == "ucb1") return std::make_unique<Ucb1Decider>(n);
  if (spec.name == "greedy")
    return std::make_unique<GreedyDecider>(n, spec.epsilon0.value_or(0.0));
  if (spec.name == "gpucb") return std::make_unique<GpUcbDecider>(space, spec.gp);
  throw std::invalid_argument("unknown decider: " + spec.name);
}

}  // namespace vbs
