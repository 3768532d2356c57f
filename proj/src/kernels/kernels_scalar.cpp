#include "vbs/kernels.hpp"

#include <bit>
#include <cmath>
#include <limits>

// Scalar reference implementations. These define the canonical arithmetic
// order documented in kernels.hpp; the AVX2 variants must reproduce every
// result bit for bit.

namespace vbs::kernels {
namespace detail {

namespace {

constexpr double kLog2e = 1.4426950408889634074;
constexpr double kLn2Hi = 6.93145751953125e-1;
constexpr double kLn2Lo = 1.42860682030941723212e-6;

// Taylor coefficients 1/k! for k = 2..11.
constexpr double kExpC[10] = {
    1.0 / 2, 1.0 / 6, 1.0 / 24, 1.0 / 120, 1.0 / 720, 1.0 / 5040,
    1.0 / 40320, 1.0 / 362880, 1.0 / 3628800, 1.0 / 39916800,
};

constexpr double kExpHi = 709.0;    // saturates to +inf above
constexpr double kExpLo = -708.0;   // flushes to 0 below

}  // namespace

double exp_elem(double x) {
  if (x > kExpHi) return std::numeric_limits<double>::infinity();
  if (x < kExpLo) return 0.0;
  // k = round-to-nearest(x * log2(e)); SSE cvtsd honors the default mode,
  // matching _mm256_cvtpd_epi32 on the vector side.
  const std::int64_t ki = std::lrint(x * kLog2e);
  const double k = static_cast<double>(ki);
  double r = std::fma(k, -kLn2Hi, x);
  r = std::fma(k, -kLn2Lo, r);
  double p = kExpC[9];
  p = std::fma(p, r, kExpC[8]);
  p = std::fma(p, r, kExpC[7]);
  p = std::fma(p, r, kExpC[6]);
  p = std::fma(p, r, kExpC[5]);
  p = std::fma(p, r, kExpC[4]);
  p = std::fma(p, r, kExpC[3]);
  p = std::fma(p, r, kExpC[2]);
  p = std::fma(p, r, kExpC[1]);
  p = std::fma(p, r, kExpC[0]);
  p = std::fma(p, r * r, r);  // p = r + r^2 * poly
  p += 1.0;
  const double pow2k = std::bit_cast<double>((ki + 1023) << 52);
  return p * pow2k;
}

namespace {

void s_exp_vec(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = exp_elem(x[i]);
}

double s_sum(const double* x, std::size_t n) {
  double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 += x[i];
    a1 += x[i + 1];
    a2 += x[i + 2];
    a3 += x[i + 3];
  }
  if (i < n) a0 += x[i];
  if (i + 1 < n) a1 += x[i + 1];
  if (i + 2 < n) a2 += x[i + 2];
  return (a0 + a1) + (a2 + a3);
}

double s_dot(const double* a, const double* b, std::size_t n) {
  double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 = std::fma(a[i], b[i], a0);
    a1 = std::fma(a[i + 1], b[i + 1], a1);
    a2 = std::fma(a[i + 2], b[i + 2], a2);
    a3 = std::fma(a[i + 3], b[i + 3], a3);
  }
  if (i < n) a0 = std::fma(a[i], b[i], a0);
  if (i + 1 < n) a1 = std::fma(a[i + 1], b[i + 1], a1);
  if (i + 2 < n) a2 = std::fma(a[i + 2], b[i + 2], a2);
  return (a0 + a1) + (a2 + a3);
}

double s_max_value(const double* x, std::size_t n) {
  double m0 = x[0], m1 = x[0], m2 = x[0], m3 = x[0];
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    m0 = x[i] > m0 ? x[i] : m0;
    m1 = x[i + 1] > m1 ? x[i + 1] : m1;
    m2 = x[i + 2] > m2 ? x[i + 2] : m2;
    m3 = x[i + 3] > m3 ? x[i + 3] : m3;
  }
  if (i < n) m0 = x[i] > m0 ? x[i] : m0;
  if (i + 1 < n) m1 = x[i + 1] > m1 ? x[i + 1] : m1;
  if (i + 2 < n) m2 = x[i + 2] > m2 ? x[i + 2] : m2;
  const double ma = m0 > m1 ? m0 : m1;
  const double mb = m2 > m3 ? m2 : m3;
  return ma > mb ? ma : mb;
}

std::size_t s_argmax(const double* x, std::size_t n) {
  const double m = s_max_value(x, n);
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] == m) return i;
  return n - 1;  // unreachable for finite inputs
}

void s_affine(const double* x, double c1, double c0, double* y,
              std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(x[i], c1, c0);
}

void s_add_inplace(double* acc, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void s_sub_scalar_inplace(double* x, double c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] -= c;
}

std::size_t s_inverse_cdf(const double* p, std::size_t n, double u) {
  double run = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double bs = (p[i] + p[i + 1]) + (p[i + 2] + p[i + 3]);
    if (u < run + bs) {
      double c = run;
      for (std::size_t j = 0; j < 4; ++j) {
        c += p[i + j];
        if (u < c) return i + j;
      }
    }
    run += bs;
  }
  for (; i < n; ++i) {
    run += p[i];
    if (u < run) return i;
  }
  return n - 1;
}

void s_gather2_add(const double* ta, const std::int32_t* ia, const double* tb,
                   const std::int32_t* ib, double bias, double* dst,
                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    dst[i] = (bias + ta[ia[i]]) + tb[ib[i]];
}

void s_sqdist_dimmajor(const double* feats, std::size_t w, std::size_t d,
                       const double* q, double* out) {
  for (std::size_t i = 0; i < w; ++i) out[i] = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double* col = feats + k * w;
    const double qk = q[k];
    for (std::size_t i = 0; i < w; ++i) {
      const double diff = col[i] - qk;
      out[i] = std::fma(diff, diff, out[i]);
    }
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops = {
      s_exp_vec,       s_sum,       s_dot,
      s_max_value,     s_argmax,    s_affine,
      s_add_inplace,   s_sub_scalar_inplace,
      s_inverse_cdf,   s_gather2_add,
      s_sqdist_dimmajor,
  };
  return ops;
}

}  // namespace detail
}  // namespace vbs::kernels
