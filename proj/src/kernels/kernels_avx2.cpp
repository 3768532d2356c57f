#include "vbs/kernels.hpp"

#include <cmath>
#include <immintrin.h>

// AVX2+FMA kernel variants. Each one reproduces the canonical blocked order
// of kernels_scalar.cpp exactly: lane j of a 256-bit accumulator sees the
// same elements, in the same order, as scalar accumulator j, and tails are
// folded in with the same scalar statements. The equivalence tests assert
// bit-identical outputs against the scalar reference.

namespace vbs::kernels {
namespace detail {
namespace {

constexpr double kLog2e = 1.4426950408889634074;
constexpr double kLn2Hi = 6.93145751953125e-1;
constexpr double kLn2Lo = 1.42860682030941723212e-6;
constexpr double kExpHi = 709.0;
constexpr double kExpLo = -708.0;

void v_exp_vec(const double* x, double* y, std::size_t n) {
  const __m256d log2e = _mm256_set1_pd(kLog2e);
  const __m256d ln2hi = _mm256_set1_pd(-kLn2Hi);
  const __m256d ln2lo = _mm256_set1_pd(-kLn2Lo);
  const __m256d c2 = _mm256_set1_pd(1.0 / 2);
  const __m256d c3 = _mm256_set1_pd(1.0 / 6);
  const __m256d c4 = _mm256_set1_pd(1.0 / 24);
  const __m256d c5 = _mm256_set1_pd(1.0 / 120);
  const __m256d c6 = _mm256_set1_pd(1.0 / 720);
  const __m256d c7 = _mm256_set1_pd(1.0 / 5040);
  const __m256d c8 = _mm256_set1_pd(1.0 / 40320);
  const __m256d c9 = _mm256_set1_pd(1.0 / 362880);
  const __m256d c10 = _mm256_set1_pd(1.0 / 3628800);
  const __m256d c11 = _mm256_set1_pd(1.0 / 39916800);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d hi = _mm256_set1_pd(kExpHi);
  const __m256d lo = _mm256_set1_pd(kExpLo);
  const __m256d inf = _mm256_set1_pd(HUGE_VAL);
  const __m256d zero = _mm256_setzero_pd();

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m128i ki32 = _mm256_cvtpd_epi32(_mm256_mul_pd(xv, log2e));
    const __m256i ki = _mm256_cvtepi32_epi64(ki32);
    const __m256d k = _mm256_cvtepi32_pd(ki32);
    __m256d r = _mm256_fmadd_pd(k, ln2hi, xv);
    r = _mm256_fmadd_pd(k, ln2lo, r);
    __m256d p = c11;
    p = _mm256_fmadd_pd(p, r, c10);
    p = _mm256_fmadd_pd(p, r, c9);
    p = _mm256_fmadd_pd(p, r, c8);
    p = _mm256_fmadd_pd(p, r, c7);
    p = _mm256_fmadd_pd(p, r, c6);
    p = _mm256_fmadd_pd(p, r, c5);
    p = _mm256_fmadd_pd(p, r, c4);
    p = _mm256_fmadd_pd(p, r, c3);
    p = _mm256_fmadd_pd(p, r, c2);
    p = _mm256_fmadd_pd(p, _mm256_mul_pd(r, r), r);
    p = _mm256_add_pd(p, one);
    const __m256i expo =
        _mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52);
    __m256d res = _mm256_mul_pd(p, _mm256_castsi256_pd(expo));
    res = _mm256_blendv_pd(res, inf, _mm256_cmp_pd(xv, hi, _CMP_GT_OQ));
    res = _mm256_blendv_pd(res, zero, _mm256_cmp_pd(xv, lo, _CMP_LT_OQ));
    _mm256_storeu_pd(y + i, res);
  }
  for (; i < n; ++i) y[i] = exp_elem(x[i]);
}

double v_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double a[4];
  _mm256_store_pd(a, acc);
  if (i < n) a[0] += x[i];
  if (i + 1 < n) a[1] += x[i + 1];
  if (i + 2 < n) a[2] += x[i + 2];
  return (a[0] + a[1]) + (a[2] + a[3]);
}

double v_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  alignas(32) double s[4];
  _mm256_store_pd(s, acc);
  if (i < n) s[0] = std::fma(a[i], b[i], s[0]);
  if (i + 1 < n) s[1] = std::fma(a[i + 1], b[i + 1], s[1]);
  if (i + 2 < n) s[2] = std::fma(a[i + 2], b[i + 2], s[2]);
  return (s[0] + s[1]) + (s[2] + s[3]);
}

double v_max_value(const double* x, std::size_t n) {
  __m256d acc = _mm256_set1_pd(x[0]);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_max_pd(_mm256_loadu_pd(x + i), acc);
  alignas(32) double m[4];
  _mm256_store_pd(m, acc);
  if (i < n) m[0] = x[i] > m[0] ? x[i] : m[0];
  if (i + 1 < n) m[1] = x[i + 1] > m[1] ? x[i + 1] : m[1];
  if (i + 2 < n) m[2] = x[i + 2] > m[2] ? x[i + 2] : m[2];
  const double ma = m[0] > m[1] ? m[0] : m[1];
  const double mb = m[2] > m[3] ? m[2] : m[3];
  return ma > mb ? ma : mb;
}

std::size_t v_argmax(const double* x, std::size_t n) {
  const double m = v_max_value(x, n);
  const __m256d mv = _mm256_set1_pd(m);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const int mask = _mm256_movemask_pd(
        _mm256_cmp_pd(_mm256_loadu_pd(x + i), mv, _CMP_EQ_OQ));
    if (mask) return i + static_cast<std::size_t>(__builtin_ctz(mask));
  }
  for (; i < n; ++i)
    if (x[i] == m) return i;
  return n - 1;
}

void v_affine(const double* x, double c1, double c0, double* y,
              std::size_t n) {
  const __m256d c1v = _mm256_set1_pd(c1);
  const __m256d c0v = _mm256_set1_pd(c0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i,
                     _mm256_fmadd_pd(_mm256_loadu_pd(x + i), c1v, c0v));
  for (; i < n; ++i) y[i] = std::fma(x[i], c1, c0);
}

void v_add_inplace(double* acc, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i),
                                            _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) acc[i] += x[i];
}

void v_sub_scalar_inplace(double* x, double c, std::size_t n) {
  const __m256d cv = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_sub_pd(_mm256_loadu_pd(x + i), cv));
  for (; i < n; ++i) x[i] -= c;
}

std::size_t v_inverse_cdf(const double* p, std::size_t n, double u) {
  double run = 0.0;
  std::size_t i = 0;
  // Four block sums per iteration; each block keeps the (p0+p1)+(p2+p3)
  // association so the walk matches the scalar reference bit for bit.
  for (; i + 16 <= n; i += 16) {
    const __m256d v0 = _mm256_loadu_pd(p + i);
    const __m256d v1 = _mm256_loadu_pd(p + i + 4);
    const __m256d v2 = _mm256_loadu_pd(p + i + 8);
    const __m256d v3 = _mm256_loadu_pd(p + i + 12);
    // hadd: (a0+a1, b0+b1, a2+a3, b2+b3)
    const __m256d h01 = _mm256_hadd_pd(v0, v1);
    const __m256d h23 = _mm256_hadd_pd(v2, v3);
    const __m128d lo01 = _mm256_castpd256_pd128(h01);
    const __m128d hi01 = _mm256_extractf128_pd(h01, 1);
    const __m128d lo23 = _mm256_castpd256_pd128(h23);
    const __m128d hi23 = _mm256_extractf128_pd(h23, 1);
    alignas(16) double bs[4];
    _mm_store_pd(bs, _mm_add_pd(lo01, hi01));      // bs[0]=blk0, bs[1]=blk1
    _mm_store_pd(bs + 2, _mm_add_pd(lo23, hi23));  // bs[2]=blk2, bs[3]=blk3
    for (std::size_t b = 0; b < 4; ++b) {
      if (u < run + bs[b]) {
        double c = run;
        for (std::size_t j = 0; j < 4; ++j) {
          c += p[i + 4 * b + j];
          if (u < c) return i + 4 * b + j;
        }
      }
      run += bs[b];
    }
  }
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

void v_gather2_add(const double* ta, const std::int32_t* ia, const double* tb,
                   const std::int32_t* ib, double bias, double* dst,
                   std::size_t n) {
  const __m256d bv = _mm256_set1_pd(bias);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m128i iav = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ia + i));
    const __m128i ibv = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ib + i));
    const __m256d ga = _mm256_i32gather_pd(ta, iav, 8);
    const __m256d gb = _mm256_i32gather_pd(tb, ibv, 8);
    _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_add_pd(bv, ga), gb));
  }
  for (; i < n; ++i) dst[i] = (bias + ta[ia[i]]) + tb[ib[i]];
}

void v_sqdist_dimmajor(const double* feats, std::size_t w, std::size_t d,
                       const double* q, double* out) {
  std::size_t i = 0;
  const __m256d zero = _mm256_setzero_pd();
  for (; i + 4 <= w; i += 4) _mm256_storeu_pd(out + i, zero);
  for (; i < w; ++i) out[i] = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double* col = feats + k * w;
    const double qk = q[k];
    const __m256d qv = _mm256_set1_pd(qk);
    i = 0;
    for (; i + 4 <= w; i += 4) {
      const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(col + i), qv);
      _mm256_storeu_pd(out + i,
                       _mm256_fmadd_pd(diff, diff, _mm256_loadu_pd(out + i)));
    }
    for (; i < w; ++i) {
      const double diff = col[i] - qk;
      out[i] = std::fma(diff, diff, out[i]);
    }
  }
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops = {
      v_exp_vec,       v_sum,       v_dot,
      v_max_value,     v_argmax,    v_affine,
      v_add_inplace,   v_sub_scalar_inplace,
      v_inverse_cdf,   v_gather2_add,
      v_sqdist_dimmajor,
  };
  return ops;
}

}  // namespace detail
}  // namespace vbs::kernels
