#pragma once

#include <cstddef>
#include <cstdint>

// Vector kernels behind the per-round inner loops: exponentiating log-weight
// vectors, mixing the sampling simplex, inverse-CDF sampling, and the
// accumulate/argmax passes of the brute-force benchmark.
//
// Every kernel has a scalar reference implementation and, on x86-64 CPUs with
// AVX2+FMA, a vectorized variant selected at runtime. The two variants are
// bit-identical, which the test suite asserts on random inputs. To make that
// possible each kernel is defined over a fixed "blocked" arithmetic order with
// block width 4 (one 256-bit lane of doubles):
//
//   - sum/dot/max: four accumulators; accumulator j consumes elements with
//     index ≡ j (mod 4) in ascending order; the final combination is
//     (a0 + a1) + (a2 + a3) (resp. max(max(a0,a1), max(a2,a3))).
//   - dot and sqdist accumulate with fused multiply-add.
//   - inverse_cdf walks blocks of 4: the block sum is (p0+p1)+(p2+p3); a block
//     is entered only if u < run + block_sum, and is then scanned sequentially
//     from `run`. Whether or not a crossing is found inside, the running total
//     advances by the block sum.
//   - exp_vec evaluates, per element, a fixed base-2 reduction followed by a
//     degree-11 Horner polynomial in FMA form (see kernels_scalar.cpp); inputs
//     above 709.0 saturate to +inf and inputs below -708.0 flush to 0.
//
// Pointwise kernels (affine, add, sub_scalar, gather2_add) are trivially
// order-free. None of the kernels allocate.

namespace vbs::kernels {

enum class Isa { scalar, avx2 };

// ISA picked at startup (honors the VBS_ISA env var: "scalar" or "avx2").
Isa active_isa();
const char* isa_name(Isa isa);

// Test/bench hook. Returns false if the requested ISA is unavailable.
bool force_isa(Isa isa);

// True if this CPU+OS can run the AVX2 variants.
bool cpu_has_avx2();

// y[i] = exp(x[i])
void exp_vec(const double* x, double* y, std::size_t n);

double sum(const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);

// n must be >= 1 for max_value/argmax.
double max_value(const double* x, std::size_t n);
// Lowest index attaining the maximum.
std::size_t argmax(const double* x, std::size_t n);

// y[i] = fma(x[i], c1, c0)
void affine(const double* x, double c1, double c0, double* y, std::size_t n);

// acc[i] += x[i]
void add_inplace(double* acc, const double* x, std::size_t n);

// x[i] -= c
void sub_scalar_inplace(double* x, double c, std::size_t n);

// Smallest i such that u < p[0] + ... + p[i] under the blocked order above;
// returns n - 1 if the prefix sums never cross u.
std::size_t inverse_cdf(const double* p, std::size_t n, double u);

// dst[i] = (bias + ta[ia[i]]) + tb[ib[i]]
void gather2_add(const double* ta, const std::int32_t* ia,
                 const double* tb, const std::int32_t* ib,
                 double bias, double* dst, std::size_t n);

// feats holds d contiguous blocks of length w (dimension-major layout).
// out[i] = sum_k (feats[k*w + i] - q[k])^2, accumulated with FMA, k ascending.
void sqdist_dimmajor(const double* feats, std::size_t w, std::size_t d,
                     const double* q, double* out);

namespace detail {

struct Ops {
  void (*exp_vec)(const double*, double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*max_value)(const double*, std::size_t);
  std::size_t (*argmax)(const double*, std::size_t);
  void (*affine)(const double*, double, double, double*, std::size_t);
  void (*add_inplace)(double*, const double*, std::size_t);
  void (*sub_scalar_inplace)(double*, double, std::size_t);
  std::size_t (*inverse_cdf)(const double*, std::size_t, double);
  void (*gather2_add)(const double*, const std::int32_t*, const double*,
                      const std::int32_t*, double, double*, std::size_t);
  void (*sqdist_dimmajor)(const double*, std::size_t, std::size_t,
                          const double*, double*);
};

const Ops& scalar_ops();
const Ops& avx2_ops();  // null entries when built without AVX2 support
const Ops& active_ops();

// Shared element-wise exp used by both variants (defined in kernels_scalar.cpp).
double exp_elem(double x);

}  // namespace detail

}  // namespace vbs::kernels
