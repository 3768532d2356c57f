#include "vbs/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace vbs::kernels {

namespace detail {

#ifndef VBS_HAVE_AVX2
const Ops& avx2_ops() {
  static const Ops ops = {};
  return ops;
}
#endif

namespace {

std::atomic<const Ops*> g_active{nullptr};
std::atomic<Isa> g_isa{Isa::scalar};

const Ops* init_active() {
  Isa isa = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
  if (const char* env = std::getenv("VBS_ISA")) {
    if (std::strcmp(env, "scalar") == 0) isa = Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) isa = Isa::avx2;
  }
  g_isa.store(isa);
  return isa == Isa::avx2 ? &avx2_ops() : &scalar_ops();
}

}  // namespace

const Ops& active_ops() {
  const Ops* ops = g_active.load(std::memory_order_acquire);
  if (!ops) {
    ops = init_active();
    g_active.store(ops, std::memory_order_release);
  }
  return *ops;
}

}  // namespace detail

bool cpu_has_avx2() {
#ifdef VBS_HAVE_AVX2
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() {
  detail::active_ops();
  return detail::g_isa.load();
}

const char* isa_name(Isa isa) {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

bool force_isa(Isa isa) {
  if (isa == Isa::avx2) {
    if (!cpu_has_avx2()) return false;
    detail::g_active.store(&detail::avx2_ops());
  } else {
    detail::g_active.store(&detail::scalar_ops());
  }
  detail::g_isa.store(isa);
  return true;
}

void exp_vec(const double* x, double* y, std::size_t n) {
  detail::active_ops().exp_vec(x, y, n);
}
double sum(const double* x, std::size_t n) {
  return detail::active_ops().sum(x, n);
}
double dot(const double* a, const double* b, std::size_t n) {
  return detail::active_ops().dot(a, b, n);
}
double max_value(const double* x, std::size_t n) {
  return detail::active_ops().max_value(x, n);
}
std::size_t argmax(const double* x, std::size_t n) {
  return detail::active_ops().argmax(x, n);
}
void affine(const double* x, double c1, double c0, double* y, std::size_t n) {
  detail::active_ops().affine(x, c1, c0, y, n);
}
void add_inplace(double* acc, const double* x, std::size_t n) {
  detail::active_ops().add_inplace(acc, x, n);
}
void sub_scalar_inplace(double* x, double c, std::size_t n) {
  detail::active_ops().sub_scalar_inplace(x, c, n);
}
std::size_t inverse_cdf(const double* p, std::size_t n, double u) {
  return detail::active_ops().inverse_cdf(p, n, u);
}
void gather2_add(const double* ta, const std::int32_t* ia, const double* tb,
                 const std::int32_t* ib, double bias, double* dst,
                 std::size_t n) {
  detail::active_ops().gather2_add(ta, ia, tb, ib, bias, dst, n);
}
void sqdist_dimmajor(const double* feats, std::size_t w, std::size_t d,
                     const double* q, double* out) {
  detail::active_ops().sqdist_dimmajor(feats, w, d, q, out);
}

}  // namespace vbs::kernels
