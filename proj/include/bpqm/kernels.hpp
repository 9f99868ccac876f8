#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Data-parallel primitives behind the probability and dense linear algebra
// hot loops. Every kernel has a scalar reference implementation; on x86-64 an
// AVX2/FMA variant is selected at runtime when the CPU supports it. The two
// variants are equivalence-tested against each other (see tests/test_kernels).

namespace bpqm::kern {

struct Ops {
  double (*sum)(const double* x, std::size_t n);
  double (*sum_sqrt)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*l1_dist)(const double* x, const double* y, std::size_t n);
  void (*sqrt_vec)(const double* x, double* out, std::size_t n);
  void (*scale)(double* x, std::size_t n, double a);
  void (*axpy)(double* y, const double* x, std::size_t n, double a);  // y += a*x
  // out[i*nb + j] = a[i] * b[j]
  void (*outer)(const double* a, std::size_t na, const double* b, std::size_t nb, double* out);
  void (*gather)(const double* src, const std::uint32_t* idx, double* dst, std::size_t n);
  // plane rotation: (x, y) <- (c*x - s*y, s*x + c*y)
  void (*rot)(double* x, double* y, std::size_t n, double c, double s);
  // in-place unnormalized Walsh-Hadamard transform; n must be a power of two
  void (*fwht)(double* x, std::size_t n);
  const char* name;
};

const Ops& scalar_ops();
#if defined(BPQM_BUILD_AVX2)
const Ops& avx2_ops();
#endif

/// Active kernel table (picked once from CPUID, overridable for tests).
const Ops& ops();

/// Force a backend ("scalar" or "avx2"). Returns false if unavailable.
bool select_backend(std::string_view name);

inline double sum(const double* x, std::size_t n) { return ops().sum(x, n); }
inline double sum_sqrt(const double* x, std::size_t n) { return ops().sum_sqrt(x, n); }
inline double dot(const double* x, const double* y, std::size_t n) { return ops().dot(x, y, n); }
inline double l1_dist(const double* x, const double* y, std::size_t n) {
  return ops().l1_dist(x, y, n);
}
inline void sqrt_vec(const double* x, double* out, std::size_t n) { ops().sqrt_vec(x, out, n); }
inline void scale(double* x, std::size_t n, double a) { ops().scale(x, n, a); }
inline void axpy(double* y, const double* x, std::size_t n, double a) { ops().axpy(y, x, n, a); }
inline void outer(const double* a, std::size_t na, const double* b, std::size_t nb, double* out) {
  ops().outer(a, na, b, nb, out);
}
inline void gather(const double* src, const std::uint32_t* idx, double* dst, std::size_t n) {
  ops().gather(src, idx, dst, n);
}
inline void rot(double* x, double* y, std::size_t n, double c, double s) {
  ops().rot(x, y, n, c, s);
}
inline void fwht(double* x, std::size_t n) { ops().fwht(x, n); }

}  // namespace bpqm::kern
