#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense f64 kernels behind every distance and SGD inner loop.
// Scalar reference implementations always exist; on x86-64 an AVX2
// variant is selected at runtime when the CPU supports it.

namespace ciq::kernels {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double norm_sq(const double* a, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
// y *= alpha
void scale(double alpha, double* y, std::size_t n);
}  // namespace scalar

#ifdef CIQ_HAVE_AVX2_SOURCES
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double norm_sq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* y, std::size_t n);
}  // namespace avx2
#endif

#ifdef CIQ_HAVE_NEON_SOURCES
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
double norm_sq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* y, std::size_t n);
}  // namespace neon
#endif

// Dispatched entry points. Which backend is active is decided once, at
// first use, from CPU feature probing; override with CIQ_KERNELS=scalar.
double dot(const double* a, const double* b, std::size_t n);
double norm_sq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* y, std::size_t n);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return dot(a.data(), b.data(), a.size());
}
inline double norm_sq(std::span<const double> a) {
  return norm_sq(a.data(), a.size());
}

// Name of the active backend ("scalar", "avx2", "neon").
std::string_view active_backend();

}  // namespace ciq::kernels
