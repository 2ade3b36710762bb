#include "ciq/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace ciq::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= alpha;
}

}  // namespace scalar

namespace {

struct Backend {
  double (*dot)(const double*, const double*, std::size_t);
  double (*norm_sq)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  const char* name;
};

constexpr Backend kScalar{scalar::dot, scalar::norm_sq, scalar::axpy,
                          scalar::scale, "scalar"};

Backend pick_backend() {
  if (const char* env = std::getenv("CIQ_KERNELS");
      env && std::strcmp(env, "scalar") == 0)
    return kScalar;
#ifdef CIQ_HAVE_AVX2_SOURCES
  if (__builtin_cpu_supports("avx2"))
    return Backend{avx2::dot, avx2::norm_sq, avx2::axpy, avx2::scale, "avx2"};
#endif
#ifdef CIQ_HAVE_NEON_SOURCES
  return Backend{neon::dot, neon::norm_sq, neon::axpy, neon::scale, "neon"};
#endif
  return kScalar;
}

const Backend& backend() {
  static const Backend b = pick_backend();
  return b;
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  return backend().dot(a, b, n);
}
double norm_sq(const double* a, std::size_t n) {
  return backend().norm_sq(a, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  backend().axpy(alpha, x, y, n);
}
void scale(double alpha, double* y, std::size_t n) {
  backend().scale(alpha, y, n);
}
std::string_view active_backend() { return backend().name; }

}  // namespace ciq::kernels
