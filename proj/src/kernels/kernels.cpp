#include "greenfed/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace greenfed::kernels {

namespace detail {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace detail

namespace {

#if defined(__AVX2__) && defined(__FMA__)
constexpr bool kAvx2Compiled = true;
#else
constexpr bool kAvx2Compiled = false;
#endif

struct Dispatch {
  const detail::KernelTable* table;
  Backend backend;
};

Dispatch init_dispatch() {
  Backend want = Backend::Scalar;
  if (backend_supported(Backend::Avx2)) want = Backend::Avx2;
  if (const char* env = std::getenv("GREENFED_KERNELS")) {
    const std::string v(env);
    if (v == "scalar") {
      want = Backend::Scalar;
    } else if (v == "avx2") {
      if (!backend_supported(Backend::Avx2))
        throw std::runtime_error("GREENFED_KERNELS=avx2 but AVX2 is unavailable");
      want = Backend::Avx2;
    } else if (!v.empty()) {
      throw std::runtime_error("GREENFED_KERNELS: unknown backend '" + v + "'");
    }
  }
  return {want == Backend::Avx2 ? &detail::avx2_table() : &detail::scalar_table(), want};
}

Dispatch& dispatch() {
  static Dispatch d = init_dispatch();
  return d;
}

}  // namespace

// kernels_avx2.cpp supplies a throwing stub when not compiled with AVX2, so
// "compiled in" is a build-time fact and supported = compiled && CPU flag.
bool backend_supported(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return kAvx2Compiled && detail::cpu_has_avx2();
  }
  return false;
}

Backend active_backend() { return dispatch().backend; }

void force_backend(Backend b) {
  if (!backend_supported(b))
    throw std::runtime_error(std::string("kernels: backend unsupported: ") +
                             std::string(backend_name(b)));
  dispatch().table = (b == Backend::Avx2) ? &detail::avx2_table() : &detail::scalar_table();
  dispatch().backend = b;
}

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "?";
}

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().table->dot(a, b, n);
}
void axpy(double* y, double a, const double* x, std::size_t n) {
  dispatch().table->axpy(y, a, x, n);
}
void scale(double* x, double a, std::size_t n) { dispatch().table->scale(x, a, n); }
double sum(const double* x, std::size_t n) { return dispatch().table->sum(x, n); }
double sumsq(const double* x, std::size_t n) { return dispatch().table->sumsq(x, n); }

}  // namespace greenfed::kernels
