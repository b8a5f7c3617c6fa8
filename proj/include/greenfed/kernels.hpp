#pragma once

#include <cstddef>
#include <string_view>

// Dense double-precision kernels behind the training, aggregation, and
// masking inner loops. Two implementations exist: a scalar reference and an
// AVX2/FMA variant. The best supported backend is selected once at runtime
// (overridable via force_backend() or the GREENFED_KERNELS environment
// variable) and every call goes through the dispatch table.
//
// Equivalence contract, enforced by tests:
//   - element-wise kernels (axpy, scale) are bit-identical across backends;
//   - reductions (dot, sum, sumsq) agree to tight relative tolerance (the
//     AVX2 variants use multiple accumulator lanes and FMA, so the rounding
//     of the sum differs).
// Within one process the selected backend never changes, so results are
// reproducible run-to-run.

namespace greenfed::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
bool backend_supported(Backend b);
// Throws std::runtime_error if the backend is not supported on this CPU.
void force_backend(Backend b);
std::string_view backend_name(Backend b);

// Sum_i a[i] * b[i].
double dot(const double* a, const double* b, std::size_t n);
// y[i] += a * x[i].
void axpy(double* y, double a, const double* x, std::size_t n);
// x[i] *= a.
void scale(double* x, double a, std::size_t n);
// Sum_i x[i].
double sum(const double* x, std::size_t n);
// Sum_i x[i]^2.
double sumsq(const double* x, std::size_t n);

namespace detail {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double*, double, const double*, std::size_t);
  void (*scale)(double*, double, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
};

const KernelTable& scalar_table();
const KernelTable& avx2_table();  // valid only if backend_supported(Avx2)
bool cpu_has_avx2();

}  // namespace detail

}  // namespace greenfed::kernels
