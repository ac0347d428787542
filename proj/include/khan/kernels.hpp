#pragma once

#include <cstddef>
#include <span>

// Dense arithmetic kernels used by the estimators.
//
// Every kernel has a portable scalar reference and, where the CPU supports it,
// an AVX2 variant picked at runtime. Reductions accumulate in 16 interleaved
// lanes (lane = i mod 16) folded in a fixed tree, so the scalar reference and
// the vector code produce bit-identical results. Builds use -ffp-contract=off
// so neither side is silently fused into FMA.

namespace khan::kernels {

enum class Isa { Scalar, Avx2 };

const char* isa_name(Isa isa);

/// Whether this binary was built with the variant and the CPU can run it.
bool isa_available(Isa isa);

/// Variant used by the dispatching entry points. Defaults to the best available
/// one; the environment variable KHAN_SIMD=scalar|avx2 overrides at startup.
Isa active_isa();

/// Throws ConfigError when the variant is unavailable.
void set_active_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double max_abs_diff(const double* a, const double* b, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double max_abs_diff(const double* a, const double* b, std::size_t n);
}  // namespace avx2

}  // namespace khan::kernels
