#pragma once

// Inner loops of the Monte-Carlo trials: noise synthesis and design-matrix
// correlations. Each kernel has a scalar reference and vector variants; the
// variant is picked once at startup from the CPU features and can be pinned
// for testing. Vector variants reassociate sums, so they agree with the
// scalar reference to rounding, not bitwise.

#include <cstddef>
#include <optional>
#include <string_view>

namespace selcrb::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// Variants compiled in and supported by this CPU.
bool isa_available(Isa isa);

/// Currently dispatched variant.
Isa active_isa();

/// Pins the dispatch to `isa` (nullopt restores auto-detection). Not
/// thread-safe; call before starting workers. Throws DomainError if the
/// variant is not available.
void force_isa(std::optional<Isa> isa);

/// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

/// out[j] = sum_i cols[j * rows + i] * x[i] for j < ncols (column-major design).
void correlate(const double* cols, std::size_t rows, std::size_t ncols, const double* x,
               double* out);

/// out[i] = mean[i] + sigma * w[i]
void affine(const double* mean, double sigma, const double* w, double* out, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void affine(const double* mean, double sigma, const double* w, double* out, std::size_t n);
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void affine(const double* mean, double sigma, const double* w, double* out, std::size_t n);
} // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void affine(const double* mean, double sigma, const double* w, double* out, std::size_t n);
} // namespace neon
#endif

} // namespace selcrb::kernels
