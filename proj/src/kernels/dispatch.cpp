#include "selcrb/kernels/kernels.hpp"

#include "selcrb/error.hpp"

#include <fmt/format.h>

namespace selcrb::kernels {

namespace {

using DotFn = double (*)(const double*, const double*, std::size_t);
using AffineFn = void (*)(const double*, double, const double*, double*, std::size_t);

struct Table {
  Isa isa;
  DotFn dot;
  AffineFn affine;
};

Table table_for(Isa isa) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
  case Isa::avx2:
    return {Isa::avx2, &avx2::dot, &avx2::affine};
#endif
#if defined(__aarch64__)
  case Isa::neon:
    return {Isa::neon, &neon::dot, &neon::affine};
#endif
  default:
    return {Isa::scalar, &scalar::dot, &scalar::affine};
  }
}

Isa detect() {
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return Isa::avx2;
#endif
#if defined(__aarch64__)
  return Isa::neon;
#endif
  return Isa::scalar;
}

Table& active() {
  static Table t = table_for(detect());
  return t;
}

} // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
  case Isa::avx2:
    return "avx2";
  case Isa::neon:
    return "neon";
  default:
    return "scalar";
  }
}

bool isa_available(Isa isa) {
  switch (isa) {
  case Isa::scalar:
    return true;
  case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
  case Isa::neon:
#if defined(__aarch64__)
    return true;
#else
    return false;
#endif
  }
  return false;
}

Isa active_isa() { return active().isa; }

void force_isa(std::optional<Isa> isa) {
  if (isa && !isa_available(*isa))
    throw DomainError(fmt::format("kernel variant '{}' is not available", isa_name(*isa)));
  active() = table_for(isa ? *isa : detect());
}

double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }

void correlate(const double* cols, std::size_t rows, std::size_t ncols, const double* x,
               double* out) {
  const DotFn f = active().dot;
  for (std::size_t j = 0; j < ncols; ++j)
    out[j] = f(cols + j * rows, x, rows);
}

void affine(const double* mean, double sigma, const double* w, double* out, std::size_t n) {
  active().affine(mean, sigma, w, out, n);
}

} // namespace selcrb::kernels
