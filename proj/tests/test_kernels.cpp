#include "selcrb/error.hpp"
#include "selcrb/kernels/kernels.hpp"

#include <doctest.h>
#include <random>
#include <vector>

using namespace selcrb::kernels;

namespace {

std::vector<double> randn(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v)
    x = d(rng);
  return v;
}

/// |a - b| within a few ulps of the absolute-value sum.
bool sums_agree(double a, double b, double abs_sum) { return std::abs(a - b) <= 1e-14 * abs_sum + 1e-300; }

} // namespace

TEST_CASE("scalar variant is always available and selectable") {
  CHECK(isa_available(Isa::scalar));
  force_isa(Isa::scalar);
  CHECK(active_isa() == Isa::scalar);
  force_isa(std::nullopt);
  CHECK(isa_available(active_isa()));
  CHECK(isa_name(Isa::avx2) == "avx2");
}

TEST_CASE("vector variants match the scalar reference") {
  std::vector<Isa> variants;
  for (Isa isa : {Isa::avx2, Isa::neon})
    if (isa_available(isa))
      variants.push_back(isa);
  if (variants.empty())
    MESSAGE("no vector variant on this CPU; comparing dispatch against scalar only");

  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 17u, 63u, 64u, 65u, 1500u}) {
    const auto a = randn(n, 1 + n), b = randn(n, 100 + n);
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      abs_sum += std::abs(a[i] * b[i]);
    const double ref = scalar::dot(a.data(), b.data(), n);
    std::vector<double> ref_aff(n), out(n);
    scalar::affine(a.data(), 0.7, b.data(), ref_aff.data(), n);

    for (Isa isa : variants) {
      force_isa(isa);
      INFO(isa_name(isa) << " n=" << n);
      CHECK(sums_agree(dot(a.data(), b.data(), n), ref, abs_sum));
      affine(a.data(), 0.7, b.data(), out.data(), n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(out[i] - ref_aff[i]) <= 1e-15 * (std::abs(a[i]) + 0.7 * std::abs(b[i])));
    }
    force_isa(std::nullopt);
  }
}

TEST_CASE("correlate equals per-column dot products") {
  const std::size_t rows = 37, cols = 5;
  const auto m = randn(rows * cols, 5), x = randn(rows, 6);
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
    if (!isa_available(isa))
      continue;
    force_isa(isa);
    std::vector<double> out(cols);
    correlate(m.data(), rows, cols, x.data(), out.data());
    for (std::size_t j = 0; j < cols; ++j) {
      double ref = 0.0, abs_sum = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        ref += m[j * rows + i] * x[i];
        abs_sum += std::abs(m[j * rows + i] * x[i]);
      }
      CHECK(sums_agree(out[j], ref, abs_sum));
    }
  }
  force_isa(std::nullopt);
}

TEST_CASE("forcing an unavailable variant throws") {
  for (Isa isa : {Isa::avx2, Isa::neon})
    if (!isa_available(isa))
      CHECK_THROWS_AS(force_isa(isa), selcrb::DomainError);
}
