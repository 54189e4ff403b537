#include "selcrb/error.hpp"
#include "selcrb/model/linear_model.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <doctest.h>

using namespace selcrb;
using namespace selcrb::model;

TEST_CASE("support sets are sorted masks printed 1-based") {
  const SupportSet s({0, 2, 5}, 8);
  CHECK(s.mask() == 0b100101u);
  CHECK(s.to_string() == "{1,3,6}");
  CHECK(s.one_based() == std::vector<long long>{1, 3, 6});
  CHECK(SupportSet::from_one_based({1, 3, 6}, 8) == s);
  CHECK(SupportSet::from_mask(0b100101u, 8) == s);
  CHECK(s.position(2) == 1u);
  CHECK_FALSE(s.position(3).has_value());
  CHECK(SupportSet({0, 2}, 8).is_subset_of(s));
  CHECK(SupportSet({0, 2}, 8) < SupportSet({0, 3}, 8));
  CHECK(SupportSet({0, 2}, 8) < SupportSet({0, 2, 3}, 8));
  CHECK_THROWS_AS(SupportSet({2, 1}, 8), DomainError);
  CHECK_THROWS_AS(SupportSet({}, 8), DomainError);
  CHECK_THROWS_AS(SupportSet({8}, 8), DomainError);
}

TEST_CASE("zero padding, restriction and the selection matrix") {
  const SupportSet truth({1, 3}, 5), cand({1, 2}, 5);
  Vector theta(2);
  theta << 2.0, -1.0;
  const Vector p = zero_pad(theta, truth).values;
  CHECK(p(1) == 2.0);
  CHECK(p(3) == -1.0);
  CHECK(p.cwiseAbs().sum() == 3.0);
  CHECK(restrict_to(p, truth) == theta);
  const Vector out = padded_outside(theta, truth, cand);
  CHECK(out(1) == 0.0);
  CHECK(out(3) == -1.0);
  const Matrix d = selection_matrix_D(cand, truth);
  CHECK(d.rows() == 5);
  CHECK(d.cols() == 2);
  CHECK(d(1, 0) == 1.0);
  CHECK(d.sum() == 1.0);
}

TEST_CASE("candidate sets reject duplicates and find the truth") {
  const SupportSet a({0}, 3), b({0, 1}, 3);
  const CandidateSet c({a, b}, 3);
  CHECK(c.index_of(b) == 1u);
  CHECK(c.index_of_mask(0b11) == 1u);
  CHECK_FALSE(c.index_of_mask(0b100).has_value());
  CHECK_THROWS_AS(c.require(SupportSet({2}, 3)), DomainError);
  CHECK_THROWS_AS(CandidateSet({a, a}, 3), DomainError);
  const auto n = CandidateSet::nested(3);
  CHECK(n.size() == 3);
  CHECK(n[2] == SupportSet::full(3));
}

TEST_CASE("models validate their inputs") {
  Matrix a = Matrix::Identity(3, 3);
  Vector th(1);
  th << 1.0;
  CHECK_THROWS_AS(SparseModel(a, -1.0, SupportSet({0}, 3), th), DomainError);
  Matrix unnormalized = a;
  unnormalized(0, 0) = 2.0;
  CHECK_THROWS_AS(SparseModel(unnormalized, 1.0, SupportSet({0}, 3), th), DomainError);
  const SparseModel m(a, 0.5, SupportSet({1}, 3), th);
  CHECK(m.is_identity());
  CHECK(m.mean()(1) == 1.0);
  // SNR = ||X theta||^2 / (N sigma^2) in dB, inverted by sigma_for_snr.
  CHECK(m.snr_db() == doctest::Approx(10 * std::log10(1.0 / (3 * 0.25))));
  CHECK(m.sigma_for_snr(m.snr_db()) == doctest::Approx(0.5));

  Matrix h(4, 2);
  h << 1, 1, 1, 1, 1, 1, 1, 1;
  Vector t2(2);
  t2 << 1, 1;
  CHECK_THROWS_AS(GlmModel(h, 1.0, CandidateSet::nested(2), 1, t2), DomainError);
}

TEST_CASE("OST exceedance p_m + q_m = 1 with tails kept") {
  Matrix a = Matrix::Identity(3, 3);
  Vector th(2);
  th << 30.0, 0.3;
  const SparseModel m(a, 1.0, SupportSet({0, 1}, 3), th);
  const auto e = ost_exceedance(m, 1.0);
  const boost::math::normal n;
  for (Eigen::Index i = 0; i < 3; ++i)
    CHECK(e.p(i) + e.q(i) == doctest::Approx(1.0).epsilon(1e-15));
  // q_0 = P(|x| <= 1) for x ~ N(30, 1): tiny but representable.
  CHECK(e.q(0) > 0.0);
  CHECK(e.q(0) == doctest::Approx(cdf(n, -29.0) - cdf(n, -31.0)).epsilon(1e-10));
  const auto [alpha, beta] = alpha_beta(m, 1, 1.0);
  CHECK(alpha == doctest::Approx(0.7));
  CHECK(beta == doctest::Approx(-1.3));
}

TEST_CASE("enumeration: all subsets, ranked order, truncation matches brute force") {
  const auto all = enumerate_candidates(4, EnumerationPolicy{});
  CHECK(all.size() == 15);
  CHECK(all[0] == SupportSet({0}, 4));
  CHECK(all[14] == SupportSet::full(4));

  EnumerationPolicy small;
  small.s_max = 2;
  CHECK(enumerate_candidates(5, small).size() == 15);

  // Best-first truncation returns the top-K of the brute-force ranking.
  Matrix a = Matrix::Identity(24, 24);
  Vector th(3);
  th << 1.0, 0.8, 0.5;
  const SparseModel m(a, 0.6, SupportSet({0, 5, 9}, 24), th);
  const auto rank = ProductRanking::from(ost_exceedance(m, 1.0));
  EnumerationPolicy trunc;
  trunc.k_max = 50;
  trunc.mass_target = 1.0;
  const auto top = enumerate_candidates(24, trunc, rank);
  REQUIRE(top.size() == 50);
  for (std::size_t k = 1; k < top.size(); ++k)
    CHECK(rank.log_prob(top[k - 1].mask()) >= rank.log_prob(top[k].mask()));

  // Brute force over a 12-index model where everything fits.
  Matrix a12 = Matrix::Identity(12, 12);
  const SparseModel m12(a12, 0.6, SupportSet({0, 5, 9}, 12), th);
  const auto r12 = ProductRanking::from(ost_exceedance(m12, 1.0));
  std::vector<std::pair<double, std::uint64_t>> brute;
  for (std::uint64_t mask = 1; mask < (1u << 12); ++mask)
    brute.emplace_back(r12.log_prob(mask), mask);
  std::sort(brute.begin(), brute.end(), [](auto& x, auto& y) { return x.first > y.first; });
  EnumerationPolicy t12;
  t12.k_max = 30;
  t12.mass_target = 1.0;
  // Force the truncating path by asking for fewer than 2^12 - 1 supports.
  const auto top12 = enumerate_candidates(12, t12, r12);
  REQUIRE(top12.size() == 30);
  for (std::size_t k = 0; k < 30; ++k)
    CHECK(r12.log_prob(top12[k].mask()) == doctest::Approx(brute[k].first).epsilon(1e-13));

  CHECK_THROWS_AS(enumerate_candidates(30, EnumerationPolicy{}), DomainError);
}
