#include "selcrb/error.hpp"
#include "selcrb/selection/probabilities.hpp"
#include "selcrb/selection/rules.hpp"

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <cmath>
#include <doctest.h>
#include <random>

using namespace selcrb;
using namespace selcrb::selection;

namespace {

model::GlmModel small_glm(double sigma, double theta2 = -0.4) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Matrix h(60, 2);
  for (Eigen::Index i = 0; i < 60; ++i) {
    h(i, 0) = 1.0;
    h(i, 1) = u(rng);
  }
  Vector th(2);
  th << 4.0, theta2;
  return model::GlmModel(h, sigma, model::CandidateSet::nested(2), 1, th);
}

} // namespace

TEST_CASE("GIC penalties") {
  CHECK(Penalty::aic().tau(1500, 2) == 2.0);
  CHECK(Penalty::mdl().tau(1500, 2) == doctest::Approx(std::log(1500.0)));
  CHECK(Penalty::constant(3.5).tau(10, 1) == 3.5);
  CHECK_THROWS_AS(Penalty::constant(-1.0), DomainError);
}

TEST_CASE("trial seeds are distinct and reproducible") {
  CHECK(trial_seed(1, 0) == trial_seed(1, 0));
  CHECK(trial_seed(1, 0) != trial_seed(1, 1));
  CHECK(trial_seed(1, 0) != trial_seed(2, 0));
}

TEST_CASE("sampler draws the same observation for the same trial") {
  const auto m = small_glm(2.0);
  const Sampler s(m);
  auto d1 = s.make_draw(), d2 = s.make_draw();
  s.draw(9, 17, d1);
  s.draw(9, 17, d2);
  CHECK(d1.x == d2.x);
  CHECK((d1.x - (m.mean() + 2.0 * d1.w)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((d1.corr - m.design().transpose() * d1.x).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(d1.xx == doctest::Approx(d1.x.squaredNorm()));
}

TEST_CASE("OST selection by hand") {
  Matrix a = Matrix::Identity(3, 3);
  Vector x(3);
  x << 0.5, -1.2, 2.0;
  const auto s = ost_select(x, a, 1.0);
  REQUIRE(s.has_value());
  CHECK(*s == model::SupportSet({1, 2}, 3));
  CHECK_FALSE(ost_select(x, a, 3.0).has_value());
}

TEST_CASE("GIC scores are residual energy plus penalty") {
  const auto m = small_glm(2.0);
  const Sampler smp(m);
  auto d = smp.make_draw();
  smp.draw(1, 0, d);
  const auto scores = gic_scores(d.x, m, Penalty::aic());
  for (std::size_t k = 0; k < 2; ++k) {
    const Matrix hk = m.h(k);
    const Vector fit = hk * (hk.transpose() * hk).ldlt().solve(hk.transpose() * d.x);
    const double expect = (d.x - fit).squaredNorm() / 4.0 + 2.0 * static_cast<double>(k + 1);
    CHECK(scores(static_cast<Eigen::Index>(k)) == doctest::Approx(expect).epsilon(1e-10));
  }
  Eigen::Index best;
  scores.minCoeff(&best);
  CHECK(gic_select(d.x, m, Penalty::aic()) == static_cast<std::size_t>(best));
}

TEST_CASE("two-model GIC probability is a noncentral chi-squared tail") {
  const auto m = small_glm(3.0);
  const auto t = glm2_terms(m, Penalty::mdl());
  const Matrix& h = m.design();
  const double g00 = h.col(0).squaredNorm(), g11 = h.col(1).squaredNorm(), g01 = h.col(0).dot(h.col(1));
  CHECK(t.kappa == doctest::Approx((g00 * g11 - g01 * g01) / (g00 * 9.0)).epsilon(1e-12));
  CHECK(t.gamma == doctest::Approx(std::log(60.0)));
  const auto p = glm2_selection_prob(m, Penalty::mdl());
  const boost::math::non_central_chi_squared d(1.0, t.kappa * 0.16);
  CHECK(p.pi(1) == doctest::Approx(cdf(complement(d, t.gamma))).epsilon(1e-10));
  CHECK(p.pi(0) + p.pi(1) == doctest::Approx(1.0).epsilon(1e-13));

  const auto dv = glm2_logprob_derivs(m, Penalty::mdl());
  CHECK(dv.dlog_pi2 == doctest::Approx(dv.dpi2 / dv.pi2));
  CHECK(dv.dlog_pi1 == doctest::Approx(-dv.dpi2 / dv.pi1));
  CHECK(dv.d2log_pi2 == doctest::Approx(dv.d2pi2 / dv.pi2 - dv.dlog_pi2 * dv.dlog_pi2));
}

TEST_CASE("two-model probabilities at theta_2 = 0 need no special case") {
  const auto m = small_glm(3.0, 0.0);
  const auto dv = glm2_logprob_derivs(m, Penalty::aic());
  CHECK(dv.dpi2 == 0.0);
  CHECK(std::isfinite(dv.d2pi2));
  CHECK(dv.d2pi2 > 0.0);
}

TEST_CASE("OST product probabilities sum to one with the empty set") {
  Matrix a = Matrix::Identity(5, 5);
  Vector th(2);
  th << 1.0, -0.5;
  const model::SparseModel m(a, 0.7, model::SupportSet({1, 3}, 5), th);
  const auto cands = model::enumerate_candidates(5, model::EnumerationPolicy{});
  const auto p = ost_selection_prob(m, 0.9, cands);
  CHECK(p.total() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(p.other == doctest::Approx(0.0).scale(1.0));
  // Marginals agree with sums over the candidates containing m.
  for (std::size_t i = 0; i < 5; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < cands.size(); ++k)
      if (cands[k].contains(i))
        s += p.pi(static_cast<Eigen::Index>(k));
    CHECK(p.p_marginal(static_cast<Eigen::Index>(i)) == doctest::Approx(s).epsilon(1e-12));
  }
  // Log-probability gradient against a finite difference.
  const model::SupportSet s({1, 3}, 5);
  const Vector g = ost_log_prob_gradient(m, 0.9, s);
  for (Eigen::Index l = 0; l < 2; ++l) {
    Vector tp = th, tm = th;
    tp(l) += 1e-6;
    tm(l) -= 1e-6;
    const double fd = (ost_log_prob(m.with_theta(tp), 0.9, s) - ost_log_prob(m.with_theta(tm), 0.9, s)) / 2e-6;
    CHECK(g(l) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("data-independent rules") {
  const auto fixed = SelectionRuleSpec::fixed(1, 3);
  CHECK(fixed.is_data_independent());
  CHECK(fixed.probs()(1) == 1.0);
  Vector bad(2);
  bad << 0.5, 0.6;
  CHECK_THROWS_AS(SelectionRuleSpec::random(bad), DomainError);
  CHECK_THROWS_AS(SelectionRuleSpec::ost(-1.0), DomainError);
  CHECK_THROWS_AS(SelectionRuleSpec::ost(1.0).penalty(), DomainError);
}
