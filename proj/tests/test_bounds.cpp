#include "selcrb/bounds/crb.hpp"
#include "selcrb/error.hpp"
#include "selcrb/estimators/estimators.hpp"
#include "selcrb/experiments/monte_carlo.hpp"

#include <boost/math/distributions/normal.hpp>
#include <doctest.h>

using namespace selcrb;

namespace {

model::SparseModel identity_model(double sigma = 0.6) {
  Vector th(2);
  th << 1.0, 0.7;
  return model::SparseModel(Matrix::Identity(4, 4), sigma, model::SupportSet({0, 2}, 4), th);
}

/// Var(x | x in region) / sigma^2 for x ~ N(mu, sigma^2), by closed form.
double truncated_variance_ratio(double mu, double sigma, double c, bool outside) {
  const boost::math::normal n;
  const double a = (c - mu) / sigma, b = (-c - mu) / sigma;
  const double pa = pdf(n, a), pb = pdf(n, b);
  if (!outside) {
    const double z = cdf(n, a) - cdf(n, b);
    const double m1 = (pb - pa) / z;
    return 1.0 + (b * pb - a * pa) / z - m1 * m1;
  }
  const double z = 1.0 - cdf(n, a) + cdf(n, b);
  const double m1 = (pa - pb) / z;
  return 1.0 + (a * pa - b * pb) / z - m1 * m1;
}

} // namespace

TEST_CASE("oracle FIM and CRB") {
  const auto m = identity_model();
  CHECK((bounds::oracle_fim(m).matrix() - Matrix::Identity(2, 2) / 0.36).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(bounds::oracle_crb(m).trace() == doctest::Approx(0.72));
}

TEST_CASE("A = I selective FIM is the truncated-normal information") {
  // For A = I the conditional law of x_m is a truncated normal, whose
  // information about its location is Var(truncated)/sigma^4.
  const auto m = identity_model();
  const double c = 0.9;
  const model::SupportSet cand({0, 1}, 4);
  const auto j = bounds::sparse_selective_fim(m, c, cand);
  const double s2 = 0.36;
  CHECK(j(0, 0) == doctest::Approx(truncated_variance_ratio(1.0, 0.6, c, true) / s2).epsilon(1e-10));
  CHECK(j(1, 1) == doctest::Approx(truncated_variance_ratio(0.7, 0.6, c, false) / s2).epsilon(1e-10));
  CHECK(j(0, 1) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("independent trace route agrees with the generic pipeline") {
  Matrix a(5, 8);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      a(i, j) = nd(rng);
    a.col(j).normalize();
  }
  Vector th(2);
  th << 1.0, -1.2;
  const model::SparseModel m(a, 0.25, model::SupportSet({1, 6}, 8), th);
  const double c = 0.8;
  const auto cands = model::enumerate_candidates(8, {}, model::ProductRanking::from(model::ost_exceedance(m, c)));
  const auto pi = selection::ost_selection_prob(m, c, cands);
  bounds::BoundOptions opts;
  opts.policy = bounds::FimPolicy::drop;
  const auto fims = bounds::sparse_selective_fims(m, c, cands, pi, opts.pi_floor);
  const auto rep = bounds::selective_crb(pi, cands, fims, bounds::BiasModel::zero(cands.size(), 8, 2),
                                         m.truth(), m.theta(), opts);
  CHECK(bounds::sparse_trace_bound(m, c, cands, opts) == doctest::Approx(rep.mse_trace_bound).epsilon(1e-10));
  CHECK(rep.mse_trace_bound == doctest::Approx(rep.mse_matrix.trace()).epsilon(1e-10));
  CHECK(rep.marginal_mse.sum() == doctest::Approx(rep.mse_trace_bound).epsilon(1e-12));
}

TEST_CASE("indefinite J_k: error policy throws, drop policy reports the mass") {
  Matrix a(7, 14);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      a(i, j) = nd(rng);
    a.col(j).normalize();
  }
  Vector th = Vector::Ones(3);
  const model::SparseModel m(a, 1.0, model::SupportSet({1, 8, 10}, 14), th);
  const double c = 0.95;
  const auto cands = model::enumerate_candidates(14, {}, model::ProductRanking::from(model::ost_exceedance(m, c)));
  const auto pi = selection::ost_selection_prob(m, c, cands);
  const auto fims = bounds::sparse_selective_fims(m, c, cands, pi);
  bounds::BoundOptions drop;
  drop.policy = bounds::FimPolicy::drop;
  const auto rep = bounds::selective_crb(pi, cands, fims, bounds::BiasModel::zero(cands.size(), 14, 3),
                                         m.truth(), m.theta(), drop);
  REQUIRE(!rep.skipped.empty());
  double mass = 0.0;
  for (auto k : rep.skipped)
    mass += pi.pi(static_cast<Eigen::Index>(k));
  CHECK(rep.indefinite_mass == doctest::Approx(mass).epsilon(1e-12));
  CHECK_THROWS_AS(bounds::selective_crb(pi, cands, fims, bounds::BiasModel::zero(cands.size(), 14, 3),
                                        m.truth(), m.theta()),
                  SingularFim);
}

TEST_CASE("SMS-CRB for nested models sums padded per-model inverses") {
  Matrix h(50, 2);
  for (Eigen::Index i = 0; i < 50; ++i) {
    h(i, 0) = 1.0;
    h(i, 1) = 0.1 * static_cast<double>(i);
  }
  Vector th(2);
  th << 1.0, 0.2;
  const model::GlmModel m(h, 1.5, model::CandidateSet::nested(2), 1, th);
  const auto pi = selection::glm2_selection_prob(m, selection::Penalty::aic());
  const auto sms = bounds::sms_crb(m, pi);
  // With the truth at the largest model only k = 2 contributes.
  const Matrix expect = pi.pi(1) * 2.25 * (h.transpose() * h).inverse();
  CHECK((sms.matrix() - expect).cwiseAbs().maxCoeff() < 1e-12);
  const auto sparse = identity_model();
  CHECK_THROWS_AS(bounds::sms_crb(sparse, pi), Unsupported);
}

TEST_CASE("bias-corrected MSL: the bound with b = 0 and G = G_MSL holds") {
  // The corrected estimator has zero selective bias at theta and the MSL's
  // bias gradient, so its MSSE must not fall below that bound.
  const auto m = identity_model(0.5);
  const double c = 0.8;
  const auto cands = model::enumerate_candidates(4, model::EnumerationPolicy{});
  const auto pi = selection::ost_selection_prob(m, c, cands);
  const auto fims = bounds::sparse_selective_fims(m, c, cands, pi);
  auto bias = estimators::identity_msl_bias(m, c, cands);
  for (auto& b : bias.b)
    b.setZero();
  const auto rep = bounds::selective_crb(pi, cands, fims, bias, m.truth(), m.theta());

  const auto sel = selection::make_selector(selection::SelectionRuleSpec::ost(c), m, cands);
  const estimators::BiasCorrectedIdentityMsl est(m, c);
  const auto run = experiments::run_mc(m, *sel, est, cands, 200000, 5);
  CHECK(run.msse_trace_true >= rep.msse_trace_true - 3 * run.msse_trace_true_se);
  // For A = I the truncated-normal model is an exponential family, so the
  // bound is attained.
  CHECK(std::abs(run.msse_trace_true - rep.msse_trace_true) < 3 * run.msse_trace_true_se);
}
