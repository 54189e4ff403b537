#include "selcrb/error.hpp"
#include "selcrb/estimators/estimators.hpp"

#include <doctest.h>

using namespace selcrb;

namespace {

model::SparseModel identity_model() {
  Vector th(2);
  th << 1.0, 0.4;
  return model::SparseModel(Matrix::Identity(4, 4), 0.6, model::SupportSet({0, 1}, 4), th);
}

} // namespace

TEST_CASE("MSL on a dictionary is least squares on the selected columns") {
  Matrix a(4, 5);
  a << 1, 0, 0, 0.6, 0, 0, 1, 0, 0.8, 0, 0, 0, 1, 0, 0.6, 0, 0, 0, 0, 0.8;
  Vector th(2);
  th << 1.0, -1.0;
  const model::SparseModel m(a, 0.3, model::SupportSet({0, 3}, 5), th);
  Vector x(4);
  x << 1.3, -0.7, 0.2, -0.1;
  const model::SupportSet s({0, 3}, 5);
  const auto est = estimators::msl_sparse(x, m, s);
  const Matrix as = m.columns(s);
  const Vector ls = (as.transpose() * as).inverse() * as.transpose() * x;
  CHECK(est.theta_hat(0) == doctest::Approx(ls(0)));
  CHECK(est.theta_hat(3) == doctest::Approx(ls(1)));
  CHECK(est.theta_hat(1) == 0.0);
  CHECK(estimators::msl_sparse(x, m, std::nullopt).theta_hat.isZero());

  // The Monte-Carlo form from cached correlations matches.
  const selection::Sampler smp(m);
  auto d = smp.make_draw();
  smp.draw(3, 4, d);
  Vector out(5);
  estimators::MslEstimator(m).estimate(d, s.mask(), out);
  const auto direct = estimators::msl_sparse(d.x, m, s);
  CHECK((out - direct.theta_hat).cwiseAbs().maxCoeff() < 1e-12);

  // More selected columns than observations.
  CHECK_THROWS_AS(estimators::MslEstimator(m).estimate(d, 0b11111, out), EstimationError);
}

TEST_CASE("A = I MSL bias: closed form against Monte Carlo and finite differences") {
  const auto m = identity_model();
  const double c = 0.7;
  const auto cands = model::enumerate_candidates(4, model::EnumerationPolicy{});
  const model::SupportSet s({0, 1}, 4);
  const std::size_t k = *cands.index_of(s);
  const auto sel = selection::make_selector(selection::SelectionRuleSpec::ost(c), m, cands);
  const estimators::MslEstimator msl(m);
  const auto mc = estimators::mc_selective_bias(m, *sel, msl, cands, k, 300000, 9);
  for (std::size_t i : {0u, 1u}) {
    const double b = estimators::msl_bias_identity(m, c, i, s);
    CHECK(std::abs(mc.b(static_cast<Eigen::Index>(i)) - b) < 3 * mc.b_se(static_cast<Eigen::Index>(i)));
  }
  // Unselected and null coordinates carry no selective bias.
  CHECK(estimators::msl_bias_identity(m, c, 2, s) == 0.0);

  for (std::size_t i : {0u, 1u}) {
    Vector tp = m.theta(), tm = m.theta();
    tp(static_cast<Eigen::Index>(i)) += 1e-6;
    tm(static_cast<Eigen::Index>(i)) -= 1e-6;
    const double fd = (estimators::msl_bias_identity(m.with_theta(tp), c, i, s) -
                       estimators::msl_bias_identity(m.with_theta(tm), c, i, s)) / 2e-6;
    CHECK(estimators::msl_bias_gradient_identity(m, c, i, s) == doctest::Approx(fd).epsilon(1e-6));
  }
  const auto bias = estimators::identity_msl_bias(m, c, cands);
  CHECK(bias.g[k](0, 0) == doctest::Approx(estimators::msl_bias_gradient_identity(m, c, 0, s)));
  CHECK(bias.g[k](0, 1) == 0.0);
}

TEST_CASE("bias-corrected estimator is conditionally unbiased at its reference") {
  const auto m = identity_model();
  const double c = 0.7;
  const auto cands = model::enumerate_candidates(4, model::EnumerationPolicy{});
  const auto sel = selection::make_selector(selection::SelectionRuleSpec::ost(c), m, cands);
  const estimators::BiasCorrectedIdentityMsl est(m, c);
  const std::size_t k = *cands.index_of(model::SupportSet({0, 1}, 4));
  const auto mc = estimators::mc_selective_bias(m, *sel, est, cands, k, 300000, 10);
  for (Eigen::Index i = 0; i < 2; ++i)
    CHECK(std::abs(mc.b(i)) < 3 * mc.b_se(i));
}

TEST_CASE("function estimators must be coherent") {
  const auto m = identity_model();
  const estimators::FunctionEstimator leaky(
      [](const Vector& x, const std::optional<model::SupportSet>&) {
        return estimators::CoherentEstimate{x, std::nullopt};
      },
      4);
  const selection::Sampler smp(m);
  auto d = smp.make_draw();
  smp.draw(1, 1, d);
  Vector out(4);
  CHECK_THROWS_AS(leaky.estimate(d, 0b1, out), EstimationError);
}
