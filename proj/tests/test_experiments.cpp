#include "selcrb/error.hpp"
#include "selcrb/experiments/sweep.hpp"

#include <doctest.h>
#include <sstream>

using namespace selcrb;
using namespace selcrb::experiments;

namespace {

ExperimentConfig identity_config() {
  ExperimentConfig c;
  c.family = Family::sparse_ost;
  c.design = Matrix::Identity(4, 4);
  c.sigma = 0.6;
  c.support = {0, 1};
  c.theta = Vector::Constant(2, 0.8);
  c.rule = selection::SelectionRuleSpec::ost(0.9);
  c.axis = SweepAxis::threshold;
  c.grid = {0.5, 1.0};
  c.trials = 3000;
  c.seed = 12;
  return c;
}

} // namespace

TEST_CASE("run_mc is bitwise independent of the thread count") {
  const auto c = identity_config();
  const auto p = setup_point(c, 0.9);
  auto c1 = c, c4 = c;
  c1.threads = 1;
  c4.threads = 4;
  const auto r1 = run_point_mc(c1, p), r4 = run_point_mc(c4, p);
  CHECK(r1.mse == r4.mse);
  CHECK(r1.mse_se == r4.mse_se);
  CHECK(r1.selection_freq == r4.selection_freq);
  CHECK(r1.by_support.size() == r4.by_support.size());
  auto c2 = c;
  c2.seed = 13;
  CHECK(run_point_mc(c2, p).mse != r1.mse);
}

TEST_CASE("run_mc counts frequencies over all trials") {
  const auto c = identity_config();
  const auto r = run_point_mc(c, setup_point(c, 0.9));
  CHECK(r.trials == 3000);
  CHECK(r.failed == 0);
  CHECK(r.selection_freq.sum() + r.empty_freq + r.other_freq == doctest::Approx(1.0));
  // The empty support has its own entry.
  std::size_t counted = 0;
  for (const auto& [mask, m] : r.by_support)
    counted += m.count;
  CHECK(counted == 3000);
  CHECK(r.by_support.count(0) == (r.empty_freq > 0 ? 1u : 0u));
}

TEST_CASE("failing trials are counted and left out of the moments") {
  // L = 3 rows but supports of up to 4 columns can be selected.
  Matrix a(3, 4);
  a << 1, 0, 0, 0.6, 0, 1, 0, 0.8, 0, 0, 1, 0;
  auto c = identity_config();
  c.design = a;
  c.sigma = 2.0;
  c.grid = {0.2};
  c.fim_policy = bounds::FimPolicy::drop;
  const auto rows = sweep(c);
  REQUIRE(rows.size() == 1);
  INFO(rows[0].error);
  CHECK(rows[0].failed_trials > 0);
  CHECK(std::isfinite(rows[0].mse_msl));
}

TEST_CASE("sweep rows and CSV layout") {
  const auto c = identity_config();
  const auto rows = sweep(c);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].axis_value == 0.5);
  CHECK(rows[0].error.empty());
  CHECK(rows[0].scrb >= rows[0].oracle - 1e-12); // c = 0.5: ordering by PSD difference
  CHECK(std::isnan(rows[0].sms_crb));
  std::ostringstream os;
  write_csv(os, c.axis, rows);
  const auto text = os.str();
  const auto header = text.substr(0, text.find('\n'));
  CHECK(header.rfind("threshold,sigma,mse_msl,mse_msl_se,msse_msl,msse_msl_se,scrb,", 0) == 0);
  CHECK(header.find("oracle,pi_true") != std::string::npos);
  // 17 significant digits: 0.6 is written as 0.59999999999999998.
  CHECK(text.find(",0.59999999999999998,") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("a failing point becomes a NaN row with a message") {
  auto c = identity_config();
  c.grid = {0.5, 1.0};
  c.candidates = {{0}, {0, 1}};
  c.rule = selection::SelectionRuleSpec::gic(selection::Penalty::aic()); // invalid for sparse
  c.axis = SweepAxis::none;
  c.grid.clear();
  const auto rows = sweep(c);
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].error.empty());
  CHECK(std::isnan(rows[0].scrb));
}

TEST_CASE("sigma_for_pi2 inverts the two-model probability") {
  Matrix h(40, 2);
  for (Eigen::Index i = 0; i < 40; ++i) {
    h(i, 0) = 1.0;
    h(i, 1) = std::sin(static_cast<double>(i));
  }
  Vector th(2);
  th << 1.0, 0.5;
  const model::GlmModel m(h, 1.0, model::CandidateSet::nested(2), 1, th);
  for (double target : {0.2, 0.5, 0.95}) {
    const double s = sigma_for_pi2(m, selection::Penalty::aic(), target);
    CHECK(selection::glm2_selection_prob(m.with_sigma(s), selection::Penalty::aic()).pi(1) ==
          doctest::Approx(target).epsilon(1e-9));
  }
  // Below the null probability P(chi2_1 > 2) no sigma works.
  CHECK_THROWS_AS(sigma_for_pi2(m, selection::Penalty::aic(), 0.1), DomainError);
}
