// Checks that compare Monte-Carlo estimates against analytic values within
// a few standard errors.
#include "suites.hpp"

#include "recorder.hpp"
#include "selcrb/bounds/fim.hpp"
#include "selcrb/cli/cli.hpp"
#include "selcrb/experiments/monte_carlo.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

namespace selcrb::checks {

using detail::Recorder;

namespace {

constexpr std::size_t kConditioned = 100000;

/// A = I, M = 4, truth {1,2}: every OST probability is exact.
model::SparseModel small_identity(double sigma = 0.5) {
  Vector theta(2);
  theta << 1.0, 0.6;
  return model::SparseModel(Matrix::Identity(4, 4), sigma, model::SupportSet({0, 1}, 4), theta);
}

model::CandidateSet all_subsets(std::size_t dim) {
  return model::enumerate_candidates(dim, model::EnumerationPolicy{});
}

/// The glm scenario at the noise level giving pi_2 = 0.5.
model::GlmModel balanced_glm() {
  const auto base = setup_point_model(glm_snr_config());
  return base.with_sigma(experiments::sigma_for_pi2(base, selection::Penalty::aic(), 0.5));
}

std::size_t trials_for(double pi) {
  return static_cast<std::size_t>(std::ceil(1.05 * static_cast<double>(kConditioned) / pi));
}

/// Count of entries outside k standard errors; also the largest z-score.
std::pair<int, double> outside(const Matrix& est, const Matrix& se, const Matrix& ref, double k) {
  int bad = 0;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < est.rows(); ++i)
    for (Eigen::Index j = 0; j < est.cols(); ++j) {
      const double z = std::abs(est(i, j) - ref(i, j)) / se(i, j);
      worst = std::max(worst, z);
      bad += z > k;
    }
  return {bad, worst};
}

} // namespace

CheckResult check_mc_fim(const CheckContext& ctx) {
  CheckResult res;
  Recorder rec(res, ctx);

  const double c = 0.8;
  const auto sparse = small_identity();
  const auto cands = all_subsets(4);
  const auto pi = selection::ost_selection_prob(sparse, c, cands);
  const auto ost = selection::make_selector(selection::SelectionRuleSpec::ost(c), sparse, cands);
  for (const auto& s : {sparse.truth(), model::SupportSet({0}, 4)}) {
    const std::size_t k = *cands.index_of(s);
    const double pk = pi.pi(static_cast<Eigen::Index>(k));
    const auto mc = bounds::mc_selective_fim(sparse, *ost, cands, k, trials_for(pk), 31, ctx.threads);
    const Matrix an = bounds::sparse_selective_fim(sparse, c, s).matrix();
    const auto [bad, z] = outside(mc.fim.matrix(), mc.fim_se, an, 3.0);
    rec.expect(mc.conditioned >= kConditioned && bad == 0,
               fmt::format("sparse A=I candidate {}: {} conditioned draws, max |z| = {:.2f}",
                           s.to_string(), mc.conditioned, z));
  }

  const auto glm = balanced_glm();
  const auto penalty = selection::Penalty::aic();
  const auto gic = selection::make_selector(selection::SelectionRuleSpec::gic(penalty), glm, glm.candidates());
  const auto fims = bounds::glm2_selective_fims(glm, penalty);
  const auto gpi = selection::glm2_selection_prob(glm, penalty);
  for (std::size_t k = 0; k < 2; ++k) {
    const double pk = gpi.pi(static_cast<Eigen::Index>(k));
    const auto mc = bounds::mc_selective_fim(glm, *gic, glm.candidates(), k, trials_for(pk), 37, ctx.threads);
    const Matrix an = fims.per_model[k]->matrix();
    const auto [bad, z] = outside(mc.fim.matrix(), mc.fim_se, an, 3.0);
    rec.log("glm k={}: J22 mc {:.6e} +- {:.2e}, analytic {:.6e}", k + 1, mc.fim(1, 1),
            mc.fim_se(1, 1), an(1, 1));
    rec.expect(mc.conditioned >= kConditioned && bad == 0,
               fmt::format("glm model {}: {} conditioned draws, max |z| = {:.2f}", k + 1,
                           mc.conditioned, z));
  }
  return res;
}

CheckResult check_probabilities(const CheckContext& ctx) {
  CheckResult res;
  Recorder rec(res, ctx);

  {
    const auto config = identity_threshold_config(1);
    const auto m = setup_point_model_sparse(config);
    const auto cands = all_subsets(8);
    const auto pi = selection::ost_selection_prob(m, config.rule->threshold(), cands);
    const double total = pi.pi.sum() + pi.empty;
    rec.expect(cands.size() == 255 && std::abs(total - 1.0) < 1e-10,
               fmt::format("A=I, M=8, all {} supports plus empty: sum pi - 1 = {:.1e}", cands.size(),
                           total - 1.0));
  }

  const double c = 0.8;
  const auto sparse = small_identity();
  const auto cands = all_subsets(4);
  const auto pi = selection::ost_selection_prob(sparse, c, cands);
  const auto ost = selection::make_selector(selection::SelectionRuleSpec::ost(c), sparse, cands);
  {
    const std::size_t trials = 100000;
    const auto mc = selection::mc_selection_prob(sparse, *ost, cands, trials, 41, ctx.threads);
    double worst = 0.0;
    int bad = 0;
    auto cmp = [&](double est, double p) {
      const double z = std::abs(est - p) / std::sqrt(p * (1 - p) / static_cast<double>(trials));
      worst = std::max(worst, z);
      bad += z > 3.0;
    };
    for (Eigen::Index k = 0; k < pi.pi.size(); ++k)
      cmp(mc.pi(k), pi.pi(k));
    cmp(mc.empty, pi.empty);
    rec.expect(bad == 0, fmt::format("A=I, M=4: 16 MC frequencies within 3 binomial sigma (max |z| = {:.2f})", worst));
  }
  {
    const std::size_t k = *cands.index_of(sparse.truth());
    const auto mc = bounds::mc_selective_fim(sparse, *ost, cands, k, 400000, 43, ctx.threads);
    const Vector g = selection::ost_log_prob_gradient(sparse, c, sparse.truth());
    const auto [bad, z] = outside(mc.score_mean, mc.score_mean_se, g, 3.0);
    rec.expect(bad == 0, fmt::format("A=I conditional score mean vs grad log pi (max |z| = {:.2f})", z));
  }
  {
    const auto glm = balanced_glm();
    const auto penalty = selection::Penalty::aic();
    const auto gic = selection::make_selector(selection::SelectionRuleSpec::gic(penalty), glm, glm.candidates());
    const auto d = selection::glm2_logprob_derivs(glm, penalty);
    for (std::size_t k = 0; k < 2; ++k) {
      const auto mc = bounds::mc_selective_fim(glm, *gic, glm.candidates(), k, 100000, 47, ctx.threads);
      Vector g(2);
      g << 0.0, k == 0 ? d.dlog_pi1 : d.dlog_pi2;
      const auto [bad, z] = outside(mc.score_mean, mc.score_mean_se, g, 3.0);
      rec.expect(bad == 0, fmt::format("glm model {} conditional score mean vs d log pi (max |z| = {:.2f})",
                                       k + 1, z));
    }
  }
  return res;
}

CheckResult check_scalar_oracle(const CheckContext& ctx) {
  CheckResult res;
  Recorder rec(res, ctx);
  const double c = 0.8, sigma = 0.7;
  Vector theta(2);
  theta << 1.0, 0.5;
  const model::SparseModel m(Matrix::Identity(4, 4), sigma, model::SupportSet({0, 1}, 4), theta);
  const auto cands = all_subsets(4);
  const auto ost = selection::make_selector(selection::SelectionRuleSpec::ost(c), m, cands);
  const estimators::MslEstimator msl(m);
  const auto run = experiments::run_mc(m, *ost, msl, cands, 200000, 53, ctx.threads);

  // theta_hat_m = x_m 1{|x_m| > c}, x_m ~ N(theta_m, sigma^2):
  // E[(theta_hat_m - theta_m)^2] = sigma^2 (1 - E[z^2; b < z < a]) + theta_m^2 P(b < z < a)
  // with E[z^2; b < z < a] = P(b < z < a) - (a phi(a) - b phi(b)).
  const boost::math::normal n;
  const Vector padded = m.theta_padded();
  double worst = 0.0;
  int bad = 0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    const double t = padded(i);
    const double a = (c - t) / sigma, b = (-c - t) / sigma;
    const double inside = cdf(n, a) - cdf(n, b);
    const double z2 = inside - (a * pdf(n, a) - b * pdf(n, b));
    const double exact = sigma * sigma * (1.0 - z2) + t * t * inside;
    const double z = std::abs(run.mse(i, i) - exact) / run.mse_se(i, i);
    rec.log("coordinate {}: mc {:.6f} +- {:.6f}, closed form {:.6f}", i + 1, run.mse(i, i),
            run.mse_se(i, i), exact);
    worst = std::max(worst, z);
    bad += z > 3.0;
  }
  rec.expect(bad == 0 && run.failed == 0,
             fmt::format("4 coordinates within 3 sigma of the closed form (max |z| = {:.2f})", worst));
  return res;
}

} // namespace selcrb::checks
