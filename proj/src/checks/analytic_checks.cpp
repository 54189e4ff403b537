// Checks that need no sampling: derivative formulas against finite
// differences of independently coded probabilities, and exact reductions.
#include "suites.hpp"

#include "recorder.hpp"
#include "selcrb/bounds/crb.hpp"
#include "selcrb/selection/probabilities.hpp"

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <random>

namespace selcrb::checks {

using detail::Recorder;

namespace {

/// Five-point stencils, O(h^4).
template <class F>
double d1(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}
template <class F>
double d2(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h);
}

/// Product-form log pi_k coded from scratch with Boost's normal distribution.
double product_log_prob(const Matrix& a, const std::vector<std::size_t>& truth,
                        const Vector& theta, double sigma, double c, std::uint64_t mask) {
  const boost::math::normal n;
  Vector mean = Vector::Zero(a.rows());
  for (std::size_t l = 0; l < truth.size(); ++l)
    mean += a.col(static_cast<Eigen::Index>(truth[l])) * theta(static_cast<Eigen::Index>(l));
  double lp = 0.0;
  for (Eigen::Index m = 0; m < a.cols(); ++m) {
    const double mu = a.col(m).dot(mean);
    const double alpha = (c - mu) / sigma, beta = (-c - mu) / sigma;
    const double out = cdf(complement(n, alpha)) + cdf(n, beta);
    lp += std::log(((mask >> m) & 1u) ? out : 1.0 - out);
  }
  return lp;
}

} // namespace

CheckResult check_glm_derivatives(const CheckContext& ctx) {
  CheckResult res;
  Recorder rec(res, ctx);
  auto base = setup_point_model(glm_snr_config());
  const Matrix& h = base.design();
  const double g00 = h.col(0).squaredNorm(), g11 = h.col(1).squaredNorm(), g01 = h.col(0).dot(h.col(1));
  // sigma chosen so that kappa = 1: lambda = theta_2^2 spans [0.01, 25] over the grid.
  const double sigma = std::sqrt((g00 * g11 - g01 * g01) / g00);
  base = base.with_sigma(sigma);
  const auto penalty = selection::Penalty::aic();
  const double gamma = 2 * penalty.tau(h.rows(), 2) - penalty.tau(h.rows(), 1);

  auto pi2 = [&](double t2) {
    const double kappa = (g00 * g11 - g01 * g01) / (g00 * sigma * sigma);
    const boost::math::non_central_chi_squared d(1.0, kappa * t2 * t2);
    return cdf(complement(d, gamma));
  };

  double worst1 = 0.0, worst2 = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double t2 = 0.1 + (5.0 - 0.1) * i / 19.0;
    Vector theta(2);
    theta << 4.0, t2;
    const auto d = selection::glm2_logprob_derivs(base.with_theta(theta), penalty);
    const double step = 1e-3 * std::max(1.0, t2);
    const double f1 = d1(pi2, t2, step), f2 = d2(pi2, t2, step);
    const double e1 = std::abs(d.dpi2 - f1) / std::abs(f1);
    const double e2 = std::abs(d.d2pi2 - f2) / std::abs(f2);
    worst1 = std::max(worst1, e1);
    worst2 = std::max(worst2, e2);
    rec.log("theta2={:.4f} dpi2={:.12e} fd={:.12e} rel={:.2e} | d2pi2={:.12e} fd={:.12e} rel={:.2e}",
            t2, d.dpi2, f1, e1, d.d2pi2, f2, e2);
  }
  rec.expect(worst1 < 1e-6, fmt::format("first derivative, worst rel. error {:.2e} (< 1e-6)", worst1));
  rec.expect(worst2 < 1e-5, fmt::format("second derivative, worst rel. error {:.2e} (< 1e-5)", worst2));
  return res;
}

CheckResult check_sparse_hessian(const CheckContext& ctx) {
  CheckResult res;
  Recorder rec(res, ctx);
  const Matrix a = load_dictionary(ctx);
  const auto config = dictionary_snr_config(a);
  const auto model = setup_point_model_sparse(config).with_sigma(0.5);
  const double c = config.rule->threshold();
  const auto& truth = model.truth();

  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> pick(1, (std::uint64_t{1} << a.cols()) - 1);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto cand = model::SupportSet::from_mask(pick(rng), static_cast<std::size_t>(a.cols()));
    const Matrix al = model.columns(truth);
    const Matrix analytic = al.transpose() * bounds::sparse_q_matrix(model, c, cand) * al /
                            (model.sigma() * model.sigma());
    auto f = [&](const Vector& t) {
      return product_log_prob(a, truth.indices(), t, model.sigma(), c, cand.mask());
    };
    // Richardson-extrapolated central mixed differences.
    auto fd = [&](double h) {
      const Eigen::Index n = model.theta().size();
      Matrix hess(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          Vector pp = model.theta(), pm = pp, mp = pp, mm = pp;
          pp(i) += h, pp(j) += h;
          pm(i) += h, pm(j) -= h;
          mp(i) -= h, mp(j) += h;
          mm(i) -= h, mm(j) -= h;
          hess(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h * h);
        }
      return hess;
    };
    const Matrix numeric = (4.0 * fd(5e-4) - fd(1e-3)) / 3.0;
    const double scale = numeric.cwiseAbs().maxCoeff();
    const double err = detail::max_rel_error(analytic, numeric, 1e-3 * scale);
    worst = std::max(worst, err);
    rec.log("candidate {} worst rel. error {:.2e}", cand.to_string(), err);
  }
  rec.expect(worst < 1e-5,
             fmt::format("Hessian of log pi_k over 5 candidates, worst rel. error {:.2e} (< 1e-5)", worst));
  return res;
}

CheckResult check_reductions(const CheckContext& ctx) {
  CheckResult res;
  Recorder rec(res, ctx);
  const double tol = 1e-12;
  auto rel = [](const Matrix& x, const Matrix& y) {
    return (x - y).cwiseAbs().maxCoeff() / std::max(1.0, y.cwiseAbs().maxCoeff());
  };

  const Matrix dict = load_dictionary(ctx);
  const auto sparse = setup_point_model_sparse(dictionary_snr_config(dict)).with_sigma(0.3);
  const auto glm = setup_point_model(glm_snr_config()).with_sigma(200.0);
  const std::vector<const model::LinearGaussianModel*> models{&sparse, &glm};

  for (const auto* m : models) {
    const std::string name = m == &glm ? "glm" : "sparse";
    const auto& truth = m->truth();
    const std::size_t dim = m->ambient_dim();
    const Matrix oracle = bounds::oracle_crb(*m).matrix();
    const Matrix d_truth = model::selection_matrix_D(truth, truth);

    // One candidate selected with probability one.
    {
      const model::CandidateSet cands({truth}, dim);
      selection::SelectionProbabilities pi;
      pi.pi = Vector::Ones(1);
      pi.p_marginal = Vector::Zero(static_cast<Eigen::Index>(dim));
      const auto fims = bounds::data_independent_fims(*m, cands);
      const auto rep = bounds::selective_crb(pi, cands, fims, bounds::BiasModel::zero(1, dim, truth.size()),
                                             truth, m->theta());
      const Matrix expect = d_truth * oracle * d_truth.transpose();
      const double e = rel(rep.scrb_matrix.matrix(), expect);
      rec.expect(e < tol, fmt::format("{}: single-model bound equals oracle CRB ({:.1e})", name, e));
    }

    // Data-independent random choice among candidates overlapping the truth.
    {
      std::vector<model::SupportSet> list{truth, model::SupportSet({truth[0]}, dim)};
      if (m == &sparse)
        list.push_back(model::SupportSet({truth[1], truth[2], 12}, dim));
      else
        list.push_back(model::SupportSet({truth[1]}, dim));
      const model::CandidateSet cands(list, dim);
      Vector probs(3);
      probs << 0.5, 0.3, 0.2;
      selection::SelectionProbabilities pi;
      pi.pi = probs;
      pi.p_marginal = Vector::Zero(static_cast<Eigen::Index>(dim));
      const auto fims = bounds::data_independent_fims(*m, cands);
      const auto rep = bounds::selective_crb(pi, cands, fims, bounds::BiasModel::zero(3, dim, truth.size()),
                                             truth, m->theta());
      Matrix expect = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
      for (std::size_t k = 0; k < 3; ++k) {
        // Keep the oracle entries whose row and column both survive in candidate k.
        Matrix block = Matrix::Zero(expect.rows(), expect.cols());
        for (std::size_t i = 0; i < truth.size(); ++i)
          for (std::size_t j = 0; j < truth.size(); ++j)
            if (list[k].contains(truth[i]) && list[k].contains(truth[j]))
              block(static_cast<Eigen::Index>(truth[i]), static_cast<Eigen::Index>(truth[j])) =
                  oracle(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        expect += probs(static_cast<Eigen::Index>(k)) * block;
      }
      const double e = rel(rep.scrb_matrix.matrix(), expect);
      rec.expect(e < tol, fmt::format("{}: data-independent rule gives pi-weighted oracle blocks ({:.1e})", name, e));
    }
  }

  // Zero-bias general form against the explicit-inverse unbiased form, on
  // A = I where every J_k is positive definite.
  {
    const auto config = identity_threshold_config(2);
    const auto ident = setup_point_model_sparse(config);
    const double c = config.rule->threshold();
    const auto cands = model::enumerate_candidates(ident.ambient_dim(), {});
    const auto pi = selection::ost_selection_prob(ident, c, cands);
    const auto fims = bounds::sparse_selective_fims(ident, c, cands, pi);
    const auto rep = bounds::selective_crb(
        pi, cands, fims, bounds::BiasModel::zero(cands.size(), ident.ambient_dim(), ident.truth().size()),
        ident.truth(), ident.theta());
    const auto direct = bounds::unbiased_selective_crb(pi, cands, fims, ident.truth());
    const double e = rel(rep.scrb_matrix.matrix(), direct.matrix());
    rec.expect(e < tol, fmt::format("sparse A=I: zero-bias form equals unbiased form ({:.1e})", e));
  }
  {
    const auto penalty = selection::Penalty::aic();
    const auto pi = selection::glm2_selection_prob(glm, penalty);
    const auto fims = bounds::glm2_selective_fims(glm, penalty);
    const auto rep = bounds::selective_crb(pi, glm.candidates(), fims,
                                           bounds::BiasModel::zero(2, 2, 2), glm.truth(), glm.theta());
    const auto direct = bounds::unbiased_selective_crb(pi, glm.candidates(), fims, glm.truth());
    const double e = rel(rep.scrb_matrix.matrix(), direct.matrix());
    rec.expect(e < tol, fmt::format("glm: zero-bias form equals unbiased form ({:.1e})", e));
  }
  return res;
}

} // namespace selcrb::checks
