#include "selcrb/selection/probabilities.hpp"

#include "selcrb/error.hpp"
#include "selcrb/numerics/special.hpp"
#include "selcrb/parallel.hpp"

#include <cmath>
#include <fmt/format.h>

namespace selcrb::selection {

using numerics::std_normal_pdf;

SelectionProbabilities ost_selection_prob(const model::SparseModel& model, double c,
                                          const model::CandidateSet& candidates) {
  if (candidates.ambient_dim() != model.ambient_dim())
    throw DomainError("candidate dimension does not match the model");
  const model::Exceedance e = model::ost_exceedance(model, c);
  const auto ranking = model::ProductRanking::from(e);
  SelectionProbabilities out;
  out.method = SelectionProbabilities::Method::analytic;
  out.p_marginal = e.p;
  out.pi.resize(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t k = 0; k < candidates.size(); ++k)
    out.pi(static_cast<Eigen::Index>(k)) = std::exp(ranking.log_prob(candidates[k].mask()));
  out.empty = e.q.prod();
  out.other = std::max(0.0, 1.0 - out.pi.sum() - out.empty);
  return out;
}

double ost_log_prob(const model::SparseModel& model, double c, const model::SupportSet& candidate) {
  const model::Exceedance e = model::ost_exceedance(model, c);
  return model::ProductRanking::from(e).log_prob(candidate.mask());
}

Vector ost_log_prob_gradient(const model::SparseModel& model, double c,
                             const model::SupportSet& candidate) {
  const auto m = static_cast<Eigen::Index>(model.ambient_dim());
  Vector u(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto [a, b] = model::alpha_beta(model, static_cast<std::size_t>(i), c);
    const double dphi = std_normal_pdf(a) - std_normal_pdf(b);
    if (candidate.contains(static_cast<std::size_t>(i)))
      u(i) = dphi / numerics::std_normal_outside(b, a);
    else
      u(i) = -dphi / numerics::std_normal_interval(b, a);
  }
  // d mu_m / d theta_Lambda = A_Lambda^T a_m, and d alpha / d mu = -1/sigma.
  const Matrix cross = model.columns(model.truth()).transpose() * model.design();
  return cross * u / model.sigma();
}

Glm2Terms glm2_terms(const model::GlmModel& model, const Penalty& penalty) {
  if (!model.is_two_model())
    throw DomainError("two-model GIC formulas need candidates {1}, {1,2} and truth {1,2}");
  const std::size_t n = model.rows();
  const double gamma = 2.0 * penalty.tau(n, 2) - penalty.tau(n, 1);
  if (!(gamma > 0.0))
    throw DomainError(fmt::format("GIC threshold 2 tau(N,2) - tau(N,1) = {} must be positive",
                                  gamma));
  const Matrix& g = model.gram();
  const double s2 = model.sigma() * model.sigma();
  const double kappa = (g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1)) / g(0, 0) / s2;
  const double t2 = model.theta()(1);
  return {gamma, kappa, kappa * t2 * t2};
}

SelectionProbabilities glm2_selection_prob(const model::GlmModel& model, const Penalty& penalty) {
  const Glm2Terms t = glm2_terms(model, penalty);
  const double a = std::sqrt(t.lambda);
  const double b = std::sqrt(t.gamma);
  SelectionProbabilities out;
  out.pi.resize(2);
  out.pi(1) = numerics::marcum_q_half(0.5, a, b);
  out.pi(0) = numerics::marcum_q_half_complement(0.5, a, b);
  out.p_marginal.resize(2);
  out.p_marginal << 1.0, out.pi(1);
  return out;
}

Glm2Derivatives glm2_logprob_derivs(const model::GlmModel& model, const Penalty& penalty) {
  const Glm2Terms t = glm2_terms(model, penalty);
  const double a = std::sqrt(t.lambda);
  const double b = std::sqrt(t.gamma);
  const double t2 = model.theta()(1);
  Glm2Derivatives d{};
  d.pi2 = numerics::marcum_q_half(0.5, a, b);
  d.pi1 = numerics::marcum_q_half_complement(0.5, a, b);
  if (!(d.pi1 > 0.0))
    throw DegenerateProbability(0, d.pi1);
  if (!(d.pi2 > 0.0))
    throw DegenerateProbability(1, d.pi2);
  const double diff1 = numerics::marcum_q_half_diff(0.5, a, b);
  const double diff2 = numerics::marcum_q_half_diff2(0.5, a, b);
  d.dpi2 = t.kappa * t2 * diff1;
  d.d2pi2 = t.kappa * diff1 + t.kappa * t.kappa * t2 * t2 * diff2;
  d.dlog_pi2 = d.dpi2 / d.pi2;
  d.dlog_pi1 = -d.dpi2 / d.pi1;
  d.d2log_pi2 = d.d2pi2 / d.pi2 - d.dlog_pi2 * d.dlog_pi2;
  d.d2log_pi1 = -d.d2pi2 / d.pi1 - d.dlog_pi1 * d.dlog_pi1;
  return d;
}

SelectionProbabilities mc_selection_prob(const model::LinearGaussianModel& model,
                                         const Selector& selector,
                                         const model::CandidateSet& candidates,
                                         std::size_t trials, std::uint64_t seed,
                                         unsigned threads) {
  if (trials == 0)
    throw DomainError("mc_selection_prob: trials must be positive");
  const std::size_t k_count = candidates.size();
  const std::size_t m_count = model.ambient_dim();
  struct Counts {
    std::vector<std::size_t> pi, marginal;
    std::size_t empty = 0, other = 0;
  };
  const auto batches = make_batches(trials);
  std::vector<Counts> per_batch(batches.size());
  const Sampler sampler(model);
  for_each_batch(batches, threads, [&](const BatchRange& r) {
    Counts c{std::vector<std::size_t>(k_count), std::vector<std::size_t>(m_count)};
    Draw d = sampler.make_draw();
    for (std::size_t t = r.begin; t < r.end; ++t) {
      sampler.draw(seed, t, d);
      const std::uint64_t mask = selector.select(d);
      for (std::size_t m = 0; m < m_count; ++m)
        c.marginal[m] += (mask >> m) & 1u;
      if (mask == 0) {
        ++c.empty;
      } else if (auto k = candidates.index_of_mask(mask)) {
        ++c.pi[*k];
      } else {
        ++c.other;
      }
    }
    per_batch[r.index] = std::move(c);
  });

  Counts total{std::vector<std::size_t>(k_count), std::vector<std::size_t>(m_count)};
  for (const auto& c : per_batch) {
    for (std::size_t k = 0; k < k_count; ++k)
      total.pi[k] += c.pi[k];
    for (std::size_t m = 0; m < m_count; ++m)
      total.marginal[m] += c.marginal[m];
    total.empty += c.empty;
    total.other += c.other;
  }
  const double n = static_cast<double>(trials);
  auto freq = [n](std::size_t c) { return static_cast<double>(c) / n; };
  auto se = [n](double p) { return std::sqrt(p * (1.0 - p) / n); };
  SelectionProbabilities out;
  out.method = SelectionProbabilities::Method::monte_carlo;
  out.trials = trials;
  out.seed = seed;
  out.pi.resize(static_cast<Eigen::Index>(k_count));
  out.pi_se.resize(static_cast<Eigen::Index>(k_count));
  for (std::size_t k = 0; k < k_count; ++k) {
    out.pi(static_cast<Eigen::Index>(k)) = freq(total.pi[k]);
    out.pi_se(static_cast<Eigen::Index>(k)) = se(freq(total.pi[k]));
  }
  out.p_marginal.resize(static_cast<Eigen::Index>(m_count));
  out.p_marginal_se.resize(static_cast<Eigen::Index>(m_count));
  for (std::size_t m = 0; m < m_count; ++m) {
    out.p_marginal(static_cast<Eigen::Index>(m)) = freq(total.marginal[m]);
    out.p_marginal_se(static_cast<Eigen::Index>(m)) = se(freq(total.marginal[m]));
  }
  out.empty = freq(total.empty);
  out.empty_se = se(out.empty);
  out.other = freq(total.other);
  out.other_se = se(out.other);
  return out;
}

} // namespace selcrb::selection
