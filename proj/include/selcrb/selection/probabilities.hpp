#pragma once

#include "selcrb/model/linear_model.hpp"
#include "selcrb/selection/rules.hpp"

#include <cstdint>

namespace selcrb::selection {

/// Selection probabilities over a candidate list. Mass that falls outside
/// the list is split into the empty selection and everything else.
struct SelectionProbabilities {
  enum class Method { analytic, monte_carlo };

  Vector pi;          // per candidate
  Vector p_marginal;  // per parameter index: Pr(m in selected support)
  Method method = Method::analytic;
  double empty = 0.0;
  double other = 0.0;

  // Monte-Carlo only: binomial standard errors and trial counts.
  Vector pi_se;
  Vector p_marginal_se;
  double empty_se = 0.0;
  double other_se = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;

  double total() const { return pi.sum() + empty + other; }
};

/// Product-form OST probabilities: pi_k = prod_{l in Lambda_k} p_l prod_{m not in Lambda_k} (1 - p_m).
/// Exact when the dictionary columns are orthogonal. p_marginal is the direct
/// per-index formula and `other` is the mass of non-candidate supports.
SelectionProbabilities ost_selection_prob(const model::SparseModel& model, double c,
                                          const model::CandidateSet& candidates);

/// Product-form log pi_k, the function whose derivatives the selective FIM uses.
double ost_log_prob(const model::SparseModel& model, double c, const model::SupportSet& candidate);

/// Analytic gradient of ost_log_prob with respect to theta_Lambda.
Vector ost_log_prob_gradient(const model::SparseModel& model, double c,
                             const model::SupportSet& candidate);

/// Two-model GIC: pi_2 = Q_{1/2}(sqrt(lambda), sqrt(gamma)).
SelectionProbabilities glm2_selection_prob(const model::GlmModel& model, const Penalty& penalty);

/// Scalars of the two-model GIC case.
struct Glm2Terms {
  double gamma;       // 2 tau(N,2) - tau(N,1)
  double kappa;       // (||h1||^2 ||h2||^2 - (h1^T h2)^2) / (||h1||^2 sigma^2)
  double lambda;      // kappa * theta_2^2
};
Glm2Terms glm2_terms(const model::GlmModel& model, const Penalty& penalty);

struct Glm2Derivatives {
  double pi1, pi2;
  double dpi2, d2pi2;          // d/dtheta_2 and d^2/dtheta_2^2 of pi_2
  double dlog_pi1, dlog_pi2;   // d log pi_k / dtheta_2
  double d2log_pi1, d2log_pi2; // d^2 log pi_k / dtheta_2^2
};

/// dpi2 = kappa theta_2 (Q_{3/2} - Q_{1/2}),
/// d2pi2 = kappa (Q_{3/2} - Q_{1/2}) + kappa^2 theta_2^2 (Q_{5/2} - 2 Q_{3/2} + Q_{1/2}),
/// written in terms of kappa = lambda / theta_2^2 so theta_2 = 0 needs no special case.
/// Throws DegenerateProbability when pi_1 or pi_2 is not in (0, 1).
Glm2Derivatives glm2_logprob_derivs(const model::GlmModel& model, const Penalty& penalty);

/// Empirical selection frequencies over `trials` seeded draws.
SelectionProbabilities mc_selection_prob(const model::LinearGaussianModel& model,
                                         const Selector& selector,
                                         const model::CandidateSet& candidates,
                                         std::size_t trials, std::uint64_t seed,
                                         unsigned threads = 1);

} // namespace selcrb::selection
