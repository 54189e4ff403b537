#pragma once

#include "selcrb/model/linear_model.hpp"
#include "selcrb/selection/probabilities.hpp"

#include <optional>
#include <vector>

namespace selcrb::bounds {

using numerics::SymMatrix;

/// Selective FIMs J_k on the true parameters, one slot per candidate. A slot
/// is empty when the candidate was not needed (negligible probability).
struct SelectiveFim {
  enum class Method { analytic_sparse, analytic_glm2, monte_carlo, oracle };

  std::vector<std::optional<SymMatrix>> per_model;
  SymMatrix oracle;
  Method method = Method::oracle;
};

/// (1/sigma^2) X_Lambda^T X_Lambda
SymMatrix oracle_fim(const model::LinearGaussianModel& model);

/// Inverse oracle FIM on the true support.
SymMatrix oracle_crb(const model::LinearGaussianModel& model);

/// Per-index second-derivative weights q_m of the OST product form:
/// selected branch (alpha phi(alpha) - beta phi(beta))/P - (phi(alpha) - phi(beta))^2/P^2,
/// unselected branch (-alpha phi(alpha) + beta phi(beta))/R - (phi(alpha) - phi(beta))^2/R^2,
/// with P = 1 - Phi(alpha) + Phi(beta) and R = Phi(alpha) - Phi(beta).
/// Throws DegenerateProbability when P or R is below 1e-300.
Vector ost_q_weights(const model::SparseModel& model, double c, const model::SupportSet& candidate);

/// Q_k = A diag(q) A^T (L x L).
Matrix sparse_q_matrix(const model::SparseModel& model, double c,
                       const model::SupportSet& candidate);

/// J_k = J + (1/sigma^2) A_Lambda^T Q_k A_Lambda.
SymMatrix sparse_selective_fim(const model::SparseModel& model, double c,
                               const model::SupportSet& candidate);

/// All candidates with pi_k > pi_floor.
SelectiveFim sparse_selective_fims(const model::SparseModel& model, double c,
                                   const model::CandidateSet& candidates,
                                   const selection::SelectionProbabilities& pi,
                                   double pi_floor = 1e-12);

/// J_k = (1/sigma^2) H_2^T H_2 + diag(0, d^2 log pi_k / d theta_2^2), k = 1, 2.
/// Throws SingularFim naming the model if either fails the conditioning test.
SelectiveFim glm2_selective_fims(const model::GlmModel& model, const selection::Penalty& penalty);

/// Data-independent rules leave the likelihood untouched: J_k = J for every k.
SelectiveFim data_independent_fims(const model::LinearGaussianModel& model,
                                   const model::CandidateSet& candidates);

/// Monte-Carlo selective FIM: sample covariance of the score over draws that
/// selected candidate k (equal to J_k because the conditional score mean is
/// grad log pi_k).
struct McFim {
  SymMatrix fim;
  Matrix fim_se;          // entrywise standard errors
  Vector score_mean;      // estimates grad log pi_k
  Vector score_mean_se;
  std::size_t conditioned = 0;
  std::size_t trials = 0;
};

inline constexpr std::size_t kMinConditionedSamples = 50;

McFim mc_selective_fim(const model::LinearGaussianModel& model, const selection::Selector& selector,
                       const model::CandidateSet& candidates, std::size_t k, std::size_t trials,
                       std::uint64_t seed, unsigned threads = 1);

} // namespace selcrb::bounds
