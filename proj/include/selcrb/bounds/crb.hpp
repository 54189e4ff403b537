#pragma once

#include "selcrb/bounds/fim.hpp"

namespace selcrb::bounds {

/// Selective bias b_k (length M, zero off Lambda_k) and its gradient
/// G_k = d b_k / d theta_Lambda (M x |Lambda|, rows zero off Lambda_k).
struct BiasModel {
  enum class Source { zero, analytic_identity_ost, monte_carlo };

  std::vector<Vector> b;
  std::vector<Matrix> g;
  Source source = Source::zero;

  static BiasModel zero(std::size_t num_candidates, std::size_t ambient_dim, std::size_t truth_size);
  bool is_zero() const;
};

/// What to do with a candidate whose J_k is indefinite or badly conditioned.
enum class FimPolicy {
  error, // throw SingularFim naming the candidate
  drop   // leave the term out and report its probability as indefinite_mass
};

struct BoundOptions {
  double pi_floor = 1e-12;
  FimPolicy policy = FimPolicy::error;
};

struct BoundReport {
  SymMatrix scrb_matrix;     // B_sCRB (M x M), bound on the MSSE matrix
  Matrix mse_matrix;         // MSE bound over the listed candidates and the empty set
  double msse_trace_bound = 0.0;
  double mse_trace_bound = 0.0;  // trace of B plus sum_{m in Lambda} (1 - p_m) theta_m^2
  double msse_trace_true = 0.0;  // the same two traces restricted to the true parameters
  double mse_trace_true = 0.0;
  Vector marginal_msse;
  Vector marginal_mse;
  double oracle_trace = 0.0;
  std::optional<double> sms_trace;
  selection::SelectionProbabilities pi;
  double dropped_mass = 0.0;     // candidates under the floor plus supports outside the list
  double empty_mass = 0.0;
  double indefinite_mass = 0.0;  // candidates skipped under FimPolicy::drop
  std::vector<std::size_t> skipped;
  double min_eigenvalue = 0.0;   // of scrb_matrix
};

/// B = sum_k pi_k ((D_k + G_k) J_k^{-1} (D_k + G_k)^T + b_k b_k^T), summed
/// in candidate order over pi_k > pi_floor. Also fills the MSE, marginal and
/// trace forms; `theta` is indexed like `truth`.
BoundReport selective_crb(const selection::SelectionProbabilities& pi,
                          const model::CandidateSet& candidates, const SelectiveFim& fims,
                          const BiasModel& bias, const model::SupportSet& truth,
                          const Vector& theta, const BoundOptions& options = {});

/// Unbiased form sum_k pi_k D_k J_k^{-1} D_k^T through explicit inverses.
SymMatrix unbiased_selective_crb(const selection::SelectionProbabilities& pi,
                                 const model::CandidateSet& candidates, const SelectiveFim& fims,
                                 const model::SupportSet& truth, double pi_floor = 1e-12);

/// B + sum_k pi_k t_k t_k^T - sum_k pi_k (t_k b_k^T + b_k t_k^T) + pi_empty theta theta^T,
/// with t_k the zero-padded part of theta outside Lambda_k.
Matrix mse_bound(const SymMatrix& scrb, const selection::SelectionProbabilities& pi,
                 const model::CandidateSet& candidates, const BiasModel& bias,
                 const model::SupportSet& truth, const Vector& theta, double pi_floor = 1e-12);

/// (diag B, diag B + (1 - p_m) theta_m^2 on the true support).
std::pair<Vector, Vector> marginal_bounds(const SymMatrix& scrb, const Vector& p_marginal,
                                          const model::SupportSet& truth, const Vector& theta);

/// sigma^2 sum_l sum_{k in kappa_l} pi_k [(A_Lambda^T (I + Q_k) A_Lambda)^{-1}]_{l,l}
///   + sum_{m in Lambda} (Phi(alpha_m) - Phi(beta_m)) theta_m^2
/// computed on its own, for cross-checking the generic pipeline. Skips the
/// same candidates as selective_crb under the same options.
double sparse_trace_bound(const model::SparseModel& model, double c,
                          const model::CandidateSet& candidates, const BoundOptions& options = {});

/// SMS-CRB for nested GLM candidates: sum_{k >= k_t} pi_k pad(Jt_k^{-1}), with
/// Jt_k = H_k^T H_k / sigma^2 the FIM of candidate k on its own parameters.
SymMatrix sms_crb(const model::GlmModel& model, const selection::SelectionProbabilities& pi);

/// Always throws Unsupported: with L < M most candidate FIMs are singular.
SymMatrix sms_crb(const model::SparseModel& model, const selection::SelectionProbabilities& pi);

} // namespace selcrb::bounds
