#pragma once

#include "selcrb/bounds/crb.hpp"
#include "selcrb/selection/rules.hpp"

#include <functional>

namespace selcrb::estimators {

/// Estimate that vanishes exactly off the selected support.
struct CoherentEstimate {
  Vector theta_hat;                          // length M
  std::optional<model::SupportSet> selected; // nullopt: empty selection, theta_hat = 0
};

/// Least squares on candidate k of the GLM, zeros elsewhere.
CoherentEstimate msl_glm(const Vector& x, const model::GlmModel& model, std::size_t k);

/// Least squares on the selected support of the dictionary, zeros elsewhere.
/// Throws EstimationError naming the support if A_selected is rank deficient.
CoherentEstimate msl_sparse(const Vector& x, const model::SparseModel& model,
                            const std::optional<model::SupportSet>& selected);

/// Estimator as seen by the Monte-Carlo loops: maps a draw and the selected
/// support mask to a length-M estimate that is zero off the mask.
class Estimator {
public:
  virtual ~Estimator() = default;
  virtual void estimate(const selection::Draw& d, std::uint64_t mask, Vector& out) const = 0;
};

/// Maximum selected likelihood: least squares on the selected columns, computed
/// from the correlations X^T x and a cached Gram matrix.
class MslEstimator final : public Estimator {
public:
  explicit MslEstimator(const model::LinearGaussianModel& model);
  void estimate(const selection::Draw& d, std::uint64_t mask, Vector& out) const override;

private:
  Matrix gram_;
  std::size_t rows_;
};

/// MSL minus its analytic selective bias at a reference parameter, for A = I.
/// At the reference point every conditional bias vanishes.
class BiasCorrectedIdentityMsl final : public Estimator {
public:
  BiasCorrectedIdentityMsl(const model::SparseModel& reference, double c);
  void estimate(const selection::Draw& d, std::uint64_t mask, Vector& out) const override;

private:
  Vector shift_; // per-index bias of x_m given |x_m| > c at the reference point
};

/// Adapter for user-supplied estimators (x, selected support) -> CoherentEstimate.
class FunctionEstimator final : public Estimator {
public:
  using Fn = std::function<CoherentEstimate(const Vector&, const std::optional<model::SupportSet>&)>;
  FunctionEstimator(Fn fn, std::size_t ambient_dim) : fn_(std::move(fn)), dim_(ambient_dim) {}
  void estimate(const selection::Draw& d, std::uint64_t mask, Vector& out) const override;

private:
  Fn fn_;
  std::size_t dim_;
};

/// Selective bias of the MSL for A = I:
/// -sigma (phi(beta_m) - phi(alpha_m)) / (1 - Phi(alpha_m) + Phi(beta_m)) if m is in the
/// candidate, 0 otherwise.
double msl_bias_identity(const model::SparseModel& model, double c, std::size_t m,
                         const model::SupportSet& candidate);

/// d b_m / d theta_m = -(beta phi(beta) - alpha phi(alpha)) / (1 - Phi(alpha) + Phi(beta)) - b_m^2 / sigma^2
/// for m in both the candidate and the true support, 0 otherwise.
double msl_bias_gradient_identity(const model::SparseModel& model, double c, std::size_t m,
                                  const model::SupportSet& candidate);

/// b_k and G_k of the MSL for every candidate (A = I only).
bounds::BiasModel identity_msl_bias(const model::SparseModel& model, double c,
                                    const model::CandidateSet& candidates);

struct McBias {
  Vector b;     // length M
  Vector b_se;
  Matrix g;     // M x |Lambda|, central differences with common random numbers
  std::size_t conditioned = 0;
};

/// Conditional mean of the zero-padded selected error given that candidate k
/// was chosen, and its gradient from the same draws at theta +- step e_l.
McBias mc_selective_bias(const model::LinearGaussianModel& model, const selection::Selector& selector,
                         const Estimator& estimator, const model::CandidateSet& candidates,
                         std::size_t k, std::size_t trials, std::uint64_t seed,
                         double step = 1e-2, unsigned threads = 1);

} // namespace selcrb::estimators
