#pragma once

#include "selcrb/model/support.hpp"

#include <utility>

namespace selcrb::model {

/// x = X_Lambda theta_Lambda + w, w ~ N(0, sigma^2 I). X has one column per
/// parameter index (M columns); the true parameters live on `truth`.
class LinearGaussianModel {
public:
  LinearGaussianModel(Matrix design, double sigma, SupportSet truth, Vector theta);

  const Matrix& design() const noexcept { return x_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(x_.rows()); }
  std::size_t ambient_dim() const noexcept { return static_cast<std::size_t>(x_.cols()); }
  double sigma() const noexcept { return sigma_; }
  const SupportSet& truth() const noexcept { return truth_; }
  /// True parameters, indexed like `truth()`.
  const Vector& theta() const noexcept { return theta_; }
  Vector theta_padded() const { return zero_pad(theta_, truth_).values; }

  /// Noise-free observation X_Lambda theta.
  const Vector& mean() const noexcept { return mean_; }
  /// X^T X (M x M).
  const Matrix& gram() const noexcept { return gram_; }
  /// X^T X_Lambda theta, the noise-free correlations.
  const Vector& mean_correlation() const noexcept { return mean_corr_; }

  Matrix columns(const SupportSet& s) const;
  Matrix gram(const SupportSet& s) const;

  /// 10 log10(||X theta||^2 / (N sigma^2))
  double snr_db() const;
  /// Noise level giving the requested SNR at the current theta.
  double sigma_for_snr(double snr_db) const;

protected:
  void set_sigma(double sigma);
  void set_theta(Vector theta);

private:
  void refresh();

  Matrix x_;
  double sigma_;
  SupportSet truth_;
  Vector theta_;
  Vector mean_;
  Matrix gram_;
  Vector mean_corr_;
};

/// Sparse recovery model: dictionary A (L x M) with unit-norm columns.
class SparseModel : public LinearGaussianModel {
public:
  SparseModel(Matrix a, double sigma, SupportSet truth, Vector theta);

  const Matrix& dictionary() const noexcept { return design(); }
  bool is_identity() const;
  /// |Lambda| > L; the model is still usable but support recovery is ill-posed.
  bool oversized_support() const noexcept { return truth().size() > rows(); }

  SparseModel with_sigma(double sigma) const;
  SparseModel with_theta(Vector theta) const;
};

/// General linear model with K candidate designs H_k = H[:, Lambda_k].
class GlmModel : public LinearGaussianModel {
public:
  GlmModel(Matrix h, double sigma, CandidateSet candidates, std::size_t true_index, Vector theta);

  const CandidateSet& candidates() const noexcept { return cands_; }
  std::size_t true_index() const noexcept { return true_index_; }
  Matrix h(std::size_t k) const { return columns(cands_[k]); }
  /// K = 2 with Lambda_1 = {1}, Lambda_2 = {1,2} and the truth in model 2.
  bool is_two_model() const;

  GlmModel with_sigma(double sigma) const;
  GlmModel with_theta(Vector theta) const;

private:
  CandidateSet cands_;
  std::size_t true_index_;
};

/// (alpha_m, beta_m) = ((c - a_m^T A_Lambda theta)/sigma, (-c - a_m^T A_Lambda theta)/sigma)
std::pair<double, double> alpha_beta(const SparseModel& model, std::size_t m, double c);

/// Per-index OST inclusion probabilities p_m = 1 - Phi(alpha_m) + Phi(beta_m)
/// and their complements q_m = Phi(alpha_m) - Phi(beta_m), each evaluated
/// without cancellation.
struct Exceedance {
  Vector p;
  Vector q;
};
Exceedance ost_exceedance(const SparseModel& model, double c);

/// Ranking weights for candidate enumeration: independent per-index
/// inclusion probabilities, given as logs of p_m and 1 - p_m.
struct ProductRanking {
  Vector log_p;
  Vector log_q;
  static ProductRanking from(const Exceedance& e);
  double log_prob(std::uint64_t mask) const;
};

struct EnumerationPolicy {
  std::size_t s_max = 0;            // 0 means M
  std::size_t k_max = 100000;
  double mass_target = 1.0 - 1e-9;  // only used when truncating
};

/// Nonempty subsets of size <= s_max. When there are at most k_max of them all
/// are returned (sorted by decreasing ranking weight if a ranking is given,
/// else by size then lexicographically). Otherwise the k_max subsets of largest
/// weight are returned, stopping once their cumulative weight reaches
/// mass_target. Ties are broken lexicographically.
CandidateSet enumerate_candidates(std::size_t ambient_dim, const EnumerationPolicy& policy,
                                  const std::optional<ProductRanking>& ranking = std::nullopt);

} // namespace selcrb::model
