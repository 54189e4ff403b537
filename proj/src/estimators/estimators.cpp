#include "selcrb/estimators/estimators.hpp"

#include "selcrb/error.hpp"
#include "selcrb/numerics/special.hpp"
#include "selcrb/parallel.hpp"

#include <cmath>
#include <fmt/format.h>

namespace selcrb::estimators {

using numerics::std_normal_pdf;

namespace {

Vector least_squares(const Matrix& gram, const Vector& rhs, const std::string& what) {
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw EstimationError(fmt::format("{}: singular Gram matrix", what));
  const Vector d = ldlt.vectorD();
  if (!(d.minCoeff() > 1e-12 * d.maxCoeff()))
    throw EstimationError(fmt::format("{}: singular Gram matrix", what));
  return ldlt.solve(rhs);
}

Vector gather(const Vector& v, const model::SupportSet& s) {
  Vector out(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(s[i]));
  return out;
}

} // namespace

CoherentEstimate msl_glm(const Vector& x, const model::GlmModel& model, std::size_t k) {
  if (k >= model.candidates().size())
    throw DomainError("msl_glm: candidate index out of range");
  if (static_cast<std::size_t>(x.size()) != model.rows())
    throw DomainError("msl_glm: observation length does not match H");
  const auto& s = model.candidates()[k];
  const Matrix h = model.h(k);
  const Vector coef =
      least_squares(h.transpose() * h, h.transpose() * x, fmt::format("candidate {}", k + 1));
  return {model::zero_pad(coef, s).values, s};
}

CoherentEstimate msl_sparse(const Vector& x, const model::SparseModel& model,
                            const std::optional<model::SupportSet>& selected) {
  if (static_cast<std::size_t>(x.size()) != model.rows())
    throw DomainError("msl_sparse: observation length does not match the dictionary");
  if (!selected)
    return {Vector::Zero(static_cast<Eigen::Index>(model.ambient_dim())), std::nullopt};
  const Matrix a = model.columns(*selected);
  const Vector coef = least_squares(a.transpose() * a, a.transpose() * x,
                                    fmt::format("support {}", selected->to_string()));
  return {model::zero_pad(coef, *selected).values, selected};
}

MslEstimator::MslEstimator(const model::LinearGaussianModel& model)
    : gram_(model.gram()), rows_(model.rows()) {}

void MslEstimator::estimate(const selection::Draw& d, std::uint64_t mask, Vector& out) const {
  out.setZero(gram_.rows());
  if (mask == 0)
    return;
  const auto s = model::SupportSet::from_mask(mask, static_cast<std::size_t>(gram_.rows()));
  if (s.size() > rows_)
    throw EstimationError(fmt::format("support {} has more columns than measurements",
                                      s.to_string()));
  const auto n = static_cast<Eigen::Index>(s.size());
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      g(i, j) = gram_(static_cast<Eigen::Index>(s[static_cast<std::size_t>(i)]),
                      static_cast<Eigen::Index>(s[static_cast<std::size_t>(j)]));
  const Vector coef = least_squares(g, gather(d.corr, s), fmt::format("support {}", s.to_string()));
  for (std::size_t i = 0; i < s.size(); ++i)
    out(static_cast<Eigen::Index>(s[i])) = coef(static_cast<Eigen::Index>(i));
}

BiasCorrectedIdentityMsl::BiasCorrectedIdentityMsl(const model::SparseModel& reference, double c) {
  if (!reference.is_identity())
    throw Unsupported("the analytic bias correction needs A = I");
  const auto full = model::SupportSet::full(reference.ambient_dim());
  shift_.resize(static_cast<Eigen::Index>(reference.ambient_dim()));
  for (std::size_t m = 0; m < reference.ambient_dim(); ++m)
    shift_(static_cast<Eigen::Index>(m)) = msl_bias_identity(reference, c, m, full);
}

void BiasCorrectedIdentityMsl::estimate(const selection::Draw& d, std::uint64_t mask,
                                        Vector& out) const {
  out.setZero(shift_.size());
  for (Eigen::Index m = 0; m < shift_.size(); ++m)
    if ((mask >> m) & 1u)
      out(m) = d.corr(m) - shift_(m);
}

void FunctionEstimator::estimate(const selection::Draw& d, std::uint64_t mask, Vector& out) const {
  std::optional<model::SupportSet> s;
  if (mask != 0)
    s = model::SupportSet::from_mask(mask, dim_);
  CoherentEstimate e = fn_(d.x, s);
  if (static_cast<std::size_t>(e.theta_hat.size()) != dim_)
    throw EstimationError("plug-in estimator returned the wrong length");
  for (std::size_t m = 0; m < dim_; ++m)
    if (!((mask >> m) & 1u) && e.theta_hat(static_cast<Eigen::Index>(m)) != 0.0)
      throw EstimationError("plug-in estimator is not coherent with the selected support");
  out = std::move(e.theta_hat);
}

namespace {

struct TruncatedTerms {
  double alpha, beta, p;
};

TruncatedTerms truncated_terms(const model::SparseModel& model, double c, std::size_t m) {
  if (!model.is_identity())
    throw Unsupported("closed-form MSL bias needs A = I");
  const auto [a, b] = model::alpha_beta(model, m, c);
  const double p = numerics::std_normal_outside(b, a);
  if (!(p >= 1e-300))
    throw DegenerateProbability(m, p);
  return {a, b, p};
}

} // namespace

double msl_bias_identity(const model::SparseModel& model, double c, std::size_t m,
                         const model::SupportSet& candidate) {
  const TruncatedTerms t = truncated_terms(model, c, m);
  if (!candidate.contains(m))
    return 0.0;
  return -model.sigma() * (std_normal_pdf(t.beta) - std_normal_pdf(t.alpha)) / t.p;
}

double msl_bias_gradient_identity(const model::SparseModel& model, double c, std::size_t m,
                                  const model::SupportSet& candidate) {
  const TruncatedTerms t = truncated_terms(model, c, m);
  if (!candidate.contains(m) || !model.truth().contains(m))
    return 0.0;
  const double b = msl_bias_identity(model, c, m, candidate);
  const double s = model.sigma();
  return -(t.beta * std_normal_pdf(t.beta) - t.alpha * std_normal_pdf(t.alpha)) / t.p -
         b * b / (s * s);
}

bounds::BiasModel identity_msl_bias(const model::SparseModel& model, double c,
                                    const model::CandidateSet& candidates) {
  const std::size_t dim = model.ambient_dim();
  const auto& truth = model.truth();
  // Per-index quantities do not depend on k beyond membership.
  const auto full = model::SupportSet::full(dim);
  Vector b_all(static_cast<Eigen::Index>(dim)), g_all(static_cast<Eigen::Index>(dim));
  for (std::size_t m = 0; m < dim; ++m) {
    b_all(static_cast<Eigen::Index>(m)) = msl_bias_identity(model, c, m, full);
    g_all(static_cast<Eigen::Index>(m)) = msl_bias_gradient_identity(model, c, m, full);
  }
  auto out = bounds::BiasModel::zero(candidates.size(), dim, truth.size());
  out.source = bounds::BiasModel::Source::analytic_identity_ost;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    for (std::size_t m : candidates[k].indices())
      out.b[k](static_cast<Eigen::Index>(m)) = b_all(static_cast<Eigen::Index>(m));
    for (std::size_t l = 0; l < truth.size(); ++l)
      if (candidates[k].contains(truth[l]))
        out.g[k](static_cast<Eigen::Index>(truth[l]), static_cast<Eigen::Index>(l)) =
            g_all(static_cast<Eigen::Index>(truth[l]));
  }
  return out;
}

McBias mc_selective_bias(const model::LinearGaussianModel& model, const selection::Selector& selector,
                         const Estimator& estimator, const model::CandidateSet& candidates,
                         std::size_t k, std::size_t trials, std::uint64_t seed, double step,
                         unsigned threads) {
  if (k >= candidates.size())
    throw DomainError("mc_selective_bias: candidate index out of range");
  if (!(step > 0.0))
    throw DomainError("mc_selective_bias: step must be positive");
  const auto& truth = model.truth();
  const auto m_dim = static_cast<Eigen::Index>(model.ambient_dim());
  const std::uint64_t target = candidates[k].mask();
  const Vector theta_pad = model.theta_padded();
  const Matrix x_truth = model.columns(truth);

  // Stencil point 0 is theta itself; 2l+1 and 2l+2 shift theta_l by +step and -step.
  const std::size_t points = 1 + 2 * truth.size();
  std::vector<Vector> means(points), thetas(points);
  for (std::size_t p = 0; p < points; ++p) {
    Vector th = model.theta();
    if (p > 0)
      th((p - 1) / 2) += (p % 2 == 1 ? step : -step);
    thetas[p] = model::zero_pad(th, truth).values;
    means[p] = x_truth * th;
  }

  using LdVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  struct Acc {
    std::vector<LdVector> sum, sum_sq;
    std::vector<std::size_t> count;
  };
  const auto batches = make_batches(trials);
  std::vector<Acc> per_batch(batches.size());
  const selection::Sampler sampler(model);
  for_each_batch(batches, threads, [&](const BatchRange& r) {
    Acc acc{std::vector<LdVector>(points, LdVector::Zero(m_dim)),
            std::vector<LdVector>(points, LdVector::Zero(m_dim)), std::vector<std::size_t>(points)};
    selection::Draw d = sampler.make_draw();
    Vector est;
    for (std::size_t t = r.begin; t < r.end; ++t)
      for (std::size_t p = 0; p < points; ++p) {
        sampler.draw(seed, t, means[p], d);
        if (selector.select(d) != target)
          continue;
        estimator.estimate(d, target, est);
        Vector e = est - thetas[p];
        for (Eigen::Index m = 0; m < m_dim; ++m)
          if (!((target >> m) & 1u))
            e(m) = 0.0;
        acc.sum[p] += e.cast<long double>();
        acc.sum_sq[p] += e.cast<long double>().cwiseProduct(e.cast<long double>());
        ++acc.count[p];
      }
    per_batch[r.index] = std::move(acc);
  });

  Acc total{std::vector<LdVector>(points, LdVector::Zero(m_dim)),
            std::vector<LdVector>(points, LdVector::Zero(m_dim)), std::vector<std::size_t>(points)};
  for (const auto& a : per_batch)
    for (std::size_t p = 0; p < points; ++p) {
      total.sum[p] += a.sum[p];
      total.sum_sq[p] += a.sum_sq[p];
      total.count[p] += a.count[p];
    }
  for (std::size_t p = 0; p < points; ++p)
    if (total.count[p] < bounds::kMinConditionedSamples)
      throw InsufficientConditionedSamples(total.count[p], bounds::kMinConditionedSamples);

  auto mean_at = [&](std::size_t p) {
    return Vector((total.sum[p] / static_cast<long double>(total.count[p])).cast<double>());
  };
  McBias out;
  out.conditioned = total.count[0];
  out.b = mean_at(0);
  const double n0 = static_cast<double>(total.count[0]);
  const Vector second = (total.sum_sq[0] / static_cast<long double>(total.count[0])).cast<double>();
  out.b_se = ((second - out.b.cwiseProduct(out.b)).cwiseMax(0.0) / n0).cwiseSqrt();
  out.g = Matrix::Zero(m_dim, static_cast<Eigen::Index>(truth.size()));
  for (std::size_t l = 0; l < truth.size(); ++l)
    out.g.col(static_cast<Eigen::Index>(l)) = (mean_at(2 * l + 1) - mean_at(2 * l + 2)) / (2.0 * step);
  return out;
}

} // namespace selcrb::estimators
