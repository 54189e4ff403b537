#include "selcrb/bounds/fim.hpp"

#include "selcrb/error.hpp"
#include "selcrb/numerics/special.hpp"
#include "selcrb/parallel.hpp"

#include <cmath>

namespace selcrb::bounds {

using numerics::std_normal_pdf;

namespace {

constexpr double kDenominatorFloor = 1e-300;

void check_conditioning(const SymMatrix& j, std::size_t k) {
  const double cond = numerics::condition_number(j);
  if (!(cond <= numerics::kSingularConditionThreshold))
    throw SingularFim(cond, k);
}

} // namespace

SymMatrix oracle_fim(const model::LinearGaussianModel& model) {
  const double s2 = model.sigma() * model.sigma();
  return SymMatrix::from(model.gram(model.truth()) / s2);
}

SymMatrix oracle_crb(const model::LinearGaussianModel& model) {
  return numerics::sym_inverse(oracle_fim(model));
}

Vector ost_q_weights(const model::SparseModel& model, double c, const model::SupportSet& candidate) {
  const auto m_count = static_cast<Eigen::Index>(model.ambient_dim());
  Vector q(m_count);
  for (Eigen::Index m = 0; m < m_count; ++m) {
    const auto [a, b] = model::alpha_beta(model, static_cast<std::size_t>(m), c);
    const double fa = std_normal_pdf(a), fb = std_normal_pdf(b);
    const double dphi = fa - fb;
    if (candidate.contains(static_cast<std::size_t>(m))) {
      const double p = numerics::std_normal_outside(b, a);
      if (!(p >= kDenominatorFloor))
        throw DegenerateProbability(static_cast<std::size_t>(m), p);
      q(m) = (a * fa - b * fb) / p - (dphi / p) * (dphi / p);
    } else {
      const double r = numerics::std_normal_interval(b, a);
      if (!(r >= kDenominatorFloor))
        throw DegenerateProbability(static_cast<std::size_t>(m), r);
      q(m) = (-a * fa + b * fb) / r - (dphi / r) * (dphi / r);
    }
  }
  return q;
}

Matrix sparse_q_matrix(const model::SparseModel& model, double c,
                       const model::SupportSet& candidate) {
  const Matrix& a = model.dictionary();
  return a * ost_q_weights(model, c, candidate).asDiagonal() * a.transpose();
}

SymMatrix sparse_selective_fim(const model::SparseModel& model, double c,
                               const model::SupportSet& candidate) {
  // A_Lambda^T Q_k A_Lambda = (A^T A_Lambda)^T diag(q) (A^T A_Lambda)
  Matrix cross(static_cast<Eigen::Index>(model.ambient_dim()),
               static_cast<Eigen::Index>(model.truth().size()));
  for (std::size_t l = 0; l < model.truth().size(); ++l)
    cross.col(static_cast<Eigen::Index>(l)) =
        model.gram().col(static_cast<Eigen::Index>(model.truth()[l]));
  const Vector q = ost_q_weights(model, c, candidate);
  const double s2 = model.sigma() * model.sigma();
  return SymMatrix::from(model.gram(model.truth()) / s2 +
                         cross.transpose() * q.asDiagonal() * cross / s2, 1e-9);
}

SelectiveFim sparse_selective_fims(const model::SparseModel& model, double c,
                                   const model::CandidateSet& candidates,
                                   const selection::SelectionProbabilities& pi, double pi_floor) {
  if (static_cast<std::size_t>(pi.pi.size()) != candidates.size())
    throw DomainError("selection probabilities do not match the candidate list");
  SelectiveFim out{{}, oracle_fim(model), SelectiveFim::Method::analytic_sparse};
  out.per_model.resize(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k)
    if (pi.pi(static_cast<Eigen::Index>(k)) > pi_floor)
      out.per_model[k] = sparse_selective_fim(model, c, candidates[k]);
  return out;
}

SelectiveFim glm2_selective_fims(const model::GlmModel& model, const selection::Penalty& penalty) {
  const auto d = selection::glm2_logprob_derivs(model, penalty);
  SelectiveFim out{{}, oracle_fim(model), SelectiveFim::Method::analytic_glm2};
  const double extra[2] = {d.d2log_pi1, d.d2log_pi2};
  for (std::size_t k = 0; k < 2; ++k) {
    SymMatrix j = out.oracle;
    j.set(1, 1, j(1, 1) + extra[k]);
    check_conditioning(j, k);
    out.per_model.emplace_back(std::move(j));
  }
  return out;
}

SelectiveFim data_independent_fims(const model::LinearGaussianModel& model,
                                   const model::CandidateSet& candidates) {
  SelectiveFim out{{}, oracle_fim(model), SelectiveFim::Method::oracle};
  out.per_model.assign(candidates.size(), out.oracle);
  return out;
}

McFim mc_selective_fim(const model::LinearGaussianModel& model, const selection::Selector& selector,
                       const model::CandidateSet& candidates, std::size_t k, std::size_t trials,
                       std::uint64_t seed, unsigned threads) {
  if (k >= candidates.size())
    throw DomainError("mc_selective_fim: candidate index out of range");
  if (trials == 0)
    throw DomainError("mc_selective_fim: trials must be positive");
  const auto& truth = model.truth();
  const auto n = static_cast<Eigen::Index>(truth.size());
  const double s2 = model.sigma() * model.sigma();
  const std::uint64_t target = candidates[k].mask();

  // Conditioned scores are kept per batch and reduced in batch order.
  const auto batches = make_batches(trials);
  std::vector<std::vector<Vector>> scores(batches.size());
  const selection::Sampler sampler(model);
  for_each_batch(batches, threads, [&](const BatchRange& r) {
    selection::Draw d = sampler.make_draw();
    auto& out = scores[r.index];
    for (std::size_t t = r.begin; t < r.end; ++t) {
      sampler.draw(seed, t, d);
      if (selector.select(d) != target)
        continue;
      Vector s(n);
      for (Eigen::Index l = 0; l < n; ++l) {
        const auto m = static_cast<Eigen::Index>(truth[static_cast<std::size_t>(l)]);
        s(l) = (d.corr(m) - model.mean_correlation()(m)) / s2;
      }
      out.push_back(std::move(s));
    }
  });

  std::size_t count = 0;
  Eigen::Matrix<long double, Eigen::Dynamic, 1> sum =
      Eigen::Matrix<long double, Eigen::Dynamic, 1>::Zero(n);
  for (const auto& b : scores)
    for (const auto& s : b) {
      sum += s.cast<long double>();
      ++count;
    }
  if (count < kMinConditionedSamples)
    throw InsufficientConditionedSamples(count, kMinConditionedSamples);
  const double cnt = static_cast<double>(count);
  const Vector mean = (sum / static_cast<long double>(count)).cast<double>();

  // Sample covariance and the spread of the centred products for its standard error.
  using LdMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  LdMatrix m1 = LdMatrix::Zero(n, n), m2 = LdMatrix::Zero(n, n);
  for (const auto& b : scores)
    for (const auto& s : b) {
      const Vector c = s - mean;
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          const long double z = static_cast<long double>(c(i)) * c(j);
          m1(i, j) += z;
          m2(i, j) += z * z;
        }
    }
  McFim out;
  out.conditioned = count;
  out.trials = trials;
  out.score_mean = mean;
  Matrix cov(n, n), se(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double mu = static_cast<double>(m1(i, j) / count);
      const double var = std::max(0.0, static_cast<double>(m2(i, j) / count) - mu * mu);
      cov(i, j) = static_cast<double>(m1(i, j) / (count - 1));
      se(i, j) = std::sqrt(var / cnt);
    }
  out.fim = SymMatrix::from(cov, 1e-9);
  out.fim_se = se;
  out.score_mean_se = (cov.diagonal() / cnt).cwiseSqrt();
  return out;
}

} // namespace selcrb::bounds
