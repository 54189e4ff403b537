#include "selcrb/bounds/crb.hpp"

#include "selcrb/error.hpp"

#include <fmt/format.h>

namespace selcrb::bounds {

BiasModel BiasModel::zero(std::size_t num_candidates, std::size_t ambient_dim,
                          std::size_t truth_size) {
  const auto m = static_cast<Eigen::Index>(ambient_dim);
  BiasModel out;
  out.b.assign(num_candidates, Vector::Zero(m));
  out.g.assign(num_candidates, Matrix::Zero(m, static_cast<Eigen::Index>(truth_size)));
  out.source = Source::zero;
  return out;
}

bool BiasModel::is_zero() const {
  for (const auto& v : b)
    if (!v.isZero(0.0))
      return false;
  for (const auto& m : g)
    if (!m.isZero(0.0))
      return false;
  return true;
}

namespace {

void check_inputs(const selection::SelectionProbabilities& pi,
                  const model::CandidateSet& candidates, const SelectiveFim& fims,
                  const model::SupportSet& truth, const Vector& theta) {
  if (static_cast<std::size_t>(pi.pi.size()) != candidates.size() ||
      fims.per_model.size() != candidates.size())
    throw DomainError("probabilities, FIMs and candidates disagree in length");
  if (truth.ambient_dim() != candidates.ambient_dim())
    throw DomainError("true support and candidates live in different dimensions");
  if (static_cast<std::size_t>(theta.size()) != truth.size())
    throw DomainError("theta does not match the true support");
  if (fims.oracle.dim() != truth.size())
    throw DomainError("FIM dimension does not match the true support");
}

} // namespace

BoundReport selective_crb(const selection::SelectionProbabilities& pi,
                          const model::CandidateSet& candidates, const SelectiveFim& fims,
                          const BiasModel& bias, const model::SupportSet& truth,
                          const Vector& theta, const BoundOptions& options) {
  check_inputs(pi, candidates, fims, truth, theta);
  if (bias.b.size() != candidates.size() || bias.g.size() != candidates.size())
    throw DomainError("bias model does not match the candidate list");
  const std::size_t dim = truth.ambient_dim();
  const auto m = static_cast<Eigen::Index>(dim);

  BoundReport r;
  r.pi = pi;
  r.empty_mass = pi.empty;
  r.dropped_mass = pi.other;
  Matrix acc = Matrix::Zero(m, m);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double w = pi.pi(static_cast<Eigen::Index>(k));
    if (!(w > options.pi_floor)) {
      r.dropped_mass += w;
      continue;
    }
    if (!fims.per_model[k])
      throw DomainError(fmt::format("no selective FIM for candidate {}", k + 1));
    const Matrix dg = model::selection_matrix_D(candidates[k], truth) + bias.g[k];
    SymMatrix psi;
    try {
      psi = numerics::sandwich_inverse(dg, *fims.per_model[k]);
    } catch (const SingularFim& e) {
      if (options.policy == FimPolicy::error)
        throw SingularFim(e.condition(), k);
      r.indefinite_mass += w;
      r.skipped.push_back(k);
      continue;
    }
    acc += w * (psi.matrix() + bias.b[k] * bias.b[k].transpose());
  }
  r.scrb_matrix = SymMatrix::from(acc, 1e-9);
  r.min_eigenvalue = numerics::min_eigenvalue(r.scrb_matrix);
  r.mse_matrix = mse_bound(r.scrb_matrix, pi, candidates, bias, truth, theta, options.pi_floor);
  std::tie(r.marginal_msse, r.marginal_mse) =
      marginal_bounds(r.scrb_matrix, pi.p_marginal, truth, theta);
  r.msse_trace_bound = r.marginal_msse.sum();
  r.mse_trace_bound = r.marginal_mse.sum();
  for (std::size_t m_idx : truth.indices()) {
    r.msse_trace_true += r.marginal_msse(static_cast<Eigen::Index>(m_idx));
    r.mse_trace_true += r.marginal_mse(static_cast<Eigen::Index>(m_idx));
  }
  r.oracle_trace = numerics::sym_inverse(fims.oracle).trace();
  return r;
}

SymMatrix unbiased_selective_crb(const selection::SelectionProbabilities& pi,
                                 const model::CandidateSet& candidates, const SelectiveFim& fims,
                                 const model::SupportSet& truth, double pi_floor) {
  const auto m = static_cast<Eigen::Index>(truth.ambient_dim());
  Matrix acc = Matrix::Zero(m, m);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double w = pi.pi(static_cast<Eigen::Index>(k));
    if (!(w > pi_floor))
      continue;
    SymMatrix inv;
    try {
      inv = numerics::sym_inverse(*fims.per_model.at(k));
    } catch (const SingularFim& e) {
      throw SingularFim(e.condition(), k);
    }
    const Matrix d = model::selection_matrix_D(candidates[k], truth);
    acc += w * d * inv.matrix() * d.transpose();
  }
  return SymMatrix::from(acc, 1e-9);
}

Matrix mse_bound(const SymMatrix& scrb, const selection::SelectionProbabilities& pi,
                 const model::CandidateSet& candidates, const BiasModel& bias,
                 const model::SupportSet& truth, const Vector& theta, double pi_floor) {
  Matrix out = scrb.matrix();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double w = pi.pi(static_cast<Eigen::Index>(k));
    if (!(w > pi_floor))
      continue;
    const Vector t = model::padded_outside(theta, truth, candidates[k]);
    out += w * (t * t.transpose() - t * bias.b[k].transpose() - bias.b[k] * t.transpose());
  }
  if (pi.empty > 0.0) {
    const Vector t = model::zero_pad(theta, truth).values;
    out += pi.empty * t * t.transpose();
  }
  return out;
}

std::pair<Vector, Vector> marginal_bounds(const SymMatrix& scrb, const Vector& p_marginal,
                                          const model::SupportSet& truth, const Vector& theta) {
  if (static_cast<std::size_t>(p_marginal.size()) != truth.ambient_dim())
    throw DomainError("marginal probabilities do not match the ambient dimension");
  Vector msse = scrb.matrix().diagonal();
  Vector mse = msse;
  for (std::size_t l = 0; l < truth.size(); ++l) {
    const auto m = static_cast<Eigen::Index>(truth[l]);
    const double t = theta(static_cast<Eigen::Index>(l));
    mse(m) += (1.0 - p_marginal(m)) * t * t;
  }
  return {msse, mse};
}

double sparse_trace_bound(const model::SparseModel& model, double c,
                          const model::CandidateSet& candidates, const BoundOptions& options) {
  const auto pi = selection::ost_selection_prob(model, c, candidates);
  const auto& truth = model.truth();
  const Matrix a_t = model.columns(truth);
  const auto n = static_cast<Eigen::Index>(model.rows());
  const double s2 = model.sigma() * model.sigma();
  double total = 0.0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double w = pi.pi(static_cast<Eigen::Index>(k));
    if (!(w > options.pi_floor))
      continue;
    const Matrix q = sparse_q_matrix(model, c, candidates[k]);
    const Matrix f = a_t.transpose() * (Matrix::Identity(n, n) + q) * a_t;
    SymMatrix inv;
    try {
      const SymMatrix fs = SymMatrix::from(f, 1e-9);
      if (!numerics::is_positive_definite(fs))
        throw SingularFim(numerics::condition_number(fs), k);
      inv = numerics::sym_inverse(fs);
    } catch (const SingularFim& e) {
      if (options.policy == FimPolicy::error)
        throw SingularFim(e.condition(), k);
      continue;
    }
    for (std::size_t l = 0; l < truth.size(); ++l)
      if (candidates[k].contains(truth[l]))
        total += w * s2 * inv(l, l);
  }
  const model::Exceedance e = model::ost_exceedance(model, c);
  for (std::size_t l = 0; l < truth.size(); ++l) {
    const double t = model.theta()(static_cast<Eigen::Index>(l));
    total += e.q(static_cast<Eigen::Index>(truth[l])) * t * t;
  }
  return total;
}

SymMatrix sms_crb(const model::GlmModel& model, const selection::SelectionProbabilities& pi) {
  const auto& cands = model.candidates();
  for (std::size_t k = 0; k + 1 < cands.size(); ++k)
    if (!cands[k].is_subset_of(cands[k + 1]))
      throw Unsupported("SMS-CRB needs nested candidate models");
  if (static_cast<std::size_t>(pi.pi.size()) != cands.size())
    throw DomainError("selection probabilities do not match the candidate list");
  const auto m = static_cast<Eigen::Index>(model.ambient_dim());
  const double s2 = model.sigma() * model.sigma();
  Matrix acc = Matrix::Zero(m, m);
  for (std::size_t k = model.true_index(); k < cands.size(); ++k) {
    SymMatrix inv;
    try {
      inv = numerics::sym_inverse(SymMatrix::from(model.gram(cands[k]) / s2));
    } catch (const SingularFim& e) {
      throw SingularFim(e.condition(), k);
    }
    const auto& s = cands[k];
    const double w = pi.pi(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j)
        acc(static_cast<Eigen::Index>(s[i]), static_cast<Eigen::Index>(s[j])) += w * inv(i, j);
  }
  return SymMatrix::from(acc, 1e-9);
}

SymMatrix sms_crb(const model::SparseModel&, const selection::SelectionProbabilities&) {
  throw Unsupported("SMS-CRB cannot be computed for the sparse setting: candidate FIMs are "
                    "singular whenever a support exceeds the number of measurements");
}

} // namespace selcrb::bounds
