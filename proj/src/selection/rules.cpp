#include "selcrb/selection/rules.hpp"

#include "selcrb/error.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

namespace selcrb::selection {

Penalty Penalty::constant(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw DomainError("GIC penalty must be positive");
  return {Kind::constant, tau};
}

double Penalty::tau(std::size_t n, std::size_t) const {
  switch (kind) {
  case Kind::aic:
    return 2.0;
  case Kind::mdl:
    return std::log(static_cast<double>(n));
  default:
    return value;
  }
}

std::string Penalty::name() const {
  switch (kind) {
  case Kind::aic:
    return "aic";
  case Kind::mdl:
    return "mdl";
  default:
    return fmt::format("{}", value);
  }
}

SelectionRuleSpec SelectionRuleSpec::ost(double c) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw DomainError("OST threshold must be positive");
  return SelectionRuleSpec(Ost{c});
}

SelectionRuleSpec SelectionRuleSpec::gic(Penalty p) {
  if (p.kind == Penalty::Kind::constant)
    p = Penalty::constant(p.value);
  return SelectionRuleSpec(Gic{p});
}

SelectionRuleSpec SelectionRuleSpec::fixed(std::size_t k, std::size_t num_candidates) {
  if (k >= num_candidates)
    throw DomainError("fixed rule: candidate index out of range");
  Vector p = Vector::Zero(static_cast<Eigen::Index>(num_candidates));
  p(static_cast<Eigen::Index>(k)) = 1.0;
  return SelectionRuleSpec(DataIndependent{p});
}

SelectionRuleSpec SelectionRuleSpec::random(Vector probs) {
  if (probs.size() == 0 || (probs.array() < 0.0).any() || !probs.allFinite() ||
      std::abs(probs.sum() - 1.0) > 1e-12)
    throw DomainError("random rule: probabilities must be nonnegative and sum to 1");
  return SelectionRuleSpec(DataIndependent{std::move(probs)});
}

double SelectionRuleSpec::threshold() const {
  if (!is_ost())
    throw DomainError("rule has no threshold");
  return std::get<Ost>(kind_).c;
}

const Penalty& SelectionRuleSpec::penalty() const {
  if (!is_gic())
    throw DomainError("rule has no penalty");
  return std::get<Gic>(kind_).penalty;
}

const Vector& SelectionRuleSpec::probs() const {
  if (!is_data_independent())
    throw DomainError("rule is data dependent");
  return std::get<DataIndependent>(kind_).probs;
}

bool SelectionRuleSpec::analytic_prob(bool two_model_glm) const {
  return !is_gic() || two_model_glm;
}

std::string SelectionRuleSpec::describe() const {
  if (is_ost())
    return fmt::format("ost(c={})", threshold());
  if (is_gic())
    return fmt::format("gic({})", penalty().name());
  return "data-independent";
}

namespace {

class OstSelector final : public Selector {
public:
  explicit OstSelector(double c) : c_(c) {}
  std::uint64_t select(Draw& d) const override {
    std::uint64_t mask = 0;
    for (Eigen::Index m = 0; m < d.corr.size(); ++m)
      if (std::abs(d.corr(m)) > c_)
        mask |= std::uint64_t{1} << m;
    return mask;
  }

private:
  double c_;
};

// Scores from the sufficient statistics: ||P_perp x||^2 = x^T x - c_k^T G_k^{-1} c_k
// with c_k = H_k^T x.
class GicSelector final : public Selector {
public:
  GicSelector(const model::LinearGaussianModel& model, const model::CandidateSet& cands,
              const Penalty& penalty)
      : cands_(cands), inv_var_(1.0 / (model.sigma() * model.sigma())) {
    order_.resize(cands.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return cands[a].size() < cands[b].size();
    });
    for (std::size_t k = 0; k < cands.size(); ++k) {
      const Matrix g = model.gram(cands[k]);
      Eigen::LDLT<Matrix> ldlt(g);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw EstimationError(fmt::format("GIC: H^T H is singular for candidate {}", k + 1));
      ldlt_.push_back(std::move(ldlt));
      const std::size_t s = cands[k].size();
      pen_.push_back(penalty.tau(model.rows(), s) * static_cast<double>(s));
    }
  }

  Vector scores(const Vector& corr, double xx) const {
    Vector out(static_cast<Eigen::Index>(cands_.size()));
    for (std::size_t k = 0; k < cands_.size(); ++k) {
      const auto& s = cands_[k];
      Vector c(static_cast<Eigen::Index>(s.size()));
      for (std::size_t i = 0; i < s.size(); ++i)
        c(static_cast<Eigen::Index>(i)) = corr(static_cast<Eigen::Index>(s[i]));
      const double proj = c.dot(ldlt_[k].solve(c));
      out(static_cast<Eigen::Index>(k)) = (xx - proj) * inv_var_ + pen_[k];
    }
    return out;
  }

  std::size_t argmin(const Vector& scores) const {
    std::size_t best = order_.front();
    for (std::size_t k : order_)
      if (scores(static_cast<Eigen::Index>(k)) < scores(static_cast<Eigen::Index>(best)))
        best = k;
    return best;
  }

  std::uint64_t select(Draw& d) const override {
    return cands_[argmin(scores(d.corr, d.xx))].mask();
  }

private:
  model::CandidateSet cands_;
  double inv_var_;
  std::vector<std::size_t> order_;
  std::vector<Eigen::LDLT<Matrix>> ldlt_;
  std::vector<double> pen_;
};

class DataIndependentSelector final : public Selector {
public:
  DataIndependentSelector(const model::CandidateSet& cands, const Vector& probs)
      : cands_(cands), cdf_(probs.size()) {
    if (static_cast<std::size_t>(probs.size()) != cands.size())
      throw DomainError("data-independent rule: one probability per candidate required");
    double s = 0.0;
    for (Eigen::Index k = 0; k < probs.size(); ++k)
      cdf_(k) = (s += probs(k));
  }
  std::uint64_t select(Draw& d) const override {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(d.rng);
    Eigen::Index k = 0;
    while (k + 1 < cdf_.size() && !(u < cdf_(k)))
      ++k;
    return cands_[static_cast<std::size_t>(k)].mask();
  }

private:
  model::CandidateSet cands_;
  Vector cdf_;
};

} // namespace

std::unique_ptr<Selector> make_selector(const SelectionRuleSpec& rule,
                                        const model::LinearGaussianModel& model,
                                        const model::CandidateSet& candidates) {
  if (candidates.ambient_dim() != model.ambient_dim())
    throw DomainError("candidate dimension does not match the model");
  if (rule.is_ost())
    return std::make_unique<OstSelector>(rule.threshold());
  if (rule.is_gic())
    return std::make_unique<GicSelector>(model, candidates, rule.penalty());
  return std::make_unique<DataIndependentSelector>(candidates, rule.probs());
}

std::optional<model::SupportSet> ost_select(const Vector& x, const Matrix& a, double c) {
  if (x.size() != a.rows())
    throw DomainError("ost_select: observation length does not match the dictionary");
  if (!(c > 0.0))
    throw DomainError("OST threshold must be positive");
  const Vector corr = a.transpose() * x;
  std::vector<std::size_t> idx;
  for (Eigen::Index m = 0; m < corr.size(); ++m)
    if (std::abs(corr(m)) > c)
      idx.push_back(static_cast<std::size_t>(m));
  if (idx.empty())
    return std::nullopt;
  return model::SupportSet(std::move(idx), static_cast<std::size_t>(a.cols()));
}

Vector gic_scores(const Vector& x, const model::GlmModel& model, const Penalty& penalty) {
  if (static_cast<std::size_t>(x.size()) != model.rows())
    throw DomainError("gic_scores: observation length does not match H");
  const GicSelector sel(model, model.candidates(), penalty);
  return sel.scores(model.design().transpose() * x, x.squaredNorm());
}

std::size_t gic_select(const Vector& x, const model::GlmModel& model, const Penalty& penalty) {
  const GicSelector sel(model, model.candidates(), penalty);
  return sel.argmin(sel.scores(model.design().transpose() * x, x.squaredNorm()));
}

} // namespace selcrb::selection
