#pragma once

#include "selcrb/model/linear_model.hpp"
#include "selcrb/selection/sampler.hpp"

#include <memory>
#include <string>
#include <variant>

namespace selcrb::selection {

/// GIC penalty tau(N, s): AIC (2), MDL (log N) or a constant.
struct Penalty {
  enum class Kind { aic, mdl, constant };
  Kind kind = Kind::aic;
  double value = 2.0; // used by Kind::constant

  static Penalty aic() { return {Kind::aic, 2.0}; }
  static Penalty mdl() { return {Kind::mdl, 0.0}; }
  static Penalty constant(double tau);

  double tau(std::size_t n, std::size_t model_size) const;
  std::string name() const;
};

struct Ost {
  double c;
};
struct Gic {
  Penalty penalty;
};
/// Picks candidate k with probability probs[k] regardless of the data;
/// Fixed(k) is the unit vector.
struct DataIndependent {
  Vector probs;
};

class SelectionRuleSpec {
public:
  using Kind = std::variant<Ost, Gic, DataIndependent>;

  static SelectionRuleSpec ost(double c);
  static SelectionRuleSpec gic(Penalty p);
  static SelectionRuleSpec fixed(std::size_t k, std::size_t num_candidates);
  static SelectionRuleSpec random(Vector probs);

  const Kind& kind() const noexcept { return kind_; }
  bool is_ost() const noexcept { return std::holds_alternative<Ost>(kind_); }
  bool is_gic() const noexcept { return std::holds_alternative<Gic>(kind_); }
  bool is_data_independent() const noexcept {
    return std::holds_alternative<DataIndependent>(kind_);
  }
  double threshold() const;     // OST only
  const Penalty& penalty() const; // GIC only
  const Vector& probs() const;   // data-independent only

  /// Whether closed-form selection probabilities exist: always for OST (the
  /// product form, exact only for orthogonal dictionaries) and data-independent
  /// rules, and for GIC only in the two-model case.
  bool analytic_prob(bool two_model_glm) const;

  std::string describe() const;

private:
  explicit SelectionRuleSpec(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// Runtime form of a rule, applied to one Monte-Carlo draw.
class Selector {
public:
  virtual ~Selector() = default;
  /// Bit mask of the selected support; 0 is the empty selection.
  virtual std::uint64_t select(Draw& d) const = 0;
};

/// `candidates` must be the GLM candidates for GIC and fixes the index
/// meaning for data-independent rules.
std::unique_ptr<Selector> make_selector(const SelectionRuleSpec& rule,
                                        const model::LinearGaussianModel& model,
                                        const model::CandidateSet& candidates);

/// m is selected iff |a_m^T x| > c. nullopt is the empty selection.
std::optional<model::SupportSet> ost_select(const Vector& x, const Matrix& a, double c);

/// (1/sigma^2) ||P_perp x||^2 + tau(N, |Lambda_k|) |Lambda_k| for every candidate.
Vector gic_scores(const Vector& x, const model::GlmModel& model, const Penalty& penalty);

/// argmin of gic_scores; ties go to the smaller model, then the smaller index.
std::size_t gic_select(const Vector& x, const model::GlmModel& model, const Penalty& penalty);

} // namespace selcrb::selection
