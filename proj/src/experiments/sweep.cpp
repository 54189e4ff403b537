#include "selcrb/experiments/sweep.hpp"

#include "selcrb/error.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <ostream>

namespace selcrb::experiments {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

model::SupportSet make_support(const std::vector<std::size_t>& idx, std::size_t dim) {
  return model::SupportSet(idx, dim);
}

model::CandidateSet explicit_candidates(const ExperimentConfig& c, std::size_t dim) {
  std::vector<model::SupportSet> models;
  for (const auto& s : c.candidates)
    models.push_back(make_support(s, dim));
  return model::CandidateSet(std::move(models), dim);
}

} // namespace

std::string_view to_string(Family f) { return f == Family::glm2 ? "glm2" : "sparse-ost"; }

std::string_view to_string(SweepAxis a) {
  switch (a) {
  case SweepAxis::snr:
    return "snr";
  case SweepAxis::threshold:
    return "threshold";
  case SweepAxis::penalty:
    return "penalty";
  case SweepAxis::pi2:
    return "pi2";
  default:
    return "none";
  }
}

std::string_view to_string(BiasSource b) {
  switch (b) {
  case BiasSource::analytic_identity:
    return "analytic-identity";
  case BiasSource::monte_carlo:
    return "monte-carlo";
  default:
    return "zero";
  }
}

const model::LinearGaussianModel& PointSetup::base() const {
  return std::visit([](const auto& m) -> const model::LinearGaussianModel& { return m; }, model);
}

std::size_t PointSetup::true_candidate() const { return candidates.require(base().truth()); }

double sigma_for_pi2(const model::GlmModel& model, const selection::Penalty& penalty,
                     double target) {
  auto pi2_at = [&](double log_sigma) {
    const auto m = model.with_sigma(std::exp(log_sigma));
    return selection::glm2_selection_prob(m, penalty).pi(1);
  };
  // pi_2 falls from 1 towards its null value 2(1 - Phi(sqrt(gamma))) as sigma grows.
  double lo = std::log(model.sigma()) - 10.0, hi = std::log(model.sigma()) + 10.0;
  const double p_lo = pi2_at(lo), p_hi = pi2_at(hi);
  if (!(target < p_lo && target > p_hi))
    throw DomainError(fmt::format("pi2 = {} is outside the attainable range ({}, {})", target,
                                  p_hi, p_lo));
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      [&](double ls) { return pi2_at(ls) - target; }, lo, hi, p_lo - target, p_hi - target,
      boost::math::tools::eps_tolerance<double>(50), iters);
  return std::exp(0.5 * (r.first + r.second));
}

PointSetup setup_point(const ExperimentConfig& config, double v) {
  if (!config.rule)
    throw DomainError("configuration has no selection rule");
  selection::SelectionRuleSpec rule = *config.rule;
  const std::size_t dim = static_cast<std::size_t>(config.design.cols());
  const auto truth = make_support(config.support, dim);
  const SweepAxis axis = config.axis;

  if (axis == SweepAxis::threshold) {
    if (!rule.is_ost())
      throw DomainError("threshold sweep needs the OST rule");
    rule = selection::SelectionRuleSpec::ost(v);
  } else if (axis == SweepAxis::penalty) {
    if (!rule.is_gic())
      throw DomainError("penalty sweep needs the GIC rule");
    rule = selection::SelectionRuleSpec::gic(selection::Penalty::constant(v));
  }

  if (config.family == Family::glm2) {
    model::CandidateSet cands =
        config.candidates.empty() ? model::CandidateSet::nested(dim) : explicit_candidates(config, dim);
    const std::size_t kt = cands.require(truth);
    model::GlmModel m(config.design, config.sigma, cands, kt, config.theta);
    if (axis == SweepAxis::snr)
      m = m.with_sigma(m.sigma_for_snr(v));
    else if (axis == SweepAxis::pi2) {
      if (!rule.is_gic())
        throw DomainError("pi2 sweep needs the GIC rule");
      m = m.with_sigma(sigma_for_pi2(m, rule.penalty(), v));
    }
    return PointSetup{std::move(m), rule, std::move(cands)};
  }

  if (axis == SweepAxis::pi2)
    throw DomainError("pi2 sweep is only defined for the glm2 family");
  model::SparseModel m(config.design, config.sigma, truth, config.theta);
  if (axis == SweepAxis::snr)
    m = m.with_sigma(m.sigma_for_snr(v));
  if (!rule.is_ost() && config.candidates.empty())
    throw DomainError("sparse family needs explicit candidates unless the rule is OST");
  model::CandidateSet cands = [&] {
    if (!config.candidates.empty())
      return explicit_candidates(config, dim);
    return model::enumerate_candidates(
        dim, config.enumeration,
        model::ProductRanking::from(model::ost_exceedance(m, rule.threshold())));
  }();
  return PointSetup{std::move(m), rule, std::move(cands)};
}

selection::SelectionProbabilities analytic_probabilities(const PointSetup& p) {
  if (p.rule.is_data_independent()) {
    selection::SelectionProbabilities out;
    out.pi = p.rule.probs();
    if (static_cast<std::size_t>(out.pi.size()) != p.candidates.size())
      throw DomainError("data-independent rule: one probability per candidate required");
    out.p_marginal = Vector::Zero(static_cast<Eigen::Index>(p.candidates.ambient_dim()));
    for (std::size_t k = 0; k < p.candidates.size(); ++k)
      for (std::size_t m : p.candidates[k].indices())
        out.p_marginal(static_cast<Eigen::Index>(m)) += out.pi(static_cast<Eigen::Index>(k));
    return out;
  }
  if (p.rule.is_ost()) {
    if (!p.sparse())
      throw DomainError("OST probabilities need a sparse model");
    return selection::ost_selection_prob(*p.sparse(), p.rule.threshold(), p.candidates);
  }
  if (!p.glm() || !p.glm()->is_two_model())
    throw Unsupported("analytic GIC probabilities exist only for the two-model case");
  return selection::glm2_selection_prob(*p.glm(), p.rule.penalty());
}

PointBounds compute_bounds(const ExperimentConfig& config, const PointSetup& p) {
  const auto pi = analytic_probabilities(p);
  const bounds::BoundOptions opts{1e-12, config.fim_policy};
  bounds::SelectiveFim fims = [&] {
    if (p.rule.is_data_independent())
      return bounds::data_independent_fims(p.base(), p.candidates);
    if (p.rule.is_ost())
      return bounds::sparse_selective_fims(*p.sparse(), p.rule.threshold(), p.candidates, pi,
                                           opts.pi_floor);
    return bounds::glm2_selective_fims(*p.glm(), p.rule.penalty());
  }();
  const auto& base = p.base();
  const auto zero = bounds::BiasModel::zero(p.candidates.size(), base.ambient_dim(),
                                            base.truth().size());
  PointBounds out{bounds::selective_crb(pi, p.candidates, fims, zero, base.truth(), base.theta(), opts),
                  std::nullopt, std::nullopt};

  if (config.bias == BiasSource::analytic_identity) {
    if (!p.sparse() || !p.rule.is_ost())
      throw DomainError("analytic bias needs the sparse family with OST");
    const auto bias = estimators::identity_msl_bias(*p.sparse(), p.rule.threshold(), p.candidates);
    out.biased = bounds::selective_crb(pi, p.candidates, fims, bias, base.truth(), base.theta(), opts);
  } else if (config.bias == BiasSource::monte_carlo) {
    // Candidates too rare to give enough conditioned draws keep a zero bias.
    auto bias = bounds::BiasModel::zero(p.candidates.size(), base.ambient_dim(), base.truth().size());
    bias.source = bounds::BiasModel::Source::monte_carlo;
    const auto selector = selection::make_selector(p.rule, base, p.candidates);
    const estimators::MslEstimator msl(base);
    for (std::size_t k = 0; k < p.candidates.size(); ++k) {
      const double w = pi.pi(static_cast<Eigen::Index>(k));
      if (w * static_cast<double>(config.trials) < 4.0 * bounds::kMinConditionedSamples)
        continue;
      const auto mb = estimators::mc_selective_bias(base, *selector, msl, p.candidates, k,
                                                    config.trials, config.seed, 1e-2, config.threads);
      bias.b[k] = mb.b;
      bias.g[k] = mb.g;
    }
    out.biased = bounds::selective_crb(pi, p.candidates, fims, bias, base.truth(), base.theta(), opts);
  }

  if (const auto* g = p.glm(); g && p.rule.is_gic())
    out.sms_trace = bounds::sms_crb(*g, pi).trace();
  out.unbiased.sms_trace = out.sms_trace;
  return out;
}

McRunResult run_point_mc(const ExperimentConfig& config, const PointSetup& p) {
  const auto selector = selection::make_selector(p.rule, p.base(), p.candidates);
  const estimators::MslEstimator msl(p.base());
  return run_mc(p.base(), *selector, msl, p.candidates, config.trials, config.seed, config.threads);
}

SweepRow evaluate_point(const ExperimentConfig& config, double v) {
  SweepRow row;
  row.axis_value = v;
  row.sigma = kNaN;
  try {
    const PointSetup p = setup_point(config, v);
    row.sigma = p.base().sigma();
    const PointBounds b = compute_bounds(config, p);
    const McRunResult mc = run_point_mc(config, p);
    const std::size_t kt = p.true_candidate();
    row.mse_msl = mc.mse_trace_true;
    row.mse_msl_se = mc.mse_trace_true_se;
    row.msse_msl = mc.msse_trace_true;
    row.msse_msl_se = mc.msse_trace_true_se;
    row.scrb = b.unbiased.mse_trace_true;
    row.scrb_msse = b.unbiased.msse_trace_true;
    row.scrb_biased = b.biased ? b.biased->mse_trace_true : kNaN;
    row.scrb_biased_msse = b.biased ? b.biased->msse_trace_true : kNaN;
    row.sms_crb = b.sms_trace ? *b.sms_trace : kNaN;
    row.oracle = b.unbiased.oracle_trace;
    row.pi_true = b.unbiased.pi.pi(static_cast<Eigen::Index>(kt));
    row.pi_true_mc = mc.selection_freq(static_cast<Eigen::Index>(kt));
    row.pi_true_mc_se =
        std::sqrt(row.pi_true_mc * (1.0 - row.pi_true_mc) / static_cast<double>(mc.trials));
    row.empty_freq = mc.empty_freq;
    row.dropped_mass = b.unbiased.dropped_mass;
    row.indefinite_mass = b.unbiased.indefinite_mass;
    row.failed_trials = mc.failed;
  } catch (const Error& e) {
    const double s = row.sigma;
    row = SweepRow{};
    row.axis_value = v;
    row.sigma = s;
    for (double* f : {&row.mse_msl, &row.mse_msl_se, &row.msse_msl, &row.msse_msl_se, &row.scrb,
                      &row.scrb_msse, &row.scrb_biased, &row.scrb_biased_msse, &row.sms_crb,
                      &row.oracle, &row.pi_true, &row.pi_true_mc, &row.pi_true_mc_se,
                      &row.empty_freq, &row.dropped_mass, &row.indefinite_mass})
      *f = kNaN;
    row.error = e.what();
  }
  return row;
}

std::vector<SweepRow> sweep(const ExperimentConfig& config) {
  std::vector<SweepRow> rows;
  if (config.axis == SweepAxis::none || config.grid.empty()) {
    rows.push_back(evaluate_point(config, kNaN));
    return rows;
  }
  for (double v : config.grid)
    rows.push_back(evaluate_point(config, v));
  return rows;
}

std::vector<std::string> csv_columns(SweepAxis axis) {
  return {std::string(to_string(axis)), "sigma", "mse_msl", "mse_msl_se", "msse_msl", "msse_msl_se",
          "scrb", "scrb_msse", "scrb_biased", "scrb_biased_msse", "sms_crb", "oracle", "pi_true",
          "pi_true_mc", "pi_true_mc_se", "empty_freq", "dropped_mass", "indefinite_mass",
          "failed_trials", "error"};
}

namespace {

std::string real(double v) {
  if (std::isnan(v))
    return "nan";
  return fmt::format("{:.17g}", v);
}

// Messages may contain commas or quotes.
std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"')
      out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

} // namespace

void write_csv(std::ostream& os, SweepAxis axis, const std::vector<SweepRow>& rows) {
  const auto cols = csv_columns(axis);
  for (std::size_t i = 0; i < cols.size(); ++i)
    os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : rows) {
    for (double v : {r.axis_value, r.sigma, r.mse_msl, r.mse_msl_se, r.msse_msl, r.msse_msl_se,
                     r.scrb, r.scrb_msse, r.scrb_biased, r.scrb_biased_msse, r.sms_crb, r.oracle,
                     r.pi_true, r.pi_true_mc, r.pi_true_mc_se, r.empty_freq, r.dropped_mass,
                     r.indefinite_mass})
      os << real(v) << ',';
    os << r.failed_trials << ',' << quoted(r.error) << '\n';
  }
}

} // namespace selcrb::experiments
