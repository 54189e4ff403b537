#pragma once

#include "selcrb/experiments/config.hpp"
#include "selcrb/experiments/monte_carlo.hpp"

#include <iosfwd>
#include <memory>
#include <variant>

namespace selcrb::experiments {

/// Everything needed to evaluate one grid point.
struct PointSetup {
  std::variant<model::SparseModel, model::GlmModel> model;
  selection::SelectionRuleSpec rule;
  model::CandidateSet candidates;

  const model::LinearGaussianModel& base() const;
  const model::SparseModel* sparse() const { return std::get_if<model::SparseModel>(&model); }
  const model::GlmModel* glm() const { return std::get_if<model::GlmModel>(&model); }
  std::size_t true_candidate() const;
};

/// Applies `axis_value` (ignored for SweepAxis::none) to the base configuration.
PointSetup setup_point(const ExperimentConfig& config, double axis_value);

/// Analytic selection probabilities of the point's rule.
selection::SelectionProbabilities analytic_probabilities(const PointSetup& p);

/// Unbiased and (when a bias source is configured) biased bound reports.
struct PointBounds {
  bounds::BoundReport unbiased;
  std::optional<bounds::BoundReport> biased;
  std::optional<double> sms_trace;
};
PointBounds compute_bounds(const ExperimentConfig& config, const PointSetup& p);

/// Monte-Carlo run of the MSL estimator at the point.
McRunResult run_point_mc(const ExperimentConfig& config, const PointSetup& p);

struct SweepRow {
  double axis_value = 0.0;
  double sigma = 0.0;
  double mse_msl = 0.0, mse_msl_se = 0.0;
  double msse_msl = 0.0, msse_msl_se = 0.0;
  double scrb = 0.0, scrb_msse = 0.0;
  double scrb_biased = 0.0, scrb_biased_msse = 0.0;
  double sms_crb = 0.0;
  double oracle = 0.0;
  double pi_true = 0.0, pi_true_mc = 0.0, pi_true_mc_se = 0.0;
  double empty_freq = 0.0;
  double dropped_mass = 0.0, indefinite_mass = 0.0;
  std::size_t failed_trials = 0;
  std::string error;
};

/// One row per grid point; a failing point gets NaNs and a message in `error`
/// and the sweep moves on. Every point reuses the configured seed.
std::vector<SweepRow> sweep(const ExperimentConfig& config);
SweepRow evaluate_point(const ExperimentConfig& config, double axis_value);

/// Header plus rows; reals printed with 17 significant digits.
void write_csv(std::ostream& os, SweepAxis axis, const std::vector<SweepRow>& rows);
std::vector<std::string> csv_columns(SweepAxis axis);

/// sigma giving the two-model GIC probability pi_2 = target at the current theta.
double sigma_for_pi2(const model::GlmModel& model, const selection::Penalty& penalty, double target);

} // namespace selcrb::experiments
