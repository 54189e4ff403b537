#pragma once

#include "selcrb/bounds/crb.hpp"
#include "selcrb/selection/rules.hpp"

#include <string>
#include <vector>

namespace selcrb::experiments {

enum class Family { glm2, sparse_ost };
enum class SweepAxis { none, snr, threshold, penalty, pi2 };
enum class BiasSource { zero, analytic_identity, monte_carlo };

std::string_view to_string(Family f);
std::string_view to_string(SweepAxis a);
std::string_view to_string(BiasSource b);

/// Validated experiment description. Indices here are 0-based.
struct ExperimentConfig {
  Family family = Family::sparse_ost;

  Matrix design;                       // H (N x 2) for glm2, A (L x M) for sparse-ost
  double sigma = 1.0;
  std::vector<std::size_t> support;    // true support
  Vector theta;

  std::optional<selection::SelectionRuleSpec> rule;

  /// Explicit candidate supports; empty means enumerate (sparse) or the
  /// two nested models (glm2).
  std::vector<std::vector<std::size_t>> candidates;
  model::EnumerationPolicy enumeration;

  SweepAxis axis = SweepAxis::none;
  std::vector<double> grid;
  BiasSource bias = BiasSource::zero;

  std::size_t trials = 20000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bounds::FimPolicy fim_policy = bounds::FimPolicy::error;

  std::string output;
};

} // namespace selcrb::experiments
