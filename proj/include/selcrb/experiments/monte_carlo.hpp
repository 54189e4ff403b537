#pragma once

#include "selcrb/estimators/estimators.hpp"

#include <map>

namespace selcrb::experiments {

/// Moments of the zero-padded selected error conditioned on one selected support.
struct ConditionalMoments {
  std::size_t count = 0;
  Vector mean;        // conditional selective bias estimate
  Vector second_diag; // E[e_m^2 | support]
};

struct McRunResult {
  std::size_t trials = 0;
  std::size_t failed = 0;   // trials whose estimator threw; excluded from the moments
  std::uint64_t seed = 0;

  Matrix msse;              // E[e_S e_S^T], e_S the error zeroed off the selected support
  Matrix mse;               // E[e e^T]
  Matrix msse_se, mse_se;   // entrywise batch-mean standard errors

  double msse_trace_true = 0.0, msse_trace_true_se = 0.0; // traces over the true support
  double mse_trace_true = 0.0, mse_trace_true_se = 0.0;

  Vector selection_freq;    // per candidate
  double empty_freq = 0.0;
  double other_freq = 0.0;
  Vector marginal_freq;     // per index: fraction of trials with m selected
  Vector cond_second;       // E[(theta_hat_m - theta_m)^2 | m selected]
  Vector cond_second_se;

  /// Per selected support (keyed by mask, so iteration order is fixed).
  std::map<std::uint64_t, ConditionalMoments> by_support;
};

/// Seeded Monte-Carlo run of a selector/estimator pair. Trial t always uses
/// the stream derived from (seed, t); trials are grouped in 100 fixed batches
/// accumulated in long double and reduced in batch order, so the result is
/// bitwise identical for any thread count.
McRunResult run_mc(const model::LinearGaussianModel& model, const selection::Selector& selector,
                   const estimators::Estimator& estimator, const model::CandidateSet& candidates,
                   std::size_t trials, std::uint64_t seed, unsigned threads = 1);

} // namespace selcrb::experiments
