#pragma once

#include "selcrb/checks/checks.hpp"

namespace selcrb::checks {

/// The scenario's model at its configured sigma, ignoring the sweep axis.
model::GlmModel setup_point_model(const experiments::ExperimentConfig& config);
model::SparseModel setup_point_model_sparse(const experiments::ExperimentConfig& config);

CheckResult check_glm_derivatives(const CheckContext& ctx);   // 1
CheckResult check_sparse_hessian(const CheckContext& ctx);    // 2
CheckResult check_mc_fim(const CheckContext& ctx);            // 3
CheckResult check_probabilities(const CheckContext& ctx);     // 4
CheckResult check_reductions(const CheckContext& ctx);        // 5
CheckResult check_glm_snr_shape(const CheckContext& ctx);     // 6
CheckResult check_glm_ordering(const CheckContext& ctx);      // 7
CheckResult check_dictionary_shape(const CheckContext& ctx);  // 8
CheckResult check_identity_closeness(const CheckContext& ctx);// 9
CheckResult check_scalar_oracle(const CheckContext& ctx);     // 10
CheckResult check_determinism(const CheckContext& ctx);       // 11

/// Sweep results cached per thread count, so 6 and 7 share one run.
const std::vector<experiments::SweepRow>& glm_snr_rows(const CheckContext& ctx);

} // namespace selcrb::checks
