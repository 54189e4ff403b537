#include "suites.hpp"

#include <chrono>
#include <map>
#include <mutex>

namespace selcrb::checks {

namespace {

experiments::ExperimentConfig at_base(experiments::ExperimentConfig c) {
  c.axis = experiments::SweepAxis::none;
  c.grid.clear();
  return c;
}

} // namespace

model::GlmModel setup_point_model(const experiments::ExperimentConfig& config) {
  auto p = experiments::setup_point(at_base(config), 0.0);
  return std::get<model::GlmModel>(p.model);
}

model::SparseModel setup_point_model_sparse(const experiments::ExperimentConfig& config) {
  auto p = experiments::setup_point(at_base(config), 0.0);
  return std::get<model::SparseModel>(p.model);
}

const std::vector<experiments::SweepRow>& glm_snr_rows(const CheckContext& ctx) {
  static std::mutex mu;
  static std::map<unsigned, std::vector<experiments::SweepRow>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(ctx.threads);
  if (it == cache.end()) {
    auto config = glm_snr_config();
    config.threads = ctx.threads;
    it = cache.emplace(ctx.threads, experiments::sweep(config)).first;
  }
  return it->second;
}

const std::vector<CheckInfo>& registry() {
  static const std::vector<CheckInfo> all{
      {1, "two-model GIC probability derivatives vs finite differences", check_glm_derivatives, true},
      {2, "OST log-probability Hessian vs finite differences", check_sparse_hessian, true},
      {3, "Monte-Carlo selective FIM vs analytic", check_mc_fim, false},
      {4, "selection probabilities: partition, frequencies, score means", check_probabilities, true},
      {5, "exact reductions to oracle and unbiased forms", check_reductions, true},
      {6, "GLM SNR sweep: oracle invalid at low SNR, sCRB valid, convergence", check_glm_snr_shape, false},
      {7, "GLM SNR sweep: sCRB >= SMS-CRB", check_glm_ordering, false},
      {8, "dictionary SNR sweep: convergence and low-SNR validity", check_dictionary_shape, false},
      {9, "identity threshold sweep: biased sCRB matches MSL", check_identity_closeness, false},
      {10, "identity MSL per-coordinate MSE vs closed form", check_scalar_oracle, true},
      {11, "thread count does not change CSV bytes", check_determinism, false},
  };
  return all;
}

CheckResult run_check(const CheckInfo& info, const CheckContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = info.run(ctx);
  } catch (const std::exception& e) {
    r = CheckResult{};
    r.pass = false;
    r.notes.push_back(std::string("FAIL exception: ") + e.what());
  }
  r.id = info.id;
  r.title = info.title;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

} // namespace selcrb::checks
