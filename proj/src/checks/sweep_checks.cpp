// Shape checks on full sweeps of the three simulation scenarios, and the
// thread-count determinism check.
#include "suites.hpp"

#include "recorder.hpp"
#include "selcrb/numerics/linalg.hpp"

#include <cmath>
#include <sstream>

namespace selcrb::checks {

using detail::Recorder;
using experiments::SweepRow;

namespace {

bool row_ok(const SweepRow& r) { return r.error.empty(); }

void log_rows(Recorder& rec, const std::vector<SweepRow>& rows) {
  for (const auto& r : rows)
    rec.log("  x={:8.3f} mse={:.6g}+-{:.2g} scrb={:.6g} biased={:.6g} sms={:.6g} oracle={:.6g} "
            "pi_true={:.4f} indefinite={:.3g} failed={} {}",
            r.axis_value, r.mse_msl, r.mse_msl_se, r.scrb, r.scrb_biased, r.sms_crb, r.oracle,
            r.pi_true, r.indefinite_mass, r.failed_trials, r.error);
}

std::string csv_of(const experiments::ExperimentConfig& c) {
  std::ostringstream os;
  experiments::write_csv(os, c.axis, experiments::sweep(c));
  return os.str();
}

} // namespace

CheckResult check_glm_snr_shape(const CheckContext& ctx) {
  CheckResult res;
  Recorder rec(res, ctx);
  const auto& rows = glm_snr_rows(ctx);
  log_rows(rec, rows);
  for (const auto& r : rows)
    if (!row_ok(r)) {
      rec.expect(false, fmt::format("point {:.2f} dB: {}", r.axis_value, r.error));
      return res;
    }

  // Low-SNR half of the grid: the oracle must be violated where the sCRB still holds.
  bool found = false;
  std::size_t oracle_violations = 0;
  for (std::size_t i = 0; i < rows.size() / 2; ++i) {
    const auto& r = rows[i];
    const bool below_oracle = r.mse_msl < r.oracle - 3 * r.mse_msl_se;
    const bool above_scrb = r.mse_msl >= r.scrb - 3 * r.mse_msl_se;
    oracle_violations += below_oracle;
    rec.log("  {:.2f} dB: mse {} oracle-3se, mse {} scrb-3se", r.axis_value,
            below_oracle ? "<" : ">=", above_scrb ? ">=" : "<");
    found = found || (below_oracle && above_scrb);
  }
  rec.expect(oracle_violations > 0,
             fmt::format("oracle CRB violated by the MSL at {} low-SNR points", oracle_violations));
  rec.expect(found, "some low-SNR point has MSE < oracle - 3se and MSE >= sCRB - 3se");

  const auto& hi = rows.back();
  const double e_bound = std::abs(hi.scrb - hi.oracle) / hi.oracle;
  const double e_mse = std::abs(hi.mse_msl - hi.oracle) / hi.oracle;
  rec.expect(e_bound < 0.01, fmt::format("highest SNR: |sCRB - oracle|/oracle = {:.2e} (< 1%)", e_bound));
  rec.expect(e_mse < 0.05, fmt::format("highest SNR: |MSE - oracle|/oracle = {:.2e} (< 5%)", e_mse));
  return res;
}

CheckResult check_glm_ordering(const CheckContext& ctx) {
  CheckResult res;
  Recorder rec(res, ctx);
  const auto& rows = glm_snr_rows(ctx);
  int bad = 0;
  double min_ratio = INFINITY;
  for (const auto& r : rows) {
    if (!row_ok(r) || !(r.scrb >= r.sms_crb))
      ++bad;
    min_ratio = std::min(min_ratio, r.scrb / r.sms_crb);
  }
  rec.expect(bad == 0, fmt::format("sCRB >= SMS-CRB at all {} points (min ratio {:.4f})", rows.size(), min_ratio));
  return res;
}

CheckResult check_dictionary_shape(const CheckContext& ctx) {
  CheckResult res;
  Recorder rec(res, ctx);
  auto config = dictionary_snr_config(load_dictionary(ctx));
  config.threads = ctx.threads;
  const auto rows = experiments::sweep(config);
  log_rows(rec, rows);

  const SweepRow* conv = nullptr;
  for (const auto& r : rows)
    if (row_ok(r) && r.pi_true > 0.999) {
      conv = &r;
      break;
    }
  if (rec.expect(conv != nullptr, "some grid point has pi_true > 0.999")) {
    const double e = std::abs(conv->scrb - conv->oracle) / conv->oracle;
    rec.expect(e < 0.01, fmt::format("{:.1f} dB (pi_true = {:.5f}): |sCRB - oracle|/oracle = {:.2e} (< 1%)",
                                     conv->axis_value, conv->pi_true, e));
  }

  const auto& low = rows.front();
  if (!row_ok(low)) {
    rec.expect(false, fmt::format("lowest SNR {:.1f} dB: {}", low.axis_value, low.error));
    return res;
  }
  const auto p = experiments::setup_point(config, low.axis_value);
  const auto b = experiments::compute_bounds(config, p);
  const auto& truth = p.base().truth();
  Matrix mse_true(truth.size(), truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (std::size_t j = 0; j < truth.size(); ++j)
      mse_true(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          b.unbiased.mse_matrix(static_cast<Eigen::Index>(truth[i]), static_cast<Eigen::Index>(truth[j]));
  const Matrix diff = mse_true - bounds::oracle_crb(p.base()).matrix();
  const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (diff + diff.transpose())).eigenvalues().minCoeff();
  rec.expect(min_eig >= -1e-12 * diff.cwiseAbs().maxCoeff(),
             fmt::format("{:.1f} dB: sCRB - oracle min eigenvalue {:.3e} (indefinite J_k mass {:.3g} dropped)",
                         low.axis_value, min_eig, b.unbiased.indefinite_mass));
  rec.expect(low.mse_msl >= low.scrb - 3 * low.mse_msl_se,
             fmt::format("{:.1f} dB: MSE {:.5g} +- {:.2g} >= sCRB {:.5g} - 3se ({} trials failed)",
                         low.axis_value, low.mse_msl, low.mse_msl_se, low.scrb, low.failed_trials));
  return res;
}

CheckResult check_identity_closeness(const CheckContext& ctx) {
  CheckResult res;
  Recorder rec(res, ctx);
  for (int scenario : {1, 2}) {
    auto config = identity_threshold_config(scenario);
    config.threads = ctx.threads;
    const auto rows = experiments::sweep(config);
    rec.log("scenario {}", scenario);
    log_rows(rec, rows);
    int above = 0, far = 0;
    double worst = 0.0;
    bool unbiased_above = false, unbiased_below = false;
    for (const auto& r : rows) {
      if (!row_ok(r)) {
        rec.expect(false, fmt::format("scenario {} c = {:.2f}: {}", scenario, r.axis_value, r.error));
        return res;
      }
      above += r.scrb_biased > r.mse_msl + 3 * r.mse_msl_se;
      const double e = std::abs(r.scrb_biased - r.mse_msl) / r.mse_msl;
      worst = std::max(worst, e);
      far += e >= 0.03;
      unbiased_above = unbiased_above || r.scrb > r.mse_msl;
      unbiased_below = unbiased_below || r.scrb < r.mse_msl;
    }
    rec.expect(above == 0 && far == 0,
               fmt::format("scenario {}: biased sCRB <= MSE + 3se and within 3% at all {} points "
                           "(worst {:.2e})",
                           scenario, rows.size(), worst));
    if (scenario == 1)
      rec.expect(unbiased_above, "scenario 1: unbiased sCRB exceeds the MSL MSE somewhere");
    else
      rec.expect(unbiased_below, "scenario 2: unbiased sCRB falls below the MSL MSE somewhere");
  }
  return res;
}

CheckResult check_determinism(const CheckContext& ctx) {
  CheckResult res;
  Recorder rec(res, ctx);
  const unsigned other = std::max(3u, ctx.threads + 1);
  std::vector<std::pair<std::string, experiments::ExperimentConfig>> configs{
      {"dictionary SNR sweep", dictionary_snr_config(load_dictionary(ctx))},
      {"identity threshold sweep", identity_threshold_config(1)},
      {"glm SNR sweep", glm_snr_config()}};
  // Shorter runs; the batch layout does not depend on the trial count.
  configs[1].second.trials = 20000;
  configs[2].second.trials = 4000;
  for (auto& [name, c] : configs) {
    c.threads = 1;
    const auto one = csv_of(c);
    c.threads = other;
    const auto many = csv_of(c);
    rec.expect(one == many, fmt::format("{}: 1 vs {} threads, {} bytes, identical", name, other, one.size()));
  }
  return res;
}

} // namespace selcrb::checks
