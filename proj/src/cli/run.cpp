#include "selcrb/checks/checks.hpp"
#include "selcrb/cli/cli.hpp"
#include "selcrb/error.hpp"
#include "selcrb/experiments/sweep.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace selcrb::cli {

using experiments::ExperimentConfig;

namespace {

Json vec_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(std::isfinite(v(i)) ? Json(v(i)) : Json());
  return out;
}

Json mat_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    out.push_back(vec_json(m.row(i).transpose()));
  return out;
}

Json real(double v) { return std::isfinite(v) ? Json(v) : Json(); }

std::vector<double> points(const ExperimentConfig& c) {
  if (c.grid.empty())
    return {std::numeric_limits<double>::quiet_NaN()};
  return c.grid;
}

/// Writes the artifact to the configured path, or to `out` when there is none.
void emit(const ExperimentConfig& c, const std::string& text, std::ostream& out) {
  if (c.output.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.output, std::ios::binary);
  if (!f)
    throw ConfigError("output.path", fmt::format("cannot write {}", c.output));
  f << text;
}

std::string point_label(const ExperimentConfig& c, double v) {
  if (c.axis == experiments::SweepAxis::none)
    return "point";
  return fmt::format("{} = {:g}", to_string(c.axis), v);
}

int run_bound(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  Json doc = Json::array();
  for (double v : points(c)) {
    const auto p = experiments::setup_point(c, v);
    const auto b = experiments::compute_bounds(c, p);
    Json item = {{"axis_value", real(v)}, {"sigma", p.base().sigma()}, {"unbiased", to_json(b.unbiased)}};
    if (b.biased)
      item["biased"] = to_json(*b.biased);
    doc.push_back(std::move(item));
    err << fmt::format("{}: sigma {:.6g}, sCRB trace (true params) {:.6g}, oracle {:.6g}, pi_true {:.6g}\n",
                       point_label(c, v), p.base().sigma(), b.unbiased.mse_trace_true,
                       b.unbiased.oracle_trace, b.unbiased.pi.pi(static_cast<Eigen::Index>(p.true_candidate())));
  }
  emit(c, doc.dump(2) + "\n", out);
  return kExitOk;
}

int run_mc_cmd(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  Json doc = Json::array();
  for (double v : points(c)) {
    const auto p = experiments::setup_point(c, v);
    const auto r = experiments::run_point_mc(c, p);
    doc.push_back({{"axis_value", real(v)}, {"sigma", p.base().sigma()}, {"result", to_json(r)}});
    err << fmt::format("{}: MSE (true params) {:.6g} +- {:.2g}, MSSE {:.6g} +- {:.2g}, {} failed trials\n",
                       point_label(c, v), r.mse_trace_true, r.mse_trace_true_se, r.msse_trace_true,
                       r.msse_trace_true_se, r.failed);
  }
  emit(c, doc.dump(2) + "\n", out);
  return kExitOk;
}

int run_sweep(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  const auto rows = experiments::sweep(c);
  std::ostringstream csv;
  experiments::write_csv(csv, c.axis, rows);
  emit(c, csv.str(), out);
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      ++failed;
      err << fmt::format("warning: {}: {}\n", point_label(c, r.axis_value), r.error);
    }
  }
  err << fmt::format("{} grid points, {} failed\n", rows.size(), failed);
  return failed == rows.size() ? kExitNumerical : kExitOk;
}

int run_selftest(const Invocation& inv, std::ostream& out) {
  checks::CheckContext ctx;
  ctx.threads = inv.threads.value_or(1);
  ctx.data_dir = inv.data_dir;
  if (inv.verbosity > 0)
    ctx.log = &out;
  bool all = true;
  for (const auto& info : checks::registry()) {
    if (!info.quick)
      continue;
    const auto r = checks::run_check(info, ctx);
    all = all && r.pass;
    out << fmt::format("{} [{}] {} ({:.1f} s)\n", r.pass ? "PASS" : "FAIL", r.id, r.title, r.seconds);
    for (const auto& n : r.notes)
      out << "    " << n << '\n';
  }
  return all ? kExitOk : kExitFailure;
}

} // namespace

Json to_json(const bounds::BoundReport& r) {
  Json skipped = Json::array();
  for (auto k : r.skipped)
    skipped.push_back(k + 1);
  return {{"scrb_matrix", mat_json(r.scrb_matrix.matrix())},
          {"mse_matrix", mat_json(r.mse_matrix)},
          {"msse_trace_bound", real(r.msse_trace_bound)},
          {"mse_trace_bound", real(r.mse_trace_bound)},
          {"msse_trace_true", real(r.msse_trace_true)},
          {"mse_trace_true", real(r.mse_trace_true)},
          {"marginal_msse", vec_json(r.marginal_msse)},
          {"marginal_mse", vec_json(r.marginal_mse)},
          {"oracle_trace", real(r.oracle_trace)},
          {"sms_trace", r.sms_trace ? real(*r.sms_trace) : Json()},
          {"pi", vec_json(r.pi.pi)},
          {"p_marginal", vec_json(r.pi.p_marginal)},
          {"empty_mass", real(r.empty_mass)},
          {"dropped_mass", real(r.dropped_mass)},
          {"indefinite_mass", real(r.indefinite_mass)},
          {"skipped_candidates", skipped},
          {"min_eigenvalue", real(r.min_eigenvalue)}};
}

Json to_json(const experiments::McRunResult& r) {
  Json supports = Json::array();
  for (const auto& [mask, m] : r.by_support)
    supports.push_back({{"mask", mask}, {"count", m.count}, {"bias", vec_json(m.mean)},
                        {"second_moment", vec_json(m.second_diag)}});
  return {{"trials", r.trials},
          {"failed", r.failed},
          {"seed", r.seed},
          {"mse", mat_json(r.mse)},
          {"mse_se", mat_json(r.mse_se)},
          {"msse", mat_json(r.msse)},
          {"msse_se", mat_json(r.msse_se)},
          {"mse_trace_true", real(r.mse_trace_true)},
          {"mse_trace_true_se", real(r.mse_trace_true_se)},
          {"msse_trace_true", real(r.msse_trace_true)},
          {"msse_trace_true_se", real(r.msse_trace_true_se)},
          {"selection_freq", vec_json(r.selection_freq)},
          {"empty_freq", r.empty_freq},
          {"other_freq", r.other_freq},
          {"marginal_freq", vec_json(r.marginal_freq)},
          {"by_support", supports}};
}

ExperimentConfig resolve_config(const Invocation& inv) {
  if (inv.config_path.empty())
    throw ConfigError("--config", "required for this subcommand");
  Json doc = load_document(inv.config_path);
  for (const auto& o : inv.overrides)
    apply_override(doc, o);
  auto c = validate_config(doc, std::filesystem::path(inv.config_path).parent_path());
  if (inv.seed)
    c.seed = *inv.seed;
  if (inv.trials) {
    if (*inv.trials < 2)
      throw ConfigError("--trials", "need at least 2 trials");
    c.trials = *inv.trials;
  }
  if (inv.threads)
    c.threads = *inv.threads;
  if (!inv.out_path.empty())
    c.output = inv.out_path;
  return c;
}

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    if (inv.subcommand == Subcommand::selftest)
      return run_selftest(inv, out);
    const auto c = resolve_config(inv);
    switch (inv.subcommand) {
    case Subcommand::bound:
      return run_bound(c, out, err);
    case Subcommand::mc:
      return run_mc_cmd(c, out, err);
    default:
      return run_sweep(c, out, err);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SingularFim& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DegenerateProbability& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const InsufficientConditionedSamples& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const EstimationError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

} // namespace selcrb::cli
