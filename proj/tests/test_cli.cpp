#include "selcrb/checks/checks.hpp"
#include "selcrb/cli/cli.hpp"
#include "selcrb/error.hpp"

#include <doctest.h>
#include <fstream>
#include <sstream>

using namespace selcrb;
using namespace selcrb::cli;

namespace {

const std::filesystem::path kRoot = SELCRB_SOURCE_DIR;

Json minimal() {
  return Json::parse(R"({
    "family": "sparse-ost",
    "model": {"design": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "sigma": 0.5,
              "support": [1, 3], "theta": [1.0, -0.5]},
    "rule": {"kind": "ost", "threshold": 0.8}
  })");
}

std::string config_error_path(const Json& doc) {
  try {
    validate_config(doc);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<accepted>";
}

} // namespace

TEST_CASE("minimal config is accepted with defaults") {
  const auto c = validate_config(minimal());
  CHECK(c.family == experiments::Family::sparse_ost);
  CHECK(c.support == std::vector<std::size_t>{0, 2});
  CHECK(c.trials == 20000);
  CHECK(c.seed == 1);
  CHECK(c.axis == experiments::SweepAxis::none);
  CHECK(c.rule->threshold() == 0.8);
  CHECK(c.fim_policy == bounds::FimPolicy::error);
}

TEST_CASE("schema violations name the field") {
  auto d = minimal();
  d["model"]["sigma"] = -1.0;
  CHECK(config_error_path(d) == "model.sigma");
  d = minimal();
  d["model"]["colour"] = 1;
  CHECK(config_error_path(d) == "model.colour");
  d = minimal();
  d["extra"] = 1;
  CHECK(config_error_path(d) == "extra");
  d = minimal();
  d["model"]["support"] = {3, 1};
  CHECK(config_error_path(d) == "model.support[1]");
  d = minimal();
  d["model"]["theta"] = {1.0};
  CHECK(config_error_path(d) == "model.theta");
  d = minimal();
  d["sweep"] = {{"axis", "snr"}};
  CHECK(config_error_path(d) == "sweep.grid");
  d = minimal();
  d["rule"]["penalty"] = "aic";
  CHECK(config_error_path(d) == "rule.penalty");
  d = minimal();
  d["model"]["design"] = {{2, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  CHECK(config_error_path(d) == "model");
}

TEST_CASE("grid of length one is a degenerate sweep") {
  auto d = minimal();
  d["sweep"] = {{"axis", "threshold"}, {"grid", {0.7}}};
  const auto c = validate_config(d);
  CHECK(c.grid == std::vector<double>{0.7});
  d["sweep"]["grid"] = {{"from", 1.0}, {"to", 2.0}, {"points", 3}};
  CHECK(validate_config(d).grid == std::vector<double>{1.0, 1.5, 2.0});
}

TEST_CASE("serialize then validate is the identity") {
  for (const char* name : {"glm_snr.json", "glm_penalty_0db.json", "dictionary_snr.json",
                           "identity_scenario2.json"}) {
    INFO(name);
    const auto c = validate_config(load_document(kRoot / "configs" / name), kRoot / "configs");
    const Json once = serialize_config(c);
    const Json twice = serialize_config(validate_config(once));
    CHECK(once == twice);
  }
  auto d = minimal();
  d["rule"] = {{"kind", "random"}, {"probs", {0.25, 0.75}}};
  d["candidates"] = Json::array({{1, 3}, {1}});
  const Json once = serialize_config(validate_config(d));
  CHECK(once == serialize_config(validate_config(once)));
}

TEST_CASE("shipped configs describe the acceptance scenarios") {
  auto same = [](const std::string& file, experiments::ExperimentConfig built) {
    auto c = validate_config(load_document(kRoot / "configs" / file), kRoot / "configs");
    c.output.clear();
    return serialize_config(c) == serialize_config(built);
  };
  CHECK(same("glm_snr.json", checks::glm_snr_config()));
  checks::CheckContext ctx;
  ctx.data_dir = kRoot / "data";
  CHECK(same("dictionary_snr.json", checks::dictionary_snr_config(checks::load_dictionary(ctx))));
  CHECK(same("identity_scenario1.json", checks::identity_threshold_config(1)));
  CHECK(same("identity_scenario2.json", checks::identity_threshold_config(2)));
}

TEST_CASE("overrides use dotted paths and JSON values") {
  auto d = minimal();
  apply_override(d, "model.sigma=0.25");
  apply_override(d, "sweep.axis=threshold");
  apply_override(d, "sweep.grid=[0.5,1]");
  const auto c = validate_config(d);
  CHECK(c.sigma == 0.25);
  CHECK(c.grid.size() == 2);
  CHECK_THROWS_AS(apply_override(d, "no-equals-sign"), ConfigError);
  CHECK_THROWS_AS(apply_override(d, "model.sigma.x=1"), ConfigError);
}

TEST_CASE("designs from CSV files and generators") {
  const auto dict = read_csv_matrix(kRoot / "data" / "dict_7x14.csv");
  CHECK(dict.rows() == 7);
  CHECK(dict.cols() == 14);
  for (Eigen::Index j = 0; j < 14; ++j)
    CHECK(dict.col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
  auto d = minimal();
  d["model"]["design"] = {{"generator", "gaussian"}, {"rows", 6}, {"cols", 3}, {"seed", 4}};
  const auto c = validate_config(d);
  CHECK(c.design.rows() == 6);
  CHECK(c.design.col(1).norm() == doctest::Approx(1.0));
  d["model"]["design"] = "does-not-exist.csv";
  CHECK(config_error_path(d) == "model.design");
}

TEST_CASE("run: exit codes and deterministic CSV") {
  const auto dir = std::filesystem::temp_directory_path() / "selcrb_cli_test";
  std::filesystem::create_directories(dir);
  auto d = minimal();
  d["sweep"] = {{"axis", "threshold"}, {"grid", {0.6, 1.2}}};
  d["mc"] = {{"trials", 500}};
  {
    std::ofstream(dir / "c.json") << d.dump();
  }
  Invocation inv;
  inv.subcommand = Subcommand::sweep;
  inv.config_path = (dir / "c.json").string();
  std::ostringstream out1, out2, err;
  CHECK(run(inv, out1, err) == kExitOk);
  inv.threads = 3;
  CHECK(run(inv, out2, err) == kExitOk);
  CHECK(out1.str() == out2.str());
  CHECK(out1.str().rfind("threshold,sigma,", 0) == 0);

  inv.overrides = {"model.sigma=-2"};
  std::ostringstream e2;
  CHECK(run(inv, out1, e2) == kExitConfig);
  CHECK(e2.str().find("model.sigma") != std::string::npos);

  // Indefinite selective FIMs under the error policy.
  Invocation bad;
  bad.subcommand = Subcommand::bound;
  bad.config_path = (kRoot / "configs" / "dictionary_snr.json").string();
  bad.overrides = {"sweep.axis=none", "sweep.grid=[]", "model.sigma=1.5", "mc.fim_policy=error"};
  std::ostringstream e3;
  CHECK(run(bad, out1, e3) == kExitNumerical);
  CHECK(e3.str().find("indefinite") != std::string::npos);
  std::filesystem::remove_all(dir);
}
