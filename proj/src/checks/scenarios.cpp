#include "selcrb/checks/checks.hpp"

#include "selcrb/cli/cli.hpp"

namespace selcrb::checks {

using cli::Json;

experiments::ExperimentConfig glm_snr_config() {
  const Json doc = {
      {"family", "glm2"},
      {"model",
       {{"design",
         {{"generator", "columns"},
          {"rows", 1500},
          {"columns", Json::array({"ones", {{"uniform", {0.0, 10.0}}}})},
          {"seed", 7}}},
        {"sigma", 1.0},
        {"support", {1, 2}},
        {"theta", {4.0, -3.0}}}},
      {"rule", {{"kind", "gic"}, {"penalty", "aic"}}},
      {"sweep", {{"axis", "snr"}, {"grid", {{"from", -40.0}, {"to", -10.0}, {"points", 12}}}}},
      {"mc", {{"trials", 20000}, {"seed", 2024}}}};
  return cli::validate_config(doc);
}

experiments::ExperimentConfig dictionary_snr_config(const Matrix& dictionary) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < dictionary.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < dictionary.cols(); ++j)
      r.push_back(dictionary(i, j));
    rows.push_back(r);
  }
  const Json doc = {
      {"family", "sparse-ost"},
      {"model", {{"design", rows}, {"sigma", 1.0}, {"support", {2, 9, 11}}, {"theta", {1.0, 1.0, 1.0}}}},
      {"rule", {{"kind", "ost"}, {"threshold", 0.95}}},
      {"sweep", {{"axis", "snr"}, {"grid", {{"from", 0.0}, {"to", 25.0}, {"points", 11}}}}},
      {"mc", {{"trials", 20000}, {"seed", 2024}, {"fim_policy", "drop"}}}};
  return cli::validate_config(doc);
}

experiments::ExperimentConfig identity_threshold_config(int scenario) {
  const double theta = scenario == 1 ? 1.0 : 0.5;
  const double sigma = scenario == 1 ? 0.4 : 1.2;
  const Json doc = {
      {"family", "sparse-ost"},
      {"model",
       {{"design", {{"generator", "identity"}, {"size", 8}}},
        {"sigma", sigma},
        {"support", {1, 2, 3}},
        {"theta", {theta, theta, theta}}}},
      {"rule", {{"kind", "ost"}, {"threshold", 1.0}}},
      {"sweep",
       {{"axis", "threshold"},
        {"grid", {{"from", 0.2}, {"to", 2.0}, {"points", 10}}},
        {"bias", "analytic-identity"}}},
      {"mc", {{"trials", 200000}, {"seed", 2024}}}};
  return cli::validate_config(doc);
}

Matrix load_dictionary(const CheckContext& ctx) {
  return cli::read_csv_matrix(ctx.data_dir / "dict_7x14.csv");
}

} // namespace selcrb::checks
