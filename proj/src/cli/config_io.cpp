#include "selcrb/cli/cli.hpp"

#include "selcrb/error.hpp"
#include "selcrb/model/linear_model.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace selcrb::cli {

using experiments::BiasSource;
using experiments::ExperimentConfig;
using experiments::Family;
using experiments::SweepAxis;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path, msg);
}

void only_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object())
    fail(path, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, _] : obj.items())
    if (!allowed.contains(k))
      fail(join(path, k), "unknown key");
}

double get_real(const Json& v, const std::string& path) {
  if (!v.is_number())
    fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x))
    fail(path, "must be finite");
  return x;
}

double get_positive(const Json& v, const std::string& path) {
  const double x = get_real(v, path);
  if (!(x > 0.0))
    fail(path, "must be positive");
  return x;
}

std::uint64_t get_count(const Json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    fail(path, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const Json& v, const std::string& path) {
  if (!v.is_string())
    fail(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_reals(const Json& v, const std::string& path) {
  if (!v.is_array())
    fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(get_real(v[i], fmt::format("{}[{}]", path, i)));
  return out;
}

/// 1-based indices in [1, dim], strictly increasing; returned 0-based.
std::vector<std::size_t> get_support(const Json& v, const std::string& path, std::size_t dim) {
  if (!v.is_array())
    fail(path, "expected an array of 1-based indices");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto p = fmt::format("{}[{}]", path, i);
    const auto m = get_count(v[i], p);
    if (m < 1 || m > dim)
      fail(p, fmt::format("index {} outside 1..{}", m, dim));
    if (!out.empty() && m - 1 <= out.back())
      fail(p, "indices must be strictly increasing");
    out.push_back(m - 1);
  }
  return out;
}

Matrix design_from_rows(const Json& v, const std::string& path) {
  if (v.empty() || !v[0].is_array() || v[0].empty())
    fail(path, "expected a non-empty array of rows");
  const std::size_t cols = v[0].size();
  Matrix a(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto row = get_reals(v[i], fmt::format("{}[{}]", path, i));
    if (row.size() != cols)
      fail(fmt::format("{}[{}]", path, i), "ragged row");
    for (std::size_t j = 0; j < cols; ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return a;
}

Matrix generate_design(const Json& v, const std::string& path) {
  const auto kind = get_string(v.value("generator", Json()), join(path, "generator"));
  if (kind == "identity") {
    only_keys(v, path, {"generator", "size"});
    const auto n = get_count(v.value("size", Json()), join(path, "size"));
    if (n == 0)
      fail(join(path, "size"), "must be positive");
    return Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  }
  if (kind == "gaussian") {
    // i.i.d. N(0,1) entries, columns scaled to unit norm.
    only_keys(v, path, {"generator", "rows", "cols", "seed"});
    const auto l = get_count(v.value("rows", Json()), join(path, "rows"));
    const auto m = get_count(v.value("cols", Json()), join(path, "cols"));
    if (l == 0 || m == 0)
      fail(path, "rows and cols must be positive");
    std::mt19937_64 rng(get_count(v.value("seed", Json(1)), join(path, "seed")));
    std::normal_distribution<double> normal;
    Matrix a(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m));
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      for (Eigen::Index i = 0; i < a.rows(); ++i)
        a(i, j) = normal(rng);
      a.col(j).normalize();
    }
    return a;
  }
  if (kind == "columns") {
    // Each column is "ones" or {"uniform": [lo, hi]}; uniform columns draw
    // from one stream in column order.
    only_keys(v, path, {"generator", "rows", "columns", "seed"});
    const auto n = get_count(v.value("rows", Json()), join(path, "rows"));
    const Json& cols = v.value("columns", Json());
    if (n == 0)
      fail(join(path, "rows"), "must be positive");
    if (!cols.is_array() || cols.empty())
      fail(join(path, "columns"), "expected a non-empty array");
    std::mt19937_64 rng(get_count(v.value("seed", Json(1)), join(path, "seed")));
    Matrix h(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const auto p = fmt::format("{}.columns[{}]", path, j);
      const auto jj = static_cast<Eigen::Index>(j);
      if (cols[j] == "ones") {
        h.col(jj).setOnes();
      } else if (cols[j].is_object() && cols[j].contains("uniform")) {
        only_keys(cols[j], p, {"uniform"});
        const auto r = get_reals(cols[j]["uniform"], join(p, "uniform"));
        if (r.size() != 2 || !(r[0] < r[1]))
          fail(join(p, "uniform"), "expected [low, high] with low < high");
        std::uniform_real_distribution<double> u(r[0], r[1]);
        for (Eigen::Index i = 0; i < h.rows(); ++i)
          h(i, jj) = u(rng);
      } else {
        fail(p, "expected \"ones\" or {\"uniform\": [low, high]}");
      }
    }
    return h;
  }
  fail(join(path, "generator"), "expected identity, gaussian or columns");
}

Matrix parse_design(const Json& v, const std::string& path, const std::filesystem::path& base) {
  if (v.is_array())
    return design_from_rows(v, path);
  if (v.is_string()) {
    std::filesystem::path p = v.get<std::string>();
    if (p.is_relative() && !base.empty())
      p = base / p;
    try {
      return read_csv_matrix(p);
    } catch (const ConfigError& e) {
      fail(path, e.what());
    }
  }
  if (v.is_object())
    return generate_design(v, path);
  fail(path, "expected inline rows, a CSV path or a generator object");
}

selection::Penalty parse_penalty(const Json& v, const std::string& path) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "aic")
      return selection::Penalty::aic();
    if (s == "mdl")
      return selection::Penalty::mdl();
    fail(path, "expected aic, mdl or a positive number");
  }
  return selection::Penalty::constant(get_positive(v, path));
}

Json penalty_json(const selection::Penalty& p) {
  switch (p.kind) {
  case selection::Penalty::Kind::aic:
    return "aic";
  case selection::Penalty::Kind::mdl:
    return "mdl";
  default:
    return p.value;
  }
}

template <class E>
E parse_enum(const Json& v, const std::string& path,
             std::initializer_list<std::pair<const char*, E>> table) {
  const auto s = get_string(v, path);
  std::string names;
  for (const auto& [name, e] : table) {
    if (s == name)
      return e;
    names += names.empty() ? name : std::string(", ") + name;
  }
  fail(path, fmt::format("expected one of {}", names));
}

Json rows_json(const Matrix& a) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      r.push_back(a(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Json one_based(const std::vector<std::size_t>& s) {
  Json out = Json::array();
  for (auto m : s)
    out.push_back(m + 1);
  return out;
}

} // namespace

Matrix read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(path.string(), "cannot open CSV file");
  std::vector<std::vector<double>> rows;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos)
          throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError(path.string(), fmt::format("line {}: '{}' is not a real", lineno, cell));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ConfigError(path.string(), fmt::format("line {}: ragged row", lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw ConfigError(path.string(), "empty CSV file");
  Matrix a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return a;
}

ExperimentConfig validate_config(const Json& doc, const std::filesystem::path& base_dir) {
  only_keys(doc, "", {"family", "model", "rule", "candidates", "sweep", "mc", "output"});
  ExperimentConfig c;

  if (!doc.contains("family"))
    fail("family", "required");
  c.family = parse_enum<Family>(doc["family"], "family",
                                {{"glm2", Family::glm2}, {"sparse-ost", Family::sparse_ost}});

  // model
  if (!doc.contains("model"))
    fail("model", "required");
  const Json& m = doc["model"];
  only_keys(m, "model", {"design", "sigma", "snr_db", "support", "theta"});
  for (const char* k : {"design", "support", "theta"})
    if (!m.contains(k))
      fail(join("model", k), "required");
  c.design = parse_design(m["design"], "model.design", base_dir);
  if (!c.design.allFinite())
    fail("model.design", "entries must be finite");
  const auto dim = static_cast<std::size_t>(c.design.cols());
  if (dim > 64)
    fail("model.design", "at most 64 columns are supported");
  if (m.contains("sigma") == m.contains("snr_db"))
    fail("model.sigma", "give exactly one of sigma and snr_db");
  if (m.contains("sigma"))
    c.sigma = get_positive(m["sigma"], "model.sigma");
  c.support = get_support(m["support"], "model.support", dim);
  if (c.support.empty())
    fail("model.support", "must not be empty");
  const auto theta = get_reals(m["theta"], "model.theta");
  if (theta.size() != c.support.size())
    fail("model.theta", fmt::format("expected {} values, one per support index", c.support.size()));
  c.theta = Eigen::Map<const Vector>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  if (c.family == Family::glm2 && dim != 2)
    fail("model.design", "glm2 needs exactly two columns");
  if (m.contains("snr_db")) {
    // SNR = 10 log10(||X theta||^2 / (N sigma^2)) fixes sigma.
    const double snr = get_real(m["snr_db"], "model.snr_db");
    Vector padded = Vector::Zero(c.design.cols());
    for (std::size_t i = 0; i < c.support.size(); ++i)
      padded(static_cast<Eigen::Index>(c.support[i])) = c.theta(static_cast<Eigen::Index>(i));
    const double power = (c.design * padded).squaredNorm() / static_cast<double>(c.design.rows());
    if (!(power > 0.0))
      fail("model.snr_db", "undefined for a zero mean signal");
    c.sigma = std::sqrt(power / std::pow(10.0, snr / 10.0));
  }

  // candidates
  const Json cand = doc.value("candidates", Json::object());
  if (cand.is_array()) {
    Json copy = doc;
    copy["candidates"] = Json{{"list", cand}};
    return validate_config(copy, base_dir);
  }
  only_keys(cand, "candidates", {"list", "s_max", "k_max", "mass_target"});
  if (cand.contains("list")) {
    const Json& list = cand["list"];
    if (!list.is_array() || list.empty())
      fail("candidates.list", "expected a non-empty array of supports");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const auto p = fmt::format("candidates.list[{}]", k);
      auto s = get_support(list[k], p, dim);
      if (s.empty())
        fail(p, "the empty support is reported separately, not listed");
      for (const auto& prev : c.candidates)
        if (prev == s)
          fail(p, "duplicate candidate");
      c.candidates.push_back(std::move(s));
    }
  }
  if (cand.contains("s_max"))
    c.enumeration.s_max = get_count(cand["s_max"], "candidates.s_max");
  if (cand.contains("k_max")) {
    c.enumeration.k_max = get_count(cand["k_max"], "candidates.k_max");
    if (c.enumeration.k_max == 0)
      fail("candidates.k_max", "must be positive");
  }
  if (cand.contains("mass_target")) {
    c.enumeration.mass_target = get_real(cand["mass_target"], "candidates.mass_target");
    if (!(c.enumeration.mass_target > 0.0 && c.enumeration.mass_target <= 1.0))
      fail("candidates.mass_target", "must lie in (0, 1]");
  }
  if (!c.candidates.empty()) {
    bool has_truth = false;
    for (const auto& s : c.candidates)
      has_truth = has_truth || s == c.support;
    if (!has_truth)
      fail("candidates.list", "must contain the true support");
  }
  const std::size_t num_candidates =
      !c.candidates.empty() ? c.candidates.size() : (c.family == Family::glm2 ? 2 : 0);

  // rule
  const Json rule = doc.value("rule", Json::object());
  only_keys(rule, "rule", {"kind", "threshold", "penalty", "index", "probs"});
  const std::string default_kind = c.family == Family::glm2 ? "gic" : "ost";
  const std::string kind = get_string(rule.value("kind", Json(default_kind)), "rule.kind");
  auto forbid = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys)
      if (rule.contains(k))
        fail(join("rule", k), fmt::format("not used by rule kind '{}'", kind));
  };
  if (kind == "ost") {
    forbid({"penalty", "index", "probs"});
    if (c.family != Family::sparse_ost)
      fail("rule.kind", "ost needs family sparse-ost");
    if (!rule.contains("threshold"))
      fail("rule.threshold", "required for ost");
    c.rule = selection::SelectionRuleSpec::ost(get_positive(rule["threshold"], "rule.threshold"));
  } else if (kind == "gic") {
    forbid({"threshold", "index", "probs"});
    if (c.family != Family::glm2)
      fail("rule.kind", "gic needs family glm2");
    c.rule = selection::SelectionRuleSpec::gic(
        parse_penalty(rule.value("penalty", Json("aic")), "rule.penalty"));
  } else if (kind == "fixed") {
    forbid({"threshold", "penalty", "probs"});
    if (num_candidates == 0)
      fail("rule.kind", "fixed needs an explicit candidates.list");
    const auto k = get_count(rule.value("index", Json()), "rule.index");
    if (k < 1 || k > num_candidates)
      fail("rule.index", fmt::format("expected 1..{}", num_candidates));
    c.rule = selection::SelectionRuleSpec::fixed(k - 1, num_candidates);
  } else if (kind == "random") {
    forbid({"threshold", "penalty", "index"});
    if (num_candidates == 0)
      fail("rule.kind", "random needs an explicit candidates.list");
    const auto probs = get_reals(rule.value("probs", Json()), "rule.probs");
    if (probs.size() != num_candidates)
      fail("rule.probs", fmt::format("expected {} probabilities", num_candidates));
    double total = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      if (probs[k] < 0.0)
        fail(fmt::format("rule.probs[{}]", k), "must be non-negative");
      total += probs[k];
    }
    if (std::abs(total - 1.0) > 1e-12)
      fail("rule.probs", "must sum to 1");
    c.rule = selection::SelectionRuleSpec::random(
        Eigen::Map<const Vector>(probs.data(), static_cast<Eigen::Index>(probs.size())));
  } else {
    fail("rule.kind", "expected ost, gic, fixed or random");
  }
  if (c.family == Family::sparse_ost && !c.rule->is_ost() && c.candidates.empty())
    fail("candidates.list", "required unless the rule is ost");

  // model sanity through the model classes themselves
  try {
    const model::SupportSet truth(c.support, dim);
    if (c.family == Family::glm2) {
      const auto cands = c.candidates.empty() ? model::CandidateSet::nested(dim) : [&] {
        std::vector<model::SupportSet> v;
        for (const auto& s : c.candidates)
          v.emplace_back(s, dim);
        return model::CandidateSet(std::move(v), dim);
      }();
      model::GlmModel(c.design, c.sigma, cands, cands.require(truth), c.theta);
    } else {
      model::SparseModel(c.design, c.sigma, truth, c.theta);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail("model", e.what());
  }

  // sweep
  const Json sw = doc.value("sweep", Json::object());
  only_keys(sw, "sweep", {"axis", "grid", "bias"});
  c.axis = parse_enum<SweepAxis>(sw.value("axis", Json("none")), "sweep.axis",
                                 {{"none", SweepAxis::none},
                                  {"snr", SweepAxis::snr},
                                  {"threshold", SweepAxis::threshold},
                                  {"penalty", SweepAxis::penalty},
                                  {"pi2", SweepAxis::pi2}});
  if (sw.contains("grid")) {
    const Json& g = sw["grid"];
    if (g.is_object()) {
      only_keys(g, "sweep.grid", {"from", "to", "points"});
      const double from = get_real(g.value("from", Json()), "sweep.grid.from");
      const double to = get_real(g.value("to", Json()), "sweep.grid.to");
      const auto n = get_count(g.value("points", Json()), "sweep.grid.points");
      if (n == 0)
        fail("sweep.grid.points", "must be positive");
      for (std::size_t i = 0; i < n; ++i)
        c.grid.push_back(n == 1 ? from
                                : from + (to - from) * static_cast<double>(i) /
                                             static_cast<double>(n - 1));
    } else {
      c.grid = get_reals(g, "sweep.grid");
    }
  }
  if (c.axis == SweepAxis::none && !c.grid.empty())
    fail("sweep.grid", "a grid needs an axis");
  if (c.axis != SweepAxis::none && c.grid.empty())
    fail("sweep.grid", "required when an axis is set");
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    const auto p = fmt::format("sweep.grid[{}]", i);
    const double v = c.grid[i];
    if ((c.axis == SweepAxis::threshold || c.axis == SweepAxis::penalty) && !(v > 0.0))
      fail(p, "must be positive");
    if (c.axis == SweepAxis::pi2 && !(v > 0.0 && v < 1.0))
      fail(p, "must lie in (0, 1)");
  }
  if (c.axis == SweepAxis::threshold && !c.rule->is_ost())
    fail("sweep.axis", "threshold sweeps need the ost rule");
  if ((c.axis == SweepAxis::penalty || c.axis == SweepAxis::pi2) && !c.rule->is_gic())
    fail("sweep.axis", "penalty and pi2 sweeps need the gic rule");
  c.bias = parse_enum<BiasSource>(sw.value("bias", Json("zero")), "sweep.bias",
                                  {{"zero", BiasSource::zero},
                                   {"analytic-identity", BiasSource::analytic_identity},
                                   {"monte-carlo", BiasSource::monte_carlo}});
  if (c.bias == BiasSource::analytic_identity &&
      (c.family != Family::sparse_ost || !c.rule->is_ost() || !c.design.isIdentity(0.0)))
    fail("sweep.bias", "analytic-identity needs sparse-ost with ost and an identity design");

  // mc
  const Json mc = doc.value("mc", Json::object());
  only_keys(mc, "mc", {"trials", "seed", "threads", "fim_policy"});
  if (mc.contains("trials"))
    c.trials = get_count(mc["trials"], "mc.trials");
  if (c.trials < 2)
    fail("mc.trials", "need at least 2 trials");
  if (mc.contains("seed"))
    c.seed = get_count(mc["seed"], "mc.seed");
  if (mc.contains("threads"))
    c.threads = static_cast<unsigned>(get_count(mc["threads"], "mc.threads"));
  c.fim_policy = parse_enum<bounds::FimPolicy>(
      mc.value("fim_policy", Json("error")), "mc.fim_policy",
      {{"error", bounds::FimPolicy::error}, {"drop", bounds::FimPolicy::drop}});

  // output
  if (doc.contains("output")) {
    const Json& o = doc["output"];
    if (o.is_string()) {
      c.output = o.get<std::string>();
    } else {
      only_keys(o, "output", {"path"});
      if (o.contains("path"))
        c.output = get_string(o["path"], "output.path");
    }
  }
  return c;
}

Json serialize_config(const ExperimentConfig& c) {
  Json doc;
  doc["family"] = std::string(to_string(c.family));
  doc["model"] = {{"design", rows_json(c.design)},
                  {"sigma", c.sigma},
                  {"support", one_based(c.support)},
                  {"theta", std::vector<double>(c.theta.data(), c.theta.data() + c.theta.size())}};

  Json rule;
  const auto& r = *c.rule;
  if (r.is_ost()) {
    rule = {{"kind", "ost"}, {"threshold", r.threshold()}};
  } else if (r.is_gic()) {
    rule = {{"kind", "gic"}, {"penalty", penalty_json(r.penalty())}};
  } else {
    const Vector& p = r.probs();
    rule = {{"kind", "random"}, {"probs", std::vector<double>(p.data(), p.data() + p.size())}};
  }
  doc["rule"] = rule;

  Json cand = {{"s_max", c.enumeration.s_max},
               {"k_max", c.enumeration.k_max},
               {"mass_target", c.enumeration.mass_target}};
  if (!c.candidates.empty()) {
    cand["list"] = Json::array();
    for (const auto& s : c.candidates)
      cand["list"].push_back(one_based(s));
  }
  doc["candidates"] = cand;

  doc["sweep"] = {{"axis", std::string(to_string(c.axis))},
                  {"bias", std::string(to_string(c.bias))}};
  if (!c.grid.empty())
    doc["sweep"]["grid"] = c.grid;
  doc["mc"] = {{"trials", c.trials},
               {"seed", c.seed},
               {"threads", c.threads},
               {"fim_policy", c.fim_policy == bounds::FimPolicy::drop ? "drop" : "error"}};
  doc["output"] = {{"path", c.output}};
  return doc;
}

Json load_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("--config", fmt::format("cannot open {}", path.string()));
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("--config", fmt::format("{}: {}", path.string(), e.what()));
  }
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set", fmt::format("expected key=value, got '{}'", assignment));
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.'))
    parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty())
      throw ConfigError("--set", fmt::format("empty path segment in '{}'", key));
    if (node->is_null())
      *node = Json::object();
    else if (!node->is_object())
      throw ConfigError(key, "cannot descend into a non-object");
    node = &(*node)[parts[i]];
  }
  *node = std::move(value);
}

} // namespace selcrb::cli
