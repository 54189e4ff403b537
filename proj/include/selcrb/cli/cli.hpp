#pragma once

#include "selcrb/experiments/config.hpp"
#include "selcrb/experiments/monte_carlo.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace selcrb::cli {

using Json = nlohmann::json;

/// Checks a config document and fills every default. Unknown keys are
/// rejected; errors are ConfigError carrying the dotted field path.
/// Relative CSV paths resolve against `base_dir`.
experiments::ExperimentConfig validate_config(const Json& doc,
                                              const std::filesystem::path& base_dir = {});

/// Inverse of validate_config. The design is always written inline, so the
/// result validates to the same config without the original CSV files.
Json serialize_config(const experiments::ExperimentConfig& config);

Json load_document(const std::filesystem::path& path);

/// Applies `a.b.c=value` to the document. The value is parsed as JSON and
/// falls back to a plain string.
void apply_override(Json& doc, const std::string& assignment);

/// Headerless CSV of reals.
Matrix read_csv_matrix(const std::filesystem::path& path);

enum class Subcommand { bound, mc, sweep, selftest };

struct Invocation {
  Subcommand subcommand = Subcommand::sweep;
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<unsigned> threads;
  std::string out_path;
  std::filesystem::path data_dir; // selftest only
  int verbosity = 0;
};

/// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Executes one subcommand. Artifacts go to the output path (or `out` when
/// none is set), the summary and diagnostics to `err`.
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Config after file loading, overrides and flag overrides, validated.
experiments::ExperimentConfig resolve_config(const Invocation& inv);

Json to_json(const bounds::BoundReport& r);
Json to_json(const experiments::McRunResult& r);

} // namespace selcrb::cli
