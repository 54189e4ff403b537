// Command-line front end: selcrb {bound|mc|sweep|selftest} --config PATH [...]
#include "selcrb/cli/cli.hpp"

#include <CLI11.hpp>
#include <iostream>

#ifndef SELCRB_DATA_DIR
#define SELCRB_DATA_DIR "data"
#endif

int main(int argc, char** argv) {
  using namespace selcrb::cli;
  CLI::App app{"Selective Cramer-Rao bounds: bound evaluation, Monte-Carlo runs and sweeps"};
  app.require_subcommand(1, 1);

  Invocation inv;
  inv.data_dir = SELCRB_DATA_DIR;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  unsigned threads = 0;
  std::string data_dir;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* cfg = sub->add_option("--config", inv.config_path, "JSON experiment config");
    if (needs_config)
      cfg->required();
    sub->add_option("--set", inv.overrides, "override a config field, e.g. --set model.sigma=0.5")
        ->allow_extra_args(false);
    sub->add_option("--seed", seed, "base seed (overrides mc.seed)");
    sub->add_option("--trials", trials, "Monte-Carlo trials (overrides mc.trials)");
    sub->add_option("--threads", threads, "worker threads; never changes results");
    sub->add_option("--out", inv.out_path, "output file (default: output.path, else stdout)");
    sub->add_flag("-v,--verbose", inv.verbosity, "more diagnostics");
  };

  struct Entry {
    const char* name;
    const char* help;
    Subcommand kind;
  };
  for (const Entry& e : {Entry{"bound", "evaluate selective and oracle bounds (JSON)", Subcommand::bound},
                         Entry{"mc", "Monte-Carlo run of the MSL estimator (JSON)", Subcommand::mc},
                         Entry{"sweep", "bounds and Monte-Carlo over the sweep grid (CSV)", Subcommand::sweep}}) {
    auto* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, true);
    sub->callback([&inv, kind = e.kind] { inv.subcommand = kind; });
  }
  auto* self = app.add_subcommand("selftest", "derivative and probability cross-checks");
  self->add_option("--threads", threads, "worker threads");
  self->add_option("--data-dir", data_dir, "directory holding dict_7x14.csv");
  self->add_flag("-v,--verbose", inv.verbosity, "per-point diagnostics");
  self->callback([&] { inv.subcommand = Subcommand::selftest; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  auto given = [](CLI::App* sub, const char* name) {
    const auto* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  for (auto* sub : app.get_subcommands()) {
    if (given(sub, "--seed"))
      inv.seed = seed;
    if (given(sub, "--trials"))
      inv.trials = trials;
    if (given(sub, "--threads"))
      inv.threads = threads;
    if (given(sub, "--data-dir"))
      inv.data_dir = data_dir;
  }
  return run(inv, std::cout, std::cerr);
}
