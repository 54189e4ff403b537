// Acceptance run: one PASS/FAIL line per criterion, details indented below.
#include "selcrb/checks/checks.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <iostream>
#include <thread>

int main(int argc, char** argv) {
  CLI::App app{"selcrb acceptance criteria"};
  selcrb::checks::CheckContext ctx;
  ctx.threads = std::max(1u, std::thread::hardware_concurrency());
  ctx.data_dir = SELCRB_DATA_DIR;
  std::vector<int> only;
  bool verbose = false;
  app.add_option("--threads", ctx.threads, "worker threads");
  app.add_option("--only", only, "criterion numbers to run");
  app.add_flag("-v,--verbose", verbose, "per-point diagnostics");
  CLI11_PARSE(app, argc, argv);
  if (verbose)
    ctx.log = &std::cout;

  int failed = 0;
  double total = 0.0;
  for (const auto& info : selcrb::checks::registry()) {
    if (!only.empty() && std::find(only.begin(), only.end(), info.id) == only.end())
      continue;
    const auto r = selcrb::checks::run_check(info, ctx);
    failed += !r.pass;
    total += r.seconds;
    std::cout << fmt::format("{} criterion {:2}: {} ({:.1f} s)\n", r.pass ? "PASS" : "FAIL", r.id,
                             r.title, r.seconds);
    for (const auto& n : r.notes)
      std::cout << "      " << n << '\n';
    std::cout.flush();
  }
  std::cout << fmt::format("{} criteria failed, {:.1f} s total\n", failed, total);
  return failed == 0 ? 0 : 1;
}
