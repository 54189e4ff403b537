#pragma once

#include "selcrb/checks/checks.hpp"

#include <fmt/format.h>
#include <ostream>

namespace selcrb::checks::detail {

/// Collects sub-check outcomes into a CheckResult; the check passes only if
/// every expectation holds.
class Recorder {
public:
  Recorder(CheckResult& r, const CheckContext& ctx) : r_(r), ctx_(ctx) { r_.pass = true; }

  bool expect(bool ok, std::string note) {
    if (!ok)
      r_.pass = false;
    r_.notes.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", note));
    return ok;
  }

  template <class... Args>
  void log(fmt::format_string<Args...> f, Args&&... args) {
    if (ctx_.log)
      *ctx_.log << fmt::format(f, std::forward<Args>(args)...) << '\n';
  }

private:
  CheckResult& r_;
  const CheckContext& ctx_;
};

/// Largest |a - b| / scale over the entries, with scale = max(|b_ij|, floor).
inline double max_rel_error(const Matrix& a, const Matrix& b, double floor) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / std::max(std::abs(b(i, j)), floor));
  return worst;
}

} // namespace selcrb::checks::detail
