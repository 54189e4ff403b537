#include "selcrb/error.hpp"

#include <fmt/format.h>

namespace selcrb {

SingularFim::SingularFim(double condition, std::optional<std::size_t> model)
    : Error(model ? fmt::format("FIM of candidate {} is singular or indefinite (condition estimate {:.3e})",
                                *model + 1, condition)
                  : fmt::format("FIM is singular or indefinite (condition estimate {:.3e})", condition)),
      condition_(condition), model_(model) {}

DegenerateProbability::DegenerateProbability(std::size_t index, double value)
    : Error(fmt::format("degenerate selection probability {:.3e} at index {}", value, index + 1)),
      index_(index), value_(value) {}

InsufficientConditionedSamples::InsufficientConditionedSamples(std::size_t count,
                                                               std::size_t required)
    : Error(fmt::format("only {} conditioned samples, at least {} required", count, required)),
      count_(count), required_(required) {}

ConfigError::ConfigError(std::string path, const std::string& message)
    : Error(path.empty() ? message : fmt::format("{}: {}", path, message)),
      path_(std::move(path)) {}

} // namespace selcrb
