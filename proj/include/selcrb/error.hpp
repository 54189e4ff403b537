#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace selcrb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument to a numerical routine (non-finite input, unsupported order, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A Fisher information matrix failed the conditioning test.
class SingularFim : public Error {
public:
  SingularFim(double condition, std::optional<std::size_t> model = std::nullopt);

  double condition() const noexcept { return condition_; }
  /// 0-based candidate index when the matrix belongs to a specific model.
  std::optional<std::size_t> model() const noexcept { return model_; }

private:
  double condition_;
  std::optional<std::size_t> model_;
};

/// A selection-probability denominator vanished (index is 0-based).
class DegenerateProbability : public Error {
public:
  DegenerateProbability(std::size_t index, double value);

  std::size_t index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

private:
  std::size_t index_;
  double value_;
};

class InsufficientConditionedSamples : public Error {
public:
  InsufficientConditionedSamples(std::size_t count, std::size_t required);

  std::size_t count() const noexcept { return count_; }
  std::size_t required() const noexcept { return required_; }

private:
  std::size_t count_;
  std::size_t required_;
};

/// Estimator could not be evaluated (rank-deficient design, singular Gram matrix).
class EstimationError : public Error {
public:
  using Error::Error;
};

/// The requested quantity is not defined for this model family.
class Unsupported : public Error {
public:
  using Error::Error;
};

/// Invalid experiment configuration; `path()` is the dotted field path.
class ConfigError : public Error {
public:
  ConfigError(std::string path, const std::string& message);

  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

} // namespace selcrb
