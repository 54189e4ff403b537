#pragma once

#include "selcrb/model/linear_model.hpp"

#include <cstdint>
#include <random>

namespace selcrb::selection {

using Rng = std::mt19937_64;

/// Seed of the private stream of trial `trial` (splitmix64 of the pair).
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

/// One noisy observation and the statistics every rule and estimator needs.
struct Draw {
  Vector w;     // standard normal noise
  Vector x;     // observation
  Vector corr;  // X^T x
  double xx = 0.0;
  Rng rng;      // trial stream, positioned after the noise draws
};

/// Draws x = X_Lambda theta + sigma w with a per-trial stream, so trial t is
/// the same observation whichever worker runs it.
class Sampler {
public:
  explicit Sampler(const model::LinearGaussianModel& model);

  Draw make_draw() const;
  void draw(std::uint64_t seed, std::uint64_t trial, Draw& d) const;
  /// Same noise as draw(seed, trial) around a different noise-free mean
  /// (common random numbers across parameter perturbations).
  void draw(std::uint64_t seed, std::uint64_t trial, const Vector& mean, Draw& d) const;

  const model::LinearGaussianModel& model() const noexcept { return *model_; }

private:
  const model::LinearGaussianModel* model_;
};

} // namespace selcrb::selection
