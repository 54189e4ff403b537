#include "selcrb/selection/sampler.hpp"

#include "selcrb/kernels/kernels.hpp"

namespace selcrb::selection {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  return splitmix64(splitmix64(seed) ^ trial);
}

Sampler::Sampler(const model::LinearGaussianModel& model) : model_(&model) {}

Draw Sampler::make_draw() const {
  const auto n = static_cast<Eigen::Index>(model_->rows());
  const auto m = static_cast<Eigen::Index>(model_->ambient_dim());
  return Draw{Vector(n), Vector(n), Vector(m), 0.0, Rng{}};
}

void Sampler::draw(std::uint64_t seed, std::uint64_t trial, Draw& d) const {
  draw(seed, trial, model_->mean(), d);
}

void Sampler::draw(std::uint64_t seed, std::uint64_t trial, const Vector& mean, Draw& d) const {
  d.rng.seed(trial_seed(seed, trial));
  std::normal_distribution<double> normal;
  const auto n = static_cast<std::size_t>(d.w.size());
  for (std::size_t i = 0; i < n; ++i)
    d.w[static_cast<Eigen::Index>(i)] = normal(d.rng);
  kernels::affine(mean.data(), model_->sigma(), d.w.data(), d.x.data(), n);
  const Matrix& x = model_->design();
  kernels::correlate(x.data(), n, static_cast<std::size_t>(x.cols()), d.x.data(), d.corr.data());
  d.xx = kernels::dot(d.x.data(), d.x.data(), n);
}

} // namespace selcrb::selection
