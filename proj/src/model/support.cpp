#include "selcrb/model/support.hpp"

#include "selcrb/error.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <fmt/ranges.h>

namespace selcrb::model {

SupportSet::SupportSet(std::vector<std::size_t> indices, std::size_t ambient_dim)
    : idx_(std::move(indices)), dim_(ambient_dim), mask_(0) {
  if (dim_ == 0 || dim_ > kMaxAmbientDim)
    throw DomainError(fmt::format("support: ambient dimension must be in [1, {}]", kMaxAmbientDim));
  if (idx_.empty())
    throw DomainError("support: empty support set");
  for (std::size_t i = 0; i < idx_.size(); ++i) {
    if (idx_[i] >= dim_)
      throw DomainError(fmt::format("support: index {} out of range 1..{}", idx_[i] + 1, dim_));
    if (i > 0 && idx_[i] <= idx_[i - 1])
      throw DomainError("support: indices must be strictly increasing");
    mask_ |= std::uint64_t{1} << idx_[i];
  }
}

SupportSet SupportSet::from_one_based(const std::vector<long long>& indices,
                                      std::size_t ambient_dim) {
  std::vector<std::size_t> idx;
  idx.reserve(indices.size());
  for (long long v : indices) {
    if (v < 1 || static_cast<std::size_t>(v) > ambient_dim)
      throw DomainError(fmt::format("support: index {} out of range 1..{}", v, ambient_dim));
    idx.push_back(static_cast<std::size_t>(v - 1));
  }
  std::sort(idx.begin(), idx.end());
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
    throw DomainError("support: duplicate index");
  return SupportSet(std::move(idx), ambient_dim);
}

SupportSet SupportSet::from_mask(std::uint64_t mask, std::size_t ambient_dim) {
  std::vector<std::size_t> idx;
  for (std::size_t m = 0; m < kMaxAmbientDim; ++m)
    if ((mask >> m) & 1u)
      idx.push_back(m);
  return SupportSet(std::move(idx), ambient_dim);
}

SupportSet SupportSet::full(std::size_t ambient_dim) {
  std::vector<std::size_t> idx(ambient_dim);
  for (std::size_t m = 0; m < ambient_dim; ++m)
    idx[m] = m;
  return SupportSet(std::move(idx), ambient_dim);
}

std::optional<std::size_t> SupportSet::position(std::size_t m) const {
  auto it = std::lower_bound(idx_.begin(), idx_.end(), m);
  if (it == idx_.end() || *it != m)
    return std::nullopt;
  return static_cast<std::size_t>(it - idx_.begin());
}

std::vector<long long> SupportSet::one_based() const {
  std::vector<long long> out;
  out.reserve(idx_.size());
  for (std::size_t m : idx_)
    out.push_back(static_cast<long long>(m) + 1);
  return out;
}

std::string SupportSet::to_string() const {
  return fmt::format("{{{}}}", fmt::join(one_based(), ","));
}

std::strong_ordering SupportSet::operator<=>(const SupportSet& o) const {
  if (auto c = dim_ <=> o.dim_; c != 0)
    return c;
  return std::lexicographical_compare_three_way(idx_.begin(), idx_.end(), o.idx_.begin(),
                                                o.idx_.end());
}

CandidateSet::CandidateSet(std::vector<SupportSet> models, std::size_t ambient_dim)
    : models_(std::move(models)), dim_(ambient_dim) {
  if (models_.empty())
    throw DomainError("candidate set is empty");
  lookup_.reserve(models_.size());
  for (std::size_t k = 0; k < models_.size(); ++k) {
    if (models_[k].ambient_dim() != dim_)
      throw DomainError("candidate set: ambient dimension mismatch");
    if (!lookup_.emplace(models_[k].mask(), k).second)
      throw DomainError(fmt::format("candidate set: duplicate model {}", models_[k].to_string()));
  }
}

std::optional<std::size_t> CandidateSet::index_of(const SupportSet& s) const {
  if (s.ambient_dim() != dim_)
    return std::nullopt;
  return index_of_mask(s.mask());
}

std::optional<std::size_t> CandidateSet::index_of_mask(std::uint64_t mask) const {
  auto it = lookup_.find(mask);
  if (it == lookup_.end())
    return std::nullopt;
  return it->second;
}

std::size_t CandidateSet::require(const SupportSet& truth) const {
  auto k = index_of(truth);
  if (!k)
    throw DomainError(fmt::format("true support {} is not among the candidates", truth.to_string()));
  return *k;
}

CandidateSet CandidateSet::nested(std::size_t ambient_dim) {
  std::vector<SupportSet> models;
  for (std::size_t k = 1; k <= ambient_dim; ++k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t m = 0; m < k; ++m)
      idx[m] = m;
    models.emplace_back(std::move(idx), ambient_dim);
  }
  return CandidateSet(std::move(models), ambient_dim);
}

ZeroPadded zero_pad(const Vector& v, const SupportSet& support) {
  if (static_cast<std::size_t>(v.size()) != support.size())
    throw DomainError(fmt::format("zero_pad: vector has length {}, support has {} entries",
                                  v.size(), support.size()));
  Vector out = Vector::Zero(static_cast<Eigen::Index>(support.ambient_dim()));
  for (std::size_t i = 0; i < support.size(); ++i)
    out(static_cast<Eigen::Index>(support[i])) = v(static_cast<Eigen::Index>(i));
  return {std::move(out), support};
}

Vector restrict_to(const Vector& padded, const SupportSet& support) {
  if (static_cast<std::size_t>(padded.size()) != support.ambient_dim())
    throw DomainError("restrict_to: length does not match the ambient dimension");
  Vector out(static_cast<Eigen::Index>(support.size()));
  for (std::size_t i = 0; i < support.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = padded(static_cast<Eigen::Index>(support[i]));
  return out;
}

Vector padded_outside(const Vector& theta_truth, const SupportSet& truth, const SupportSet& keep) {
  Vector out = zero_pad(theta_truth, truth).values;
  for (std::size_t m : keep.indices())
    out(static_cast<Eigen::Index>(m)) = 0.0;
  return out;
}

Matrix selection_matrix_D(const SupportSet& candidate, const SupportSet& truth) {
  if (candidate.ambient_dim() != truth.ambient_dim())
    throw DomainError("selection_matrix_D: ambient dimension mismatch");
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(truth.ambient_dim()),
                          static_cast<Eigen::Index>(truth.size()));
  for (std::size_t l = 0; l < truth.size(); ++l)
    if (candidate.contains(truth[l]))
      d(static_cast<Eigen::Index>(truth[l]), static_cast<Eigen::Index>(l)) = 1.0;
  return d;
}

} // namespace selcrb::model
