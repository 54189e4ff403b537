#pragma once

#include "selcrb/numerics/linalg.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace selcrb::model {

/// Largest ambient dimension; supports are also kept as 64-bit masks.
inline constexpr std::size_t kMaxAmbientDim = 64;

/// Nonempty sorted set of parameter indices in [0, M). 0-based here,
/// 1-based wherever it is printed or serialized.
class SupportSet {
public:
  /// Throws DomainError unless `indices` is nonempty, strictly increasing and in range.
  SupportSet(std::vector<std::size_t> indices, std::size_t ambient_dim);

  static SupportSet from_one_based(const std::vector<long long>& indices, std::size_t ambient_dim);
  static SupportSet from_mask(std::uint64_t mask, std::size_t ambient_dim);
  static SupportSet full(std::size_t ambient_dim);

  std::size_t size() const noexcept { return idx_.size(); }
  std::size_t ambient_dim() const noexcept { return dim_; }
  std::size_t operator[](std::size_t i) const { return idx_[i]; }
  const std::vector<std::size_t>& indices() const noexcept { return idx_; }
  std::uint64_t mask() const noexcept { return mask_; }

  bool contains(std::size_t m) const noexcept { return m < dim_ && ((mask_ >> m) & 1u); }
  /// Position of `m` in the sorted index list.
  std::optional<std::size_t> position(std::size_t m) const;
  bool is_subset_of(const SupportSet& o) const noexcept {
    return dim_ == o.dim_ && (mask_ & ~o.mask_) == 0;
  }

  std::vector<long long> one_based() const;
  /// "{1,3,5}"
  std::string to_string() const;

  bool operator==(const SupportSet& o) const noexcept {
    return dim_ == o.dim_ && mask_ == o.mask_;
  }
  /// Lexicographic on the sorted index lists.
  std::strong_ordering operator<=>(const SupportSet& o) const;

private:
  std::vector<std::size_t> idx_;
  std::size_t dim_;
  std::uint64_t mask_;
};

/// Ordered list of distinct candidate supports over a common ambient dimension.
class CandidateSet {
public:
  CandidateSet(std::vector<SupportSet> models, std::size_t ambient_dim);

  std::size_t size() const noexcept { return models_.size(); }
  std::size_t ambient_dim() const noexcept { return dim_; }
  const SupportSet& operator[](std::size_t k) const { return models_[k]; }
  const std::vector<SupportSet>& models() const noexcept { return models_; }

  std::optional<std::size_t> index_of(const SupportSet& s) const;
  std::optional<std::size_t> index_of_mask(std::uint64_t mask) const;
  /// Throws DomainError if `truth` is not a candidate.
  std::size_t require(const SupportSet& truth) const;

  /// Nested candidates {1}, {1,2}, ..., {1..M}.
  static CandidateSet nested(std::size_t ambient_dim);

private:
  std::vector<SupportSet> models_;
  std::size_t dim_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

/// Length-M vector that vanishes off `support`.
struct ZeroPadded {
  Vector values;
  SupportSet support;
};

ZeroPadded zero_pad(const Vector& v, const SupportSet& support);

/// Entries of `padded` on `support`, in index order.
Vector restrict_to(const Vector& padded, const SupportSet& support);

/// Zero-padded copy of `theta_truth` (indexed by `truth`) with the entries on `keep` removed,
/// i.e. the part of the true vector that lies outside `keep`.
Vector padded_outside(const Vector& theta_truth, const SupportSet& truth, const SupportSet& keep);

/// M x |truth| matrix with [D]_{m,l} = 1 iff m is in `candidate` and m = truth[l].
Matrix selection_matrix_D(const SupportSet& candidate, const SupportSet& truth);

} // namespace selcrb::model
