#include "selcrb/model/linear_model.hpp"

#include "selcrb/error.hpp"
#include "selcrb/numerics/special.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fmt/format.h>
#include <queue>

namespace selcrb::model {

namespace {

void check_full_rank(const Matrix& gram, const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const Vector ev = es.eigenvalues();
  const double hi = ev.cwiseAbs().maxCoeff();
  if (!(ev.minCoeff() > hi * 1e-12))
    throw DomainError(fmt::format("{} is not full column rank", what));
}

} // namespace

LinearGaussianModel::LinearGaussianModel(Matrix design, double sigma, SupportSet truth,
                                         Vector theta)
    : x_(std::move(design)), sigma_(sigma), truth_(std::move(truth)), theta_(std::move(theta)) {
  if (x_.rows() == 0 || x_.cols() == 0)
    throw DomainError("design matrix is empty");
  if (!x_.allFinite())
    throw DomainError("design matrix has non-finite entries");
  if (truth_.ambient_dim() != ambient_dim())
    throw DomainError(fmt::format("true support lives in dimension {}, design has {} columns",
                                  truth_.ambient_dim(), ambient_dim()));
  set_sigma(sigma);
  set_theta(theta_);
  check_full_rank(gram(truth_), "design restricted to the true support");
}

void LinearGaussianModel::set_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw DomainError("sigma must be positive and finite");
  sigma_ = sigma;
}

void LinearGaussianModel::set_theta(Vector theta) {
  if (static_cast<std::size_t>(theta.size()) != truth_.size())
    throw DomainError(fmt::format("theta has {} entries, true support has {}", theta.size(),
                                  truth_.size()));
  if (!theta.allFinite())
    throw DomainError("theta has non-finite entries");
  theta_ = std::move(theta);
  refresh();
}

void LinearGaussianModel::refresh() {
  gram_ = x_.transpose() * x_;
  mean_ = columns(truth_) * theta_;
  mean_corr_ = x_.transpose() * mean_;
}

Matrix LinearGaussianModel::columns(const SupportSet& s) const {
  Matrix out(x_.rows(), static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i)
    out.col(static_cast<Eigen::Index>(i)) = x_.col(static_cast<Eigen::Index>(s[i]));
  return out;
}

Matrix LinearGaussianModel::gram(const SupportSet& s) const {
  const auto n = static_cast<Eigen::Index>(s.size());
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = gram_(static_cast<Eigen::Index>(s[static_cast<std::size_t>(i)]),
                        static_cast<Eigen::Index>(s[static_cast<std::size_t>(j)]));
  return out;
}

double LinearGaussianModel::snr_db() const {
  return 10.0 * std::log10(mean_.squaredNorm() / (static_cast<double>(rows()) * sigma_ * sigma_));
}

double LinearGaussianModel::sigma_for_snr(double snr_db) const {
  if (!std::isfinite(snr_db))
    throw DomainError("SNR must be finite");
  const double energy = mean_.squaredNorm();
  if (energy == 0.0)
    throw DomainError("SNR is undefined for a zero signal");
  return std::sqrt(energy / (static_cast<double>(rows()) * std::pow(10.0, snr_db / 10.0)));
}

SparseModel::SparseModel(Matrix a, double sigma, SupportSet truth, Vector theta)
    : LinearGaussianModel(std::move(a), sigma, std::move(truth), std::move(theta)) {
  for (Eigen::Index m = 0; m < design().cols(); ++m) {
    const double n2 = design().col(m).squaredNorm();
    if (std::abs(n2 - 1.0) > 1e-12)
      throw DomainError(fmt::format("dictionary column {} has squared norm {:.17g}, expected 1",
                                    m + 1, n2));
  }
}

bool SparseModel::is_identity() const {
  return design().rows() == design().cols() && design().isIdentity(0.0);
}

SparseModel SparseModel::with_sigma(double sigma) const {
  SparseModel out = *this;
  out.set_sigma(sigma);
  return out;
}

SparseModel SparseModel::with_theta(Vector theta) const {
  SparseModel out = *this;
  out.set_theta(std::move(theta));
  return out;
}

GlmModel::GlmModel(Matrix h, double sigma, CandidateSet candidates, std::size_t true_index,
                   Vector theta)
    : LinearGaussianModel(std::move(h), sigma,
                          [&] {
                            if (true_index >= candidates.size())
                              throw DomainError("true model index out of range");
                            return candidates[true_index];
                          }(),
                          std::move(theta)),
      cands_(std::move(candidates)), true_index_(true_index) {
  if (cands_.ambient_dim() != ambient_dim())
    throw DomainError("candidate supports do not match the number of design columns");
  for (std::size_t k = 0; k < cands_.size(); ++k)
    check_full_rank(gram(cands_[k]), fmt::format("H for candidate {}", k + 1));
}

bool GlmModel::is_two_model() const {
  return cands_.size() == 2 && ambient_dim() == 2 && cands_[0].size() == 1 &&
         cands_[0][0] == 0 && cands_[1].size() == 2 && true_index_ == 1;
}

GlmModel GlmModel::with_sigma(double sigma) const {
  GlmModel out = *this;
  out.set_sigma(sigma);
  return out;
}

GlmModel GlmModel::with_theta(Vector theta) const {
  GlmModel out = *this;
  out.set_theta(std::move(theta));
  return out;
}

std::pair<double, double> alpha_beta(const SparseModel& model, std::size_t m, double c) {
  if (!(c > 0.0))
    throw DomainError("OST threshold must be positive");
  if (m >= model.ambient_dim())
    throw DomainError("alpha_beta: index out of range");
  const double mu = model.mean_correlation()(static_cast<Eigen::Index>(m));
  const double s = model.sigma();
  return {(c - mu) / s, (-c - mu) / s};
}

Exceedance ost_exceedance(const SparseModel& model, double c) {
  const auto n = static_cast<Eigen::Index>(model.ambient_dim());
  Exceedance e{Vector(n), Vector(n)};
  for (Eigen::Index m = 0; m < n; ++m) {
    const auto [a, b] = alpha_beta(model, static_cast<std::size_t>(m), c);
    e.p(m) = numerics::std_normal_outside(b, a);
    e.q(m) = numerics::std_normal_interval(b, a);
  }
  return e;
}

ProductRanking ProductRanking::from(const Exceedance& e) {
  return {e.p.array().log().matrix(), e.q.array().log().matrix()};
}

double ProductRanking::log_prob(std::uint64_t mask) const {
  double s = 0.0;
  for (Eigen::Index m = 0; m < log_p.size(); ++m)
    s += ((mask >> m) & 1u) ? log_p(m) : log_q(m);
  return s;
}

namespace {

struct Ranked {
  std::uint64_t mask;
  double log_prob;
};

SupportSet to_support(std::uint64_t mask, std::size_t dim) { return SupportSet::from_mask(mask, dim); }

// Higher weight first, then lexicographic on the index lists.
void sort_ranked(std::vector<Ranked>& v, std::size_t dim) {
  std::sort(v.begin(), v.end(), [dim](const Ranked& a, const Ranked& b) {
    if (a.log_prob != b.log_prob)
      return a.log_prob > b.log_prob;
    return to_support(a.mask, dim) < to_support(b.mask, dim);
  });
}

std::size_t subset_count(std::size_t m, std::size_t s_max) {
  // sum_{s=1}^{s_max} C(m, s), saturating.
  double total = 0.0, c = 1.0;
  for (std::size_t s = 1; s <= s_max; ++s) {
    c = c * static_cast<double>(m - s + 1) / static_cast<double>(s);
    total += c;
  }
  return total > 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(total + 0.5);
}

// Subsets in nondecreasing order of their log-weight gap to the most likely
// subset: flipping index m costs |log p_m - log q_m|, so this is the classic
// best-first enumeration of subset sums over the sorted costs.
std::vector<Ranked> best_first(const ProductRanking& r, std::size_t s_max,
                               std::size_t k_max) {
  const auto n = static_cast<std::size_t>(r.log_p.size());
  std::uint64_t base = 0;
  std::vector<std::pair<double, std::size_t>> cost(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double lp = r.log_p(static_cast<Eigen::Index>(m));
    const double lq = r.log_q(static_cast<Eigen::Index>(m));
    if (lp > lq)
      base |= std::uint64_t{1} << m;
    cost[m] = {std::abs(lp - lq), m};
  }
  std::sort(cost.begin(), cost.end());
  const double base_log = r.log_prob(base);

  std::vector<Ranked> found;
  auto accept = [&](std::uint64_t mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (size >= 1 && size <= s_max)
      found.push_back({mask, r.log_prob(mask)});
  };
  accept(base);

  struct State {
    double cost;
    std::size_t last;
    std::uint64_t flips; // bit i = sorted position i flipped
    bool operator>(const State& o) const { return cost > o.cost; }
  };
  auto apply = [&](std::uint64_t flips) {
    std::uint64_t mask = base;
    for (std::size_t i = 0; i < n; ++i)
      if ((flips >> i) & 1u)
        mask ^= std::uint64_t{1} << cost[i].second;
    return mask;
  };
  std::priority_queue<State, std::vector<State>, std::greater<>> heap;
  if (n > 0)
    heap.push({cost[0].first, 0, 1});
  const std::size_t max_pops = 64 * k_max + 1'000'000;
  double cutoff = std::numeric_limits<double>::infinity();
  for (std::size_t pops = 0; !heap.empty() && pops < max_pops; ++pops) {
    State s = heap.top();
    heap.pop();
    if (s.cost > cutoff)
      break;
    accept(apply(s.flips));
    // Once k_max subsets are in hand keep going only through exact ties.
    if (found.size() >= k_max && cutoff == std::numeric_limits<double>::infinity())
      cutoff = base_log - found.back().log_prob;
    if (s.last + 1 < n) {
      const std::size_t j = s.last + 1;
      heap.push({s.cost + cost[j].first, j, s.flips | (std::uint64_t{1} << j)});
      heap.push({s.cost - cost[s.last].first + cost[j].first, j,
                 (s.flips & ~(std::uint64_t{1} << s.last)) | (std::uint64_t{1} << j)});
    }
  }
  return found;
}

} // namespace

CandidateSet enumerate_candidates(std::size_t ambient_dim, const EnumerationPolicy& policy,
                                  const std::optional<ProductRanking>& ranking) {
  if (ambient_dim == 0 || ambient_dim > kMaxAmbientDim)
    throw DomainError("enumerate_candidates: ambient dimension out of range");
  const std::size_t s_max = policy.s_max == 0 ? ambient_dim : policy.s_max;
  if (s_max > ambient_dim)
    throw DomainError(fmt::format("enumerate_candidates: s_max = {} exceeds M = {}", s_max,
                                  ambient_dim));
  if (policy.k_max == 0)
    throw DomainError("enumerate_candidates: k_max must be positive");
  if (ranking && static_cast<std::size_t>(ranking->log_p.size()) != ambient_dim)
    throw DomainError("enumerate_candidates: ranking has the wrong length");

  const std::size_t count = subset_count(ambient_dim, s_max);
  const bool truncate = count > policy.k_max;
  if (truncate && !ranking)
    throw DomainError(fmt::format(
        "enumerate_candidates: {} subsets exceed k_max = {} and no ranking was given", count,
        policy.k_max));

  std::vector<Ranked> ranked;
  constexpr std::size_t kBruteForceDim = 22;
  if (!truncate || ambient_dim <= kBruteForceDim) {
    const std::uint64_t end = std::uint64_t{1} << ambient_dim;
    for (std::uint64_t mask = 1; mask < end; ++mask) {
      const auto size = static_cast<std::size_t>(std::popcount(mask));
      if (size <= s_max)
        ranked.push_back({mask, ranking ? ranking->log_prob(mask) : -static_cast<double>(size)});
    }
  } else {
    ranked = best_first(*ranking, s_max, policy.k_max);
  }
  sort_ranked(ranked, ambient_dim);

  std::vector<SupportSet> models;
  if (!truncate) {
    models.reserve(ranked.size());
    for (const auto& r : ranked)
      models.push_back(to_support(r.mask, ambient_dim));
    return CandidateSet(std::move(models), ambient_dim);
  }
  double mass = 0.0;
  for (const auto& r : ranked) {
    if (models.size() >= policy.k_max || mass >= policy.mass_target)
      break;
    models.push_back(to_support(r.mask, ambient_dim));
    mass += std::exp(r.log_prob);
  }
  return CandidateSet(std::move(models), ambient_dim);
}

} // namespace selcrb::model
