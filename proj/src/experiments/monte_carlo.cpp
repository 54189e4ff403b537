#include "selcrb/experiments/monte_carlo.hpp"

#include "selcrb/error.hpp"
#include "selcrb/parallel.hpp"

#include <cmath>

namespace selcrb::experiments {

namespace {

using LdVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
using LdMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

struct SupportAcc {
  std::size_t count = 0;
  LdVector sum, sum_sq;
};

struct BatchAcc {
  std::size_t done = 0, failed = 0, empty = 0, other = 0;
  LdMatrix msse, mse;
  LdVector marginal_count, cond_sum_sq;
  std::vector<std::size_t> cand_count;
  std::map<std::uint64_t, SupportAcc> by_support;
};

// Batch means of a per-trial quantity give its standard error; batches with
// no successful trial are skipped.
double batch_se(const std::vector<double>& means) {
  if (means.size() < 2)
    return 0.0;
  long double mu = 0.0L;
  for (double v : means)
    mu += v;
  mu /= static_cast<long double>(means.size());
  long double ss = 0.0L;
  for (double v : means)
    ss += (v - mu) * (v - mu);
  const double var = static_cast<double>(ss / static_cast<long double>(means.size() - 1));
  return std::sqrt(var / static_cast<double>(means.size()));
}

} // namespace

McRunResult run_mc(const model::LinearGaussianModel& model, const selection::Selector& selector,
                   const estimators::Estimator& estimator, const model::CandidateSet& candidates,
                   std::size_t trials, std::uint64_t seed, unsigned threads) {
  if (trials == 0)
    throw DomainError("run_mc: trials must be positive");
  const auto m = static_cast<Eigen::Index>(model.ambient_dim());
  const Vector theta = model.theta_padded();
  const auto batches = make_batches(trials);
  std::vector<BatchAcc> acc(batches.size());
  const selection::Sampler sampler(model);

  for_each_batch(batches, threads, [&](const BatchRange& r) {
    BatchAcc a;
    a.msse = LdMatrix::Zero(m, m);
    a.mse = LdMatrix::Zero(m, m);
    a.marginal_count = LdVector::Zero(m);
    a.cond_sum_sq = LdVector::Zero(m);
    a.cand_count.assign(candidates.size(), 0);
    selection::Draw d = sampler.make_draw();
    Vector est;
    for (std::size_t t = r.begin; t < r.end; ++t) {
      sampler.draw(seed, t, d);
      const std::uint64_t mask = selector.select(d);
      if (mask == 0)
        ++a.empty;
      else if (auto k = candidates.index_of_mask(mask))
        ++a.cand_count[*k];
      else
        ++a.other;
      for (Eigen::Index i = 0; i < m; ++i)
        if ((mask >> i) & 1u)
          a.marginal_count(i) += 1.0L;
      try {
        estimator.estimate(d, mask, est);
      } catch (const EstimationError&) {
        ++a.failed;
        continue;
      }
      const Vector e = est - theta;
      Vector es = e;
      for (Eigen::Index i = 0; i < m; ++i)
        if (!((mask >> i) & 1u))
          es(i) = 0.0;
      const LdVector el = e.cast<long double>(), esl = es.cast<long double>();
      a.mse += el * el.transpose();
      a.msse += esl * esl.transpose();
      a.cond_sum_sq += esl.cwiseProduct(esl);
      auto& s = a.by_support[mask];
      if (s.count == 0) {
        s.sum = LdVector::Zero(m);
        s.sum_sq = LdVector::Zero(m);
      }
      ++s.count;
      s.sum += esl;
      s.sum_sq += esl.cwiseProduct(esl);
      ++a.done;
    }
    acc[r.index] = std::move(a);
  });

  // Fixed-order reduction.
  BatchAcc tot;
  tot.msse = LdMatrix::Zero(m, m);
  tot.mse = LdMatrix::Zero(m, m);
  tot.marginal_count = LdVector::Zero(m);
  tot.cond_sum_sq = LdVector::Zero(m);
  tot.cand_count.assign(candidates.size(), 0);
  for (const auto& a : acc) {
    tot.done += a.done;
    tot.failed += a.failed;
    tot.empty += a.empty;
    tot.other += a.other;
    tot.msse += a.msse;
    tot.mse += a.mse;
    tot.marginal_count += a.marginal_count;
    tot.cond_sum_sq += a.cond_sum_sq;
    for (std::size_t k = 0; k < candidates.size(); ++k)
      tot.cand_count[k] += a.cand_count[k];
    for (const auto& [mask, s] : a.by_support) {
      auto& t = tot.by_support[mask];
      if (t.count == 0) {
        t.sum = LdVector::Zero(m);
        t.sum_sq = LdVector::Zero(m);
      }
      t.count += s.count;
      t.sum += s.sum;
      t.sum_sq += s.sum_sq;
    }
  }
  if (tot.done == 0)
    throw EstimationError("run_mc: the estimator failed on every trial");

  McRunResult out;
  out.trials = trials;
  out.failed = tot.failed;
  out.seed = seed;
  const long double done = static_cast<long double>(tot.done);
  out.msse = (tot.msse / done).cast<double>();
  out.mse = (tot.mse / done).cast<double>();

  const auto& truth = model.truth();
  auto trace_true = [&](const LdMatrix& mat) {
    long double s = 0.0L;
    for (std::size_t i : truth.indices())
      s += mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    return s;
  };
  out.msse_trace_true = static_cast<double>(trace_true(tot.msse) / done);
  out.mse_trace_true = static_cast<double>(trace_true(tot.mse) / done);

  std::vector<double> msse_tr, mse_tr;
  std::vector<Matrix> msse_b, mse_b;
  for (const auto& a : acc) {
    if (a.done == 0)
      continue;
    const long double n = static_cast<long double>(a.done);
    msse_tr.push_back(static_cast<double>(trace_true(a.msse) / n));
    mse_tr.push_back(static_cast<double>(trace_true(a.mse) / n));
    msse_b.push_back((a.msse / n).cast<double>());
    mse_b.push_back((a.mse / n).cast<double>());
  }
  out.msse_trace_true_se = batch_se(msse_tr);
  out.mse_trace_true_se = batch_se(mse_tr);
  out.msse_se = Matrix::Zero(m, m);
  out.mse_se = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      std::vector<double> v1, v2;
      for (std::size_t b = 0; b < msse_b.size(); ++b) {
        v1.push_back(msse_b[b](i, j));
        v2.push_back(mse_b[b](i, j));
      }
      out.msse_se(i, j) = batch_se(v1);
      out.mse_se(i, j) = batch_se(v2);
    }

  const double nt = static_cast<double>(trials);
  out.selection_freq.resize(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t k = 0; k < candidates.size(); ++k)
    out.selection_freq(static_cast<Eigen::Index>(k)) = static_cast<double>(tot.cand_count[k]) / nt;
  out.empty_freq = static_cast<double>(tot.empty) / nt;
  out.other_freq = static_cast<double>(tot.other) / nt;
  out.marginal_freq = (tot.marginal_count / static_cast<long double>(trials)).cast<double>();

  // Conditional second moments per index use the per-support sums of squares.
  out.cond_second = Vector::Zero(m);
  out.cond_second_se = Vector::Zero(m);
  LdVector n_sel = LdVector::Zero(m);
  for (const auto& [mask, s] : tot.by_support)
    for (Eigen::Index i = 0; i < m; ++i)
      if ((mask >> i) & 1u)
        n_sel(i) += static_cast<long double>(s.count);
  // Fourth moments are not tracked; the spread of per-batch conditional means gives the error.
  for (Eigen::Index i = 0; i < m; ++i) {
    if (n_sel(i) == 0.0L)
      continue;
    out.cond_second(i) = static_cast<double>(tot.cond_sum_sq(i) / n_sel(i));
    std::vector<double> means;
    for (const auto& a : acc) {
      long double cnt = 0.0L;
      for (const auto& [mask, s] : a.by_support)
        if ((mask >> i) & 1u)
          cnt += static_cast<long double>(s.count);
      if (cnt > 0.0L)
        means.push_back(static_cast<double>(a.cond_sum_sq(i) / cnt));
    }
    out.cond_second_se(i) = batch_se(means);
  }

  for (const auto& [mask, s] : tot.by_support) {
    ConditionalMoments cm;
    cm.count = s.count;
    cm.mean = (s.sum / static_cast<long double>(s.count)).cast<double>();
    cm.second_diag = (s.sum_sq / static_cast<long double>(s.count)).cast<double>();
    out.by_support.emplace(mask, std::move(cm));
  }
  return out;
}

} // namespace selcrb::experiments
