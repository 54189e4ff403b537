#include "selcrb/numerics/linalg.hpp"

#include "selcrb/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace selcrb::numerics {

Tolerance::Tolerance(double abs_tol, double rel_tol) : abs(abs_tol), rel(rel_tol) {
  if (abs < 0.0 || rel < 0.0 || (abs == 0.0 && rel == 0.0))
    throw DomainError("Tolerance: abs and rel must be nonnegative and not both zero");
}

bool Tolerance::close(double a, double b) const {
  return std::abs(a - b) <= abs + rel * std::max(std::abs(a), std::abs(b));
}

SymMatrix::SymMatrix(std::size_t dim) {
  if (dim == 0)
    throw DomainError("SymMatrix: dimension must be positive");
  const auto n = static_cast<Eigen::Index>(dim);
  m_ = Matrix::Zero(n, n);
}

SymMatrix SymMatrix::from(const Matrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DomainError("SymMatrix: matrix must be square and nonempty");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    throw DomainError("SymMatrix: matrix is not symmetric");
  SymMatrix s;
  s.m_ = 0.5 * (m + m.transpose());
  return s;
}

SymMatrix SymMatrix::identity(std::size_t dim) {
  SymMatrix s(dim);
  s.m_.setIdentity();
  return s;
}

SymMatrix SymMatrix::diagonal(const Vector& d) {
  SymMatrix s(static_cast<std::size_t>(d.size()));
  s.m_.diagonal() = d;
  return s;
}

void SymMatrix::set(std::size_t i, std::size_t j, double v) {
  const auto a = static_cast<Eigen::Index>(i);
  const auto b = static_cast<Eigen::Index>(j);
  m_(a, b) = v;
  m_(b, a) = v;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  if (o.dim() != dim())
    throw DomainError("SymMatrix: dimension mismatch");
  m_ += o.m_;
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

double condition_number(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.matrix(), Eigen::EigenvaluesOnly);
  const Vector ev = es.eigenvalues().cwiseAbs();
  const double lo = ev.minCoeff();
  if (lo == 0.0)
    return std::numeric_limits<double>::infinity();
  return ev.maxCoeff() / lo;
}

double min_eigenvalue(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_positive_definite(const SymMatrix& m) {
  return min_eigenvalue(m) > 0.0;
}

SymMatrix sym_inverse(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.matrix());
  const Vector& ev = es.eigenvalues();
  const double lo = ev.cwiseAbs().minCoeff();
  const double cond =
      lo == 0.0 ? std::numeric_limits<double>::infinity() : ev.cwiseAbs().maxCoeff() / lo;
  if (!(cond <= kSingularConditionThreshold))
    throw SingularFim(cond);
  const Matrix& v = es.eigenvectors();
  return SymMatrix::from(v * ev.cwiseInverse().asDiagonal() * v.transpose(), 1e-8);
}

SymMatrix sandwich_inverse(const Matrix& b, const SymMatrix& m) {
  if (b.cols() != m.matrix().rows())
    throw DomainError("sandwich_inverse: dimension mismatch");
  const double cond = condition_number(m);
  if (!(cond <= kSingularConditionThreshold) || !is_positive_definite(m))
    throw SingularFim(cond);
  Eigen::LDLT<Matrix> ldlt(m.matrix());
  const Matrix x = ldlt.solve(b.transpose());
  return SymMatrix::from(b * x, 1e-6);
}

} // namespace selcrb::numerics
