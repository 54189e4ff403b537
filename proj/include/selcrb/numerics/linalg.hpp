#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace selcrb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace numerics {

/// Absolute/relative tolerance pair; `a` and `b` are close when
/// |a - b| <= abs + rel * max(|a|, |b|).
struct Tolerance {
  double abs = 0.0;
  double rel = 0.0;

  Tolerance(double abs_tol, double rel_tol);
  bool close(double a, double b) const;
};

/// Real symmetric matrix. Entries are stored symmetrically, so
/// (i, j) and (j, i) compare equal bitwise.
class SymMatrix {
public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim); // zero matrix

  /// Accepts `m` if it is square and symmetric to within `tol` relative to its
  /// largest entry; the stored value is (m + m^T) / 2.
  static SymMatrix from(const Matrix& m, double tol = 1e-12);
  static SymMatrix identity(std::size_t dim);
  static SymMatrix diagonal(const Vector& d);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Matrix& matrix() const noexcept { return m_; }
  double trace() const { return m_.trace(); }

  /// Sets (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double v);

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator*=(double s);
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

private:
  Matrix m_;
};

/// Ratio of largest to smallest eigenvalue magnitude (infinity for a singular matrix).
double condition_number(const SymMatrix& m);

/// Smallest eigenvalue.
double min_eigenvalue(const SymMatrix& m);

bool is_positive_definite(const SymMatrix& m);

/// Condition number above which a Fisher information matrix is declared singular.
inline constexpr double kSingularConditionThreshold = 1e12;

/// Inverse through a symmetric eigendecomposition. Throws SingularFim when the
/// condition estimate exceeds kSingularConditionThreshold.
SymMatrix sym_inverse(const SymMatrix& m);

/// B * M^{-1} * B^T via an LDL^T solve (B is rows x dim). M must be positive definite;
/// throws SingularFim otherwise.
SymMatrix sandwich_inverse(const Matrix& b, const SymMatrix& m);

} // namespace numerics
} // namespace selcrb
