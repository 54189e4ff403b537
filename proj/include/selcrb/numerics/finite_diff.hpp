#pragma once

#include "selcrb/numerics/linalg.hpp"

#include <functional>

namespace selcrb::numerics {

using ScalarField = std::function<double(const Vector&)>;

struct FiniteDiff {
  Vector gradient;
  Matrix hessian; // symmetric
};

inline constexpr double kDefaultFdStep = 1e-5;

/// Central-difference gradient and Hessian, both O(step^2).
///
/// Meant for tests: the Hessian uses f on the 4-point stencils at
/// x +- h e_i +- h e_j, so rounding error grows like eps * |f| / h^2 and
/// callers checking second derivatives usually want a larger step than
/// the default. Throws DomainError if f returns a non-finite value.
FiniteDiff finite_diff(const ScalarField& f, const Vector& x, double step = kDefaultFdStep);

Vector fd_gradient(const ScalarField& f, const Vector& x, double step = kDefaultFdStep);

/// Scalar convenience wrappers.
double fd_derivative(const std::function<double(double)>& f, double x,
                     double step = kDefaultFdStep);
double fd_second_derivative(const std::function<double(double)>& f, double x,
                            double step = kDefaultFdStep);

} // namespace selcrb::numerics
