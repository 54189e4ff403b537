#include "selcrb/numerics/finite_diff.hpp"

#include "selcrb/error.hpp"

#include <cmath>

namespace selcrb::numerics {

namespace {

double eval(const ScalarField& f, const Vector& x) {
  const double v = f(x);
  if (!std::isfinite(v))
    throw DomainError("finite_diff: function returned a non-finite value");
  return v;
}

void check_step(double step) {
  if (!(step > 0.0) || !std::isfinite(step))
    throw DomainError("finite_diff: step must be positive");
}

} // namespace

Vector fd_gradient(const ScalarField& f, const Vector& x, double step) {
  check_step(step);
  Vector g(x.size());
  Vector y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    y(i) = x(i) + step;
    const double fp = eval(f, y);
    y(i) = x(i) - step;
    const double fm = eval(f, y);
    y(i) = x(i);
    g(i) = (fp - fm) / (2.0 * step);
  }
  return g;
}

FiniteDiff finite_diff(const ScalarField& f, const Vector& x, double step) {
  check_step(step);
  const Eigen::Index n = x.size();
  FiniteDiff out{fd_gradient(f, x, step), Matrix::Zero(n, n)};
  const double f0 = eval(f, x);
  Vector y = x;
  const double h2 = step * step;
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = x(i) + step;
    const double fp = eval(f, y);
    y(i) = x(i) - step;
    const double fm = eval(f, y);
    y(i) = x(i);
    out.hessian(i, i) = (fp - 2.0 * f0 + fm) / h2;
    for (Eigen::Index j = 0; j < i; ++j) {
      auto at = [&](double si, double sj) {
        y(i) = x(i) + si * step;
        y(j) = x(j) + sj * step;
        const double v = eval(f, y);
        y(i) = x(i);
        y(j) = x(j);
        return v;
      };
      const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h2);
      out.hessian(i, j) = v;
      out.hessian(j, i) = v;
    }
  }
  return out;
}

double fd_derivative(const std::function<double(double)>& f, double x, double step) {
  Vector v(1);
  v(0) = x;
  return fd_gradient([&](const Vector& y) { return f(y(0)); }, v, step)(0);
}

double fd_second_derivative(const std::function<double(double)>& f, double x, double step) {
  Vector v(1);
  v(0) = x;
  return finite_diff([&](const Vector& y) { return f(y(0)); }, v, step).hessian(0, 0);
}

} // namespace selcrb::numerics
