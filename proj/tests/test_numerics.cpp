#include "selcrb/error.hpp"
#include "selcrb/numerics/finite_diff.hpp"
#include "selcrb/numerics/linalg.hpp"
#include "selcrb/numerics/special.hpp"

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <doctest.h>

using namespace selcrb;
using namespace selcrb::numerics;

TEST_CASE("normal functions agree with boost, tails without cancellation") {
  const boost::math::normal n;
  for (double x : {-38.0, -12.0, -3.3, -1.0, 0.0, 0.4, 2.5, 9.0, 37.0}) {
    CHECK(std_normal_pdf(x) == doctest::Approx(pdf(n, x)).epsilon(1e-14));
    CHECK(std_normal_cdf(x) == doctest::Approx(cdf(n, x)).epsilon(1e-13));
    CHECK(std_normal_sf(x) == doctest::Approx(cdf(complement(n, x))).epsilon(1e-13));
  }
  // Far right tail: 1 - cdf would be exactly 0 here.
  CHECK(std_normal_interval(10.0, 11.0) > 0.0);
  CHECK(std_normal_interval(10.0, 11.0) == doctest::Approx(cdf(n, -10.0) - cdf(n, -11.0)).epsilon(1e-12));
  CHECK(std_normal_interval(-2.0, 3.0) + std_normal_outside(-2.0, 3.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std_normal_interval(1.0, 1.0) == 0.0);
}

TEST_CASE("noncentral chi-squared against boost over a grid") {
  for (double dof : {1.0, 3.0, 5.0})
    for (double nc : {0.0, 0.3, 4.0, 40.0, 900.0})
      for (double x : {0.05, 1.0, 2.0, 7.5, 30.0, 1000.0}) {
        const boost::math::non_central_chi_squared d(dof, nc);
        const double sf = cdf(complement(d, x)), cdf_ = cdf(d, x);
        INFO("dof=" << dof << " nc=" << nc << " x=" << x);
        CHECK(noncentral_chi2_sf(dof, nc, x) == doctest::Approx(sf).epsilon(1e-9).scale(1e-300));
        CHECK(noncentral_chi2_cdf(dof, nc, x) == doctest::Approx(cdf_).epsilon(1e-9).scale(1e-300));
      }
}

TEST_CASE("noncentral chi-squared saturates for huge noncentrality") {
  CHECK(noncentral_chi2_sf(1.0, 1e20, 2.0) == 1.0);
  CHECK(noncentral_chi2_cdf(1.0, 1e20, 2.0) == 0.0);
  CHECK(marcum_q_half_diff(0.5, 1e10, std::sqrt(2.0)) == 0.0);
  CHECK(marcum_q_half_diff2(0.5, 1e10, std::sqrt(2.0)) == 0.0);
}

TEST_CASE("Marcum Q of half-integer order and its order differences") {
  for (double a : {0.0, 0.2, 1.0, 3.0, 6.0})
    for (double b : {0.3, 1.4142135623730951, 4.0}) {
      const double q05 = marcum_q_half(0.5, a, b), q15 = marcum_q_half(1.5, a, b),
                   q25 = marcum_q_half(2.5, a, b);
      const boost::math::non_central_chi_squared d(1.0, a * a);
      CHECK(q05 == doctest::Approx(cdf(complement(d, b * b))).epsilon(1e-10));
      CHECK(q05 + marcum_q_half_complement(0.5, a, b) == doctest::Approx(1.0).epsilon(1e-14));
      // Q_{m+1} - Q_m = P_m - P_{m+1}: lower tails avoid the cancellation near Q = 1.
      auto lower = [&](double dof) {
        return cdf(boost::math::non_central_chi_squared(dof, a * a), b * b);
      };
      const double p1 = lower(1.0), p3 = lower(3.0), p5 = lower(5.0);
      CHECK(marcum_q_half_diff(0.5, a, b) == doctest::Approx(p1 - p3).epsilon(1e-8).scale(1e-14));
      CHECK(marcum_q_half_diff(1.5, a, b) == doctest::Approx(p3 - p5).epsilon(1e-8).scale(1e-14));
      CHECK(marcum_q_half_diff2(0.5, a, b) == doctest::Approx(2 * p3 - p1 - p5).epsilon(1e-7).scale(1e-14));
      CHECK(q25 - q15 == doctest::Approx(p3 - p5).epsilon(1e-4).scale(1e-14));
    }
  CHECK_THROWS_AS(marcum_q_half(1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(marcum_q_half_diff(2.5, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(marcum_q_half(0.5, -1.0, 1.0), DomainError);
  CHECK_THROWS_AS(noncentral_chi2_sf(1.0, 1.0, std::nan("")), DomainError);
}

TEST_CASE("symmetric inverse round trip and singular detection") {
  Matrix a(3, 3);
  a << 4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2;
  const auto m = SymMatrix::from(a);
  const auto inv = sym_inverse(m);
  CHECK((inv.matrix() * a - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((sym_inverse(inv).matrix() - a).cwiseAbs().maxCoeff() < 1e-12);
  // Symmetric storage is exact.
  CHECK(inv(0, 2) == inv(2, 0));

  Matrix s(2, 2);
  s << 1, 1, 1, 1;
  CHECK_THROWS_AS(sym_inverse(SymMatrix::from(s)), SingularFim);
  CHECK_FALSE(is_positive_definite(SymMatrix::from(s)));
  CHECK(min_eigenvalue(SymMatrix::from(s)) == doctest::Approx(0.0).scale(1.0));

  Matrix b(2, 3);
  b << 1, 0, 2, 0, 1, -1;
  const auto sw = sandwich_inverse(b, m);
  CHECK((sw.matrix() - b * a.inverse() * b.transpose()).cwiseAbs().maxCoeff() < 1e-13);
  Matrix indef(2, 2);
  indef << 1, 0, 0, -1;
  CHECK_THROWS_AS(sandwich_inverse(Matrix::Identity(2, 2), SymMatrix::from(indef)), SingularFim);

  Matrix asym(2, 2);
  asym << 1, 2, 3, 4;
  CHECK_THROWS_AS(SymMatrix::from(asym), DomainError);
}

TEST_CASE("finite differences recover a quadratic form exactly") {
  Matrix q(2, 2);
  q << 2, 0.5, 0.5, 1;
  Vector g(2);
  g << 1, -2;
  auto f = [&](const Vector& x) { return 0.5 * x.dot(q * x) + g.dot(x); };
  Vector x0(2);
  x0 << 0.3, -0.7;
  const auto fd = finite_diff(f, x0, 1e-3);
  CHECK((fd.gradient - (q * x0 + g)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((fd.hessian - q).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(fd_derivative([](double t) { return std::sin(t); }, 0.4) == doctest::Approx(std::cos(0.4)).epsilon(1e-8));
  CHECK(fd_second_derivative([](double t) { return std::exp(t); }, 0.1) ==
        doctest::Approx(std::exp(0.1)).epsilon(1e-5));
  CHECK_THROWS_AS(fd_gradient([](const Vector&) { return std::nan(""); }, x0), DomainError);
}
