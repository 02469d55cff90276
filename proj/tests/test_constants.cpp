#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "formspec/constants.hpp"
#include "formspec/errors.hpp"

using namespace formspec;
using namespace formspec::constants;

namespace {

// Composite Simpson rule; independent of the library's adaptive quadrature.
template <class F>
double simpson(F f, double a, double b, int panels = 4000) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Positive root of x sinh L + x^2 (cosh L - 1) = 2, the n = 2 root equation.
double n2_root(double lambda) {
  const double s = std::sinh(lambda);
  const double c1 = std::cosh(lambda) - 1.0;
  return (-s + std::sqrt(s * s + 8.0 * c1)) / (2.0 * c1);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g;
  for (int i = 0; i < count; ++i) g.push_back(lo * std::pow(hi / lo, i / double(count - 1)));
  return g;
}

}  // namespace

TEST_CASE("omega matches the sine-power closed forms") {
  const double pi = std::numbers::pi;
  CHECK(omega(2) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(omega(3) == doctest::Approx(pi / 2.0).epsilon(1e-13));
  CHECK(omega(4) == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  CHECK(omega(5) == doctest::Approx(3.0 * pi / 8.0).epsilon(1e-13));
  // int sin^m = (m-1)/m int sin^{m-2}
  for (int n = 4; n <= 12; ++n) {
    CHECK(omega(n) == doctest::Approx(omega(n - 2) * (n - 2) / (n - 1)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(omega(1), DomainError);
}

TEST_CASE("a_n values") {
  CHECK(a_n(2) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  const double w3 = std::numbers::pi / 2.0;
  CHECK(a_n(3) == doctest::Approx(w3 / ((1.0 + w3) * (1.0 + w3))).epsilon(1e-13));
  CHECK(a_n(3) == doctest::Approx(0.237679).epsilon(1e-5));
}

TEST_CASE("root for n = 2 agrees with the quadratic formula") {
  for (double lam : log_grid(1e-2, 10.0, 25)) {
    CAPTURE(lam);
    CHECK(c_lambda_root(2, lam) == doctest::Approx(n2_root(lam)).epsilon(1e-11));
  }
}

TEST_CASE("root solves the defining integral equation") {
  for (int n = 2; n <= 8; ++n) {
    for (double lam : {0.01, 0.3, 1.0, 4.0}) {
      CAPTURE(n);
      CAPTURE(lam);
      const double x = c_lambda_root(n, lam);
      const double f = x * simpson([&](double t) { return std::pow(std::cosh(t) + x * std::sinh(t), n - 1); },
                                   0.0, lam);
      CHECK(f == doctest::Approx(omega(n)).epsilon(1e-9));
      CHECK(std::abs(root_function(n, lam, x) - omega(n)) < 1e-10 * omega(n));
    }
  }
  CHECK_THROWS_AS(c_lambda_root(2, 0.0), DomainError);
  CHECK_THROWS_AS(c_lambda_root(2, -1.0), DomainError);
}

TEST_CASE("Lambda C(Lambda) stays between a_n exp(-(n-1) Lambda) and omega_n") {
  for (int n = 2; n <= 8; ++n) {
    for (double lam : log_grid(1e-2, 10.0, 50)) {
      CAPTURE(n);
      CAPTURE(lam);
      const double v = lambda_c_product(n, lam);
      CHECK(v <= omega(n));
      CHECK(a_n(n) * std::exp(-(n - 1) * lam) <= v);
    }
  }
}

TEST_CASE("Lambda C(Lambda) decreases in Lambda") {
  for (int n = 2; n <= 6; ++n) {
    double prev = lambda_c_product(n, 1e-3);
    for (double lam : log_grid(2e-3, 10.0, 30)) {
      const double v = lambda_c_product(n, lam);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("small-Lambda limit of Lambda C(Lambda)") {
  // With x = c / Lambda the equation tends to ((1 + c)^n - 1) / n = omega_n.
  CHECK(lambda_c_product(2, 0.0) == doctest::Approx(std::sqrt(5.0) - 1.0).epsilon(1e-14));
  CHECK(lambda_c_product(2, 1e-4) == doctest::Approx(std::sqrt(5.0) - 1.0).epsilon(1e-4));
  for (int n = 3; n <= 6; ++n) {
    const double limit = std::pow(1.0 + n * omega(n), 1.0 / n) - 1.0;
    CHECK(lambda_c_product(n, 0.0) == doctest::Approx(limit).epsilon(1e-13));
    CHECK(lambda_c_product(n, 1e-5) == doctest::Approx(limit).epsilon(1e-4));
  }
  CHECK(r_lambda(1.0, 2, 0.0) == doctest::Approx(1.0 / (std::sqrt(5.0) - 1.0)).epsilon(1e-14));
}

TEST_CASE("Moser product: partial product, tail and closed-form bound") {
  for (double t : {0.1, 1.0, 10.0, 100.0}) {
    for (double g : {1.1, 1.5, 2.0, 4.0}) {
      CAPTURE(t);
      CAPTURE(g);
      const int terms = moser_product_terms(t, g);
      CHECK(moser_product_tail_bound(t, g, terms) < 1e-12);
      double brute = 1.0;
      for (int i = 0; i < terms; ++i) brute *= std::pow(1.0 + t * std::pow(g, i + 1), std::pow(g, -(i + 1)));
      const double partial = moser_product_partial(t, g, terms);
      CHECK(partial == doctest::Approx(brute).epsilon(1e-10));
      CHECK(partial <= moser_product_bound(t, g));
    }
  }
}

TEST_CASE("lower bound at the flat reference point") {
  GeometryBudget b;
  b.dim = 4;
  b.p_exponent = 4.0;
  b.kappa = 0.0;
  b.riem_2p = 0.0;
  b.diameter = 1.0;
  const AbstractConstants ones;
  const double tc = std::pow(4.0, -0.125) * std::exp(-0.125);
  CHECK(tilde_c(2, 4.0, DeltaBranch::main, ones) == doctest::Approx(tc).epsilon(1e-12));
  const auto lb = theorem_t3(b, ones);
  CHECK(std::abs(lb.value - 1.0 / (4.0 * std::numbers::e)) < 1e-6);
  CHECK(lb.value <= 1.0);
}

TEST_CASE("lower bound is non-increasing along kappa and curvature rays") {
  GeometryBudget b;
  b.dim = 4;
  b.p_exponent = 4.0;
  b.diameter = 2.0;
  const AbstractConstants ones;
  double prev = theorem_t3_rhs(b, ones);
  for (int i = 1; i <= 10; ++i) {
    b.kappa = i * 0.5;
    const double v = theorem_t3_rhs(b, ones);
    CHECK(v <= prev);
    prev = v;
  }
  b.kappa = 0.0;
  prev = theorem_t3_rhs(b, ones);
  for (int i = 1; i <= 10; ++i) {
    b.riem_2p = i * 1.0;
    const double v = theorem_t3_rhs(b, ones);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("budget validation") {
  GeometryBudget b;
  b.diameter = 0.0;
  CHECK_THROWS_AS(b.validate(), DomainError);
  b.diameter = 1.0;
  b.kappa = -1.0;
  CHECK_THROWS_AS(b.validate(), DomainError);
  b.kappa = 0.0;
  b.dim = 2;
  CHECK_THROWS_AS(sobolev_cs(b, AbstractConstants{}), DomainError);
  AbstractConstants bad{0.0, 1.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("function-case Li-Yau predicate") {
  CHECK(li_yau_predicate(1.0, 1.0, 0.0, 1.0));
  CHECK_FALSE(li_yau_predicate(0.5, 1.0, 0.0, 1.0));
  // kappa enters through exp(-c sqrt(kappa D^2))
  CHECK(li_yau_predicate(std::exp(-2.0), 1.0, 4.0, 1.0));
  CHECK_FALSE(li_yau_predicate(std::exp(-2.0) * 0.99, 1.0, 4.0, 1.0));
}
