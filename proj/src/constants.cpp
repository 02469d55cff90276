#include "formspec/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "formspec/errors.hpp"

namespace formspec::constants {

namespace {

constexpr double kQuadTol = 1e-13;
constexpr unsigned kQuadDepth = 10;

template <class F>
double integrate(F&& f, double a, double b) {
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 31>;
  double error = 0.0;
  return Quadrature::integrate(f, a, b, kQuadDepth, kQuadTol, &error);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

// ln(1 + t g^j) without forming g^j.
double log1p_scaled(double t, double log_gamma, int j) {
  const double log_arg = std::log(t) + j * log_gamma;
  if (log_arg > 30.0) return log_arg + std::log1p(std::exp(-log_arg));
  return std::log1p(std::exp(log_arg));
}

}  // namespace

void GeometryBudget::validate() const {
  require(dim >= 1, "dimension must be positive");
  require(diameter > 0.0, "diameter must be positive");
  require(kappa >= 0.0, "kappa must be non-negative");
  require(riem_2p >= 0.0, "||Riem||_2p must be non-negative");
  require(ric_minus_p >= 0.0, "||Ric^-||_p must be non-negative");
}

double GeometryBudget::lambda_scale() const { return std::sqrt(kappa * diameter * diameter); }

void AbstractConstants::validate() const {
  require(c_n > 0.0 && c_np > 0.0 && c0_np > 0.0, "abstract constants must be positive");
}

double omega(int n) {
  require(n >= 2, "omega: n must be >= 2");
  return integrate([n](double t) { return std::pow(std::sin(t), n - 1); }, 0.0,
                   std::numbers::pi);
}

double a_n(int n) {
  const double w = omega(n);
  return w * std::pow(1.0 + w, 1 - n);
}

double root_function(int n, double lambda_scale, double x) {
  require(n >= 2, "root_function: n must be >= 2");
  return x * integrate(
                 [n, x](double t) { return std::pow(std::cosh(t) + x * std::sinh(t), n - 1); },
                 0.0, lambda_scale);
}

double c_lambda_root(int n, double lambda_scale) {
  require(n >= 2, "c_lambda_root: n must be >= 2");
  require(lambda_scale > 0.0 && std::isfinite(lambda_scale),
          "c_lambda_root: Lambda must be positive (the integral vanishes at 0)");
  const double w = omega(n);

  // F(x) >= x int cosh^{n-1}, so F(hi) >= omega_n; F(0) = 0 < omega_n.
  const double cosh_integral = integrate(
      [n](double t) { return std::pow(std::cosh(t), n - 1); }, 0.0, lambda_scale);
  const double hi = w / cosh_integral;

  auto value_and_slope = [&](double x) {
    const double main = integrate(
        [n, x](double t) { return std::pow(std::cosh(t) + x * std::sinh(t), n - 1); }, 0.0,
        lambda_scale);
    const double deriv_part =
        n == 2 ? integrate([](double t) { return std::sinh(t); }, 0.0, lambda_scale)
               : integrate(
                     [n, x](double t) {
                       return std::pow(std::cosh(t) + x * std::sinh(t), n - 2) * std::sinh(t);
                     },
                     0.0, lambda_scale);
    return std::make_pair(x * main - w, main + x * (n - 1) * deriv_part);
  };

  std::uintmax_t max_iter = 200;
  const int digits = std::numeric_limits<double>::digits - 4;
  return boost::math::tools::newton_raphson_iterate(value_and_slope, hi, 0.0, hi, digits,
                                                    max_iter);
}

double lambda_c_product(int n, double lambda_scale) {
  require(lambda_scale >= 0.0, "lambda_c_product: Lambda must be non-negative");
  // With x = c / Lambda the root equation tends to ((1 + c)^n - 1) / n = omega_n.
  if (lambda_scale == 0.0) return std::pow(1.0 + n * omega(n), 1.0 / n) - 1.0;
  return lambda_scale * c_lambda_root(n, lambda_scale);
}

double r_lambda(double diameter, int n, double lambda_scale) {
  require(diameter > 0.0, "r_lambda: D must be positive");
  return diameter / lambda_c_product(n, lambda_scale);
}

double sobolev_s_pq(const GeometryBudget& budget, double vol_ratio, double sigma_npq,
                    double q) {
  budget.validate();
  const double p = budget.p_exponent;
  const double n = budget.dim;
  require(budget.dim >= 2, "sobolev_s_pq: dimension must be >= 2");
  require(vol_ratio > 0.0 && sigma_npq > 0.0, "sobolev_s_pq: vol_ratio and sigma must be positive");
  require(q >= 1.0, "sobolev_s_pq: q must be >= 1");
  require(p >= 1.0 && std::isfinite(p), "sobolev_s_pq: p must be finite and >= 1");
  if (q < n) require(p <= n * q / (n - q), "sobolev_s_pq: p exceeds the Sobolev exponent nq/(n-q)");
  const double radius = budget.diameter / lambda_c_product(budget.dim, budget.lambda_scale());
  return std::pow(vol_ratio, 1.0 / p - 1.0 / q) * radius * sigma_npq;
}

double sobolev_cs(const GeometryBudget& budget, const AbstractConstants& consts) {
  budget.validate();
  consts.validate();
  require(budget.dim >= 3, "sobolev_cs: the exponent 2m/(m-2) needs dimension >= 3");
  return consts.c_n * budget.diameter * std::exp((budget.dim - 1) * budget.lambda_scale());
}

double moser_sup_bound(double c, double cs, double l2_norm, const AbstractConstants& consts) {
  require(c >= 0.0 && cs >= 0.0 && l2_norm >= 0.0, "moser_sup_bound: arguments must be >= 0");
  return std::exp(consts.c_n * std::sqrt(c) * cs) * l2_norm;
}

MoserParameters moser_parameters(const GeometryBudget& budget, double lambda, double cs) {
  budget.validate();
  require(lambda > 0.0, "moser_parameters: lambda must be positive");
  require(cs > 0.0, "moser_parameters: C_s must be positive");
  const double n = budget.dim;
  const double p = budget.p_exponent;
  require(budget.dim > 2, "moser_parameters: dimension must exceed 2");
  require(2.0 * p > n, "moser_parameters: need 2p > n");

  MoserParameters out;
  out.b_value = lambda + budget.ric_minus_p + budget.riem_2p;
  const double d2 = budget.diameter * budget.diameter;
  out.t_value = 4.0 * cs * std::sqrt(out.b_value) * std::sqrt(1.0 + out.b_value * d2);
  out.alpha = 2.0 * p * n / (2.0 * p - n);
  out.beta = 2.0 * p * n / (2.0 * p - n + p * n);
  out.gamma = n * (p - 1.0) / (p * (n - 2.0));
  out.gamma0 = 2.0 * n * p / (2.0 * p - n);
  out.sobolev_cs = cs;
  return out;
}

double moser_product_bound(double t, double gamma) {
  require(gamma > 1.0, "moser_product_bound: gamma must exceed 1");
  require(t >= 0.0, "moser_product_bound: t must be non-negative");
  return std::exp(2.0 * std::sqrt(gamma) / (gamma - 1.0)) *
         std::pow(1.0 + std::sqrt(t), 2.0 / (gamma - 1.0));
}

double moser_product_partial(double t, double gamma, int n_terms) {
  require(gamma > 1.0, "moser_product_partial: gamma must exceed 1");
  require(n_terms >= 1, "moser_product_partial: need at least one term");
  require(t > 0.0, "moser_product_partial: t must be positive");
  const double log_gamma = std::log(gamma);
  double log_sum = 0.0;
  for (int i = 0; i < n_terms; ++i) {
    const int j = i + 1;
    log_sum += log1p_scaled(t, log_gamma, j) * std::exp(-j * log_gamma);
  }
  return std::exp(log_sum);
}

double moser_product_tail_bound(double t, double gamma, int n_terms) {
  require(gamma > 1.0, "moser_product_tail_bound: gamma must exceed 1");
  // ln(1 + t g^j) <= ln(1 + t) + j ln g, summed against g^{-j} for j >= N + 1.
  const double r = 1.0 / gamma;
  const int m = n_terms + 1;
  const double rm = std::pow(r, m);
  const double geometric = rm / (1.0 - r);
  const double weighted = rm * (m - (m - 1) * r) / ((1.0 - r) * (1.0 - r));
  return std::log1p(t) * geometric + std::log(gamma) * weighted;
}

int moser_product_terms(double t, double gamma, double tail_tol) {
  int n = 1;
  while (moser_product_tail_bound(t, gamma, n) >= tail_tol) {
    ++n;
    if (n > 1'000'000) throw DomainError("moser_product_terms: tail does not converge");
  }
  return n;
}

double gradient_sup_bound(const MoserParameters& params, double lambda, double diameter,
                          double l2_norm, const AbstractConstants& consts) {
  require(lambda > 0.0, "gradient_sup_bound: lambda must be positive");
  require(diameter > 0.0, "gradient_sup_bound: D must be positive");
  require(l2_norm >= 0.0, "gradient_sup_bound: l2 norm must be >= 0");
  consts.validate();
  const double s = std::sqrt(lambda) * diameter;
  const double base = 1.0 + std::sqrt(params.t_value);
  const double first = consts.c_np * std::pow(base, params.alpha) * s;
  const double second = consts.c_np * std::pow(base, params.beta) *
                        std::pow(s, params.beta / params.alpha) *
                        std::exp(consts.c_np * std::sqrt(lambda) * params.sobolev_cs);
  return std::min(first, second) * l2_norm / diameter;
}

double eigenform_sup_bound(double lambda, double cs, double l2_norm,
                           const AbstractConstants& consts) {
  require(lambda >= 0.0 && cs >= 0.0 && l2_norm >= 0.0,
          "eigenform_sup_bound: arguments must be >= 0");
  return std::exp(consts.c_n * std::sqrt(lambda) * cs) * l2_norm;
}

EpsilonBreakdown epsilon_breakdown(const GeometryBudget& budget, double lambda, double cs,
                                   const AbstractConstants& consts) {
  consts.validate();
  const MoserParameters params = moser_parameters(budget, lambda, cs);
  const double s = std::sqrt(lambda) * budget.diameter;
  const double base = 1.0 + std::sqrt(params.t_value);
  EpsilonBreakdown out;
  out.first = consts.c_np * std::pow(base, params.alpha) * s;
  out.second = consts.c_np * std::pow(base, params.beta) * std::pow(s, params.beta / params.alpha) *
               std::exp(consts.c_np * std::sqrt(lambda) * cs);
  out.active_branch = out.first <= out.second ? 1 : 2;
  out.value = std::min(out.first, out.second);
  return out;
}

double epsilon_threshold(const GeometryBudget& budget, double lambda, double cs,
                         const AbstractConstants& consts) {
  return epsilon_breakdown(budget, lambda, cs, consts).value;
}

double delta_exponent(int half_dim, double p, DeltaBranch branch) {
  require(half_dim >= 1, "delta_exponent: half-dimension must be >= 1");
  const double n = half_dim;
  require(p > n, "delta_exponent: need p > n");
  return branch == DeltaBranch::main ? 2.0 * p * n / (p - n) : 2.0 * p * n / (p - n + p * n);
}

double tilde_c(int half_dim, double p, DeltaBranch branch, const AbstractConstants& consts) {
  consts.validate();
  const double delta = delta_exponent(half_dim, p, branch);
  return std::pow(4.0 * consts.c_np, -1.0 / delta) / consts.c0_np *
         std::exp(-consts.c_n / delta);
}

LowerBound theorem_t3(const GeometryBudget& budget, const AbstractConstants& consts,
                      SecondBranch second, DeltaBranch delta) {
  budget.validate();
  require(budget.dim >= 2 && budget.dim % 2 == 0, "theorem_t3: dimension must be even (m = 2n)");
  const int n = budget.dim / 2;
  const double p = budget.p_exponent;
  require(p > n, "theorem_t3: need p > n");

  LowerBound out;
  out.tilde_c = tilde_c(n, p, delta, consts);
  const double decay = std::exp(-(2.0 * n - 1.0) * budget.lambda_scale());
  const double riem_term =
      1.0 + std::sqrt(budget.riem_2p * budget.diameter * budget.diameter);
  const double exponent = 2.0 * p * n / (p - n);
  out.first = std::pow(out.tilde_c / riem_term * decay, exponent);
  out.second = second == SecondBranch::theorem ? decay : out.tilde_c * decay;
  out.active_branch = out.first <= out.second ? 1 : 2;
  out.value = std::min(out.first, out.second);
  return out;
}

double theorem_t3_rhs(const GeometryBudget& budget, const AbstractConstants& consts,
                      SecondBranch second, DeltaBranch delta) {
  return theorem_t3(budget, consts, second, delta).value;
}

double li_yau_rhs_functions(int /*n*/, double kappa, double diameter, double c) {
  require(kappa >= 0.0 && diameter > 0.0 && c > 0.0, "li_yau_rhs_functions: bad arguments");
  const double lambda_sq = kappa * diameter * diameter;
  return std::exp(-(1.0 + std::sqrt(1.0 + 2.0 * c * c * lambda_sq))) / c;
}

bool li_yau_predicate(double lambda1, double diameter, double kappa, double c) {
  return lambda1 * diameter * diameter >=
         c * std::exp(-c * std::sqrt(kappa * diameter * diameter));
}

}  // namespace formspec::constants
