#pragma once

// Explicit constants and bound formulas behind the 1-form eigenvalue estimate:
// Sobolev/Poincare constants, Moser iteration quantities, the nowhere-vanishing
// threshold and the final lower bound for sqrt(lambda_1) * D.
//
// Dimension convention: every function taking a GeometryBudget reads
// `budget.dim` as the ambient dimension m. The lower-bound evaluator requires
// m = 2n even and derives the half-dimension n itself.

namespace formspec::constants {

/// Hypotheses feeding every bound: Ric >= -(m-1) kappa, diam <= D and the
/// normalized curvature norms ||Riem||_{2p}, ||Ric^-||_p.
struct GeometryBudget {
  int dim = 4;
  double kappa = 0.0;
  double diameter = 1.0;
  double riem_2p = 0.0;
  double ric_minus_p = 0.0;
  double p_exponent = 4.0;

  /// Throws DomainError unless diameter > 0 and kappa, norms are >= 0.
  void validate() const;
  double lambda_scale() const;  // sqrt(kappa * D^2)
};

/// The unnamed positive constants C(n), C(n,p), C_0(n,p). They are never
/// given numerically, so they are explicit inputs here.
struct AbstractConstants {
  double c_n = 1.0;
  double c_np = 1.0;
  double c0_np = 1.0;

  void validate() const;
};

struct MoserParameters {
  double b_value = 0.0;  // lambda + ||Ric^-||_p + ||Riem||_2p
  double t_value = 0.0;  // 4 C_s sqrt(B) sqrt(1 + B D^2)
  double alpha = 0.0;    // 2pn / (2p - n)
  double beta = 0.0;     // 2pn / (2p - n + pn)
  double gamma = 0.0;    // n(p-1) / (p(n-2))
  double gamma0 = 0.0;   // 2np / (2p - n)
  double sobolev_cs = 0.0;
};

enum class DeltaBranch { main, secondary };

/// Second entry of the outer min in the lower bound: `theorem` uses
/// exp(-(2n-1) sqrt(kappa D^2)); `corollary` multiplies it by C~(n,p), the
/// variant appearing in the isometry-group corollary.
enum class SecondBranch { theorem, corollary };

/// int_0^pi sin^{n-1} t dt.
double omega(int n);

/// omega_n (1 + omega_n)^{1-n}.
double a_n(int n);

/// F(x) = x int_0^Lambda (cosh t + x sinh t)^{n-1} dt.
double root_function(int n, double lambda_scale, double x);

/// Unique positive root of F(x) = omega_n. Throws DomainError for Lambda <= 0.
double c_lambda_root(int n, double lambda_scale);

/// Lambda * C(Lambda), continuously extended by (1 + n omega_n)^{1/n} - 1 at
/// Lambda = 0.
double lambda_c_product(int n, double lambda_scale);

/// R(Lambda) = D / (Lambda C(Lambda)); Lambda = 0 uses the limit.
double r_lambda(double diameter, int n, double lambda_scale);

/// Poincare-Sobolev constant S_{p,q} = vol_ratio^{1/p-1/q} R(Lambda) Sigma.
/// Uses budget.p_exponent as p; kappa = 0 takes the Lambda -> 0 limit.
double sobolev_s_pq(const GeometryBudget& budget, double vol_ratio,
                    double sigma_npq, double q);

/// C_s = C(n) D exp((m-1) sqrt(kappa D^2)); needs m >= 3.
double sobolev_cs(const GeometryBudget& budget, const AbstractConstants& consts);

/// exp(C(n) sqrt(c) C_s) * ||u||_2.
double moser_sup_bound(double c, double cs, double l2_norm,
                       const AbstractConstants& consts);

MoserParameters moser_parameters(const GeometryBudget& budget, double lambda,
                                 double cs);

/// exp(2 sqrt(gamma)/(gamma-1)) (1 + sqrt t)^{2/(gamma-1)}.
double moser_product_bound(double t, double gamma);

/// prod_{i<n_terms} (1 + t gamma^{i+1})^{gamma^{-(i+1)}}, accumulated in logs.
double moser_product_partial(double t, double gamma, int n_terms);

/// Upper bound on the log-tail sum_{i >= n_terms} ln(1 + t gamma^{i+1}) / gamma^{i+1}.
double moser_product_tail_bound(double t, double gamma, int n_terms);

/// Smallest term count whose tail bound is below `tail_tol`.
int moser_product_terms(double t, double gamma, double tail_tol = 1e-12);

double gradient_sup_bound(const MoserParameters& params, double lambda,
                          double diameter, double l2_norm,
                          const AbstractConstants& consts);

/// exp(C(n) sqrt(lambda) C_s) * ||theta||_2.
double eigenform_sup_bound(double lambda, double cs, double l2_norm,
                           const AbstractConstants& consts);

struct EpsilonBreakdown {
  double first = 0.0;   // C(n,p) (1+sqrt t)^alpha sqrt(lambda D^2)
  double second = 0.0;  // C(n,p) (1+sqrt t)^beta (lambda D^2)^{beta/(2 alpha)} exp(C(n,p) sqrt(lambda) C_s)
  double value = 0.0;
  int active_branch = 1;
};

EpsilonBreakdown epsilon_breakdown(const GeometryBudget& budget, double lambda,
                                   double cs, const AbstractConstants& consts);

/// Dimensionless nowhere-vanishing threshold epsilon (min of both branches).
double epsilon_threshold(const GeometryBudget& budget, double lambda, double cs,
                         const AbstractConstants& consts);

double delta_exponent(int half_dim, double p, DeltaBranch branch);

/// C~(n,p) = (4 C(n,p))^{-1/delta} C_0(n,p)^{-1} exp(-C(n)/delta), n = half-dimension.
double tilde_c(int half_dim, double p, DeltaBranch branch,
               const AbstractConstants& consts);

struct LowerBound {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
  int active_branch = 1;
  double tilde_c = 0.0;
};

LowerBound theorem_t3(const GeometryBudget& budget, const AbstractConstants& consts,
                      SecondBranch second = SecondBranch::theorem,
                      DeltaBranch delta = DeltaBranch::main);

/// Lower bound for sqrt(lambda_1^{(1)}) * D.
double theorem_t3_rhs(const GeometryBudget& budget, const AbstractConstants& consts,
                      SecondBranch second = SecondBranch::theorem,
                      DeltaBranch delta = DeltaBranch::main);

/// Function-case bound c^{-1} exp(-[1 + sqrt(1 + 2 c^2 Lambda^2)]), Lambda^2 = kappa D^2.
/// `n` only selects which c(n) the caller passes; it does not enter the formula.
double li_yau_rhs_functions(int n, double kappa, double diameter, double c);

/// lambda_1 D^2 >= c exp(-c sqrt(kappa D^2)).
bool li_yau_predicate(double lambda1, double diameter, double kappa, double c);

}  // namespace formspec::constants
