#include "formspec/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/SparseCholesky>

#include "formspec/errors.hpp"

namespace formspec::eigen {

namespace {

template <class Scalar>
using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
Scalar random_entry(std::mt19937_64& rng, std::normal_distribution<double>& normal) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return normal(rng);
  } else {
    const double re = normal(rng);
    const double im = normal(rng);
    return Scalar(re, im);
  }
}

template <class Scalar>
void check_pencil(const Eigen::SparseMatrix<Scalar>& stiffness,
                  const Eigen::SparseMatrix<double>& mass) {
  if (stiffness.rows() != stiffness.cols() || mass.rows() != mass.cols() ||
      stiffness.rows() != mass.rows()) {
    throw DomainError("eigensolver: dimension mismatch between L and M");
  }
  for (Eigen::Index i = 0; i < mass.rows(); ++i) {
    if (!(mass.coeff(i, i) > 0.0)) throw DomainError("eigensolver: M must have a positive diagonal");
  }
}

template <class Scalar>
double operator_scale(const Eigen::SparseMatrix<Scalar>& stiffness,
                      const Eigen::SparseMatrix<double>& mass) {
  double scale = 0.0;
  for (Eigen::Index i = 0; i < mass.rows(); ++i) {
    scale = std::max(scale, std::abs(stiffness.coeff(i, i)) / mass.coeff(i, i));
  }
  return scale;
}

// M-orthonormalizes the columns of `basis` in place (two passes of classical
// Gram-Schmidt per column) and drops numerically dependent columns.
template <class Scalar>
Dense<Scalar> m_orthonormalize(const Dense<Scalar>& basis, const Eigen::SparseMatrix<Scalar>& mass) {
  const Eigen::Index n = basis.rows();
  Dense<Scalar> q(n, basis.cols());
  Dense<Scalar> mq(n, basis.cols());
  Eigen::Index kept = 0;
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Vector<Scalar> v = basis.col(j);
    const double original = std::sqrt(std::abs(v.dot(mass * v)));
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2 && kept > 0; ++pass) {
      const Vector<Scalar> coeffs = mq.leftCols(kept).adjoint() * v;
      v -= q.leftCols(kept) * coeffs;
    }
    const Vector<Scalar> mv = mass * v;
    const double norm = std::sqrt(std::abs(v.dot(mv)));
    if (norm <= 1e-10 * original) continue;
    q.col(kept) = v / norm;
    mq.col(kept) = mv / norm;
    ++kept;
  }
  return q.leftCols(kept);
}

template <class Scalar>
std::vector<double> residual_norms(const Eigen::SparseMatrix<Scalar>& stiffness,
                                   const Eigen::SparseMatrix<Scalar>& mass,
                                   const Dense<Scalar>& vectors, std::span<const double> values,
                                   int count) {
  std::vector<double> res(count);
  for (int i = 0; i < count; ++i) {
    const Vector<Scalar> x = vectors.col(i);
    const Vector<Scalar> mx = mass * x;
    const Vector<Scalar> r = stiffness * x - Scalar(values[i]) * mx;
    res[i] = r.norm() / mx.norm();
  }
  return res;
}

}  // namespace

void SolverConfig::validate() const {
  if (k < 1) throw DomainError("SolverConfig: k must be >= 1");
  if (!(tol > 0.0)) throw DomainError("SolverConfig: tol must be positive");
  if (max_iter < 1) throw DomainError("SolverConfig: max_iter must be >= 1");
  if (krylov_depth < 1) throw DomainError("SolverConfig: krylov_depth must be >= 1");
}

template <class Scalar>
EigenResult<Scalar> smallest_eigenpairs(const Eigen::SparseMatrix<Scalar>& stiffness,
                                        const Eigen::SparseMatrix<double>& mass_real,
                                        const SolverConfig& config) {
  config.validate();
  check_pencil(stiffness, mass_real);
  const Eigen::Index n = stiffness.rows();
  if (config.k >= n) throw DomainError("eigensolver: k must be smaller than the dimension");

  const Eigen::SparseMatrix<Scalar> mass = mass_real.template cast<Scalar>();
  EigenResult<Scalar> result;
  result.operator_scale = operator_scale(stiffness, mass_real);
  result.applied_shift = config.shift - 1e-8 * result.operator_scale;

  Eigen::SparseMatrix<Scalar> shifted = stiffness - Scalar(result.applied_shift) * mass;
  shifted.makeCompressed();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<Scalar>> factor(shifted);
  if (factor.info() != Eigen::Success) {
    throw DomainError("eigensolver: factorization of L - sigma M failed");
  }

  const int guard = config.guard_vectors >= 0 ? config.guard_vectors : std::max(8, config.k);
  const Eigen::Index block = std::min<Eigen::Index>(n, config.k + guard);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dense<Scalar> x(n, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = random_entry<Scalar>(rng, normal);
  }

  std::vector<double> best(config.k, std::numeric_limits<double>::infinity());
  for (int iter = 1; iter <= config.max_iter; ++iter) {
    Dense<Scalar> krylov(n, block * config.krylov_depth);
    krylov.leftCols(block) = x;
    for (int d = 1; d < config.krylov_depth; ++d) {
      const Dense<Scalar> rhs = mass * krylov.middleCols((d - 1) * block, block);
      krylov.middleCols(d * block, block) = factor.solve(rhs);
    }
    const Dense<Scalar> basis = m_orthonormalize<Scalar>(krylov, mass);
    if (basis.cols() < config.k) throw DomainError("eigensolver: Krylov basis collapsed");

    Dense<Scalar> projected = basis.adjoint() * (stiffness * basis);
    projected = (0.5 * (projected + projected.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Dense<Scalar>> ritz(projected);
    if (ritz.info() != Eigen::Success) throw DomainError("eigensolver: Rayleigh-Ritz step failed");

    const Eigen::Index keep = std::min<Eigen::Index>(block, basis.cols());
    x = basis * ritz.eigenvectors().leftCols(keep);
    std::vector<double> values(ritz.eigenvalues().data(), ritz.eigenvalues().data() + keep);

    const auto residuals = residual_norms<Scalar>(stiffness, mass, x, values, config.k);
    for (int i = 0; i < config.k; ++i) best[i] = std::min(best[i], residuals[i]);
    const bool converged = std::all_of(residuals.begin(), residuals.end(),
                                       [&](double r) { return r <= config.tol; });
    if (converged) {
      result.values.assign(values.begin(), values.begin() + config.k);
      result.vectors = x.leftCols(config.k);
      result.residuals = residuals;
      result.iterations = iter;
      return result;
    }
    if (keep < block) {
      // Basis lost rank (tiny problems); pad with fresh random directions.
      Dense<Scalar> padded(n, block);
      padded.leftCols(keep) = x;
      for (Eigen::Index j = keep; j < block; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) padded(i, j) = random_entry<Scalar>(rng, normal);
      }
      x = std::move(padded);
    }
  }
  throw NotConverged("eigensolver: no convergence within " + std::to_string(config.max_iter) +
                         " iterations",
                     best, config.max_iter);
}

template <class Scalar>
EigenResult<Scalar> dense_eigenpairs(const Eigen::SparseMatrix<Scalar>& stiffness,
                                     const Eigen::SparseMatrix<double>& mass_real, int k) {
  check_pencil(stiffness, mass_real);
  const Eigen::Index n = stiffness.rows();
  if (k < 1 || k > n) throw DomainError("dense_eigenpairs: k out of range");
  Dense<Scalar> a = Dense<Scalar>(stiffness);
  a = (0.5 * (a + a.adjoint())).eval();
  const Dense<Scalar> b = Dense<Scalar>(mass_real.template cast<Scalar>());
  Eigen::GeneralizedSelfAdjointEigenSolver<Dense<Scalar>> solver(a, b);
  if (solver.info() != Eigen::Success) throw DomainError("dense_eigenpairs: solver failed");

  EigenResult<Scalar> result;
  result.operator_scale = operator_scale(stiffness, mass_real);
  result.values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + k);
  result.vectors = solver.eigenvectors().leftCols(k);
  const Eigen::SparseMatrix<Scalar> mass = mass_real.template cast<Scalar>();
  result.residuals = residual_norms<Scalar>(stiffness, mass, result.vectors, result.values, k);
  result.iterations = 1;
  return result;
}

std::vector<Cluster> cluster_multiplicities(std::span<const double> values, double rel_gap,
                                            double abs_floor) {
  std::vector<Cluster> out;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    bool join = false;
    if (i > 0) {
      const double prev = values[i - 1];
      const double denom = std::max({std::abs(prev), std::abs(v), abs_floor});
      join = std::abs(v - prev) / denom < rel_gap;
    }
    if (join) {
      sum += v;
      ++out.back().count;
      out.back().value = sum / out.back().count;
    } else {
      sum = v;
      out.push_back({v, 1});
    }
  }
  return out;
}

template <class Scalar>
std::optional<double> first_positive(const EigenResult<Scalar>& result, double zero_tol) {
  const double threshold = zero_tol * result.operator_scale;
  for (double v : result.values) {
    if (v > threshold) return v;
  }
  return std::nullopt;
}

template <class Scalar>
int count_zero_modes(const EigenResult<Scalar>& result, double zero_tol) {
  const double threshold = zero_tol * result.operator_scale;
  return static_cast<int>(
      std::count_if(result.values.begin(), result.values.end(), [&](double v) { return v <= threshold; }));
}

template EigenResult<double> smallest_eigenpairs(const Eigen::SparseMatrix<double>&,
                                                 const Eigen::SparseMatrix<double>&,
                                                 const SolverConfig&);
template EigenResult<std::complex<double>> smallest_eigenpairs(
    const Eigen::SparseMatrix<std::complex<double>>&, const Eigen::SparseMatrix<double>&,
    const SolverConfig&);
template EigenResult<double> dense_eigenpairs(const Eigen::SparseMatrix<double>&,
                                              const Eigen::SparseMatrix<double>&, int);
template EigenResult<std::complex<double>> dense_eigenpairs(
    const Eigen::SparseMatrix<std::complex<double>>&, const Eigen::SparseMatrix<double>&, int);
template std::optional<double> first_positive(const EigenResult<double>&, double);
template std::optional<double> first_positive(const EigenResult<std::complex<double>>&, double);
template int count_zero_modes(const EigenResult<double>&, double);
template int count_zero_modes(const EigenResult<std::complex<double>>&, double);

}  // namespace formspec::eigen
