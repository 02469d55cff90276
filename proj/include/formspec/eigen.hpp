#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace formspec::eigen {

struct SolverConfig {
  int k = 6;
  double tol = 1e-8;  // relative residual ||Lx - lambda Mx|| / ||Mx||
  int max_iter = 200;
  std::uint64_t seed = 20240917;
  // Extra shift added to the automatic kernel regularization; the factored
  // operator is L - (shift - 1e-8 * scale) M.
  double shift = 0.0;
  int guard_vectors = -1;  // block size k + guard; -1 picks max(8, k)
  int krylov_depth = 3;    // blocks [X, TX, T^2 X] per restart

  void validate() const;
};

template <class Scalar>
struct EigenResult {
  std::vector<double> values;  // ascending
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;  // M-orthonormal columns
  std::vector<double> residuals;
  int iterations = 0;
  double operator_scale = 0.0;  // max_i |L_ii| / M_ii
  double applied_shift = 0.0;   // sigma in the factorization of L - sigma M
};

/// Thrown when the residual tolerance is not reached; carries the best
/// residuals observed.
class NotConverged : public std::runtime_error {
 public:
  NotConverged(const std::string& what, std::vector<double> best, int iterations)
      : std::runtime_error(what), best_residuals(std::move(best)), iterations(iterations) {}
  std::vector<double> best_residuals;
  int iterations;
};

/// k smallest eigenpairs of the pencil (L, M), L Hermitian PSD, M SPD.
///
/// Restarted block Krylov (block Lanczos) iteration on the shift-inverted
/// operator (L - sigma M)^{-1} M with a sparse LDL^T factorization, followed by
/// Rayleigh-Ritz on L in an M-orthonormal basis. The start block comes from a
/// seeded generator, so results are bitwise reproducible.
template <class Scalar>
EigenResult<Scalar> smallest_eigenpairs(const Eigen::SparseMatrix<Scalar>& stiffness,
                                        const Eigen::SparseMatrix<double>& mass,
                                        const SolverConfig& config);

/// Dense generalized Hermitian solve; reference for small problems.
template <class Scalar>
EigenResult<Scalar> dense_eigenpairs(const Eigen::SparseMatrix<Scalar>& stiffness,
                                     const Eigen::SparseMatrix<double>& mass, int k);

struct Cluster {
  double value = 0.0;  // mean of the members
  int count = 0;
};

/// Greedy grouping of ascending values: a value joins the running cluster
/// while its gap to the previous value, relative to max(|a|, |b|, abs_floor),
/// stays below rel_gap.
std::vector<Cluster> cluster_multiplicities(std::span<const double> values,
                                            double rel_gap = 0.02, double abs_floor = 1e-8);

/// Smallest value above zero_tol * operator_scale, if any.
template <class Scalar>
std::optional<double> first_positive(const EigenResult<Scalar>& result, double zero_tol = 1e-8);

/// Number of values at or below zero_tol * operator_scale.
template <class Scalar>
int count_zero_modes(const EigenResult<Scalar>& result, double zero_tol = 1e-8);

}  // namespace formspec::eigen
