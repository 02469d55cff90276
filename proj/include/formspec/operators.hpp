#pragma once

#include <complex>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "formspec/eigen.hpp"
#include "formspec/mesh.hpp"

namespace formspec::operators {

using mesh::TriangleMesh;
using mesh::Vec3;

using RealSparse = Eigen::SparseMatrix<double>;
using ComplexSparse = Eigen::SparseMatrix<std::complex<double>>;

/// L^2 inner product on the discrete space. Lumped (diagonal) for vertex
/// based operators; the edge based Hodge operator carries the consistent
/// Whitney mass matrix.
struct MassMatrix {
  RealSparse matrix;
  bool lumped = true;

  Eigen::VectorXd diagonal() const { return matrix.diagonal(); }
  double trace() const { return matrix.diagonal().sum(); }
};

template <class Scalar>
struct OperatorPair {
  Eigen::SparseMatrix<Scalar> stiffness;
  MassMatrix mass;
};

using RealOperator = OperatorPair<double>;
using ComplexOperator = OperatorPair<std::complex<double>>;

/// Discrete Levi-Civita transport between vertex tangent planes.
///
/// Each vertex carries a polar frame whose angles are the corner angles
/// rescaled to sum to 2 pi. `direction[h]` is the angle of halfedge h in the
/// frame of tail(h); `transport[h]` rotates a tangent vector at tail(h) into
/// the frame of tip(h).
struct ConnectionData {
  std::vector<double> direction;
  std::vector<double> transport;
  std::vector<double> face_holonomy;   // sum of transports around each face, wrapped to (-pi, pi]
  std::vector<double> face_curvature;  // share of the vertex angle defects carried by each face
};

/// Cotan stiffness with barycentric lumped mass. Kernel: constants.
RealOperator cotan_laplacian(const TriangleMesh& mesh);

/// Throws MeshError if a face holonomy disagrees with its curvature share.
ConnectionData build_connection(const TriangleMesh& mesh);

/// Rough Laplacian on 1-forms (tangent vectors via the metric), one complex
/// unknown per vertex: sum over edges of w_ij |z_j - e^{i rho_ij} z_i|^2.
ComplexOperator connection_laplacian_1forms(const TriangleMesh& mesh, const ConnectionData& conn);

/// Hodge Laplacian on edge 1-forms in weak form:
/// L = M1 d0 M0^{-1} d0^T M1 + d1^T M2 d1 with mass M1 (Whitney), M0 lumped
/// vertex areas and M2 = diag(1 / face area). Kernel: harmonic forms (b_1).
RealOperator hodge_laplacian_1forms(const TriangleMesh& mesh);

/// Signed incidence matrices: d0 is E x V, d1 is F x E.
RealSparse exterior_derivative_0(const TriangleMesh& mesh);
RealSparse exterior_derivative_1(const TriangleMesh& mesh);
RealSparse whitney_mass_1(const TriangleMesh& mesh);

/// Unit vertex normals (+z on a periodic box, area weighted otherwise).
std::vector<Vec3> vertex_normals(const TriangleMesh& mesh);

/// Samples an ambient vector field into intrinsic complex coefficients: the
/// tangential projection's direction is mapped piecewise linearly between the
/// projected edge directions and the rescaled frame angles.
Eigen::VectorXcd tangent_field_coefficients(const TriangleMesh& mesh, const ConnectionData& conn,
                                            std::span<const Vec3> field);

/// Rotation Killing field axis x p at every vertex.
std::vector<Vec3> rotation_field(const TriangleMesh& mesh, const Vec3& axis);

template <class Scalar>
double rayleigh_quotient(const Eigen::SparseMatrix<Scalar>& stiffness, const MassMatrix& mass,
                         const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x);

/// max |L_ij - conj(L_ji)|.
template <class Scalar>
double hermitian_defect(const Eigen::SparseMatrix<Scalar>& matrix);

/// Mean Gaussian curvature 2 pi chi / area; the scalar Ricci shift on surfaces.
double mean_curvature_shift(const TriangleMesh& mesh);

struct WeitzenboeckPair {
  double hodge_eigenvalue = 0.0;
  double rough_eigenvalue = 0.0;
  double curvature_shift = 0.0;
  double residual = 0.0;  // |mu - (lambda + K)| / mu
};

/// Pairs the k smallest positive Hodge eigenvalues with the k smallest
/// positive rough eigenvalues (each complex value counted twice as real).
std::vector<WeitzenboeckPair> weitzenboeck_eigen_check(const TriangleMesh& mesh, int k,
                                                       const eigen::SolverConfig& base = {});

/// Fraction of vertices where the discrete |grad |theta|| <= (1 + slack) |grad theta|.
double kato_fraction(const TriangleMesh& mesh, const ConnectionData& conn,
                     const Eigen::VectorXcd& theta, double slack = 0.05);

template <class Scalar>
void write_matrix_market(const Eigen::SparseMatrix<Scalar>& matrix, const std::filesystem::path& path);

}  // namespace formspec::operators
