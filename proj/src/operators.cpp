#include "formspec/operators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "formspec/errors.hpp"

namespace formspec::operators {

namespace {

using Triplet = Eigen::Triplet<double>;
using ComplexTriplet = Eigen::Triplet<std::complex<double>>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);
  return a <= -std::numbers::pi ? a + kTwoPi : a;
}

RealSparse diagonal_matrix(const std::vector<double>& d) {
  RealSparse m(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  std::vector<Triplet> t;
  t.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) t.emplace_back(static_cast<int>(i), static_cast<int>(i), d[i]);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

template <class Scalar>
Eigen::SparseMatrix<Scalar> symmetrized(const Eigen::SparseMatrix<Scalar>& m) {
  Eigen::SparseMatrix<Scalar> adj = m.adjoint();
  Eigen::SparseMatrix<Scalar> out = (m + adj) * Scalar(0.5);
  out.makeCompressed();
  return out;
}

// Gradients of the three barycentric coordinates in the intrinsic layout of f.
std::array<Eigen::Vector2d, 3> barycentric_gradients(const TriangleMesh& mesh, int f) {
  const int h0 = 3 * f;
  const double l01 = mesh.edge_length(mesh.edge_of(h0));
  const double l20 = mesh.edge_length(mesh.edge_of(h0 + 2));
  const double angle0 = mesh.corner_angle(h0);
  Eigen::Matrix2d e;
  e << l01, 0.0, l20 * std::cos(angle0), l20 * std::sin(angle0);
  const Eigen::Matrix2d inv = e.inverse();
  // grad(lambda_1), grad(lambda_2) solve e * g = unit; lambda_0 = 1 - lambda_1 - lambda_2.
  const Eigen::Vector2d g1 = inv.col(0);
  const Eigen::Vector2d g2 = inv.col(1);
  return {-(g1 + g2), g1, g2};
}

}  // namespace

RealOperator cotan_laplacian(const TriangleMesh& mesh) {
  const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
  std::vector<Triplet> t;
  t.reserve(4 * mesh.num_edges());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto [i, j] = mesh.edges()[e].vertices;
    const double w = mesh.cotan_weight(static_cast<int>(e));
    t.emplace_back(i, i, w);
    t.emplace_back(j, j, w);
    t.emplace_back(i, j, -w);
    t.emplace_back(j, i, -w);
  }
  RealOperator out;
  out.stiffness.resize(n, n);
  out.stiffness.setFromTriplets(t.begin(), t.end());
  out.stiffness.makeCompressed();
  out.mass.matrix = diagonal_matrix(mesh::vertex_areas(mesh));
  out.mass.lumped = true;
  return out;
}

ConnectionData build_connection(const TriangleMesh& mesh) {
  const int nh = static_cast<int>(mesh.num_halfedges());
  const int nv = static_cast<int>(mesh.num_vertices());
  const int nf = static_cast<int>(mesh.num_faces());
  ConnectionData conn;
  conn.direction.assign(nh, 0.0);
  conn.transport.assign(nh, 0.0);

  std::vector<double> angle_sum(nv, 0.0);
  for (int v = 0; v < nv; ++v) {
    for (int h : mesh.outgoing(v)) angle_sum[v] += mesh.corner_angle(h);
    const double scale = kTwoPi / angle_sum[v];
    double accumulated = 0.0;
    for (int h : mesh.outgoing(v)) {
      conn.direction[h] = accumulated;
      accumulated += scale * mesh.corner_angle(h);
    }
  }
  for (int h = 0; h < nh; ++h) {
    // Arriving along h means pointing opposite to twin(h) in the tip frame.
    conn.transport[h] = wrap_angle(conn.direction[mesh.twin(h)] + std::numbers::pi - conn.direction[h]);
  }

  conn.face_holonomy.assign(nf, 0.0);
  conn.face_curvature.assign(nf, 0.0);
  for (int f = 0; f < nf; ++f) {
    double holonomy = 0.0;
    double curvature = 0.0;
    for (int c = 0; c < 3; ++c) {
      const int h = 3 * f + c;
      holonomy += conn.transport[h];
      const int v = mesh.tail(h);
      curvature += mesh.corner_angle(h) * (kTwoPi - angle_sum[v]) / angle_sum[v];
    }
    conn.face_holonomy[f] = wrap_angle(holonomy);
    conn.face_curvature[f] = curvature;
    if (std::abs(wrap_angle(holonomy - curvature)) > 1e-9) {
      throw MeshError("build_connection: face holonomy disagrees with its curvature share");
    }
  }
  return conn;
}

ComplexOperator connection_laplacian_1forms(const TriangleMesh& mesh, const ConnectionData& conn) {
  if (conn.transport.size() != mesh.num_halfedges()) {
    throw MeshError("connection data does not match the mesh");
  }
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    if (std::abs(wrap_angle(conn.face_holonomy[f] - conn.face_curvature[f])) > 1e-9) {
      throw MeshError("connection_laplacian_1forms: holonomy inconsistency");
    }
  }
  const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
  std::vector<ComplexTriplet> t;
  t.reserve(4 * mesh.num_edges());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto& edge = mesh.edges()[e];
    const int i = edge.vertices[0];
    const int j = edge.vertices[1];
    const double w = mesh.cotan_weight(static_cast<int>(e));
    // Energy w |z_j - r z_i|^2 with r transporting from i to j.
    const std::complex<double> r = std::polar(1.0, conn.transport[edge.halfedges[0]]);
    t.emplace_back(i, i, w);
    t.emplace_back(j, j, w);
    t.emplace_back(j, i, -w * r);
    t.emplace_back(i, j, -w * std::conj(r));
  }
  ComplexOperator out;
  out.stiffness.resize(n, n);
  out.stiffness.setFromTriplets(t.begin(), t.end());
  out.stiffness.makeCompressed();
  out.mass.matrix = diagonal_matrix(mesh::vertex_areas(mesh));
  out.mass.lumped = true;
  return out;
}

RealSparse exterior_derivative_0(const TriangleMesh& mesh) {
  RealSparse d0(static_cast<Eigen::Index>(mesh.num_edges()), static_cast<Eigen::Index>(mesh.num_vertices()));
  std::vector<Triplet> t;
  t.reserve(2 * mesh.num_edges());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    t.emplace_back(static_cast<int>(e), mesh.edges()[e].vertices[0], -1.0);
    t.emplace_back(static_cast<int>(e), mesh.edges()[e].vertices[1], 1.0);
  }
  d0.setFromTriplets(t.begin(), t.end());
  return d0;
}

RealSparse exterior_derivative_1(const TriangleMesh& mesh) {
  RealSparse d1(static_cast<Eigen::Index>(mesh.num_faces()), static_cast<Eigen::Index>(mesh.num_edges()));
  std::vector<Triplet> t;
  t.reserve(mesh.num_halfedges());
  for (int h = 0; h < static_cast<int>(mesh.num_halfedges()); ++h) {
    t.emplace_back(TriangleMesh::face_of(h), mesh.edge_of(h), static_cast<double>(mesh.edge_sign(h)));
  }
  d1.setFromTriplets(t.begin(), t.end());
  return d1;
}

RealSparse whitney_mass_1(const TriangleMesh& mesh) {
  std::vector<Triplet> t;
  t.reserve(9 * mesh.num_faces());
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    const auto grad = barycentric_gradients(mesh, f);
    const double area = mesh.face_area(f);
    auto mass_integral = [area](int a, int b) { return area * (a == b ? 2.0 : 1.0) / 12.0; };
    // Local edge k runs from corner k to corner k+1 (halfedge 3f + k).
    for (int k = 0; k < 3; ++k) {
      const int a = k, b = (k + 1) % 3;
      for (int l = 0; l < 3; ++l) {
        const int c = l, d = (l + 1) % 3;
        const double value = mass_integral(a, c) * grad[b].dot(grad[d]) -
                             mass_integral(a, d) * grad[b].dot(grad[c]) -
                             mass_integral(b, c) * grad[a].dot(grad[d]) +
                             mass_integral(b, d) * grad[a].dot(grad[c]);
        const int hk = 3 * f + k;
        const int hl = 3 * f + l;
        t.emplace_back(mesh.edge_of(hk), mesh.edge_of(hl),
                       mesh.edge_sign(hk) * mesh.edge_sign(hl) * value);
      }
    }
  }
  const auto ne = static_cast<Eigen::Index>(mesh.num_edges());
  RealSparse m(ne, ne);
  m.setFromTriplets(t.begin(), t.end());
  return symmetrized(m);
}

RealOperator hodge_laplacian_1forms(const TriangleMesh& mesh) {
  const RealSparse d0 = exterior_derivative_0(mesh);
  const RealSparse d1 = exterior_derivative_1(mesh);
  const RealSparse m1 = whitney_mass_1(mesh);

  std::vector<double> inv_vertex_area = mesh::vertex_areas(mesh);
  for (double& a : inv_vertex_area) a = 1.0 / a;
  std::vector<double> inv_face_area(mesh.num_faces());
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) inv_face_area[f] = 1.0 / mesh.face_area(static_cast<int>(f));

  const RealSparse codifferential = m1 * d0;  // E x V
  const RealSparse down = codifferential * diagonal_matrix(inv_vertex_area) * RealSparse(codifferential.transpose());
  const RealSparse up = RealSparse(d1.transpose()) * diagonal_matrix(inv_face_area) * d1;

  RealOperator out;
  out.stiffness = symmetrized<double>(down + up);
  out.mass.matrix = m1;
  out.mass.lumped = false;
  return out;
}

std::vector<Vec3> vertex_normals(const TriangleMesh& mesh) {
  std::vector<Vec3> normals(mesh.num_vertices(), Vec3::Zero());
  if (mesh.periodic()) {
    std::fill(normals.begin(), normals.end(), Vec3::UnitZ());
    return normals;
  }
  const auto& p = mesh.vertices();
  for (const auto& f : mesh.faces()) {
    const Vec3 n = (p[f[1]] - p[f[0]]).cross(p[f[2]] - p[f[0]]);  // 2 * area weighted
    for (int v : f) normals[v] += n;
  }
  for (Vec3& n : normals) n.normalize();
  return normals;
}

Eigen::VectorXcd tangent_field_coefficients(const TriangleMesh& mesh, const ConnectionData& conn,
                                            std::span<const Vec3> field) {
  if (field.size() != mesh.num_vertices()) throw DomainError("tangent field size mismatch");
  const auto normals = vertex_normals(mesh);
  Eigen::VectorXcd out(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (int v = 0; v < static_cast<int>(mesh.num_vertices()); ++v) {
    const Vec3& n = normals[v];
    auto project = [&n](const Vec3& x) { return Vec3(x - x.dot(n) * n); };
    const auto ring = mesh.outgoing(v);
    const Vec3 e1 = project(mesh.edge_vector(ring[0])).normalized();
    const Vec3 e2 = n.cross(e1);
    auto planar_angle = [&](const Vec3& x) {
      double a = std::atan2(x.dot(e2), x.dot(e1));
      return a < 0.0 ? a + kTwoPi : a;
    };

    const Vec3 tangent = project(field[v]);
    const double magnitude = tangent.norm();
    if (magnitude == 0.0) {
      out[v] = 0.0;
      continue;
    }
    const double psi = planar_angle(tangent);
    double phi = psi;
    for (std::size_t k = 0; k < ring.size(); ++k) {
      const double lo = k == 0 ? 0.0 : planar_angle(mesh.edge_vector(ring[k]));
      const double hi = k + 1 == ring.size() ? kTwoPi : planar_angle(mesh.edge_vector(ring[k + 1]));
      if (psi >= lo && psi < hi) {
        const double frame_lo = conn.direction[ring[k]];
        const double frame_hi = k + 1 == ring.size() ? kTwoPi : conn.direction[ring[k + 1]];
        phi = frame_lo + (psi - lo) / (hi - lo) * (frame_hi - frame_lo);
        break;
      }
    }
    out[v] = std::polar(magnitude, phi);
  }
  return out;
}

std::vector<Vec3> rotation_field(const TriangleMesh& mesh, const Vec3& axis) {
  std::vector<Vec3> out;
  out.reserve(mesh.num_vertices());
  for (const Vec3& p : mesh.vertices()) out.push_back(axis.cross(p));
  return out;
}

template <class Scalar>
double rayleigh_quotient(const Eigen::SparseMatrix<Scalar>& stiffness, const MassMatrix& mass,
                         const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) {
  if (x.size() != stiffness.rows() || x.size() != mass.matrix.rows()) {
    throw DomainError("rayleigh_quotient: dimension mismatch");
  }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mx = mass.matrix.template cast<Scalar>() * x;
  const double denominator = std::real(x.dot(mx));
  if (!(denominator > 0.0)) throw DomainError("rayleigh_quotient: zero vector");
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lx = stiffness * x;
  return std::real(x.dot(lx)) / denominator;
}

template <class Scalar>
double hermitian_defect(const Eigen::SparseMatrix<Scalar>& matrix) {
  const Eigen::SparseMatrix<Scalar> adj = matrix.adjoint();
  const Eigen::SparseMatrix<Scalar> diff = matrix - adj;
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(diff, k); it; ++it) {
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

double mean_curvature_shift(const TriangleMesh& mesh) {
  double area = 0.0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) area += mesh.face_area(static_cast<int>(f));
  return kTwoPi * mesh::euler_characteristic(mesh) / area;
}

std::vector<WeitzenboeckPair> weitzenboeck_eigen_check(const TriangleMesh& mesh, int k,
                                                       const eigen::SolverConfig& base) {
  if (k < 0) throw DomainError("weitzenboeck_eigen_check: k must be >= 0");
  if (k == 0) return {};
  const int b1 = 2 - mesh::euler_characteristic(mesh);

  const ConnectionData conn = build_connection(mesh);
  const ComplexOperator rough = connection_laplacian_1forms(mesh, conn);
  eigen::SolverConfig rough_cfg = base;
  rough_cfg.k = (k + 1) / 2 + 2;
  const auto rough_eig = eigen::smallest_eigenpairs(rough.stiffness, rough.mass.matrix, rough_cfg);

  const RealOperator hodge = hodge_laplacian_1forms(mesh);
  eigen::SolverConfig hodge_cfg = base;
  hodge_cfg.k = k + b1 + 2;
  const auto hodge_eig = eigen::smallest_eigenpairs(hodge.stiffness, hodge.mass.matrix, hodge_cfg);

  std::vector<double> rough_real;
  const double rough_zero = 1e-8 * rough_eig.operator_scale;
  for (double v : rough_eig.values) {
    if (v > rough_zero) {
      rough_real.push_back(v);
      rough_real.push_back(v);
    }
  }
  std::vector<double> hodge_pos;
  const double hodge_zero = 1e-8 * hodge_eig.operator_scale;
  for (double v : hodge_eig.values) {
    if (v > hodge_zero) hodge_pos.push_back(v);
  }
  const std::size_t count = std::min({static_cast<std::size_t>(k), rough_real.size(), hodge_pos.size()});
  const double shift = mean_curvature_shift(mesh);
  std::vector<WeitzenboeckPair> out;
  for (std::size_t i = 0; i < count; ++i) {
    WeitzenboeckPair p;
    p.hodge_eigenvalue = hodge_pos[i];
    p.rough_eigenvalue = rough_real[i];
    p.curvature_shift = shift;
    p.residual = std::abs(p.hodge_eigenvalue - (p.rough_eigenvalue + shift)) / p.hodge_eigenvalue;
    out.push_back(p);
  }
  return out;
}

double kato_fraction(const TriangleMesh& mesh, const ConnectionData& conn,
                     const Eigen::VectorXcd& theta, double slack) {
  const int nv = static_cast<int>(mesh.num_vertices());
  if (theta.size() != nv) throw DomainError("kato_fraction: size mismatch");
  int holds = 0;
  for (int v = 0; v < nv; ++v) {
    double full = 0.0;
    double modulus = 0.0;
    for (int h : mesh.outgoing(v)) {
      const int w = mesh.tip(h);
      const double weight = mesh.cotan_weight(mesh.edge_of(h));
      const std::complex<double> moved = std::polar(1.0, conn.transport[h]) * theta[v];
      full += weight * std::norm(theta[w] - moved);
      const double dm = std::abs(theta[w]) - std::abs(theta[v]);
      modulus += weight * dm * dm;
    }
    if (std::sqrt(std::max(modulus, 0.0)) <= (1.0 + slack) * std::sqrt(std::max(full, 0.0)) + 1e-300) {
      ++holds;
    }
  }
  return static_cast<double>(holds) / nv;
}

template <class Scalar>
void write_matrix_market(const Eigen::SparseMatrix<Scalar>& matrix, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.precision(17);
  constexpr bool is_complex = !std::is_same_v<Scalar, double>;
  os << "%%MatrixMarket matrix coordinate " << (is_complex ? "complex" : "real") << " general\n";
  os << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
  for (int k = 0; k < matrix.outerSize(); ++k) {
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(matrix, k); it; ++it) {
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ';
      if constexpr (is_complex) {
        os << it.value().real() << ' ' << it.value().imag() << '\n';
      } else {
        os << it.value() << '\n';
      }
    }
  }
}

template double rayleigh_quotient(const RealSparse&, const MassMatrix&, const Eigen::VectorXd&);
template double rayleigh_quotient(const ComplexSparse&, const MassMatrix&, const Eigen::VectorXcd&);
template double hermitian_defect(const RealSparse&);
template double hermitian_defect(const ComplexSparse&);
template void write_matrix_market(const RealSparse&, const std::filesystem::path&);
template void write_matrix_market(const ComplexSparse&, const std::filesystem::path&);

}  // namespace formspec::operators
