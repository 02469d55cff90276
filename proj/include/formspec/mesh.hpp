#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace formspec::mesh {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Fundamental domain of a flat torus. Positions live in [0,lx) x [0,ly) x {0}
/// and edge vectors are taken with the minimum-image convention.
struct PeriodicBox {
  double lx = 0.0;
  double ly = 0.0;
  int nx = 0;
  int ny = 0;
};

/// Closed, connected, consistently oriented triangle mesh with an intrinsic
/// edge-length metric. Halfedge h = 3f + c runs from faces[f][c] to
/// faces[f][(c+1)%3]; corner c of face f sits at faces[f][c].
class TriangleMesh {
 public:
  struct Edge {
    std::array<int, 2> vertices;  // vertices[0] < vertices[1]
    std::array<int, 2> halfedges;  // [0] runs vertices[0] -> vertices[1]
  };

  /// Validates the input and throws MeshError if it is not a closed,
  /// connected, oriented, non-degenerate 2-manifold.
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces,
               std::optional<PeriodicBox> periodic = std::nullopt);

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_faces() const { return faces_.size(); }
  std::size_t num_halfedges() const { return 3 * faces_.size(); }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::optional<PeriodicBox>& periodic() const { return periodic_; }

  int tail(int h) const { return faces_[h / 3][h % 3]; }
  int tip(int h) const { return faces_[h / 3][(h % 3 + 1) % 3]; }
  static int next(int h) { return 3 * (h / 3) + (h % 3 + 1) % 3; }
  static int prev(int h) { return 3 * (h / 3) + (h % 3 + 2) % 3; }
  static int face_of(int h) { return h / 3; }
  int twin(int h) const { return twin_[h]; }
  int edge_of(int h) const { return halfedge_edge_[h]; }
  /// +1 when h runs along its edge's orientation (low -> high index).
  int edge_sign(int h) const { return tail(h) < tip(h) ? 1 : -1; }

  /// Outgoing halfedges of v in counter-clockwise order.
  std::span<const int> outgoing(int v) const;

  /// Extrinsic displacement tip - tail (minimum image on a periodic box).
  Vec3 edge_vector(int h) const;

  double edge_length(int e) const { return edge_lengths_[e]; }
  const std::vector<double>& edge_lengths() const { return edge_lengths_; }
  /// Interior angle at the tail of h (corner h % 3 of face h / 3).
  double corner_angle(int h) const { return corner_angles_[h]; }
  double face_area(int f) const { return face_areas_[f]; }
  /// cot of the angle opposite h inside its own face.
  double halfedge_cotan(int h) const;
  /// (cot alpha + cot beta) / 2 for the two angles opposite edge e.
  double cotan_weight(int e) const;

  /// Copy with every length multiplied by s.
  TriangleMesh scaled(double s) const;

 private:
  void build_connectivity();
  void compute_metric();

  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::optional<PeriodicBox> periodic_;

  std::vector<Edge> edges_;
  std::vector<int> twin_;
  std::vector<int> halfedge_edge_;
  std::vector<int> ring_offsets_;
  std::vector<int> ring_halfedges_;

  std::vector<double> edge_lengths_;
  std::vector<double> corner_angles_;
  std::vector<double> face_areas_;
};

struct MeshGeometry {
  std::vector<double> vertex_areas;   // barycentric dual areas
  std::vector<double> angle_defects;  // 2 pi - sum of incident corner angles
  double diameter_graph = 0.0;
  bool diameter_is_lower_bound = false;
  double total_area = 0.0;
};

struct FlatTorusSpec {
  double lx = 2.0 * 3.14159265358979323846;
  double ly = 2.0 * 3.14159265358979323846;
  int nx = 64;
  int ny = 64;
};

struct IcoSphereSpec {
  double radius = 1.0;
  int subdivisions = 5;
};

using FactorSpec = std::variant<FlatTorusSpec, IcoSphereSpec>;

/// Riemannian product of two model surfaces; handled spectrally only.
struct ProductSpec {
  FactorSpec first;
  FactorSpec second;
};

using ModelManifold = std::variant<FlatTorusSpec, IcoSphereSpec, ProductSpec>;

std::string describe(const ModelManifold& manifold);

TriangleMesh generate_flat_torus(double lx, double ly, int nx, int ny);
TriangleMesh generate_icosphere(double radius, int subdivisions);

/// Builds the surface mesh; throws DomainError for a ProductSpec.
TriangleMesh build_mesh(const ModelManifold& manifold);

int euler_characteristic(const TriangleMesh& mesh);

std::vector<double> vertex_areas(const TriangleMesh& mesh);
std::vector<double> angle_defects(const TriangleMesh& mesh);

struct DiameterEstimate {
  double value = 0.0;
  bool lower_bound = false;  // true when sampled sources were used
};

/// Path-graph diameter. The graph holds every edge plus a hinge chord across
/// each edge whose two faces unfold to a convex quad; all paths are curves on
/// the surface. Exact all-pairs Dijkstra up to `exact_limit` vertices,
/// otherwise a 64-source sampled lower bound.
DiameterEstimate graph_diameter(const TriangleMesh& mesh, std::size_t exact_limit = 5000);

/// Single-source Dijkstra distances over the same path graph.
std::vector<double> edge_distances(const TriangleMesh& mesh, int source);

MeshGeometry compute_geometry(const TriangleMesh& mesh);

/// Normalized L^p norm of |Riem| = convention_scale * |K_v| with
/// K_v = angle defect / vertex area.
double curvature_lp_norm(const TriangleMesh& mesh, double p, double convention_scale = 2.0);

/// Per-face gradient of the piecewise-linear interpolant of vertex values,
/// expressed in the face's intrinsic layout; returns its magnitude per face.
std::vector<double> face_gradient_norms(const TriangleMesh& mesh, std::span<const double> values);

void save_off(const TriangleMesh& mesh, const std::filesystem::path& path);
/// Reads OFF; picks up a sidecar (same path, .json extension) holding
/// {lx, ly, nx, ny} when present. save_off writes it for periodic meshes.
TriangleMesh load_off(const std::filesystem::path& path);

}  // namespace formspec::mesh
