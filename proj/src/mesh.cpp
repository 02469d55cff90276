#include "formspec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <json.hpp>

#include "formspec/errors.hpp"

namespace formspec::mesh {

namespace {

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

// Kahan's cancellation-safe Heron formula.
double triangle_area(double a, double b, double c) {
  std::array<double, 3> s{a, b, c};
  std::sort(s.begin(), s.end(), std::greater<>());
  const auto [x, y, z] = s;
  const double prod = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z));
  return 0.25 * std::sqrt(std::max(prod, 0.0));
}

}  // namespace

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces,
                           std::optional<PeriodicBox> periodic)
    : vertices_(std::move(vertices)), faces_(std::move(faces)), periodic_(periodic) {
  if (vertices_.empty() || faces_.empty()) throw MeshError("mesh has no vertices or faces");
  const int nv = static_cast<int>(vertices_.size());
  for (const Face& f : faces_) {
    for (int v : f) {
      if (v < 0 || v >= nv) throw MeshError("face references a missing vertex");
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) throw MeshError("face repeats a vertex");
  }
  if (periodic_ && (periodic_->lx <= 0.0 || periodic_->ly <= 0.0)) {
    throw MeshError("periodic box must have positive side lengths");
  }
  build_connectivity();
  compute_metric();
}

void TriangleMesh::build_connectivity() {
  const int nh = static_cast<int>(num_halfedges());
  const int nv = static_cast<int>(num_vertices());

  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(nh * 2);
  for (int h = 0; h < nh; ++h) {
    if (!directed.emplace(edge_key(tail(h), tip(h)), h).second) {
      throw MeshError("inconsistent orientation or non-manifold edge: directed edge repeated");
    }
  }

  twin_.assign(nh, -1);
  halfedge_edge_.assign(nh, -1);
  edges_.clear();
  for (int h = 0; h < nh; ++h) {
    auto it = directed.find(edge_key(tip(h), tail(h)));
    if (it == directed.end()) throw MeshError("mesh is not closed: boundary edge found");
    twin_[h] = it->second;
    if (tail(h) < tip(h)) {
      halfedge_edge_[h] = static_cast<int>(edges_.size());
      edges_.push_back(Edge{{tail(h), tip(h)}, {h, it->second}});
    }
  }
  for (int h = 0; h < nh; ++h) {
    if (halfedge_edge_[h] < 0) halfedge_edge_[h] = halfedge_edge_[twin_[h]];
  }

  // Counter-clockwise one-rings; a single fan per vertex means the vertex is manifold.
  std::vector<int> some_outgoing(nv, -1);
  std::vector<int> degree(nv, 0);
  for (int h = 0; h < nh; ++h) {
    some_outgoing[tail(h)] = h;
    ++degree[tail(h)];
  }
  ring_offsets_.assign(nv + 1, 0);
  for (int v = 0; v < nv; ++v) {
    if (degree[v] == 0) throw MeshError("isolated vertex");
    ring_offsets_[v + 1] = ring_offsets_[v] + degree[v];
  }
  ring_halfedges_.assign(ring_offsets_.back(), -1);
  for (int v = 0; v < nv; ++v) {
    const int start = some_outgoing[v];
    int h = start;
    int count = 0;
    do {
      if (count >= degree[v]) throw MeshError("non-manifold vertex");
      ring_halfedges_[ring_offsets_[v] + count++] = h;
      h = twin_[prev(h)];
    } while (h != start);
    if (count != degree[v]) throw MeshError("non-manifold vertex: more than one fan");
  }

  // Connectedness.
  std::vector<char> seen(nv, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int h : outgoing(v)) {
      const int w = tip(h);
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  if (reached != nv) throw MeshError("mesh is disconnected");
}

void TriangleMesh::compute_metric() {
  edge_lengths_.resize(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    edge_lengths_[e] = edge_vector(edges_[e].halfedges[0]).norm();
  }

  const int nf = static_cast<int>(num_faces());
  face_areas_.resize(nf);
  corner_angles_.resize(3 * nf);
  for (int f = 0; f < nf; ++f) {
    const int h0 = 3 * f;
    const double l0 = edge_lengths_[halfedge_edge_[h0]];
    const double l1 = edge_lengths_[halfedge_edge_[h0 + 1]];
    const double l2 = edge_lengths_[halfedge_edge_[h0 + 2]];
    const double area = triangle_area(l0, l1, l2);
    face_areas_[f] = area;
    const std::array<double, 3> len{l0, l1, l2};
    for (int c = 0; c < 3; ++c) {
      // Corner c sits between halfedges c (outgoing) and c+2 (incoming); the
      // opposite side is halfedge c+1.
      const double b = len[c];
      const double a = len[(c + 1) % 3];
      const double d = len[(c + 2) % 3];
      corner_angles_[h0 + c] = std::atan2(4.0 * area, b * b + d * d - a * a);
    }
  }

  const double mean_area =
      std::accumulate(face_areas_.begin(), face_areas_.end(), 0.0) / static_cast<double>(nf);
  for (double a : face_areas_) {
    if (!(a > 1e-14 * mean_area)) throw MeshError("degenerate triangle");
  }
}

std::span<const int> TriangleMesh::outgoing(int v) const {
  return {ring_halfedges_.data() + ring_offsets_[v],
          static_cast<std::size_t>(ring_offsets_[v + 1] - ring_offsets_[v])};
}

Vec3 TriangleMesh::edge_vector(int h) const {
  Vec3 d = vertices_[tip(h)] - vertices_[tail(h)];
  if (periodic_) {
    d.x() -= periodic_->lx * std::round(d.x() / periodic_->lx);
    d.y() -= periodic_->ly * std::round(d.y() / periodic_->ly);
  }
  return d;
}

double TriangleMesh::halfedge_cotan(int h) const {
  const double a = edge_lengths_[halfedge_edge_[h]];
  const double b = edge_lengths_[halfedge_edge_[next(h)]];
  const double c = edge_lengths_[halfedge_edge_[prev(h)]];
  return (b * b + c * c - a * a) / (4.0 * face_areas_[face_of(h)]);
}

double TriangleMesh::cotan_weight(int e) const {
  const Edge& edge = edges_[e];
  return 0.5 * (halfedge_cotan(edge.halfedges[0]) + halfedge_cotan(edge.halfedges[1]));
}

TriangleMesh TriangleMesh::scaled(double s) const {
  std::vector<Vec3> verts = vertices_;
  for (Vec3& p : verts) p *= s;
  std::optional<PeriodicBox> box = periodic_;
  if (box) {
    box->lx *= s;
    box->ly *= s;
  }
  return TriangleMesh(std::move(verts), faces_, box);
}

std::string describe(const ModelManifold& manifold) {
  struct Visitor {
    std::string operator()(const FlatTorusSpec& t) const {
      std::ostringstream os;
      os << "flat_torus(" << t.lx << "x" << t.ly << ", " << t.nx << "x" << t.ny << ")";
      return os.str();
    }
    std::string operator()(const IcoSphereSpec& s) const {
      std::ostringstream os;
      os << "icosphere(r=" << s.radius << ", s=" << s.subdivisions << ")";
      return os.str();
    }
    std::string operator()(const ProductSpec& p) const {
      auto factor = [this](const FactorSpec& f) {
        return std::visit([this](const auto& x) { return (*this)(x); }, f);
      };
      return factor(p.first) + " x " + factor(p.second);
    }
  };
  return std::visit(Visitor{}, manifold);
}

TriangleMesh generate_flat_torus(double lx, double ly, int nx, int ny) {
  if (nx < 3 || ny < 3) throw DomainError("flat torus needs at least 3 cells per direction");
  if (!(lx > 0.0) || !(ly > 0.0)) throw DomainError("flat torus side lengths must be positive");
  const double hx = lx / nx;
  const double hy = ly / ny;
  std::vector<Vec3> verts;
  verts.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) verts.emplace_back(i * hx, j * hy, 0.0);
  }
  auto id = [nx, ny](int i, int j) { return ((j + ny) % ny) * nx + (i + nx) % nx; };
  std::vector<Face> faces;
  faces.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      faces.push_back({a, b, c});
      faces.push_back({a, c, d});
    }
  }
  return TriangleMesh(std::move(verts), std::move(faces), PeriodicBox{lx, ly, nx, ny});
}

TriangleMesh generate_icosphere(double radius, int subdivisions) {
  if (subdivisions < 0) throw DomainError("icosphere subdivisions must be >= 0");
  if (!(radius > 0.0)) throw DomainError("icosphere radius must be positive");
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
  };
  for (Vec3& p : verts) p.normalize();
  std::vector<Face> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };
  for (int level = 0; level < subdivisions; ++level) {
    std::unordered_map<std::uint64_t, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = edge_key(std::min(a, b), std::max(a, b));
      if (auto it = midpoints.find(key); it != midpoints.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int id = static_cast<int>(verts.size()) - 1;
      midpoints.emplace(key, id);
      return id;
    };
    std::vector<Face> refined;
    refined.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const int ab = midpoint(f[0], f[1]);
      const int bc = midpoint(f[1], f[2]);
      const int ca = midpoint(f[2], f[0]);
      refined.push_back({f[0], ab, ca});
      refined.push_back({f[1], bc, ab});
      refined.push_back({f[2], ca, bc});
      refined.push_back({ab, bc, ca});
    }
    faces = std::move(refined);
  }
  for (Face& f : faces) {
    const Vec3 n = (verts[f[1]] - verts[f[0]]).cross(verts[f[2]] - verts[f[0]]);
    if (n.dot(verts[f[0]] + verts[f[1]] + verts[f[2]]) < 0.0) std::swap(f[1], f[2]);
  }
  for (Vec3& p : verts) p *= radius;
  return TriangleMesh(std::move(verts), std::move(faces));
}

TriangleMesh build_mesh(const ModelManifold& manifold) {
  if (const auto* t = std::get_if<FlatTorusSpec>(&manifold)) {
    return generate_flat_torus(t->lx, t->ly, t->nx, t->ny);
  }
  if (const auto* s = std::get_if<IcoSphereSpec>(&manifold)) {
    return generate_icosphere(s->radius, s->subdivisions);
  }
  throw DomainError("product manifolds are handled spectrally; no mesh is built");
}

int euler_characteristic(const TriangleMesh& mesh) {
  return static_cast<int>(mesh.num_vertices()) - static_cast<int>(mesh.num_edges()) +
         static_cast<int>(mesh.num_faces());
}

std::vector<double> vertex_areas(const TriangleMesh& mesh) {
  std::vector<double> areas(mesh.num_vertices(), 0.0);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    for (int v : mesh.faces()[f]) areas[v] += mesh.face_area(static_cast<int>(f)) / 3.0;
  }
  return areas;
}

std::vector<double> angle_defects(const TriangleMesh& mesh) {
  std::vector<double> defects(mesh.num_vertices(), 2.0 * std::numbers::pi);
  for (std::size_t h = 0; h < mesh.num_halfedges(); ++h) {
    defects[mesh.tail(static_cast<int>(h))] -= mesh.corner_angle(static_cast<int>(h));
  }
  return defects;
}

namespace {

// Edges plus hinge chords: for each interior edge whose two faces unfold to a
// convex quad, the straight segment joining the opposite corners.
struct PathGraph {
  std::vector<int> offsets;
  std::vector<std::pair<int, double>> arcs;
};

PathGraph build_path_graph(const TriangleMesh& mesh) {
  const int nv = static_cast<int>(mesh.num_vertices());
  std::vector<std::vector<std::pair<int, double>>> adj(nv);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto& edge = mesh.edges()[e];
    const double len = mesh.edge_length(static_cast<int>(e));
    adj[edge.vertices[0]].emplace_back(edge.vertices[1], len);
    adj[edge.vertices[1]].emplace_back(edge.vertices[0], len);

    const int h = edge.halfedges[0];
    const int t = edge.halfedges[1];
    const double angle_tail = mesh.corner_angle(h) + mesh.corner_angle(TriangleMesh::next(t));
    const double angle_tip = mesh.corner_angle(t) + mesh.corner_angle(TriangleMesh::next(h));
    if (angle_tail >= std::numbers::pi || angle_tip >= std::numbers::pi) continue;
    const int a = mesh.tail(TriangleMesh::prev(h));
    const int b = mesh.tip(TriangleMesh::next(t));
    if (a == b) continue;
    const double la = mesh.edge_length(mesh.edge_of(TriangleMesh::prev(h)));
    const double lb = mesh.edge_length(mesh.edge_of(TriangleMesh::next(t)));
    const double chord = std::sqrt(std::max(0.0, la * la + lb * lb - 2.0 * la * lb * std::cos(angle_tail)));
    adj[a].emplace_back(b, chord);
    adj[b].emplace_back(a, chord);
  }
  PathGraph g;
  g.offsets.assign(nv + 1, 0);
  for (int v = 0; v < nv; ++v) g.offsets[v + 1] = g.offsets[v] + static_cast<int>(adj[v].size());
  g.arcs.reserve(g.offsets[nv]);
  for (auto& list : adj) g.arcs.insert(g.arcs.end(), list.begin(), list.end());
  return g;
}

std::vector<double> dijkstra(const PathGraph& g, int source) {
  const std::size_t nv = g.offsets.size() - 1;
  std::vector<double> dist(nv, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (int k = g.offsets[v]; k < g.offsets[v + 1]; ++k) {
      const auto [w, len] = g.arcs[k];
      const double nd = d + len;
      if (nd < dist[w]) {
        dist[w] = nd;
        queue.emplace(nd, w);
      }
    }
  }
  return dist;
}

}  // namespace

std::vector<double> edge_distances(const TriangleMesh& mesh, int source) {
  if (source < 0 || source >= static_cast<int>(mesh.num_vertices())) {
    throw DomainError("edge_distances: source out of range");
  }
  return dijkstra(build_path_graph(mesh), source);
}

DiameterEstimate graph_diameter(const TriangleMesh& mesh, std::size_t exact_limit) {
  const int nv = static_cast<int>(mesh.num_vertices());
  const PathGraph graph = build_path_graph(mesh);
  DiameterEstimate out;
  auto sweep = [&](int source) {
    const auto dist = dijkstra(graph, source);
    const auto it = std::max_element(dist.begin(), dist.end());
    if (std::isinf(*it)) throw MeshError("graph_diameter: mesh is disconnected");
    out.value = std::max(out.value, *it);
    return static_cast<int>(it - dist.begin());
  };
  if (mesh.num_vertices() <= exact_limit) {
    for (int v = 0; v < nv; ++v) sweep(v);
    return out;
  }
  // Sampled: alternate farthest-point sweeps with evenly spaced sources.
  out.lower_bound = true;
  constexpr int kSources = 64;
  int next = 0;
  for (int s = 0; s < kSources; ++s) {
    const int source = (s % 2 == 0) ? next : static_cast<int>((static_cast<long>(s) * nv) / kSources);
    const int far = sweep(source);
    if (s % 2 == 0) next = far;
  }
  return out;
}

MeshGeometry compute_geometry(const TriangleMesh& mesh) {
  MeshGeometry g;
  g.vertex_areas = vertex_areas(mesh);
  g.angle_defects = angle_defects(mesh);
  const DiameterEstimate d = graph_diameter(mesh);
  g.diameter_graph = d.value;
  g.diameter_is_lower_bound = d.lower_bound;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) g.total_area += mesh.face_area(static_cast<int>(f));
  return g;
}

double curvature_lp_norm(const TriangleMesh& mesh, double p, double convention_scale) {
  if (!(p >= 1.0)) throw DomainError("curvature_lp_norm: p must be >= 1");
  if (!(convention_scale > 0.0)) throw DomainError("curvature_lp_norm: convention scale must be positive");
  const auto areas = vertex_areas(mesh);
  const auto defects = angle_defects(mesh);
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t v = 0; v < areas.size(); ++v) {
    const double riem = convention_scale * std::abs(defects[v] / areas[v]);
    weighted += areas[v] * std::pow(riem, p);
    total += areas[v];
  }
  return std::pow(weighted / total, 1.0 / p);
}

std::vector<double> face_gradient_norms(const TriangleMesh& mesh, std::span<const double> values) {
  if (values.size() != mesh.num_vertices()) throw DomainError("face_gradient_norms: size mismatch");
  std::vector<double> out(mesh.num_faces());
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const int h0 = 3 * static_cast<int>(f);
    // Intrinsic layout: corner 0 at the origin, corner 1 on the x-axis.
    const double l01 = mesh.edge_length(mesh.edge_of(h0));
    const double l20 = mesh.edge_length(mesh.edge_of(h0 + 2));
    const double angle0 = mesh.corner_angle(h0);
    const Eigen::Vector2d p1(l01, 0.0);
    const Eigen::Vector2d p2(l20 * std::cos(angle0), l20 * std::sin(angle0));
    const Face& face = mesh.faces()[f];
    const double d1 = values[face[1]] - values[face[0]];
    const double d2 = values[face[2]] - values[face[0]];
    Eigen::Matrix2d e;
    e.row(0) = p1.transpose();
    e.row(1) = p2.transpose();
    const Eigen::Vector2d grad = e.inverse() * Eigen::Vector2d(d1, d2);
    out[f] = grad.norm();
  }
  return out;
}

void save_off(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.precision(17);
  os << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << ' ' << mesh.num_edges() << '\n';
  for (const Vec3& p : mesh.vertices()) os << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const Face& f : mesh.faces()) os << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  if (const auto& box = mesh.periodic()) {
    std::filesystem::path sidecar = path;
    sidecar.replace_extension(".json");
    std::ofstream js(sidecar);
    js << nlohmann::json{{"lx", box->lx}, {"ly", box->ly}, {"nx", box->nx}, {"ny", box->ny}}.dump(2)
       << '\n';
  }
}

TriangleMesh load_off(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string header;
  is >> header;
  if (header != "OFF") throw ParseError(path.string() + ": missing OFF header");
  std::size_t nv = 0, nf = 0, ne = 0;
  if (!(is >> nv >> nf >> ne)) throw ParseError(path.string() + ": bad counts line");
  std::vector<Vec3> verts(nv);
  for (auto& p : verts) {
    if (!(is >> p.x() >> p.y() >> p.z())) throw ParseError(path.string() + ": truncated vertex list");
  }
  std::vector<Face> faces(nf);
  for (auto& f : faces) {
    int k = 0;
    if (!(is >> k >> f[0] >> f[1] >> f[2]) || k != 3) {
      throw ParseError(path.string() + ": only triangle faces are supported");
    }
  }
  std::optional<PeriodicBox> box;
  std::filesystem::path sidecar = path;
  sidecar.replace_extension(".json");
  if (std::filesystem::exists(sidecar)) {
    std::ifstream js(sidecar);
    const auto j = nlohmann::json::parse(js);
    box = PeriodicBox{j.at("lx").get<double>(), j.at("ly").get<double>(), j.at("nx").get<int>(),
                      j.at("ny").get<int>()};
  }
  return TriangleMesh(std::move(verts), std::move(faces), box);
}

}  // namespace formspec::mesh
