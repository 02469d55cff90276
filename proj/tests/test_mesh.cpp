#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "formspec/errors.hpp"
#include "formspec/mesh.hpp"

using namespace formspec;
using namespace formspec::mesh;

namespace {

constexpr double kPi = std::numbers::pi;

TriangleMesh tetrahedron() {
  std::vector<Vec3> v = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  std::vector<Face> f = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  return TriangleMesh(v, f);
}

double sum(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0); }

}  // namespace

TEST_CASE("icosphere counts and Euler characteristic") {
  for (int s = 0; s <= 4; ++s) {
    CAPTURE(s);
    const auto m = generate_icosphere(1.0, s);
    const std::size_t nv = 10 * (std::size_t{1} << (2 * s)) + 2;
    CHECK(m.num_vertices() == nv);
    CHECK(m.num_faces() == 2 * nv - 4);
    CHECK(euler_characteristic(m) == 2);
    for (const auto& p : m.vertices()) CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("flat torus counts and Euler characteristic") {
  const auto m = generate_flat_torus(2 * kPi, 2 * kPi, 8, 5);
  CHECK(m.num_vertices() == 40);
  CHECK(m.num_faces() == 80);
  CHECK(euler_characteristic(m) == 0);
  CHECK(sum(angle_defects(m)) == doctest::Approx(0.0).epsilon(1e-12));
  for (double d : angle_defects(m)) CHECK(std::abs(d) < 1e-12);
}

TEST_CASE("Gauss-Bonnet holds on generated meshes") {
  std::vector<TriangleMesh> meshes;
  for (int s = 0; s <= 4; ++s) meshes.push_back(generate_icosphere(1.0 + 0.5 * s, s));
  for (int n : {3, 8, 32, 64}) meshes.push_back(generate_flat_torus(2 * kPi, 3.0, n, n + 1));
  meshes.push_back(tetrahedron());
  for (const auto& m : meshes) {
    CHECK(std::abs(sum(angle_defects(m)) - 2 * kPi * euler_characteristic(m)) < 1e-9);
  }
}

TEST_CASE("vertex areas sum to the total area") {
  const auto m = generate_icosphere(2.0, 3);
  double faces = 0.0;
  for (std::size_t f = 0; f < m.num_faces(); ++f) faces += m.face_area(int(f));
  CHECK(sum(vertex_areas(m)) == doctest::Approx(faces).epsilon(1e-13));
  // inscribed polyhedron: slightly below 4 pi r^2
  CHECK(faces < 16 * kPi);
  CHECK(faces > 0.99 * 16 * kPi);

  const auto t = generate_flat_torus(2.0, 3.0, 7, 9);
  CHECK(sum(vertex_areas(t)) == doctest::Approx(6.0).epsilon(1e-13));
}

TEST_CASE("scaling multiplies lengths and areas") {
  const auto m = generate_icosphere(1.0, 2);
  const auto s = m.scaled(3.0);
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    CHECK(s.edge_length(int(e)) == doctest::Approx(3.0 * m.edge_length(int(e))).epsilon(1e-14));
  }
  CHECK(s.face_area(0) == doctest::Approx(9.0 * m.face_area(0)).epsilon(1e-13));
  CHECK(s.corner_angle(5) == doctest::Approx(m.corner_angle(5)).epsilon(1e-14));
}

TEST_CASE("halfedge connectivity is consistent") {
  const auto m = generate_icosphere(1.0, 2);
  for (int h = 0; h < int(m.num_halfedges()); ++h) {
    const int t = m.twin(h);
    CHECK(m.twin(t) == h);
    CHECK(m.tail(t) == m.tip(h));
    CHECK(m.edge_of(t) == m.edge_of(h));
    CHECK(m.edge_sign(t) == -m.edge_sign(h));
  }
  for (int v = 0; v < int(m.num_vertices()); ++v) {
    double angle = 0.0;
    for (int h : m.outgoing(v)) {
      CHECK(m.tail(h) == v);
      angle += m.corner_angle(h);
    }
    CHECK(angle < 2 * kPi);
  }
}

TEST_CASE("sphere diameter from the path graph") {
  for (int s : {4}) {
    const auto m = generate_icosphere(1.0, s);
    const auto d = graph_diameter(m);
    CHECK_FALSE(d.lower_bound);
    CHECK(d.value >= kPi);
    CHECK(d.value <= 1.05 * kPi);
  }
  // radius scales the diameter
  const auto big = generate_icosphere(2.0, 3);
  const auto small = generate_icosphere(1.0, 3);
  CHECK(graph_diameter(big).value == doctest::Approx(2.0 * graph_diameter(small).value).epsilon(1e-12));
}

TEST_CASE("flat torus diameter is the half diagonal") {
  for (int n : {8, 16, 32}) {
    const auto m = generate_flat_torus(2 * kPi, 2 * kPi, n, n);
    const auto d = graph_diameter(m);
    CHECK(d.value >= kPi * std::sqrt(2.0) - 1e-12);
    CHECK(d.value <= 1.05 * kPi * std::sqrt(2.0));
  }
}

TEST_CASE("path-graph distances are a metric on the vertices") {
  const auto m = generate_icosphere(1.0, 2);
  const auto d0 = edge_distances(m, 0);
  const auto d7 = edge_distances(m, 7);
  CHECK(d0[0] == 0.0);
  CHECK(d0[7] == doctest::Approx(d7[0]).epsilon(1e-14));
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    CHECK(d0[v] <= d0[7] + d7[v] + 1e-12);
    // every path runs on the surface of the unit sphere's inscribed polyhedron
    CHECK(d0[v] >= (m.vertices()[0] - m.vertices()[v]).norm() - 1e-12);
  }
  CHECK_THROWS_AS(edge_distances(m, -1), DomainError);
  CHECK_THROWS_AS(edge_distances(m, int(m.num_vertices())), DomainError);
}

TEST_CASE("large meshes fall back to a sampled lower bound") {
  const auto m = generate_icosphere(1.0, 3);
  const auto d = graph_diameter(m, 100);
  CHECK(d.lower_bound);
  CHECK(d.value <= graph_diameter(m).value + 1e-12);
  CHECK(d.value > 0.95 * kPi);
}

TEST_CASE("curvature norm converges under refinement") {
  // |Riem| = 2 |K| = 2 on the unit sphere with the factor-2 convention.
  double prev = 1e300;
  for (int s = 2; s <= 5; ++s) {
    const double err = std::abs(curvature_lp_norm(generate_icosphere(1.0, s), 4.0) - 2.0);
    CAPTURE(s);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-3);
  CHECK(curvature_lp_norm(generate_flat_torus(1.0, 1.0, 6, 6), 4.0) < 1e-10);
  CHECK_THROWS_AS(curvature_lp_norm(generate_icosphere(1.0, 1), 0.5), DomainError);
}

TEST_CASE("face gradients of an ambient linear function") {
  const auto m = generate_icosphere(1.0, 4);
  std::vector<double> z;
  for (const auto& p : m.vertices()) z.push_back(p.z());
  const auto g = face_gradient_norms(m, z);
  REQUIRE(g.size() == m.num_faces());
  for (double x : g) CHECK(x <= 1.0 + 1e-2);
  CHECK(*std::max_element(g.begin(), g.end()) > 0.99);
  std::vector<double> too_short(3, 0.0);
  CHECK_THROWS_AS(face_gradient_norms(m, too_short), DomainError);
}

TEST_CASE("OFF round trip keeps the metric and the periodic box") {
  const auto dir = std::filesystem::temp_directory_path() / "formspec_test_mesh";
  std::filesystem::create_directories(dir);

  const auto sphere = generate_icosphere(1.5, 2);
  save_off(sphere, dir / "sphere.off");
  const auto s2 = load_off(dir / "sphere.off");
  CHECK(s2.num_faces() == sphere.num_faces());
  CHECK_FALSE(s2.periodic().has_value());
  for (std::size_t e = 0; e < sphere.num_edges(); ++e) {
    CHECK(s2.edge_length(int(e)) == doctest::Approx(sphere.edge_length(int(e))).epsilon(1e-14));
  }

  const auto torus = generate_flat_torus(2.0, 3.0, 5, 6);
  save_off(torus, dir / "torus.off");
  CHECK(std::filesystem::exists(dir / "torus.json"));
  const auto t2 = load_off(dir / "torus.off");
  REQUIRE(t2.periodic().has_value());
  CHECK(t2.periodic()->lx == 2.0);
  CHECK(t2.periodic()->ny == 6);
  CHECK(euler_characteristic(t2) == 0);
  CHECK(sum(vertex_areas(t2)) == doctest::Approx(6.0).epsilon(1e-13));
  std::filesystem::remove_all(dir);
}

TEST_CASE("invalid meshes are rejected") {
  const std::vector<Vec3> v = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  SUBCASE("open") { CHECK_THROWS_AS(TriangleMesh(v, {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}}), MeshError); }
  SUBCASE("inconsistent orientation") {
    CHECK_THROWS_AS(TriangleMesh(v, {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 3, 2}}), MeshError);
  }
  SUBCASE("missing vertex") {
    CHECK_THROWS_AS(TriangleMesh(v, {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 9}}), MeshError);
  }
  SUBCASE("repeated vertex") {
    CHECK_THROWS_AS(TriangleMesh(v, {{0, 1, 1}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}}), MeshError);
  }
  SUBCASE("degenerate") {
    std::vector<Vec3> flat = v;
    flat[3] = flat[0];
    CHECK_THROWS_AS(TriangleMesh(flat, {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}}), MeshError);
  }
  SUBCASE("disconnected") {
    std::vector<Vec3> two = v;
    for (const auto& p : v) two.push_back(p + Vec3(5, 0, 0));
    std::vector<Face> f = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2},
                           {4, 5, 6}, {4, 7, 5}, {4, 6, 7}, {5, 7, 6}};
    CHECK_THROWS_AS(TriangleMesh(two, f), MeshError);
  }
  SUBCASE("empty") { CHECK_THROWS_AS(TriangleMesh({}, {}), MeshError); }
  SUBCASE("bad generators") {
    CHECK_THROWS_AS(generate_flat_torus(1.0, 1.0, 2, 5), DomainError);
    CHECK_THROWS_AS(generate_icosphere(-1.0, 1), DomainError);
    CHECK_THROWS_AS(build_mesh(ProductSpec{}), DomainError);
  }
}

TEST_CASE("tetrahedron is a valid closed mesh") {
  const auto m = tetrahedron();
  CHECK(euler_characteristic(m) == 2);
  CHECK(m.num_edges() == 6);
  for (double d : angle_defects(m)) CHECK(d == doctest::Approx(kPi).epsilon(1e-12));
}
