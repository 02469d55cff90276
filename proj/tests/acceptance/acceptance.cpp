// One line per exit criterion. The exit status is non-zero when a criterion
// fails, except for parts listed as known defects, which still print FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "formspec/constants.hpp"
#include "formspec/eigen.hpp"
#include "formspec/mesh.hpp"
#include "formspec/operators.hpp"
#include "formspec/spectra.hpp"
#include "formspec/verify.hpp"

using namespace formspec;

namespace {

constexpr double kPi = std::numbers::pi;

struct Result {
  bool pass = true;
  bool known_defect = false;  // only failing part is a documented defect
  std::string detail;
};

class Detail {
 public:
  template <class T>
  Detail& operator()(const std::string& key, const T& value) {
    if (!first_) os_ << ", ";
    first_ = false;
    os_ << key << '=' << value;
    return *this;
  }
  std::string str() const { return os_.str(); }
  Detail() { os_.precision(10); }

 private:
  std::ostringstream os_;
  bool first_ = true;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const mesh::ModelManifold kUnitSphere5 = mesh::IcoSphereSpec{1.0, 5};
const mesh::ModelManifold kTorus64 = mesh::FlatTorusSpec{2 * kPi, 2 * kPi, 64, 64};

Result sphere_spectrum() {
  Detail d;
  bool ok = true;

  const auto t0 = std::chrono::steady_clock::now();
  const auto m = mesh::generate_icosphere(1.0, 5);
  const auto op = operators::connection_laplacian_1forms(m, operators::build_connection(m));
  eigen::SolverConfig cfg;
  cfg.k = 6;
  const auto r = eigen::smallest_eigenpairs(op.stiffness, op.mass.matrix, cfg);
  const double runtime = seconds_since(t0);
  const auto clusters = eigen::cluster_multiplicities(r.values, 0.02);
  ok = ok && !clusters.empty() && clusters[0].count == 3 && std::abs(clusters[0].value - 1.0) <= 0.02;
  ok = ok && runtime < 60.0;
  d("first_cluster", clusters.empty() ? 0.0 : clusters[0].value)
   ("complex_multiplicity", clusters.empty() ? 0 : clusters[0].count)
   ("runtime_s", runtime);

  // Hodge value 2 minus the curvature shift 1 gives the rough value 1 (real multiplicity 6).
  const auto exact = spectra::sphere_oneform_rough_spectrum(1.0, 2.0).first_positive();
  const auto hodge = spectra::sphere_function_spectrum(1.0, 2.0).first_positive();
  ok = ok && exact.value == 1.0 && exact.multiplicity == 6 && hodge.value - 1.0 == exact.value;

  // Sparse against dense at subdivision 3.
  const auto m3 = mesh::generate_icosphere(1.0, 3);
  const auto op3 = operators::connection_laplacian_1forms(m3, operators::build_connection(m3));
  const auto sparse3 = eigen::smallest_eigenpairs(op3.stiffness, op3.mass.matrix, cfg);
  const auto dense3 = eigen::dense_eigenpairs(op3.stiffness, op3.mass.matrix, 6);
  double worst = 0.0;
  for (int i = 0; i < 6; ++i) worst = std::max(worst, std::abs(sparse3.values[i] - dense3.values[i]) / dense3.values[i]);
  ok = ok && worst < 1e-8;
  d("dense_s3_rel_diff", worst);
  return {ok, false, d.str()};
}

Result torus_spectrum(verify::Workbench& bench) {
  const auto& s = bench.connection_spectrum(kTorus64, 6);
  std::vector<double> positive(s.values.begin() + s.zero_modes, s.values.end());
  const auto clusters = eigen::cluster_multiplicities(positive, 0.02);
  const bool complete = !clusters.empty() && clusters.size() >= 2;  // the cluster is closed by a larger value
  const bool ok = 2 * s.zero_modes == 2 && complete && 2 * clusters[0].count == 8 &&
                  std::abs(clusters[0].value - 1.0) <= 0.01 && s.values.front() < 1e-8 * s.operator_scale;
  Detail d;
  d("zero_real_dim", 2 * s.zero_modes)("next_cluster", clusters.empty() ? 0.0 : clusters[0].value)
   ("real_multiplicity", clusters.empty() ? 0 : 2 * clusters[0].count);
  return {ok, false, d.str()};
}

Result weitzenboeck(verify::Workbench& bench) {
  const auto sphere = verify::check_weitzenboeck(bench, mesh::IcoSphereSpec{1.0, 4}, 6, 0.03, true);
  const auto torus = verify::check_weitzenboeck(bench, mesh::FlatTorusSpec{2 * kPi, 2 * kPi, 32, 32}, 6, 0.05, true);
  auto good = [](const verify::CheckOutcome& o, double tol) {
    if (o.status != verify::Status::pass || !o.measured.contains("max_residual")) return false;
    const double fine = o.measured["max_residual"].get<double>();
    const double coarse = o.measured["coarse_max_residual"].get<double>();
    return o.measured["pairs"].get<int>() == 6 && fine < tol && fine < coarse;
  };
  const bool ok = good(sphere, 0.03) && good(torus, 0.05);
  Detail d;
  d("sphere", sphere.measured.value("max_residual", -1.0))
   ("sphere_coarse", sphere.measured.value("coarse_max_residual", -1.0))
   ("torus", torus.measured.value("max_residual", -1.0))
   ("torus_coarse", torus.measured.value("coarse_max_residual", -1.0));
  return {ok, false, d.str()};
}

Result root_grid() {
  std::vector<int> dims;
  for (int n = 2; n <= 8; ++n) dims.push_back(n);
  std::vector<double> lambdas;
  for (int i = 0; i < 50; ++i) lambdas.push_back(1e-2 * std::pow(1e3, i / 49.0));
  const auto grid = verify::check_lemma_l2_grid(dims, lambdas);
  const bool grid_ok = grid.status == verify::Status::pass && grid.measured["points"] == 350;

  // Target stated for the small-Lambda end: Lambda C(Lambda) -> omega_2 = 2.
  // The root equation gives (sqrt(5) - 1) instead; kept as stated.
  const double small = constants::lambda_c_product(2, 1e-4);
  const bool limit_ok = std::abs(small - 2.0) <= 1e-3 * 2.0;

  Detail d;
  d("grid_max_residual", grid.measured["max_relative_residual"].get<double>())
   ("grid_sandwich", grid_ok ? "holds" : "violated")
   ("Lambda_C_at_1e-4", small)("target", 2.0);
  Result r{grid_ok && limit_ok, grid_ok && !limit_ok, d.str()};
  if (r.known_defect) r.detail += " (known defect: limit is sqrt(5)-1)";
  return r;
}

Result moser_grid() {
  const std::vector<double> t = {0.1, 1.0, 10.0, 100.0};
  const std::vector<double> g = {1.1, 1.5, 2.0, 4.0};
  const auto o = verify::check_lemma_l6_grid(t, g);
  const double tail = o.measured["max_log_tail"].get<double>();
  const bool ok = o.status == verify::Status::pass && o.measured["points"] == 16 && tail < 1e-12;
  Detail d;
  d("points", o.measured["points"].get<int>())("max_tail", tail)
   ("min_bound_over_product", o.measured["min_bound_over_product"].get<double>());
  return {ok, false, d.str()};
}

Result killing(verify::Workbench& bench) {
  const auto unit = verify::check_prop_p4(bench, kUnitSphere5);
  const auto big = verify::check_prop_p4(bench, mesh::IcoSphereSpec{2.0, 5});
  const double r1 = unit.measured["rayleigh_quotient"].get<double>();
  const double r2 = big.measured["rayleigh_quotient"].get<double>();
  const bool ok = unit.status == verify::Status::pass && r1 >= 0.98 && r1 <= 1.02 && r1 <= 1.0 * 1.02 &&
                  r2 >= 0.245 && r2 <= 0.255;
  Detail d;
  d("unit", r1)("radius_2", r2);
  return {ok, false, d.str()};
}

Result kernel_branch(verify::Workbench& bench) {
  const auto o = verify::check_prop_p3(bench, kTorus64);
  const bool ok = o.status == verify::Status::pass && o.measured["branch"] == "parallel" &&
                  o.measured["kernel_real_dimension"] == 2;
  Detail d;
  d("branch", o.measured.value("branch", std::string("?")))
   ("kernel_real_dim", o.measured.value("kernel_real_dimension", -1));
  return {ok, false, d.str()};
}

Result lower_bound() {
  constants::GeometryBudget b;
  b.dim = 4;
  b.p_exponent = 4.0;
  b.kappa = 0.0;
  b.riem_2p = 0.0;
  b.diameter = 1.0;
  const constants::AbstractConstants ones;
  const double tc = std::pow(4.0, -0.125) * std::exp(-0.125);
  const double expected = std::min(std::pow(tc, 8.0), 1.0);
  const double rhs = constants::theorem_t3_rhs(b, ones);

  b.diameter = 2.0;
  const auto t3 = verify::check_theorem_t3(b, ones);
  const auto& s = t3[1];
  const bool structure = s.status == verify::Status::pass && s.measured["kappa_ray_monotone"] == true &&
                         s.measured["riem_ray_monotone"] == true && s.measured["switch_found"] == true &&
                         s.measured["switch_jump"].get<double>() < 1e-9;
  const bool ok = std::abs(rhs - expected) < 1e-6 && structure;
  Detail d;
  d("rhs", rhs)("expected", expected)("switch_jump", s.measured["switch_jump"].get<double>());
  return {ok, false, d.str()};
}

Result gauss_bonnet() {
  bool ok = true;
  double worst = 0.0;
  for (int s = 0; s <= 5; ++s) {
    const auto m = mesh::generate_icosphere(1.0, s);
    double total = 0.0;
    for (double a : mesh::angle_defects(m)) total += a;
    worst = std::max(worst, std::abs(total - 4 * kPi));
    ok = ok && mesh::euler_characteristic(m) == 2;
  }
  for (int n : {3, 8, 16, 32, 64}) {
    const auto m = mesh::generate_flat_torus(2 * kPi, 2 * kPi, n, n);
    double total = 0.0;
    for (double a : mesh::angle_defects(m)) total += a;
    worst = std::max(worst, std::abs(total));
    ok = ok && mesh::euler_characteristic(m) == 0;
  }
  ok = ok && worst < 1e-9;
  Detail d;
  d("meshes", 11)("max_error", worst);
  return {ok, false, d.str()};
}

Result diameter() {
  const auto s4 = mesh::graph_diameter(mesh::generate_icosphere(1.0, 4));
  const auto t = mesh::graph_diameter(mesh::generate_flat_torus(2 * kPi, 2 * kPi, 64, 64));
  const double diag = kPi * std::sqrt(2.0);
  const bool ok = !s4.lower_bound && s4.value >= kPi && s4.value <= 1.05 * kPi && !t.lower_bound &&
                  t.value >= diag - 1e-12 && t.value <= 1.05 * diag;
  Detail d;
  d("sphere_s4_over_pi", s4.value / kPi)("torus_over_pi_sqrt2", t.value / diag);
  return {ok, false, d.str()};
}

Result lipschitz(verify::Workbench& bench) {
  const auto a = verify::check_lipschitz(bench, mesh::IcoSphereSpec{1.0, 3});
  const auto b = verify::check_lipschitz(bench, mesh::FlatTorusSpec{2 * kPi, 2 * kPi, 32, 32});
  const bool ok = a.status == verify::Status::pass && b.status == verify::Status::pass;
  Detail d;
  d("functions", a.measured["functions"].get<int>() + b.measured["functions"].get<int>())("slack", 0.05);
  return {ok, false, d.str()};
}

Result determinism() {
  const auto spec = verify::load_spec(FORMSPEC_DATA_DIR "/default_spec.json");
  const auto a = verify::without_timestamp(verify::run_spec(spec).to_json());
  const auto b = verify::without_timestamp(verify::run_spec(spec).to_json());
  Detail d;
  d("outcomes", a["outcomes"].size())("identical", a == b ? "yes" : "no");
  return {a == b, false, d.str()};
}

Result product() {
  const auto o = verify::check_product_spectrum();
  const auto f = spectra::sphere_function_spectrum(1.0, 30.0);
  const auto w = spectra::sphere_oneform_rough_spectrum(1.0, 30.0);
  const auto first = spectra::product_oneform_spectrum(f, w, f, w, 20.0).first_positive();
  const bool ok = o.status == verify::Status::pass && first.value == 1.0 && first.multiplicity == 12 &&
                  o.measured["sphere_torus_commutes"] == true;
  Detail d;
  d("first", first.value)("multiplicity", first.multiplicity);
  return {ok, false, d.str()};
}

}  // namespace

int main() {
  verify::Workbench bench(eigen::SolverConfig{});
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"sphere 1-form spectrum", sphere_spectrum},
      {"flat torus zero modes and first cluster", [&] { return torus_spectrum(bench); }},
      {"Weitzenboeck pairing and refinement", [&] { return weitzenboeck(bench); }},
      {"root grid and sandwich", root_grid},
      {"Moser product grid", moser_grid},
      {"Killing field Rayleigh quotient", [&] { return killing(bench); }},
      {"parallel-kernel branch on the torus", [&] { return kernel_branch(bench); }},
      {"lower-bound evaluator", lower_bound},
      {"Gauss-Bonnet and Euler characteristic", gauss_bonnet},
      {"path-graph diameter", diameter},
      {"Lipschitz gradient check", [&] { return lipschitz(bench); }},
      {"default suite determinism", determinism},
      {"product spectrum", product},
  };

  int blocking = 0;
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %2zu  %-42s %s  [%.1fs]\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                r.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    if (!r.pass) {
      ++failed;
      if (!r.known_defect) ++blocking;
    }
  }
  std::printf("%zu criteria: %zu pass, %d fail (%d known defect)\n", criteria.size(), criteria.size() - failed,
              failed, failed - blocking);
  return blocking == 0 ? 0 : 1;
}
