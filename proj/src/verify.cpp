#include "formspec/verify.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "formspec/errors.hpp"
#include "formspec/operators.hpp"
#include "formspec/spectra.hpp"

namespace formspec::verify {

namespace {

using constants::AbstractConstants;
using constants::GeometryBudget;
using mesh::FlatTorusSpec;
using mesh::IcoSphereSpec;
using mesh::ModelManifold;

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------- parsing

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

const Json& require_key(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) parse_fail(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) parse_fail(where, "missing key '" + key + "'");
  return *it;
}

double number_at(const Json& j, const std::string& key, double fallback, const std::string& where) {
  if (!j.is_object()) parse_fail(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) parse_fail(where + "." + key, "expected a number");
  return it->get<double>();
}

int int_at(const Json& j, const std::string& key, int fallback, const std::string& where) {
  if (!j.is_object()) parse_fail(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) parse_fail(where + "." + key, "expected an integer");
  return it->get<int>();
}

bool bool_at(const Json& j, const std::string& key, bool fallback, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) parse_fail(where + "." + key, "expected a boolean");
  return it->get<bool>();
}

std::string string_at(const Json& j, const std::string& key, const std::string& fallback,
                      const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_string()) parse_fail(where + "." + key, "expected a string");
  return it->get<std::string>();
}

template <class T>
std::vector<T> array_at(const Json& j, const std::string& key, std::vector<T> fallback,
                        const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_array()) parse_fail(where + "." + key, "expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const Json& item = (*it)[i];
    const std::string loc = where + "." + key + "[" + std::to_string(i) + "]";
    if constexpr (std::is_integral_v<T>) {
      if (!item.is_number_integer()) parse_fail(loc, "expected an integer");
    } else {
      if (!item.is_number()) parse_fail(loc, "expected a number");
    }
    out.push_back(item.get<T>());
  }
  return out;
}

GeometryBudget parse_budget(const Json& j, GeometryBudget base, const std::string& where) {
  if (!j.is_object()) parse_fail(where, "expected an object");
  base.dim = int_at(j, "dim", base.dim, where);
  base.kappa = number_at(j, "kappa", base.kappa, where);
  base.diameter = number_at(j, "diameter", base.diameter, where);
  base.riem_2p = number_at(j, "riem_2p", base.riem_2p, where);
  base.ric_minus_p = number_at(j, "ric_minus_p", base.ric_minus_p, where);
  base.p_exponent = number_at(j, "p", base.p_exponent, where);
  try {
    base.validate();
  } catch (const DomainError& e) {
    parse_fail(where, e.what());
  }
  return base;
}

AbstractConstants parse_consts(const Json& j, AbstractConstants base, const std::string& where) {
  if (!j.is_object()) parse_fail(where, "expected an object");
  base.c_n = number_at(j, "c_n", base.c_n, where);
  base.c_np = number_at(j, "c_np", base.c_np, where);
  base.c0_np = number_at(j, "c0_np", base.c0_np, where);
  try {
    base.validate();
  } catch (const DomainError& e) {
    parse_fail(where, e.what());
  }
  return base;
}

eigen::SolverConfig parse_solver(const Json& j, eigen::SolverConfig base, const std::string& where) {
  if (!j.is_object()) parse_fail(where, "expected an object");
  base.k = int_at(j, "k", base.k, where);
  base.tol = number_at(j, "tol", base.tol, where);
  base.max_iter = int_at(j, "max_iter", base.max_iter, where);
  base.shift = number_at(j, "shift", base.shift, where);
  base.guard_vectors = int_at(j, "guard_vectors", base.guard_vectors, where);
  base.krylov_depth = int_at(j, "krylov_depth", base.krylov_depth, where);
  try {
    base.validate();
  } catch (const DomainError& e) {
    parse_fail(where, e.what());
  }
  return base;
}

mesh::FactorSpec parse_factor(const Json& j, const std::string& where) {
  const ModelManifold m = parse_manifold(j, where);
  if (const auto* t = std::get_if<FlatTorusSpec>(&m)) return *t;
  if (const auto* s = std::get_if<IcoSphereSpec>(&m)) return *s;
  parse_fail(where, "nested products are not supported");
}

bool is_torus(const ModelManifold& m) { return std::holds_alternative<FlatTorusSpec>(m); }
bool is_sphere(const ModelManifold& m) { return std::holds_alternative<IcoSphereSpec>(m); }

void check_budget_consistency(const GeometryBudget& budget, const ModelManifold& manifold,
                              const std::string& where) {
  if (is_torus(manifold) &&
      (budget.kappa != 0.0 || budget.riem_2p != 0.0 || budget.ric_minus_p != 0.0)) {
    parse_fail(where, "a flat torus needs kappa = riem_2p = ric_minus_p = 0");
  }
}

// ---------------------------------------------------------------- helpers

std::string cache_key(const ModelManifold& m) { return manifold_to_json(m).dump(); }

template <class T>
T* find_cached(std::map<std::string, T>& cache, const std::string& key) {
  const auto it = cache.find(key);
  return it == cache.end() ? nullptr : &it->second;
}

ModelManifold coarser(const ModelManifold& m) {
  if (const auto* s = std::get_if<IcoSphereSpec>(&m)) {
    if (s->subdivisions < 1) throw DomainError("cannot coarsen an icosphere with 0 subdivisions");
    return IcoSphereSpec{s->radius, s->subdivisions - 1};
  }
  if (const auto* t = std::get_if<FlatTorusSpec>(&m)) {
    if (t->nx < 6 || t->ny < 6) throw DomainError("torus too coarse to halve");
    return FlatTorusSpec{t->lx, t->ly, t->nx / 2, t->ny / 2};
  }
  throw DomainError("product manifolds have no mesh");
}

const mesh::TriangleMesh& surface_mesh(Workbench& bench, const ModelManifold& m) {
  if (std::holds_alternative<mesh::ProductSpec>(m)) {
    throw DomainError("this check needs a surface mesh, not a product");
  }
  return bench.mesh_for(m);
}

double total_area(const mesh::TriangleMesh& mesh) {
  double a = 0.0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) a += mesh.face_area(static_cast<int>(f));
  return a;
}

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_value(const Json& v) {
  if (v.is_string()) return csv_field(v.get<std::string>());
  return csv_field(v.dump());
}

std::string file_stem(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') c = '_';
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- outcome

std::string to_string(Status status) {
  switch (status) {
    case Status::pass:
      return "pass";
    case Status::fail:
      return "fail";
    case Status::reported:
      return "reported";
  }
  return "reported";
}

Status status_from_string(const std::string& text) {
  if (text == "pass") return Status::pass;
  if (text == "fail") return Status::fail;
  if (text == "reported") return Status::reported;
  throw ParseError("unknown status '" + text + "'");
}

Json CheckOutcome::to_json() const {
  Json j = {{"name", name},         {"status", to_string(status)}, {"measured", measured},
            {"bounds", bounds},     {"tolerance", tolerance},      {"notes", notes}};
  if (!table.empty()) j["table"] = table;
  return j;
}

CheckOutcome CheckOutcome::from_json(const Json& j) {
  CheckOutcome o;
  o.name = require_key(j, "name", "outcome").get<std::string>();
  o.status = status_from_string(require_key(j, "status", "outcome").get<std::string>());
  o.measured = j.value("measured", Json::object());
  o.bounds = j.value("bounds", Json::object());
  o.tolerance = j.value("tolerance", 0.0);
  o.notes = j.value("notes", std::string());
  o.table = j.value("table", Json::array());
  return o;
}

// ---------------------------------------------------------------- spec

GeometryBudget ExperimentSpec::default_budget() {
  GeometryBudget b;
  b.dim = 4;
  b.kappa = 0.0;
  b.diameter = std::sqrt(2.0) * kPi;
  b.riem_2p = 2.0 * std::sqrt(2.0);
  b.ric_minus_p = 0.0;
  b.p_exponent = 4.0;
  return b;
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "lemma_l2_grid", "lemma_l6_grid",   "weitzenboeck", "prop_p3",         "prop_p4",
      "pinching",      "theorem_t3",      "lipschitz",    "prop_p5",         "oneform_spectrum",
      "mesh_topology", "diameter",        "product_spectrum"};
  return names;
}

ModelManifold parse_manifold(const Json& j, const std::string& where) {
  const std::string type = [&] {
    const Json& t = require_key(j, "type", where);
    if (!t.is_string()) parse_fail(where + ".type", "expected a string");
    return t.get<std::string>();
  }();
  if (type == "icosphere") {
    IcoSphereSpec s;
    s.radius = number_at(j, "radius", s.radius, where);
    s.subdivisions = int_at(j, "subdivisions", s.subdivisions, where);
    if (!(s.radius > 0.0)) parse_fail(where + ".radius", "must be positive");
    if (s.subdivisions < 0) parse_fail(where + ".subdivisions", "must be >= 0");
    return s;
  }
  if (type == "flat_torus") {
    FlatTorusSpec t;
    t.lx = number_at(j, "lx", t.lx, where);
    t.ly = number_at(j, "ly", t.ly, where);
    t.nx = int_at(j, "nx", t.nx, where);
    t.ny = int_at(j, "ny", t.ny, where);
    if (!(t.lx > 0.0) || !(t.ly > 0.0)) parse_fail(where, "torus lengths must be positive");
    if (t.nx < 3 || t.ny < 3) parse_fail(where, "torus needs nx, ny >= 3");
    return t;
  }
  if (type == "product") {
    return mesh::ProductSpec{parse_factor(require_key(j, "first", where), where + ".first"),
                             parse_factor(require_key(j, "second", where), where + ".second")};
  }
  parse_fail(where + ".type", "unknown manifold type '" + type + "'");
}

Json manifold_to_json(const ModelManifold& manifold) {
  struct Visitor {
    Json operator()(const FlatTorusSpec& t) const {
      return {{"type", "flat_torus"}, {"lx", t.lx}, {"ly", t.ly}, {"nx", t.nx}, {"ny", t.ny}};
    }
    Json operator()(const IcoSphereSpec& s) const {
      return {{"type", "icosphere"}, {"radius", s.radius}, {"subdivisions", s.subdivisions}};
    }
    Json operator()(const mesh::ProductSpec& p) const {
      auto factor = [this](const mesh::FactorSpec& f) {
        return std::visit([this](const auto& x) { return (*this)(x); }, f);
      };
      return {{"type", "product"}, {"first", factor(p.first)}, {"second", factor(p.second)}};
    }
  };
  return std::visit(Visitor{}, manifold);
}

ExperimentSpec parse_spec(const Json& j) {
  if (!j.is_object()) parse_fail("spec", "expected an object");
  ExperimentSpec spec;
  spec.source = j;
  const int version = int_at(j, "schema_version", kSchemaVersion, "spec");
  if (version != kSchemaVersion) parse_fail("spec.schema_version", "unsupported version");
  if (j.contains("seed")) {
    const Json& seed = j["seed"];
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
      parse_fail("spec.seed", "expected a non-negative integer");
    }
    spec.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("manifold")) spec.manifold = parse_manifold(j["manifold"], "spec.manifold");
  if (j.contains("solver")) spec.solver = parse_solver(j["solver"], spec.solver, "spec.solver");
  spec.solver.seed = spec.seed;
  if (j.contains("budget")) spec.budget = parse_budget(j["budget"], spec.budget, "spec.budget");
  if (j.contains("constants")) spec.consts = parse_consts(j["constants"], spec.consts, "spec.constants");

  const Json& checks = j.contains("checks") ? j["checks"] : Json::array();
  if (!checks.is_array()) parse_fail("spec.checks", "expected an array");
  const auto& names = known_checks();
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const std::string where = "spec.checks[" + std::to_string(i) + "]";
    const Json& c = checks[i];
    CheckRequest req;
    if (c.is_string()) {
      req.name = c.get<std::string>();
    } else {
      const Json& name = require_key(c, "name", where);
      if (!name.is_string()) parse_fail(where + ".name", "expected a string");
      req.name = name.get<std::string>();
      if (c.contains("params")) {
        if (!c["params"].is_object()) parse_fail(where + ".params", "expected an object");
        req.params = c["params"];
      }
    }
    if (std::find(names.begin(), names.end(), req.name) == names.end()) {
      parse_fail(where + ".name", "unknown check '" + req.name + "'");
    }
    // Validate manifold-dependent pieces now so errors carry a location.
    const std::string pw = where + ".params";
    const ModelManifold m =
        req.params.contains("manifold") ? parse_manifold(req.params["manifold"], pw + ".manifold") : spec.manifold;
    if (req.params.contains("budget")) {
      const GeometryBudget b = parse_budget(req.params["budget"], spec.budget, pw + ".budget");
      if (req.name == "pinching") check_budget_consistency(b, m, pw + ".budget");
    } else if (req.name == "pinching") {
      check_budget_consistency(spec.budget, m, pw + ".budget");
    }
    if (req.params.contains("constants")) parse_consts(req.params["constants"], spec.consts, pw + ".constants");
    spec.checks.push_back(std::move(req));
  }
  return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError(path.string() + ": cannot open spec file");
  Json j;
  try {
    j = Json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return parse_spec(j);
}

// ---------------------------------------------------------------- workbench

const mesh::TriangleMesh& Workbench::mesh_for(const ModelManifold& manifold) {
  const std::string key = cache_key(manifold);
  if (auto* m = find_cached(meshes_, key)) return *m;
  return meshes_.emplace(key, mesh::build_mesh(manifold)).first->second;
}

const Workbench::ConnectionSpectrum& Workbench::connection_spectrum(const ModelManifold& manifold, int k) {
  const std::string key = cache_key(manifold) + "#" + std::to_string(k);
  if (auto* s = find_cached(connection_, key)) return *s;
  const auto& mesh = surface_mesh(*this, manifold);
  const auto conn = operators::build_connection(mesh);
  const auto op = operators::connection_laplacian_1forms(mesh, conn);
  eigen::SolverConfig cfg = solver_;
  cfg.k = k;
  const auto res = eigen::smallest_eigenpairs(op.stiffness, op.mass.matrix, cfg);
  ConnectionSpectrum out;
  out.values = res.values;
  out.operator_scale = res.operator_scale;
  out.zero_modes = eigen::count_zero_modes(res);
  if (out.zero_modes > 0) out.zero_vector = res.vectors.col(0);
  if (out.zero_modes < k) out.first_positive_vector = res.vectors.col(out.zero_modes);
  return connection_.emplace(key, std::move(out)).first->second;
}

const Workbench::HodgeSpectrum& Workbench::hodge_spectrum(const ModelManifold& manifold, int k) {
  const std::string key = cache_key(manifold) + "#" + std::to_string(k);
  if (auto* s = find_cached(hodge_, key)) return *s;
  const auto& mesh = surface_mesh(*this, manifold);
  const auto op = operators::hodge_laplacian_1forms(mesh);
  eigen::SolverConfig cfg = solver_;
  cfg.k = k;
  const auto res = eigen::smallest_eigenpairs(op.stiffness, op.mass.matrix, cfg);
  HodgeSpectrum out{res.values, eigen::count_zero_modes(res)};
  return hodge_.emplace(key, std::move(out)).first->second;
}

// ---------------------------------------------------------------- checks

CheckOutcome check_lemma_l2_grid(std::span<const int> dims, std::span<const double> lambdas) {
  for (double l : lambdas) {
    if (!(l > 0.0)) throw DomainError("lemma_l2_grid: every Lambda must be positive");
  }
  CheckOutcome o;
  o.name = "lemma_l2_grid";
  o.tolerance = 1e-10;
  double worst_residual = 0.0;
  double worst_upper_gap = std::numeric_limits<double>::infinity();
  double worst_lower_gap = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (int n : dims) {
    const double w = constants::omega(n);
    const double an = constants::a_n(n);
    for (double lam : lambdas) {
      const double c = constants::c_lambda_root(n, lam);
      const double product = lam * c;
      const double residual = std::abs(constants::root_function(n, lam, c) - w) / w;
      const double lower = an * std::exp(-(n - 1.0) * lam);
      const bool point_ok = residual < o.tolerance && lower <= product && product <= w;
      ok = ok && point_ok;
      worst_residual = std::max(worst_residual, residual);
      worst_upper_gap = std::min(worst_upper_gap, (w - product) / w);
      worst_lower_gap = std::min(worst_lower_gap, (product - lower) / w);
      o.table.push_back({{"n", n}, {"Lambda", lam}, {"C", c}, {"Lambda_C", product},
                         {"lower", lower}, {"omega", w}, {"relative_residual", residual},
                         {"holds", point_ok}});
    }
  }
  o.status = ok ? Status::pass : Status::fail;
  o.measured = {{"points", dims.size() * lambdas.size()},
                {"max_relative_residual", worst_residual},
                {"min_upper_gap_over_omega", dims.empty() || lambdas.empty() ? 0.0 : worst_upper_gap},
                {"min_lower_gap_over_omega", dims.empty() || lambdas.empty() ? 0.0 : worst_lower_gap}};
  o.bounds = {{"sandwich", "a_n exp(-(n-1) Lambda) <= Lambda C(Lambda) <= omega_n"},
              {"residual_max", o.tolerance}};
  return o;
}

CheckOutcome check_lemma_l6_grid(std::span<const double> t_grid, std::span<const double> gamma_grid) {
  for (double g : gamma_grid) {
    if (!(g > 1.0)) throw DomainError("lemma_l6_grid: gamma must exceed 1");
  }
  for (double t : t_grid) {
    if (!(t >= 0.0)) throw DomainError("lemma_l6_grid: t must be non-negative");
  }
  CheckOutcome o;
  o.name = "lemma_l6_grid";
  o.tolerance = 1e-12;
  bool ok = true;
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_tail = 0.0;
  for (double t : t_grid) {
    for (double g : gamma_grid) {
      const int terms = constants::moser_product_terms(t, g, o.tolerance);
      const double partial = constants::moser_product_partial(t, g, terms);
      const double tail = constants::moser_product_tail_bound(t, g, terms);
      const double bound = constants::moser_product_bound(t, g);
      // The full product is at most partial * exp(tail).
      const double upper_product = partial * std::exp(tail);
      const bool point_ok = upper_product <= bound && tail < o.tolerance;
      ok = ok && point_ok;
      min_ratio = std::min(min_ratio, bound / upper_product);
      max_tail = std::max(max_tail, tail);
      o.table.push_back({{"t", t}, {"gamma", g}, {"terms", terms}, {"partial_product", partial},
                         {"log_tail_bound", tail}, {"closed_bound", bound},
                         {"bound_over_product", bound / upper_product}, {"holds", point_ok}});
    }
  }
  o.status = ok ? Status::pass : Status::fail;
  o.measured = {{"points", t_grid.size() * gamma_grid.size()},
                {"min_bound_over_product", t_grid.empty() || gamma_grid.empty() ? 1.0 : min_ratio},
                {"max_log_tail", max_tail}};
  o.bounds = {{"closed_form", "exp(2 sqrt(gamma)/(gamma-1)) (1+sqrt t)^(2/(gamma-1))"},
              {"tail_max", o.tolerance}};
  return o;
}

CheckOutcome check_weitzenboeck(Workbench& bench, const ModelManifold& manifold, int k, double tolerance,
                                bool refine) {
  CheckOutcome o;
  o.name = "weitzenboeck";
  if (tolerance < 0.0) tolerance = is_sphere(manifold) ? 0.03 : 0.05;
  o.tolerance = tolerance;
  if (k == 0) {
    o.status = Status::pass;
    o.notes = "k = 0: no pairs to compare";
    return o;
  }
  auto run = [&](const ModelManifold& m, const std::string& level) {
    const auto pairs = operators::weitzenboeck_eigen_check(surface_mesh(bench, m), k, bench.solver());
    double worst = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      worst = std::max(worst, pairs[i].residual);
      o.table.push_back({{"level", level}, {"index", i + 1}, {"hodge", pairs[i].hodge_eigenvalue},
                         {"rough", pairs[i].rough_eigenvalue}, {"shift", pairs[i].curvature_shift},
                         {"residual", pairs[i].residual}});
    }
    return std::pair{pairs, worst};
  };
  const auto [pairs, worst] = run(manifold, "fine");
  bool ok = static_cast<int>(pairs.size()) == k && worst < tolerance;
  o.measured = {{"manifold", manifold_to_json(manifold)},
                {"pairs", pairs.size()},
                {"max_residual", worst},
                {"curvature_shift", pairs.empty() ? 0.0 : pairs.front().curvature_shift}};
  if (refine) {
    const ModelManifold coarse = coarser(manifold);
    const auto [coarse_pairs, coarse_worst] = run(coarse, "coarse");
    o.measured["coarse_manifold"] = manifold_to_json(coarse);
    o.measured["coarse_max_residual"] = coarse_worst;
    ok = ok && worst < coarse_worst;
  }
  o.bounds = {{"max_residual", tolerance}, {"refinement", refine ? "fine < coarse" : "not requested"}};
  o.status = ok ? Status::pass : Status::fail;
  return o;
}

CheckOutcome check_prop_p3(Workbench& bench, const ModelManifold& manifold, double kappa) {
  CheckOutcome o;
  o.name = "prop_p3";
  const auto& mesh = surface_mesh(bench, manifold);
  const int chi = mesh::euler_characteristic(mesh);
  const int b1 = 2 - chi;
  o.measured = {{"manifold", manifold_to_json(manifold)}, {"euler_characteristic", chi}, {"b1", b1}};
  if (b1 == 0) {
    o.status = Status::reported;
    o.notes = "not applicable: b1 = 0";
    return o;
  }
  const auto& spec = bench.connection_spectrum(manifold, std::max(6, b1 + 4));
  const int kernel_real = 2 * spec.zero_modes;
  o.tolerance = 1e-8;
  o.measured["kernel_real_dimension"] = kernel_real;
  o.measured["smallest_eigenvalue"] = spec.values.front();
  o.measured["operator_scale"] = spec.operator_scale;
  o.bounds = {{"zero_threshold", 1e-8 * spec.operator_scale}, {"kappa", kappa}};
  if (kernel_real > 0) {
    o.status = Status::pass;
    o.measured["branch"] = "parallel";
    o.notes = "parallel 1-forms detected";
    return o;
  }
  const double lambda1 = spec.values.front();
  o.measured["branch"] = lambda1 <= kappa ? "eigenvalue" : "none";
  o.status = lambda1 <= kappa ? Status::pass : Status::fail;
  return o;
}

CheckOutcome check_prop_p4(Workbench& bench, const ModelManifold& manifold) {
  CheckOutcome o;
  o.name = "prop_p4";
  const auto& mesh = surface_mesh(bench, manifold);
  const auto conn = operators::build_connection(mesh);
  const auto op = operators::connection_laplacian_1forms(mesh, conn);
  std::vector<mesh::Vec3> field;
  double sup_ric = 0.0;
  if (const auto* s = std::get_if<IcoSphereSpec>(&manifold)) {
    field = operators::rotation_field(mesh, mesh::Vec3::UnitZ());
    sup_ric = 1.0 / (s->radius * s->radius);
  } else {
    field.assign(mesh.num_vertices(), mesh::Vec3::UnitX());
  }
  const Eigen::VectorXcd alpha = operators::tangent_field_coefficients(mesh, conn, field);
  const double r = operators::rayleigh_quotient(op.stiffness, op.mass, alpha);
  const auto& spec = bench.connection_spectrum(manifold, 6);
  const double lambda_min = spec.values.front();
  const double minmax_tol = 1e-8 * std::max(1.0, std::abs(r));
  o.tolerance = minmax_tol;
  o.measured = {{"manifold", manifold_to_json(manifold)},
                {"rayleigh_quotient", r},
                {"smallest_eigenvalue", lambda_min},
                {"sup_ric", sup_ric}};
  bool ok = lambda_min <= r + minmax_tol;
  if (is_sphere(manifold)) {
    const double lo = 0.98 * sup_ric;
    const double hi = 1.02 * sup_ric;
    o.bounds = {{"window", {lo, hi}}, {"sup_ric_slack", 1.02 * sup_ric}};
    ok = ok && r >= lo && r <= hi && r <= 1.02 * sup_ric;
    o.notes = "rotation Killing field about the z axis";
  } else {
    o.bounds = {{"sup_ric_plus_tol", sup_ric + 1e-8}};
    ok = ok && r <= sup_ric + 1e-8;
    o.notes = "translation Killing field (parallel)";
  }
  o.status = ok ? Status::pass : Status::fail;
  return o;
}

CheckOutcome check_pinching(Workbench& bench, const ModelManifold& manifold, const GeometryBudget& budget,
                            const AbstractConstants& consts) {
  CheckOutcome o;
  o.name = "pinching";
  const auto& mesh = surface_mesh(bench, manifold);
  const auto& spec = bench.connection_spectrum(manifold, 6);
  const bool parallel = spec.zero_modes > 0;
  const Eigen::VectorXcd theta = parallel ? spec.zero_vector : spec.first_positive_vector;
  const double lambda = parallel ? 0.0 : spec.values[spec.zero_modes];
  const Eigen::VectorXd modulus2 = theta.cwiseAbs2();
  const double rho = modulus2.minCoeff() / modulus2.maxCoeff();
  const auto conn = operators::build_connection(mesh);
  const double kato = operators::kato_fraction(mesh, conn, theta);

  double epsilon = 0.0;
  int branch = 0;
  if (!parallel) {
    const double cs = constants::sobolev_cs(budget, consts);
    const auto eb = constants::epsilon_breakdown(budget, lambda, cs, consts);
    epsilon = eb.value;
    branch = eb.active_branch;
    o.measured["epsilon_first"] = eb.first;
    o.measured["epsilon_second"] = eb.second;
  }
  o.tolerance = 1e-6;
  o.measured["manifold"] = manifold_to_json(manifold);
  o.measured["lambda"] = lambda;
  o.measured["ratio_inf_sup"] = rho;
  o.measured["epsilon"] = epsilon;
  o.measured["epsilon_branch"] = branch;
  o.measured["kato_fraction"] = kato;
  o.bounds = {{"implied_ratio_min", 1.0 - 2.0 * epsilon}};
  if (epsilon < 0.5) {
    o.status = rho >= 1.0 - 2.0 * epsilon - o.tolerance ? Status::pass : Status::fail;
    o.notes = parallel ? "parallel eigenform: lambda -> 0 limit gives epsilon = 0"
                       : "epsilon < 1/2: implication asserted";
  } else {
    o.status = Status::reported;
    o.notes = "epsilon >= 1/2: implication vacuous";
  }
  return o;
}

std::vector<CheckOutcome> check_theorem_t3(const GeometryBudget& budget, const AbstractConstants& consts,
                                           const TheoremT3Options& options) {
  budget.validate();
  if (budget.dim % 2 != 0) throw DomainError("theorem_t3: odd dimension");
  if (!(budget.p_exponent > budget.dim / 2)) throw DomainError("theorem_t3: need p > n");
  if (options.ray_points < 2) throw DomainError("theorem_t3: need at least 2 ray points");

  double lambda1 = 0.0;
  if (options.measured_lambda1) {
    lambda1 = *options.measured_lambda1;
  } else {
    const double cutoff = 20.0;
    const auto f = spectra::sphere_function_spectrum(1.0, cutoff);
    const auto one = spectra::sphere_oneform_rough_spectrum(1.0, cutoff);
    lambda1 = spectra::product_oneform_spectrum(f, one, f, one, cutoff).first_positive().value;
  }
  if (!(lambda1 >= 0.0)) throw DomainError("theorem_t3: measured lambda_1 must be >= 0");

  const auto lb = constants::theorem_t3(budget, consts, options.second, options.delta);
  CheckOutcome bound;
  bound.name = "theorem_t3.bound";
  bound.status = Status::reported;
  const double lhs = std::sqrt(lambda1) * budget.diameter;
  bound.measured = {{"lambda1", lambda1}, {"diameter", budget.diameter}, {"sqrt_lambda1_D", lhs},
                    {"ratio", lhs / lb.value}};
  bound.bounds = {{"rhs", lb.value},          {"first", lb.first},   {"second", lb.second},
                  {"active_branch", lb.active_branch}, {"tilde_c", lb.tilde_c}};
  bound.notes = "abstract constants: evaluation only";

  CheckOutcome structure;
  structure.name = "theorem_t3.structure";
  structure.tolerance = 1e-9;
  auto rhs_at = [&](double kappa, double riem, const AbstractConstants& c) {
    GeometryBudget b = budget;
    b.kappa = kappa;
    b.riem_2p = riem;
    return constants::theorem_t3(b, c, options.second, options.delta);
  };
  auto monotone_ray = [&](bool along_kappa, double span) {
    bool ok = true;
    double prev = 0.0;
    for (int i = 0; i < options.ray_points; ++i) {
      const double x = span * i / (options.ray_points - 1);
      const double v = along_kappa ? rhs_at(x, budget.riem_2p, consts).value : rhs_at(budget.kappa, x, consts).value;
      structure.table.push_back({{"ray", along_kappa ? "kappa" : "riem_2p"}, {"x", x}, {"rhs", v}});
      if (i > 0 && v > prev * (1.0 + 1e-14)) ok = false;
      prev = v;
    }
    return ok;
  };
  const bool kappa_ok = monotone_ray(true, options.kappa_span);
  const bool riem_ok = monotone_ray(false, options.riem_span);

  // Branch switch along the K ray at kappa = 0 with constants giving C~ > 1.
  auto gap = [&](double riem) {
    const auto v = rhs_at(0.0, riem, options.switch_consts);
    return v.first - v.second;
  };
  double lo = 0.0;
  double hi = 1.0;
  bool switch_found = gap(lo) > 0.0;
  if (switch_found) {
    while (gap(hi) > 0.0 && hi < 1e12) hi *= 2.0;
    switch_found = gap(hi) <= 0.0;
  }
  double jump = 0.0;
  double k_star = 0.0;
  if (switch_found) {
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (gap(mid) > 0.0 ? lo : hi) = mid;
    }
    k_star = 0.5 * (lo + hi);
    const double eta = 1e-12 * std::max(k_star, 1e-12);
    jump = std::abs(rhs_at(0.0, k_star + eta, options.switch_consts).value -
                    rhs_at(0.0, k_star - eta, options.switch_consts).value);
  }
  const bool continuity_ok = switch_found && jump < structure.tolerance;
  structure.measured = {{"kappa_ray_monotone", kappa_ok},
                        {"riem_ray_monotone", riem_ok},
                        {"switch_found", switch_found},
                        {"switch_riem_2p", k_star},
                        {"switch_jump", jump}};
  structure.bounds = {{"kappa_span", options.kappa_span}, {"riem_span", options.riem_span},
                      {"ray_points", options.ray_points}, {"jump_max", structure.tolerance}};
  structure.status = kappa_ok && riem_ok && continuity_ok ? Status::pass : Status::fail;
  structure.notes = "branch switch probed at kappa = 0 with c0_np = " +
                    std::to_string(options.switch_consts.c0_np);
  return {bound, structure};
}

CheckOutcome check_lipschitz(Workbench& bench, const ModelManifold& manifold) {
  CheckOutcome o;
  o.name = "lipschitz";
  o.tolerance = 0.05;
  const auto& mesh = surface_mesh(bench, manifold);
  const auto diameter = mesh::graph_diameter(mesh);
  using Fn = std::pair<std::string, std::function<double(const mesh::Vec3&)>>;
  std::vector<Fn> battery;
  if (is_sphere(manifold)) {
    battery = {{"x", [](const mesh::Vec3& p) { return p.x(); }},
               {"y", [](const mesh::Vec3& p) { return p.y(); }},
               {"z", [](const mesh::Vec3& p) { return p.z(); }},
               {"xy", [](const mesh::Vec3& p) { return p.x() * p.y(); }},
               {"3z^2-1", [](const mesh::Vec3& p) { return 3.0 * p.z() * p.z() - 1.0; }}};
  } else {
    const auto& t = std::get<FlatTorusSpec>(manifold);
    const double kx = 2.0 * kPi / t.lx;
    const double ky = 2.0 * kPi / t.ly;
    battery = {{"cos x", [kx](const mesh::Vec3& p) { return std::cos(kx * p.x()); }},
               {"sin x", [kx](const mesh::Vec3& p) { return std::sin(kx * p.x()); }},
               {"cos y", [ky](const mesh::Vec3& p) { return std::cos(ky * p.y()); }},
               {"cos(x+y)", [kx, ky](const mesh::Vec3& p) { return std::cos(kx * p.x() + ky * p.y()); }},
               {"sin 2x", [kx](const mesh::Vec3& p) { return std::sin(2.0 * kx * p.x()); }}};
  }
  battery.push_back({"constant", [](const mesh::Vec3&) { return 1.0; }});
  bool ok = true;
  for (const auto& [label, f] : battery) {
    std::vector<double> values;
    values.reserve(mesh.num_vertices());
    for (const auto& p : mesh.vertices()) values.push_back(f(p));
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const double osc = *mx - *mn;
    const auto grads = mesh::face_gradient_norms(mesh, values);
    const double gmax = *std::max_element(grads.begin(), grads.end());
    const double rhs = (1.0 + o.tolerance) * gmax * diameter.value;
    const bool holds = osc <= rhs;
    ok = ok && holds;
    o.table.push_back({{"function", label}, {"oscillation", osc}, {"grad_sup", gmax},
                       {"diameter", diameter.value}, {"bound", rhs}, {"holds", holds}});
  }
  o.measured = {{"manifold", manifold_to_json(manifold)},
                {"diameter", diameter.value},
                {"diameter_sampled", diameter.lower_bound},
                {"functions", battery.size()}};
  o.bounds = {{"slack", 1.0 + o.tolerance}};
  o.status = ok ? Status::pass : Status::fail;
  return o;
}

CheckOutcome prop_p5_implication(const ImplicationInputs& in) {
  CheckOutcome o;
  o.name = "prop_p5";
  const double kd2 = in.kappa * in.diameter * in.diameter;
  const bool predicate = constants::li_yau_predicate(in.lambda1, in.diameter, in.kappa, in.c);
  const double lhs = in.c * std::exp(-in.c * std::sqrt(kd2));
  const double rhs = (in.dim - 1.0) * kd2;
  const bool condition = lhs > rhs;
  const bool contradiction = predicate && condition && in.has_nonparallel_harmonic;
  o.status = contradiction ? Status::fail : Status::pass;
  o.measured = {{"lambda1_D2", in.lambda1 * in.diameter * in.diameter},
                {"li_yau_predicate", predicate},
                {"smallness_condition", condition},
                {"has_nonparallel_harmonic", in.has_nonparallel_harmonic}};
  o.bounds = {{"li_yau_rhs", in.c * std::exp(-in.c * std::sqrt(kd2))},
              {"condition_lhs", lhs},
              {"condition_rhs", rhs}};
  if (contradiction) {
    o.notes = "harmonic non-parallel 1-form under the smallness condition";
  } else if (!(predicate && condition)) {
    o.notes = "hypotheses not met; implication vacuous";
  } else {
    o.notes = "harmonic forms are parallel, as implied";
  }
  return o;
}

CheckOutcome check_prop_p5(Workbench& bench, const ModelManifold& manifold, double kappa, double c) {
  const auto& mesh = surface_mesh(bench, manifold);
  const int b1 = 2 - mesh::euler_characteristic(mesh);
  const auto& conn = bench.connection_spectrum(manifold, 6);
  const auto& hodge = bench.hodge_spectrum(manifold, b1 + 4);
  if (conn.zero_modes >= static_cast<int>(conn.values.size())) {
    throw DomainError("prop_p5: no positive connection eigenvalue among the computed values");
  }
  ImplicationInputs in;
  in.lambda1 = conn.values[conn.zero_modes];
  in.diameter = mesh::graph_diameter(mesh).value;
  in.kappa = kappa;
  in.c = c;
  in.dim = 2;
  in.has_nonparallel_harmonic = hodge.zero_modes > 2 * conn.zero_modes;
  CheckOutcome o = prop_p5_implication(in);
  o.measured["manifold"] = manifold_to_json(manifold);
  o.measured["harmonic_dimension"] = hodge.zero_modes;
  o.measured["parallel_real_dimension"] = 2 * conn.zero_modes;
  return o;
}

CheckOutcome check_oneform_spectrum(Workbench& bench, const ModelManifold& manifold, int k, double tolerance) {
  CheckOutcome o;
  o.name = "oneform_spectrum";
  if (tolerance < 0.0) tolerance = is_sphere(manifold) ? 0.02 : 0.01;
  o.tolerance = tolerance;
  spectra::AnalyticSpectrum exact;
  if (const auto* s = std::get_if<IcoSphereSpec>(&manifold)) {
    exact = spectra::sphere_oneform_rough_spectrum(s->radius, 10.0 / (s->radius * s->radius));
  } else if (const auto* t = std::get_if<FlatTorusSpec>(&manifold)) {
    const double f = std::pow(2.0 * kPi / std::max(t->lx, t->ly), 2);
    exact = spectra::torus_oneform_rough_spectrum(t->lx, t->ly, 10.0 * f);
  } else {
    throw DomainError("oneform_spectrum: needs a surface");
  }
  const auto& spec = bench.connection_spectrum(manifold, k);
  std::vector<double> positive(spec.values.begin() + spec.zero_modes, spec.values.end());
  const auto clusters = eigen::cluster_multiplicities(positive);
  const auto target = exact.first_positive();
  const int zero_real = 2 * spec.zero_modes;
  bool ok = zero_real == spectra::parallel_form_count(exact);
  double value = 0.0;
  int mult_real = 0;
  // The first cluster is only complete if another value follows it.
  if (clusters.size() >= 2) {
    value = clusters.front().value;
    mult_real = 2 * clusters.front().count;
    ok = ok && std::abs(value - target.value) / target.value < tolerance && mult_real == target.multiplicity;
  } else {
    ok = false;
    o.notes = "k too small to close the first cluster";
  }
  for (double v : spec.values) o.table.push_back({{"eigenvalue", v}});
  o.measured = {{"manifold", manifold_to_json(manifold)},
                {"kernel_real_dimension", zero_real},
                {"first_cluster", value},
                {"first_cluster_real_multiplicity", mult_real},
                {"operator_scale", spec.operator_scale}};
  o.bounds = {{"exact_first", target.value},
              {"exact_multiplicity", target.multiplicity},
              {"exact_kernel", spectra::parallel_form_count(exact)}};
  o.status = ok ? Status::pass : Status::fail;
  return o;
}

CheckOutcome check_mesh_topology(Workbench& bench, const ModelManifold& manifold) {
  CheckOutcome o;
  o.name = "mesh_topology";
  o.tolerance = 1e-9;
  const auto& mesh = surface_mesh(bench, manifold);
  const int chi = mesh::euler_characteristic(mesh);
  const auto defects = mesh::angle_defects(mesh);
  double total = 0.0;
  for (double d : defects) total += d;
  const double error = std::abs(total - 2.0 * kPi * chi);
  const int expected = is_sphere(manifold) ? 2 : 0;
  o.measured = {{"manifold", manifold_to_json(manifold)},
                {"vertices", mesh.num_vertices()},
                {"edges", mesh.num_edges()},
                {"faces", mesh.num_faces()},
                {"euler_characteristic", chi},
                {"total_defect", total},
                {"gauss_bonnet_error", error},
                {"total_area", total_area(mesh)}};
  o.bounds = {{"expected_euler_characteristic", expected}, {"gauss_bonnet_max", o.tolerance}};
  o.status = chi == expected && error < o.tolerance ? Status::pass : Status::fail;
  return o;
}

CheckOutcome check_diameter(Workbench& bench, const ModelManifold& manifold, double slack) {
  CheckOutcome o;
  o.name = "diameter";
  o.tolerance = slack;
  const auto& mesh = surface_mesh(bench, manifold);
  const auto d = mesh::graph_diameter(mesh);
  double exact = 0.0;
  if (const auto* s = std::get_if<IcoSphereSpec>(&manifold)) {
    exact = kPi * s->radius;
  } else {
    const auto& t = std::get<FlatTorusSpec>(manifold);
    exact = 0.5 * std::hypot(t.lx, t.ly);
  }
  o.measured = {{"manifold", manifold_to_json(manifold)},
                {"graph_diameter", d.value},
                {"sampled_lower_bound", d.lower_bound},
                {"ratio", d.value / exact}};
  o.bounds = {{"low", exact}, {"high", (1.0 + slack) * exact}};
  o.status = d.value >= exact * (1.0 - 1e-12) && d.value <= (1.0 + slack) * exact ? Status::pass : Status::fail;
  if (d.lower_bound) o.notes = "sampled sources: value is a lower bound of the graph diameter";
  return o;
}

CheckOutcome check_product_spectrum() {
  CheckOutcome o;
  o.name = "product_spectrum";
  const double cutoff = 20.0;
  const auto sf = spectra::sphere_function_spectrum(1.0, cutoff);
  const auto s1 = spectra::sphere_oneform_rough_spectrum(1.0, cutoff);
  const auto tf = spectra::torus_function_spectrum(2.0 * kPi, 2.0 * kPi, cutoff);
  const auto t1 = spectra::torus_oneform_rough_spectrum(2.0 * kPi, 2.0 * kPi, cutoff);
  const auto ss = spectra::product_oneform_spectrum(sf, s1, sf, s1, cutoff);
  const auto st = spectra::product_oneform_spectrum(sf, s1, tf, t1, cutoff);
  const auto ts = spectra::product_oneform_spectrum(tf, t1, sf, s1, cutoff);
  const auto tt = spectra::product_oneform_spectrum(tf, t1, tf, t1, cutoff);
  const auto first = ss.first_positive();
  const bool commutes = spectra::same_multiset(st, ts);
  o.measured = {{"sphere_sphere_first", first.value},
                {"sphere_sphere_multiplicity", first.multiplicity},
                {"sphere_torus_commutes", commutes},
                {"torus_torus_parallel", spectra::parallel_form_count(tt)},
                {"sphere_sphere_parallel", spectra::parallel_form_count(ss)}};
  o.bounds = {{"first", 1.0}, {"multiplicity", 12}, {"torus_torus_parallel", 4}};
  const bool ok = first.value == 1.0 && first.multiplicity == 12 && commutes &&
                  spectra::parallel_form_count(tt) == 4 && spectra::parallel_form_count(ss) == 0;
  o.status = ok ? Status::pass : Status::fail;
  for (const auto& e : ss.entries) o.table.push_back({{"eigenvalue", e.value}, {"multiplicity", e.multiplicity}});
  return o;
}

// ---------------------------------------------------------------- suite

int Report::count(Status status) const {
  return static_cast<int>(std::count_if(outcomes.begin(), outcomes.end(),
                                        [status](const auto& o) { return o.status == status; }));
}

Json Report::to_json() const {
  Json out = {{"schema_version", kSchemaVersion}, {"generated_at", generated_at}, {"seed", seed},
              {"spec", spec}};
  Json list = Json::array();
  for (const auto& o : outcomes) list.push_back(o.to_json());
  out["outcomes"] = list;
  out["summary"] = {{"pass", count(Status::pass)},
                    {"fail", count(Status::fail)},
                    {"reported", count(Status::reported)},
                    {"ok", ok()}};
  return out;
}

Report Report::from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("report: expected an object");
  if (j.value("schema_version", 0) != kSchemaVersion) throw ParseError("report: unsupported schema_version");
  Report r;
  r.seed = j.value("seed", std::uint64_t{0});
  r.generated_at = j.value("generated_at", std::string());
  r.spec = j.value("spec", Json::object());
  for (const auto& o : require_key(j, "outcomes", "report")) r.outcomes.push_back(CheckOutcome::from_json(o));
  return r;
}

Report run_spec(const ExperimentSpec& spec) {
  Report report;
  report.seed = spec.seed;
  report.generated_at = now_utc();
  report.spec = spec.source;
  Workbench bench(spec.solver);
  for (std::size_t i = 0; i < spec.checks.size(); ++i) {
    const auto& req = spec.checks[i];
    const Json& p = req.params;
    const std::string where = "spec.checks[" + std::to_string(i) + "].params";
    const ModelManifold manifold =
        p.contains("manifold") ? parse_manifold(p["manifold"], where + ".manifold") : spec.manifold;
    const GeometryBudget budget = p.contains("budget") ? parse_budget(p["budget"], spec.budget, where + ".budget")
                                                       : spec.budget;
    const AbstractConstants consts =
        p.contains("constants") ? parse_consts(p["constants"], spec.consts, where + ".constants") : spec.consts;
    try {
      if (req.name == "lemma_l2_grid") {
        std::vector<int> dims = array_at<int>(p, "dims", {}, where);
        if (dims.empty() && !p.contains("dims")) {
          for (int n = int_at(p, "n_min", 2, where); n <= int_at(p, "n_max", 8, where); ++n) dims.push_back(n);
        }
        std::vector<double> lambdas = array_at<double>(p, "lambdas", {}, where);
        if (!p.contains("lambdas")) {
          const double lo = number_at(p, "lambda_min", 1e-2, where);
          const double hi = number_at(p, "lambda_max", 10.0, where);
          const int count = int_at(p, "lambda_count", 50, where);
          for (int j = 0; j < count; ++j) {
            const double frac = count == 1 ? 0.0 : static_cast<double>(j) / (count - 1);
            lambdas.push_back(lo * std::pow(hi / lo, frac));
          }
        }
        report.outcomes.push_back(check_lemma_l2_grid(dims, lambdas));
      } else if (req.name == "lemma_l6_grid") {
        const auto t = array_at<double>(p, "t", {0.1, 1.0, 10.0, 100.0}, where);
        const auto g = array_at<double>(p, "gamma", {1.1, 1.5, 2.0, 4.0}, where);
        report.outcomes.push_back(check_lemma_l6_grid(t, g));
      } else if (req.name == "weitzenboeck") {
        report.outcomes.push_back(check_weitzenboeck(bench, manifold, int_at(p, "k", 6, where),
                                                     number_at(p, "tolerance", -1.0, where),
                                                     bool_at(p, "refine", true, where)));
      } else if (req.name == "prop_p3") {
        report.outcomes.push_back(check_prop_p3(bench, manifold, number_at(p, "kappa", 0.0, where)));
      } else if (req.name == "prop_p4") {
        report.outcomes.push_back(check_prop_p4(bench, manifold));
      } else if (req.name == "pinching") {
        report.outcomes.push_back(check_pinching(bench, manifold, budget, consts));
      } else if (req.name == "theorem_t3") {
        TheoremT3Options opt;
        if (p.contains("lambda1")) opt.measured_lambda1 = number_at(p, "lambda1", 0.0, where);
        const std::string second = string_at(p, "second_branch", "theorem", where);
        if (second != "theorem" && second != "corollary") parse_fail(where + ".second_branch", "unknown value");
        opt.second = second == "theorem" ? constants::SecondBranch::theorem : constants::SecondBranch::corollary;
        const std::string delta = string_at(p, "delta_branch", "main", where);
        if (delta != "main" && delta != "secondary") parse_fail(where + ".delta_branch", "unknown value");
        opt.delta = delta == "main" ? constants::DeltaBranch::main : constants::DeltaBranch::secondary;
        opt.kappa_span = number_at(p, "kappa_span", opt.kappa_span, where);
        opt.riem_span = number_at(p, "riem_span", opt.riem_span, where);
        opt.ray_points = int_at(p, "ray_points", opt.ray_points, where);
        if (p.contains("switch_constants")) {
          opt.switch_consts = parse_consts(p["switch_constants"], opt.switch_consts, where + ".switch_constants");
        }
        for (auto& o : check_theorem_t3(budget, consts, opt)) report.outcomes.push_back(std::move(o));
      } else if (req.name == "lipschitz") {
        report.outcomes.push_back(check_lipschitz(bench, manifold));
      } else if (req.name == "prop_p5") {
        if (p.contains("lambda1")) {
          ImplicationInputs in;
          in.lambda1 = number_at(p, "lambda1", 0.0, where);
          in.diameter = number_at(p, "diameter", 1.0, where);
          in.kappa = number_at(p, "kappa", 0.0, where);
          in.c = number_at(p, "c", consts.c_n, where);
          in.dim = int_at(p, "dim", 2, where);
          in.has_nonparallel_harmonic = bool_at(p, "has_nonparallel_harmonic", false, where);
          report.outcomes.push_back(prop_p5_implication(in));
        } else {
          report.outcomes.push_back(check_prop_p5(bench, manifold, number_at(p, "kappa", 0.0, where),
                                                  number_at(p, "c", consts.c_n, where)));
        }
      } else if (req.name == "oneform_spectrum") {
        report.outcomes.push_back(check_oneform_spectrum(bench, manifold, int_at(p, "k", 8, where),
                                                         number_at(p, "tolerance", -1.0, where)));
      } else if (req.name == "mesh_topology") {
        report.outcomes.push_back(check_mesh_topology(bench, manifold));
      } else if (req.name == "diameter") {
        report.outcomes.push_back(check_diameter(bench, manifold, number_at(p, "slack", 0.05, where)));
      } else if (req.name == "product_spectrum") {
        report.outcomes.push_back(check_product_spectrum());
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      CheckOutcome o;
      o.name = req.name;
      o.status = Status::fail;
      o.notes = std::string("error: ") + e.what();
      report.outcomes.push_back(std::move(o));
    }
  }
  return report;
}

Report run_suite(const std::filesystem::path& spec_path, const std::filesystem::path& out_dir) {
  const ExperimentSpec spec = load_spec(spec_path);
  Report report = run_spec(spec);
  std::filesystem::create_directories(out_dir);
  write_report_json(report, out_dir / "report.json");
  write_tables(report, out_dir);
  return report;
}

void write_report_json(const Report& report, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << report.to_json().dump(2) << '\n';
}

void write_tables(const Report& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream summary(out_dir / "outcomes.csv");
  if (!summary) throw std::runtime_error("cannot write tables into " + out_dir.string());
  summary << "name,status,tolerance,measured,bounds,notes\n";
  std::map<std::string, int> seen;
  for (const auto& o : report.outcomes) {
    summary << csv_field(o.name) << ',' << to_string(o.status) << ',' << Json(o.tolerance).dump() << ','
            << csv_field(o.measured.dump()) << ',' << csv_field(o.bounds.dump()) << ',' << csv_field(o.notes)
            << '\n';
    if (o.table.empty() || !o.table.front().is_object()) continue;
    std::string stem = file_stem(o.name);
    if (const int n = seen[stem]++; n > 0) stem += "_" + std::to_string(n + 1);
    std::ofstream table(out_dir / (stem + ".csv"));
    std::vector<std::string> columns;
    for (const auto& [key, value] : o.table.front().items()) columns.push_back(key);
    for (std::size_t c = 0; c < columns.size(); ++c) table << (c ? "," : "") << csv_field(columns[c]);
    table << '\n';
    for (const auto& row : o.table) {
      for (std::size_t c = 0; c < columns.size(); ++c) {
        table << (c ? "," : "") << (row.contains(columns[c]) ? csv_value(row[columns[c]]) : "");
      }
      table << '\n';
    }
  }
}

std::string render_markdown(const Report& report) {
  std::ostringstream os;
  os << "# Verification report\n\n";
  os << "- generated: " << report.generated_at << "\n";
  os << "- seed: " << report.seed << "\n";
  os << "- pass " << report.count(Status::pass) << ", fail " << report.count(Status::fail) << ", reported "
     << report.count(Status::reported) << "\n\n";
  os << "| check | status | measured | bounds | notes |\n|---|---|---|---|---|\n";
  auto cell = [](std::string s) {
    std::string out;
    for (char c : s) out += c == '|' ? std::string("\\|") : std::string(1, c);
    return out;
  };
  for (const auto& o : report.outcomes) {
    os << "| " << cell(o.name) << " | " << to_string(o.status) << " | " << cell(o.measured.dump()) << " | "
       << cell(o.bounds.dump()) << " | " << cell(o.notes) << " |\n";
  }
  return os.str();
}

Json without_timestamp(const Json& report) {
  Json copy = report;
  copy.erase("generated_at");
  return copy;
}

}  // namespace formspec::verify
