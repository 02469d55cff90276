#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "formspec/constants.hpp"
#include "formspec/eigen.hpp"
#include "formspec/mesh.hpp"

namespace formspec::verify {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum class Status { pass, fail, reported };

std::string to_string(Status status);
Status status_from_string(const std::string& text);

/// `reported` carries a measured quantity without an assertable inequality
/// and never affects the exit status.
struct CheckOutcome {
  std::string name;
  Status status = Status::reported;
  Json measured = Json::object();
  Json bounds = Json::object();
  double tolerance = 0.0;
  std::string notes;
  Json table = Json::array();  // optional rows, exported as <name>.csv

  Json to_json() const;
  static CheckOutcome from_json(const Json& j);
};

struct CheckRequest {
  std::string name;
  Json params = Json::object();
};

struct ExperimentSpec {
  std::uint64_t seed = 20240917;
  mesh::ModelManifold manifold = mesh::IcoSphereSpec{};
  eigen::SolverConfig solver;
  constants::GeometryBudget budget = default_budget();
  constants::AbstractConstants consts;
  std::vector<CheckRequest> checks;
  Json source = Json::object();  // the parsed document, echoed into reports

  /// Stand-in for the product of two unit spheres: dim 4, D = sqrt(2) pi,
  /// p = 4, ||Riem||_2p = 2 sqrt(2) with the factor-2 tensor convention.
  static constants::GeometryBudget default_budget();
};

/// Names accepted in the `checks` list.
const std::vector<std::string>& known_checks();

mesh::ModelManifold parse_manifold(const Json& j, const std::string& where = "manifold");
Json manifold_to_json(const mesh::ModelManifold& manifold);

/// Throws ParseError naming the offending location.
ExperimentSpec parse_spec(const Json& j);
ExperimentSpec load_spec(const std::filesystem::path& path);

/// Caches meshes and operator spectra shared by several checks.
class Workbench {
 public:
  explicit Workbench(eigen::SolverConfig solver) : solver_(solver) {}

  const mesh::TriangleMesh& mesh_for(const mesh::ModelManifold& manifold);

  struct ConnectionSpectrum {
    std::vector<double> values;  // eigenvalues of the complex operator, ascending
    Eigen::VectorXcd first_positive_vector;  // empty if every value is a zero mode
    Eigen::VectorXcd zero_vector;            // empty if there is no zero mode
    int zero_modes = 0;                      // complex count
    double operator_scale = 0.0;
  };
  const ConnectionSpectrum& connection_spectrum(const mesh::ModelManifold& manifold, int k);

  struct HodgeSpectrum {
    std::vector<double> values;
    int zero_modes = 0;
  };
  const HodgeSpectrum& hodge_spectrum(const mesh::ModelManifold& manifold, int k);

  const eigen::SolverConfig& solver() const { return solver_; }

 private:
  eigen::SolverConfig solver_;
  // Node-based maps keep returned references valid across insertions.
  std::map<std::string, mesh::TriangleMesh> meshes_;
  std::map<std::string, ConnectionSpectrum> connection_;
  std::map<std::string, HodgeSpectrum> hodge_;
};

CheckOutcome check_lemma_l2_grid(std::span<const int> dims, std::span<const double> lambdas);
CheckOutcome check_lemma_l6_grid(std::span<const double> t_grid, std::span<const double> gamma_grid);
/// tolerance < 0 picks 3% on spheres, 5% on tori.
CheckOutcome check_weitzenboeck(Workbench& bench, const mesh::ModelManifold& manifold, int k,
                                double tolerance = -1.0, bool refine = true);
CheckOutcome check_prop_p3(Workbench& bench, const mesh::ModelManifold& manifold, double kappa = 0.0);
CheckOutcome check_prop_p4(Workbench& bench, const mesh::ModelManifold& manifold);
CheckOutcome check_pinching(Workbench& bench, const mesh::ModelManifold& manifold,
                            const constants::GeometryBudget& budget,
                            const constants::AbstractConstants& consts);

struct TheoremT3Options {
  std::optional<double> measured_lambda1;  // default: product spectrum of two unit spheres
  constants::SecondBranch second = constants::SecondBranch::theorem;
  constants::DeltaBranch delta = constants::DeltaBranch::main;
  double kappa_span = 10.0;
  double riem_span = 10.0;
  int ray_points = 10;
  // Constants with C~ > 1, so the outer min switches branch along the K ray.
  constants::AbstractConstants switch_consts{1.0, 1.0, 0.5};
};

/// Two outcomes: "theorem_t3.bound" (reported) and "theorem_t3.structure".
std::vector<CheckOutcome> check_theorem_t3(const constants::GeometryBudget& budget,
                                           const constants::AbstractConstants& consts,
                                           const TheoremT3Options& options = {});
CheckOutcome check_lipschitz(Workbench& bench, const mesh::ModelManifold& manifold);

struct ImplicationInputs {
  double lambda1 = 0.0;
  double diameter = 1.0;
  double kappa = 0.0;
  double c = 1.0;
  int dim = 2;
  bool has_nonparallel_harmonic = false;
};
CheckOutcome prop_p5_implication(const ImplicationInputs& in);
/// Measures lambda_1, D and the harmonic/parallel dimensions on the mesh.
CheckOutcome check_prop_p5(Workbench& bench, const mesh::ModelManifold& manifold, double kappa, double c);

CheckOutcome check_oneform_spectrum(Workbench& bench, const mesh::ModelManifold& manifold, int k,
                                    double tolerance = -1.0);
CheckOutcome check_mesh_topology(Workbench& bench, const mesh::ModelManifold& manifold);
CheckOutcome check_diameter(Workbench& bench, const mesh::ModelManifold& manifold, double slack = 0.05);
CheckOutcome check_product_spectrum();

struct Report {
  std::uint64_t seed = 0;
  std::string generated_at;
  Json spec = Json::object();
  std::vector<CheckOutcome> outcomes;

  int count(Status status) const;
  bool ok() const { return count(Status::fail) == 0; }
  Json to_json() const;
  static Report from_json(const Json& j);
};

Report run_spec(const ExperimentSpec& spec);
/// Loads, runs, and writes report.json plus CSV tables into `out_dir`.
Report run_suite(const std::filesystem::path& spec_path, const std::filesystem::path& out_dir);

void write_report_json(const Report& report, const std::filesystem::path& path);
void write_tables(const Report& report, const std::filesystem::path& out_dir);
std::string render_markdown(const Report& report);

/// Report JSON with `generated_at` removed, for comparisons between runs.
Json without_timestamp(const Json& report);

}  // namespace formspec::verify
