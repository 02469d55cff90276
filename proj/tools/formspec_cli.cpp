#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "formspec/constants.hpp"
#include "formspec/eigen.hpp"
#include "formspec/errors.hpp"
#include "formspec/mesh.hpp"
#include "formspec/operators.hpp"
#include "formspec/verify.hpp"

namespace {

using namespace formspec;

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(1e-2 * std::pow(1e3, i / 9.0));
  return grid;
}

int run_constants(const std::vector<int>& dims, std::vector<double> lambdas) {
  if (lambdas.empty()) lambdas = default_lambda_grid();
  std::cout.precision(17);
  std::cout << "n,Lambda,omega_n,a_n,C_Lambda,Lambda_C\n";
  for (int n : dims) {
    const double w = constants::omega(n);
    const double a = constants::a_n(n);
    for (double lam : lambdas) {
      const double c = constants::c_lambda_root(n, lam);
      std::cout << n << ',' << lam << ',' << w << ',' << a << ',' << c << ',' << lam * c << '\n';
    }
  }
  return 0;
}

int run_bound(const constants::GeometryBudget& budget, const constants::AbstractConstants& consts,
              const std::string& delta, const std::string& second) {
  const auto lb = constants::theorem_t3(
      budget, consts,
      second == "corollary" ? constants::SecondBranch::corollary : constants::SecondBranch::theorem,
      delta == "secondary" ? constants::DeltaBranch::secondary : constants::DeltaBranch::main);
  const verify::Json out = {{"rhs", lb.value},
                            {"first", lb.first},
                            {"second", lb.second},
                            {"active_branch", lb.active_branch},
                            {"tilde_c", lb.tilde_c}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

struct SpectrumArgs {
  std::string manifold = "sphere";
  std::string op = "connection";
  int subdiv = 5;
  double radius = 1.0;
  int cells = 64;
  double length = 2.0 * 3.14159265358979323846;
  int k = 6;
  std::uint64_t seed = 20240917;
  double tol = 1e-8;
};

template <class Scalar>
void print_result(const eigen::EigenResult<Scalar>& r) {
  std::cout.precision(17);
  std::cout << "index,eigenvalue,residual\n";
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    std::cout << i << ',' << r.values[i] << ',' << r.residuals[i] << '\n';
  }
}

int run_spectrum(const SpectrumArgs& a) {
  mesh::ModelManifold manifold;
  if (a.manifold == "sphere") {
    manifold = mesh::IcoSphereSpec{a.radius, a.subdiv};
  } else {
    manifold = mesh::FlatTorusSpec{a.length, a.length, a.cells, a.cells};
  }
  const auto m = mesh::build_mesh(manifold);
  eigen::SolverConfig cfg;
  cfg.k = a.k;
  cfg.seed = a.seed;
  cfg.tol = a.tol;
  std::cerr << mesh::describe(manifold) << ", " << a.op << " operator\n";
  if (a.op == "connection") {
    const auto op = operators::connection_laplacian_1forms(m, operators::build_connection(m));
    print_result(eigen::smallest_eigenpairs(op.stiffness, op.mass.matrix, cfg));
  } else if (a.op == "hodge") {
    const auto op = operators::hodge_laplacian_1forms(m);
    print_result(eigen::smallest_eigenpairs(op.stiffness, op.mass.matrix, cfg));
  } else {
    const auto op = operators::cotan_laplacian(m);
    print_result(eigen::smallest_eigenpairs(op.stiffness, op.mass.matrix, cfg));
  }
  return 0;
}

int run_verify(const std::string& spec_path, const std::string& out_dir) {
  const auto report = verify::run_suite(spec_path, out_dir);
  for (const auto& o : report.outcomes) {
    std::cout << verify::to_string(o.status) << "  " << o.name;
    if (!o.notes.empty()) std::cout << "  (" << o.notes << ")";
    std::cout << '\n';
  }
  std::cout << "pass " << report.count(verify::Status::pass) << ", fail " << report.count(verify::Status::fail)
            << ", reported " << report.count(verify::Status::reported) << "; report in " << out_dir << '\n';
  return report.ok() ? 0 : 1;
}

int run_report(const std::string& input, const std::string& out_dir, const std::string& format) {
  std::ifstream is(input);
  if (!is) throw ParseError(input + ": cannot open report");
  verify::Json j;
  try {
    j = verify::Json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(input + ": " + e.what());
  }
  const auto report = verify::Report::from_json(j);
  if (format == "csv" || format == "both") verify::write_tables(report, out_dir);
  if (format == "markdown" || format == "both") {
    std::filesystem::create_directories(out_dir);
    std::ofstream md(std::filesystem::path(out_dir) / "report.md");
    md << verify::render_markdown(report);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral bounds for the rough Laplacian on 1-forms: constants, spectra and checks"};
  app.require_subcommand(1);

  std::vector<int> dims{2};
  std::vector<double> lambdas;
  auto* cmd_constants = app.add_subcommand("constants", "Tabulate omega_n, a_n and C(Lambda)");
  cmd_constants->add_option("--n", dims, "Dimensions n")->check(CLI::Range(1, 1000));
  cmd_constants->add_option("--lambda-grid", lambdas, "Lambda values (default: 10 log-spaced in [1e-2, 10])");

  constants::GeometryBudget budget;
  constants::AbstractConstants consts;
  std::string delta = "main";
  std::string second = "theorem";
  auto* cmd_bound = app.add_subcommand("bound", "Evaluate the lower bound for sqrt(lambda_1) D");
  cmd_bound->add_option("--dim", budget.dim, "Ambient dimension (even)");
  cmd_bound->add_option("--kappa", budget.kappa, "Ricci lower-bound parameter");
  cmd_bound->add_option("--diameter", budget.diameter, "Diameter bound D");
  cmd_bound->add_option("--riem2p", budget.riem_2p, "Normalized ||Riem||_2p");
  cmd_bound->add_option("--p", budget.p_exponent, "Integrability exponent p");
  cmd_bound->add_option("--c-n", consts.c_n, "C(n)");
  cmd_bound->add_option("--c-np", consts.c_np, "C(n,p)");
  cmd_bound->add_option("--c0-np", consts.c0_np, "C_0(n,p)");
  cmd_bound->add_option("--delta-branch", delta, "main or secondary")->check(CLI::IsMember({"main", "secondary"}));
  cmd_bound->add_option("--second-branch", second, "theorem or corollary")
      ->check(CLI::IsMember({"theorem", "corollary"}));

  SpectrumArgs sa;
  auto* cmd_spectrum = app.add_subcommand("spectrum", "Smallest eigenvalues on a model surface mesh");
  cmd_spectrum->add_option("--manifold", sa.manifold, "sphere or torus")->check(CLI::IsMember({"sphere", "torus"}));
  cmd_spectrum->add_option("--operator", sa.op, "connection, hodge or cotan")
      ->check(CLI::IsMember({"connection", "hodge", "cotan"}));
  cmd_spectrum->add_option("--subdiv", sa.subdiv, "Icosphere subdivisions")->check(CLI::NonNegativeNumber);
  cmd_spectrum->add_option("--radius", sa.radius, "Sphere radius")->check(CLI::PositiveNumber);
  cmd_spectrum->add_option("--cells", sa.cells, "Torus cells per side")->check(CLI::Range(3, 100000));
  cmd_spectrum->add_option("--length", sa.length, "Torus side length")->check(CLI::PositiveNumber);
  cmd_spectrum->add_option("--k", sa.k, "Number of eigenpairs")->check(CLI::PositiveNumber);
  cmd_spectrum->add_option("--seed", sa.seed, "Start-block seed");
  cmd_spectrum->add_option("--tol", sa.tol, "Relative residual tolerance")->check(CLI::PositiveNumber);

  std::string spec_path;
  std::string out_dir = "report";
  auto* cmd_verify = app.add_subcommand("verify", "Run a JSON experiment spec");
  cmd_verify->add_option("--spec", spec_path, "Spec file")->required()->check(CLI::ExistingFile);
  cmd_verify->add_option("--out", out_dir, "Output directory for report.json and CSV tables");

  std::string report_in;
  std::string report_out = ".";
  std::string format = "both";
  auto* cmd_report = app.add_subcommand("report", "Re-render a JSON report as CSV and/or markdown");
  cmd_report->add_option("--input", report_in, "report.json")->required()->check(CLI::ExistingFile);
  cmd_report->add_option("--out", report_out, "Output directory");
  cmd_report->add_option("--format", format, "csv, markdown or both")
      ->check(CLI::IsMember({"csv", "markdown", "both"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_constants) return run_constants(dims, lambdas);
    if (*cmd_bound) return run_bound(budget, consts, delta, second);
    if (*cmd_spectrum) return run_spectrum(sa);
    if (*cmd_verify) return run_verify(spec_path, out_dir);
    if (*cmd_report) return run_report(report_in, report_out, format);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
