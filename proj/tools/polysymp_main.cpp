// Command line driver: mesh inspection, flow runs, symplectic verification
// and map reconstruction.  Exit codes: 0 success / all certificates pass,
// 2 configuration error, 3 numerical abort, 4 verification failure.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "polysymp/polysymp.hpp"

namespace {

using namespace polysymp;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerification = 4;

struct CommonOptions {
  std::string config_path;
  std::optional<int> m;
  std::optional<std::string> alpha;
  std::optional<std::uint64_t> seed;

  ExperimentConfig load() const {
    ExperimentConfig cfg;
    if (!config_path.empty())
      cfg = parse_experiment_config(read_json_file(config_path));
    if (m) cfg.m = *m;
    if (seed) cfg.seed = *seed;
    if (alpha) {
      Json a = *alpha == "identity" || *alpha == "zero" ? Json(*alpha)
                                                        : Json::parse(*alpha);
      Json doc;
      doc["alpha"] = a;
      cfg.alpha = parse_experiment_config(doc).alpha;
    }
    return cfg;
  }
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path,
                  "JSON configuration file (flags override fields)");
  cmd->add_option_function<int>("--m", [&opts](int v) { opts.m = v; },
                                "grid subdivisions per axis");
  cmd->add_option_function<std::string>(
      "--alpha", [&opts](const std::string& v) { opts.alpha = v; },
      "class ray: identity | zero | 16 row-major JSON numbers");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&opts](std::uint64_t v) { opts.seed = v; },
      "64-bit seed for all random data");
}

int cmd_mesh_info(const CommonOptions& common, bool as_json) {
  ExperimentConfig cfg = common.load();
  TorusMesh mesh = build_mesh(cfg.lattice, cfg.m);
  ClosedBasis basis(mesh, cfg.alpha);
  Json doc;
  doc["m"] = mesh.m;
  doc["vertices"] = mesh.vertex_count();
  doc["cells"] = mesh.cell_count();
  doc["faces"] = mesh.face_count();
  doc["edges"] = static_cast<int>(mesh.edges.size());
  doc["total_volume"] = mesh.total_volume();
  doc["basis_dim"] = basis.dim();
  doc["degenerate_ray"] = basis.degenerate();
  doc["mesh_hash"] = mesh.hash_hex();
  if (as_json) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "mesh: m=" << mesh.m << "  vertices=" << mesh.vertex_count()
              << "  cells=" << mesh.cell_count()
              << "  faces=" << mesh.face_count()
              << "  edges=" << mesh.edges.size() << "\n"
              << "total volume: " << mesh.total_volume() << "\n"
              << "constrained basis dimension: " << basis.dim()
              << (basis.degenerate() ? "  (alpha = 0: exact forms only)" : "")
              << "\n"
              << "mesh hash: " << mesh.hash_hex() << "\n";
  }
  return kExitOk;
}

int cmd_flow(const CommonOptions& common, const std::string& out_dir,
             const std::string& init_kind, std::optional<double> epsilon,
             std::optional<std::string> method, std::optional<double> h0,
             std::optional<double> mu_tol, std::optional<long> max_steps,
             std::optional<int> trace_stride, bool renormalized) {
  ExperimentConfig cfg = common.load();
  if (!out_dir.empty()) cfg.output.dir = out_dir;
  if (!init_kind.empty()) cfg.init.kind = init_kind;
  if (epsilon) cfg.init.epsilon = *epsilon;
  if (method) {
    if (*method == "rk4")
      cfg.flow.method = Integrator::RK4;
    else if (*method == "euler")
      cfg.flow.method = Integrator::Euler;
    else
      throw ConfigError("--integrator: expected rk4 or euler");
  }
  if (h0) cfg.flow.h0 = *h0;
  if (mu_tol) cfg.flow.mu_tol = *mu_tol;
  if (max_steps) cfg.flow.max_steps = *max_steps;
  if (trace_stride) cfg.flow.trace_stride = *trace_stride;
  if (renormalized) cfg.renormalized = true;

  ExperimentResult result = run_experiment(cfg);
  const FlowResult& flow = result.flow;
  std::cout << "status: " << to_string(flow.status)
            << "  steps: " << flow.steps
            << "  |mu|: " << flow.final_mu_norm << "  tau: " << flow.tau
            << "  classification: " << flow.classification << "\n";
  if (!flow.message.empty()) std::cout << flow.message << "\n";
  if (flow.status == FlowStatus::Aborted) return kExitNumerical;
  return kExitOk;
}

int cmd_verify(const CommonOptions& common, const std::string& form_path,
               double tol, double whitney_tol, std::optional<double> tau,
               bool as_json) {
  ExperimentConfig cfg = common.load();
  TorusMesh mesh = build_mesh(cfg.lattice, cfg.m);
  CellField f = field_from_document(read_json_file(form_path), mesh);
  if (tau) {
    if (*tau == 0.0) throw ConfigError("--tau must be nonzero");
    f *= 1.0 / *tau;
  }

  WhitneyReport whitney = whitney_residual(f);
  SymplecticReport sympl = verify_symplectic(f, tol);
  const bool whitney_ok = whitney.max <= whitney_tol;
  const bool pass = whitney_ok && sympl.verdict;

  Json doc;
  doc["whitney_residual_max"] = whitney.max;
  doc["whitney_ok"] = whitney_ok;
  doc["symplectic_defect_max"] = sympl.max_defect;
  doc["asd_defect_max"] = sympl.max_asd_defect;
  doc["worst_cell"] = sympl.worst_cell;
  doc["symplectic_ok"] = sympl.verdict;
  doc["homeomorphism"] = sympl.homeomorphism;
  doc["pass"] = pass;
  if (as_json)
    std::cout << doc.dump(2) << "\n";
  else
    std::cout << "whitney residual: " << whitney.max
              << (whitney_ok ? "  (ok)" : "  (FAIL)") << "\n"
              << "symplectic defect: " << sympl.max_defect
              << "  asd defect: " << sympl.max_asd_defect
              << (sympl.verdict ? "  (ok)" : "  (FAIL)") << "\n"
              << "homeomorphism: " << sympl.homeomorphism << "\n"
              << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitOk : kExitVerification;
}

int cmd_export_map(const CommonOptions& common, const std::string& form_path,
                   const std::string& out_path, int base_vertex,
                   double class_tol, bool rescale) {
  ExperimentConfig cfg = common.load();
  TorusMesh mesh = build_mesh(cfg.lattice, cfg.m);
  CellField f = field_from_document(read_json_file(form_path), mesh);

  if (rescale) {
    const Mat4 cls = cohomology_class(f);
    const double tau = tau_of_class(cls, cfg.alpha);
    if (tau == 0.0) {
      std::cerr << "class multiplier against alpha is zero; cannot rescale\n";
      return kExitVerification;
    }
    f *= 1.0 / tau;
  }

  PrimitiveResult prim;
  try {
    prim = primitive(f, base_vertex, 1e-9, class_tol);
  } catch (const ClosureError& e) {
    std::cerr << e.what() << "\n";
    return kExitVerification;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitVerification;
  }

  write_json_file(out_path,
                  polymap_document(prim.map, prim.max_closure_defect));
  const std::string points_path = out_path + ".points.csv";
  write_text_file(points_path, polymap_points_csv(prim.map));
  std::cout << "map written to " << out_path << " (closure defect "
            << prim.max_closure_defect << "), points to " << points_path
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "moment-map flow engine for polyhedral symplectic maps of the 4-torus"};
  app.require_subcommand(1);

  CommonOptions mesh_common, flow_common, verify_common, export_common;

  auto* mesh_cmd = app.add_subcommand("mesh-info", "triangulation summary");
  add_common(mesh_cmd, mesh_common);
  bool mesh_json = false;
  mesh_cmd->add_flag("--json", mesh_json, "machine readable output");

  auto* flow_cmd = app.add_subcommand("flow", "run the constrained flow");
  add_common(flow_cmd, flow_common);
  std::string out_dir, init_kind;
  std::optional<double> epsilon, h0, mu_tol;
  std::optional<std::string> method;
  std::optional<long> max_steps;
  std::optional<int> trace_stride;
  bool renormalized = false;
  flow_cmd->add_option("--out", out_dir, "output directory");
  flow_cmd->add_option("--init", init_kind,
                       "constant | perturbed-identity | random-exact | coords "
                       "| form-file | map-file");
  flow_cmd->add_option_function<double>(
      "--epsilon", [&](double v) { epsilon = v; }, "perturbation size");
  flow_cmd->add_option_function<std::string>(
      "--integrator", [&](const std::string& v) { method = v; },
      "rk4 | euler");
  flow_cmd->add_option_function<double>("--h0", [&](double v) { h0 = v; },
                                        "initial step size");
  flow_cmd->add_option_function<double>(
      "--mu-tol", [&](double v) { mu_tol = v; }, "stop tolerance on |mu|");
  flow_cmd->add_option_function<long>(
      "--max-steps", [&](long v) { max_steps = v; }, "step budget");
  flow_cmd->add_option_function<int>(
      "--trace-stride", [&](int v) { trace_stride = v; },
      "record every n-th accepted step");
  flow_cmd->add_flag("--renormalized", renormalized,
                     "integrate the renormalized (G, tau) system");

  auto* verify_cmd =
      app.add_subcommand("verify", "certify a form file as symplectic");
  add_common(verify_cmd, verify_common);
  std::string verify_form;
  double verify_tol = 1e-6, verify_whitney_tol = 1e-9;
  std::optional<double> verify_tau;
  bool verify_json = false;
  verify_cmd->add_option("--form", verify_form, "cellfield JSON file")
      ->required();
  verify_cmd->add_option("--tol", verify_tol, "symplectic defect tolerance");
  verify_cmd->add_option("--whitney-tol", verify_whitney_tol,
                         "Whitney residual tolerance");
  verify_cmd->add_option_function<double>(
      "--tau", [&](double v) { verify_tau = v; },
      "divide the form by this multiplier first");
  verify_cmd->add_flag("--json", verify_json, "machine readable output");

  auto* export_cmd =
      app.add_subcommand("export-map", "integrate a form into a map file");
  add_common(export_cmd, export_common);
  std::string export_form, export_out = "map.json";
  int base_vertex = 0;
  double class_tol = 1e-3;
  bool no_rescale = false;
  export_cmd->add_option("--form", export_form, "cellfield JSON file")
      ->required();
  export_cmd->add_option("--out", export_out, "output map file");
  export_cmd->add_option("--base", base_vertex, "base vertex");
  export_cmd->add_option("--class-tol", class_tol,
                         "integrality tolerance for the periods");
  export_cmd->add_flag("--no-rescale", no_rescale,
                       "skip dividing by the class multiplier against alpha");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (mesh_cmd->parsed()) return cmd_mesh_info(mesh_common, mesh_json);
    if (flow_cmd->parsed())
      return cmd_flow(flow_common, out_dir, init_kind, epsilon, method, h0,
                      mu_tol, max_steps, trace_stride, renormalized);
    if (verify_cmd->parsed())
      return cmd_verify(verify_common, verify_form, verify_tol,
                        verify_whitney_tol, verify_tau, verify_json);
    if (export_cmd->parsed())
      return cmd_export_map(export_common, export_form, export_out,
                            base_vertex, class_tol, !no_rescale);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FlowStepError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
