// weberlab command-line front end.
//
// Exit codes: 0 success, 1 invariant falsified, 2 input error, 3 budget exceeded.

#include <weberlab/koszul.hpp>
#include <weberlab/parallel.hpp>
#include <weberlab/quadrature.hpp>
#include <weberlab/report.hpp>
#include <weberlab/spectral.hpp>
#include <weberlab/verify.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

using namespace weberlab;

namespace {

constexpr int exit_ok = 0, exit_invariant = 1, exit_input = 2, exit_budget = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  RunConfig cfg;
  std::string kind;
  std::string json_path;
  std::string method = "automatic";
  std::string policies = "minimal,full";
  int base_n = 0;
  int samples = -1;
  int max_degree = -1;
  bool no_flux = false;
  bool omit_timings = false;
  bool verbose = false;
  std::size_t dense_limit = 4000;
};

void add_mesh_source(CLI::App* c, Options& o, bool with_n = true) {
  c->add_option("--kind", o.kind, "solid_cube | hollow_cube | through_hole_cube");
  if (with_n) c->add_option("--n", o.cfg.n, "divisions per direction of the generated mesh");
  c->add_option("--mesh", o.cfg.mesh_path, "mesh file (JSON)");
  c->add_option("--eta", o.cfg.eta, "uniform value or checker:A,B[@block]");
}

// Kind string to config; validation errors become input errors.
void finish_config(Options& o, const std::string& command) {
  o.cfg.command = command;
  o.cfg.include_flux = !o.no_flux;
  if (!o.kind.empty()) {
    try {
      o.cfg.kind = domain_kind_from_string(o.kind);
    } catch (const std::exception& e) {
      throw InputError(e.what());
    }
  }
  try {
    o.cfg.validate();
  } catch (const ConfigError& e) {
    throw InputError(e.what());
  }
}

PolyMesh load_source(const RunConfig& cfg, int default_n) {
  PolyMesh m = cfg.kind ? gen_structured(*cfg.kind, cfg.n > 0 ? cfg.n : default_n) : load_mesh(cfg.mesh_path);
  if (!cfg.eta.empty()) m = with_eta(m, EtaSpec::parse(cfg.eta));
  return m;
}

EigenOptions eigen_options(const Options& o) {
  EigenOptions e;
  if (o.method == "dense") e.method = EigenOptions::Method::dense;
  else if (o.method == "iterative") e.method = EigenOptions::Method::iterative;
  else if (o.method != "automatic") throw InputError("method must be automatic, dense or iterative");
  e.dense_limit = o.dense_limit;
  e.seed = o.cfg.seed;
  return e;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw InputError("failed writing '" + path + "'");
}

// CSV to the output path (or stdout), JSON mirror when requested, summary to stdout.
void emit_rows(const Options& o, const std::vector<WeberRow>& rows, bool truncated, const std::string& notice) {
  std::ostringstream csv;
  write_csv(csv, rows, o.omit_timings);
  if (o.cfg.output.empty()) std::cout << csv.str();
  else write_file(o.cfg.output, csv.str());
  if (!o.json_path.empty()) write_file(o.json_path, report_json(o.cfg, rows, truncated, notice, o.omit_timings));
  if (!o.cfg.output.empty()) {
    std::cout << std::left << std::setw(6) << "level" << std::setw(8) << "dofs" << std::setw(14) << "c_w" << std::setw(14)
              << "lambda_min_A" << "method\n";
    for (const auto& r : rows)
      std::cout << std::setw(6) << r.level << std::setw(8) << r.dofs << std::setw(14) << r.c_w << std::setw(14)
                << r.lambda_min_A << r.method << "\n";
  }
  if (rows.size() >= 2) {
    double lo = rows[0].c_w, hi = rows[0].c_w;
    for (const auto& r : rows) lo = std::min(lo, r.c_w), hi = std::max(hi, r.c_w);
    std::cout << "c_w max/min across levels: " << hi / lo << "\n";
  }
  if (truncated) std::cerr << "notice: " << notice << "\n";
}

int cmd_mesh_gen(Options& o) {
  finish_config(o, "mesh gen");
  if (o.cfg.output.empty()) throw InputError("mesh gen needs an output path (-o)");
  const PolyMesh m = load_source(o.cfg, 3);
  save_mesh(m, o.cfg.output);
  std::cout << "wrote " << o.cfg.output << ": " << m.n_cells() << " cells, " << m.n_faces() << " faces, beta1 = "
            << m.topology.beta1 << ", beta2 = " << m.topology.beta2 << ", hash " << mesh_content_hash(m) << "\n";
  return exit_ok;
}

int cmd_mesh_validate(const std::string& path) {
  const PolyMesh m = load_mesh(path);
  std::cout << "valid: " << m.n_cells() << " cells, " << m.n_faces() << " faces, beta1 = " << m.topology.beta1
            << ", beta2 = " << m.topology.beta2 << "\n";
  if (m.sigma_missing) std::cout << "warning: beta1 > 0 but no cutting surfaces are given\n";
  const auto rr = regularity_report(m);
  if (rr.non_star_shaped_cells > 0) std::cout << "warning: " << rr.non_star_shaped_cells << " non-star-shaped cells\n";
  return exit_ok;
}

int cmd_mesh_info(Options& o) {
  finish_config(o, "mesh info");
  const PolyMesh m = load_source(o.cfg, 3);
  const auto rr = regularity_report(m);
  std::cout << "cells                  " << m.n_cells() << "\n"
            << "faces                  " << m.n_faces() << "\n"
            << "vertices               " << m.vertices.size() << "\n"
            << "beta1, beta2           " << m.topology.beta1 << ", " << m.topology.beta2 << "\n"
            << "eta min, max           " << m.eta_min << ", " << m.eta_max << "\n"
            << "h                      " << rr.h << "\n"
            << "min r_T/h_T            " << rr.min_cell_inradius_ratio << "\n"
            << "min r_F/h_F            " << rr.min_face_inradius_ratio << "\n"
            << "max h_T/h_F            " << rr.max_cell_face_diameter_ratio << "\n"
            << "max faces per cell     " << rr.max_faces_per_cell << "\n"
            << "non-star-shaped cells  " << rr.non_star_shaped_cells << "\n"
            << "hash                   " << mesh_content_hash(m) << "\n";
  return exit_ok;
}

std::vector<FaceSpacePolicy> parse_policies(const std::string& text) {
  std::vector<FaceSpacePolicy> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(FaceSpacePolicy::parse(item));
  if (out.empty()) throw InputError("no face-space policy given");
  return out;
}

int cmd_verify(Options& o, const std::string& suite) {
  finish_config(o, "verify " + suite);
  const PolyMesh m = load_source(o.cfg, 2);
  VerifyOptions v;
  v.seed = o.cfg.seed;
  v.policies = parse_policies(o.policies);
  VerifyReport rep;
  if (suite == "koszul") {
    v.max_degree = o.max_degree >= 0 ? o.max_degree : 4;
    rep = verify_koszul(m, v);
  } else if (suite == "stab") {
    v.max_degree = o.max_degree >= 0 ? o.max_degree : 3;
    v.samples = o.samples > 0 ? o.samples : 30;
    rep = verify_stab(m, v);
  } else {
    v.max_degree = o.max_degree >= 0 ? o.max_degree : 2;
    v.samples = o.samples > 0 ? o.samples : 20;
    rep = verify_reconstruct(m, v);
  }
  if (v.max_degree > max_supported_degree) throw InputError("degree above the supported maximum");

  // one line per check, degree and policy: worst cell
  struct Agg {
    double worst = 0.;
    double limit = 0.;
    long cell = -1;
    std::size_t cells = 0, failed = 0;
  };
  std::map<std::tuple<std::string, int, std::string>, Agg> agg;
  std::vector<std::tuple<std::string, int, std::string>> order;
  std::size_t skipped = 0;
  for (const auto& r : rep.rows) {
    if (r.skipped) {
      ++skipped;
      continue;
    }
    auto key = std::make_tuple(r.check, r.degree, r.policy);
    auto [it, fresh] = agg.try_emplace(key);
    if (fresh) order.push_back(key);
    auto& a = it->second;
    ++a.cells;
    a.limit = r.limit;
    if (!r.pass) ++a.failed;
    if (a.cell < 0 || !(r.value <= a.worst)) a.worst = r.value, a.cell = r.cell;
    if (o.verbose)
      std::cout << suite << " cell " << r.cell << " degree " << r.degree << " " << r.policy << " " << r.check << " = "
                << r.value << (r.pass ? " PASS" : " FAIL") << "\n";
  }
  std::cout << std::left << std::setw(36) << "check" << std::setw(7) << "degree" << std::setw(18) << "policy"
            << std::setw(14) << "worst" << std::setw(12) << "limit" << std::setw(7) << "cells" << "status\n";
  for (const auto& key : order) {
    const auto& a = agg[key];
    std::ostringstream lim;
    if (a.limit < 1e300) lim << a.limit;
    else lim << "finite";
    std::cout << std::setw(36) << std::get<0>(key) << std::setw(7) << std::get<1>(key) << std::setw(18)
              << std::get<2>(key) << std::setw(14) << a.worst << std::setw(12) << lim.str() << std::setw(7) << a.cells
              << (a.failed ? "FAIL" : "PASS") << "\n";
  }
  if (skipped) std::cout << skipped << " non-star-shaped cells skipped\n";
  if (!o.cfg.output.empty()) {
    std::ostringstream csv;
    csv << "suite,check,cell,degree,policy,value,limit,pass\n" << std::setprecision(17);
    for (const auto& r : rep.rows)
      csv << r.suite << "," << r.check << "," << r.cell << "," << r.degree << "," << r.policy << "," << r.value << ","
          << r.limit << "," << (r.skipped ? "skipped" : r.pass ? "1" : "0") << "\n";
    write_file(o.cfg.output, csv.str());
  }
  if (!rep.ok()) {
    std::cout << "FAILED: " << rep.failures() << " checks; failing cells:";
    for (long c : rep.failing_cells()) std::cout << " " << c;
    std::cout << "\n";
    return exit_invariant;
  }
  std::cout << "all " << rep.rows.size() - skipped << " checks passed\n";
  return exit_ok;
}

int cmd_weber_estimate(Options& o) {
  finish_config(o, "weber estimate");
  const PolyMesh m = load_source(o.cfg, 2);
  const auto policy = FaceSpacePolicy::parse(o.cfg.policy);
  const BcFlavor flavor = bc_flavor_from_string(o.cfg.flavor);
  const auto L = build_layout(m, o.cfg.degree, policy, flavor);
  if (L.n_free() > o.cfg.dof_cap) {
    emit_rows(o, {}, true, std::to_string(L.n_free()) + " free DOFs exceed the cap of " + std::to_string(o.cfg.dof_cap));
    return exit_budget;
  }
  WeberRow r = weber_row(m, o.cfg.degree, policy, flavor, o.cfg.include_flux, eigen_options(o));
  r.n = o.cfg.n;
  emit_rows(o, {r}, false, "");
  return exit_ok;
}

int cmd_weber_study(Options& o) {
  finish_config(o, "weber study");
  if (!o.cfg.kind) throw InputError("weber study needs --kind");
  if (o.cfg.levels < 2) throw InputError("a refinement study needs at least 2 levels");
  StudyConfig sc;
  sc.kind = *o.cfg.kind;
  sc.degree = o.cfg.degree;
  sc.policy = FaceSpacePolicy::parse(o.cfg.policy);
  sc.flavor = bc_flavor_from_string(o.cfg.flavor);
  sc.include_flux = o.cfg.include_flux;
  sc.levels = o.cfg.levels;
  sc.base_n = o.base_n;
  if (!o.cfg.eta.empty()) sc.eta = EtaSpec::parse(o.cfg.eta);
  sc.dof_cap = o.cfg.dof_cap;
  sc.eigen = eigen_options(o);
  const auto res = refinement_study(sc);
  if (res.eta) o.cfg.eta = res.eta->describe();
  emit_rows(o, res.rows, res.truncated, res.notice);
  return res.truncated ? exit_budget : exit_ok;
}

int cmd_weber_degeneracy(Options& o) {
  finish_config(o, "weber degeneracy");
  const PolyMesh m = load_source(o.cfg, 3);
  const BcFlavor flavor = bc_flavor_from_string(o.cfg.flavor);
  const auto L = build_layout(m, o.cfg.degree, FaceSpacePolicy::parse(o.cfg.policy), flavor);
  const auto d = degeneracy_probe(L, o.dense_limit);
  const int harmonic = flavor == BcFlavor::normal ? m.topology.beta1 : m.topology.beta2;
  std::cout << "free DOFs                          " << d.n_free << "\n"
            << "flux terms                         " << d.flux_rank << "\n"
            << "harmonic dimension (topology)      " << harmonic << "\n"
            << "lambda_min(A) without / with flux  " << d.lambda_min_without_flux << " / " << d.lambda_min_with_flux << "\n"
            << "condensed mu_min without / with    " << d.mu_min_without_flux << " / " << d.mu_min_with_flux << "\n"
            << "condensed mu median (no flux)      " << d.mu_median_without_flux << "\n"
            << "near-kernel dimension (< 1e-6 med) " << d.near_kernel_dim << "\n";
  std::cout << "smallest mu without flux          ";
  for (double x : d.smallest_without_flux) std::cout << " " << x;
  std::cout << "\nsmallest mu with flux             ";
  for (double x : d.smallest_with_flux) std::cout << " " << x;
  std::cout << "\n";
  if (!o.json_path.empty()) {
    nlohmann::json j;
    j["config"] = nlohmann::json::parse(o.cfg.to_json());
    j["mesh_hash"] = mesh_content_hash(m);
    j["harmonic_dimension"] = harmonic;
    j["n_free"] = d.n_free;
    j["flux_rank"] = d.flux_rank;
    j["lambda_min_without_flux"] = d.lambda_min_without_flux;
    j["lambda_min_with_flux"] = d.lambda_min_with_flux;
    j["mu_min_without_flux"] = d.mu_min_without_flux;
    j["mu_min_with_flux"] = d.mu_min_with_flux;
    j["mu_median_without_flux"] = d.mu_median_without_flux;
    j["near_kernel_dim"] = d.near_kernel_dim;
    j["smallest_without_flux"] = d.smallest_without_flux;
    j["smallest_with_flux"] = d.smallest_with_flux;
    write_file(o.json_path, j.dump(2) + "\n");
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete Weber constants on hybrid polyhedral spaces"};
  app.require_subcommand(1);
  Options o;
  std::string validate_path;
  app.add_option("--threads", o.cfg.threads, "worker threads (default: WEBERLAB_THREADS, then hardware)")
      ->check(CLI::NonNegativeNumber);

  auto* mesh = app.add_subcommand("mesh", "generate, validate and inspect meshes");
  mesh->require_subcommand(1);
  auto* gen = mesh->add_subcommand("gen", "write a structured mesh");
  add_mesh_source(gen, o);
  gen->add_option("-o,--output", o.cfg.output, "output file")->required();
  auto* validate = mesh->add_subcommand("validate", "load and check a mesh file");
  validate->add_option("path", validate_path, "mesh file")->required();
  auto* info = mesh->add_subcommand("info", "regularity report");
  add_mesh_source(info, o);
  info->add_option("path", o.cfg.mesh_path, "mesh file");

  auto* verify = app.add_subcommand("verify", "per-cell verification suites");
  verify->require_subcommand(1);
  std::vector<std::pair<CLI::App*, std::string>> suites;
  for (const std::string s : {"koszul", "stab", "reconstruct"}) {
    auto* c = verify->add_subcommand(s);
    add_mesh_source(c, o);
    c->add_option("--degree", o.max_degree, "checks degrees 0..degree");
    c->add_option("--samples", o.samples, "random polynomials per cell");
    c->add_option("--policies", o.policies, "comma-separated: minimal, full, trimmed:K");
    c->add_option("--seed", o.cfg.seed);
    c->add_option("-o,--output", o.cfg.output, "per-cell CSV");
    c->add_flag("-v,--verbose", o.verbose, "print every per-cell check");
    suites.emplace_back(c, s);
  }

  auto* weber = app.add_subcommand("weber", "discrete Weber constants");
  weber->require_subcommand(1);
  auto common = [&](CLI::App* c) {
    c->add_option("--degree", o.cfg.degree);
    c->add_option("--policy", o.cfg.policy, "minimal | full | trimmed:K");
    c->add_option("--flavor", o.cfg.flavor, "tangential | normal");
    c->add_flag("--no-flux", o.no_flux, "drop the topological flux terms");
    c->add_option("--method", o.method, "automatic | dense | iterative");
    c->add_option("--dense-limit", o.dense_limit, "largest problem solved densely");
    c->add_option("--dof-cap", o.cfg.dof_cap);
    c->add_option("--seed", o.cfg.seed);
    c->add_option("-o,--output", o.cfg.output, "CSV report (default: stdout)");
    c->add_option("--json", o.json_path, "JSON report");
    c->add_flag("--omit-timings", o.omit_timings, "write wall_ms as NA for reproducible reports");
  };
  auto* estimate = weber->add_subcommand("estimate", "Weber constant on one mesh");
  add_mesh_source(estimate, o);
  common(estimate);
  auto* study = weber->add_subcommand("study", "refinement study on a structured family");
  add_mesh_source(study, o, false);
  common(study);
  study->add_option("--levels", o.cfg.levels);
  study->add_option("--base-n", o.base_n, "divisions of the coarsest level");
  auto* degen = weber->add_subcommand("degeneracy", "near-kernel probe without flux terms");
  add_mesh_source(degen, o);
  common(degen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_input;
  }
  set_thread_count(o.cfg.threads);

  try {
    if (gen->parsed()) return cmd_mesh_gen(o);
    if (validate->parsed()) return cmd_mesh_validate(validate_path);
    if (info->parsed()) return cmd_mesh_info(o);
    for (const auto& [c, s] : suites)
      if (c->parsed()) return cmd_verify(o, s);
    if (estimate->parsed()) return cmd_weber_estimate(o);
    if (study->parsed()) return cmd_weber_study(o);
    if (degen->parsed()) return cmd_weber_degeneracy(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_input;
  } catch (const MeshError& e) {
    std::cerr << "mesh error: " << e.what() << "\n";
    return exit_input;
  } catch (const LayoutError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return exit_input;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return exit_budget;
  } catch (const SpectralError& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return exit_invariant;
  } catch (const QuadratureError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return exit_input;
  } catch (const std::exception& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return exit_invariant;
  }
  return exit_input;
}
