#include "mafem/mafem.h"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitError = 2;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(mafem_status s, const char* what) {
  if (s != MAFEM_OK) {
    throw Failure(std::string(what) + ": " + mafem_status_string(s) + ": " + mafem_last_error());
  }
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Config = Handle<mafem_config, mafem_config_free>;
using MeshH = Handle<mafem_mesh, mafem_mesh_free>;
using Spectrum = Handle<mafem_spectrum, mafem_spectrum_free>;
using Run = Handle<mafem_run, mafem_run_free>;
using Report = Handle<mafem_report, mafem_report_free>;

// Every config key is also a flag; flags take precedence over the config
// file.
void add_config_flags(CLI::App* app, std::string& config_path,
                      std::vector<std::pair<std::string, std::string>>& values,
                      std::optional<int>& threads) {
  app->add_option("--config", config_path,
                  "Config file of key = value lines; flags below override its values")
      ->check(CLI::ExistingFile);
  static const std::vector<std::pair<std::string, std::string>> keys{
      {"domain", "cube | fichera | mesh file path"},
      {"n", "initial subdivisions (>= 1)"},
      {"theta", "Dorfler bulk parameter in (0, 1]"},
      {"target_index", "index j of the eigenvalue to approximate (>= 1)"},
      {"eps", "permittivity (> 0)"},
      {"mu", "permeability (> 0)"},
      {"eig_tol", "eigensolver relative residual tolerance"},
      {"eig_shift", "shift of the shift-invert solver (0 = automatic)"},
      {"max_dofs", "stop once a level has this many dofs"},
      {"max_levels", "maximum number of refinements"},
      {"beta", "weight of the error term in the contraction quantity"},
      {"reference", "auto | none | analytic | fine"},
      {"ref_refinements", "bisection sweeps of the fine reference mesh (3 halve h)"},
      {"num_eigs", "eigenvalues reported by solve"},
      {"out_dir", "output directory"},
      {"seed", "random seed"},
      {"write_vtk", "true | false"},
      {"selftest", "off | fail"}};
  values.reserve(keys.size());
  for (const auto& [key, help] : keys) {
    std::string flag = "--" + key;
    for (char& c : flag) {
      if (c == '_') c = '-';
    }
    values.emplace_back(key, std::string());
    app->add_option(flag, values.back().second, help);
  }
  app->add_option("--threads", threads,
                   "worker threads for element loops (also MAXWELL_AFEM_THREADS)")
      ->check(CLI::PositiveNumber);
}

struct CommonArgs {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> values;
  std::optional<int> threads;
};

void load_config(const CommonArgs& args, Config& cfg) {
  if (args.config_path.empty()) {
    check(mafem_config_new(cfg.out()), "config");
  } else {
    check(mafem_config_read(args.config_path.c_str(), cfg.out()), "config");
  }
  for (const auto& [key, value] : args.values) {
    if (!value.empty()) check(mafem_config_set(cfg.get(), key.c_str(), value.c_str()), "option");
  }
  if (args.threads) check(mafem_set_threads(*args.threads), "threads");
}

// Reads one key back from the normalized config text.
std::string config_value(Config& cfg, const std::string& key) {
  const char* text = nullptr;
  check(mafem_config_text(cfg.get(), &text), "config");
  std::istringstream is(text);
  std::string line;
  const std::string prefix = key + " = ";
  while (std::getline(is, line)) {
    if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
  }
  throw Failure("config key '" + key + "' missing");
}

std::filesystem::path prepare_out_dir(Config& cfg) {
  const std::filesystem::path dir = config_value(cfg, "out_dir");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Failure("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::string level_vtk_name(int level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "level_%02d.vtk", level);
  return buf;
}

void print_records(const mafem_run* run) {
  int n = 0;
  check(mafem_run_levels(run, &n), "run");
  std::printf("%5s %9s %9s %20s %13s %8s %13s %13s %9s\n", "level", "ntets", "ndofs", "lambda",
              "eta_sq", "marked", "gap", "xi_sq", "seconds");
  for (int l = 0; l < n; ++l) {
    mafem_record r{};
    check(mafem_run_record(run, l, &r), "run");
    std::printf("%5d %9d %9d %20.14g %13.6e %8d %13.6e %13.6e %9.3f\n", r.level, r.n_tets,
                r.n_dofs, r.lambda, r.eta_sq, r.n_marked, r.gap, r.xi_sq, r.seconds);
  }
  int nw = 0;
  check(mafem_run_warning_count(run, &nw), "run");
  for (int i = 0; i < nw; ++i) {
    const char* w = nullptr;
    check(mafem_run_warning(run, i, &w), "run");
    std::fprintf(stderr, "warning: %s\n", w);
  }
}

int cmd_mesh(const std::string& domain, int n, int sweeps, const std::string& in,
             const std::string& out) {
  MeshH base;
  if (!in.empty()) {
    check(mafem_mesh_read(in.c_str(), base.out()), "mesh");
  } else {
    check(mafem_mesh_generate(domain.c_str(), n, base.out()), "mesh");
  }
  MeshH mesh;
  check(mafem_mesh_refine_uniform(base.get(), sweeps, mesh.out()), "refine");
  std::size_t nv = 0, ne = 0, nf = 0, nt = 0;
  check(mafem_mesh_counts(mesh.get(), &nv, &ne, &nf, &nt), "mesh");
  int conforming = 0;
  check(mafem_mesh_is_conforming(mesh.get(), &conforming), "mesh");
  std::printf("vertices %zu edges %zu faces %zu tets %zu conforming %s\n", nv, ne, nf, nt,
              conforming ? "yes" : "no");
  if (!out.empty()) {
    check(mafem_mesh_write(mesh.get(), out.c_str()), "write");
    std::printf("wrote %s\n", out.c_str());
  }
  return kExitOk;
}

int cmd_solve(const CommonArgs& args) {
  Config cfg;
  load_config(args, cfg);
  MeshH mesh;
  check(mafem_mesh_from_config(cfg.get(), mesh.out()), "mesh");
  const int k = std::stoi(config_value(cfg, "num_eigs"));
  Spectrum sp;
  check(mafem_solve(cfg.get(), mesh.get(), k, sp.out()), "solve");
  int count = 0, dofs = 0, npos = 0;
  check(mafem_spectrum_count(sp.get(), &count), "solve");
  check(mafem_spectrum_dofs(sp.get(), &dofs), "solve");
  check(mafem_spectrum_positive_dim(sp.get(), &npos), "solve");
  std::printf("dofs %d, positive eigenvalues %d\n", dofs, npos);
  for (int i = 0; i < count; ++i) {
    double lambda = 0.0;
    check(mafem_spectrum_lambda(sp.get(), i, &lambda), "solve");
    std::printf("lambda_%d = %.15g  (omega = %.15g)\n", i + 1, lambda, std::sqrt(lambda));
  }
  if (config_value(cfg, "write_vtk") == "true" && count > 0) {
    const auto dir = prepare_out_dir(cfg);
    for (int i = 0; i < count; ++i) {
      const auto path = (dir / ("mode_" + std::to_string(i + 1) + ".vtk")).string();
      check(mafem_spectrum_write_vtk(sp.get(), i, path.c_str()), "vtk");
    }
    std::printf("wrote %d VTK files to %s\n", count, dir.string().c_str());
  }
  return kExitOk;
}

void run_loop(Config& cfg, Run& run, bool uniform, int sweeps) {
  mafem_status s = uniform
                       ? mafem_run_uniform(cfg.get(), nullptr,
                                           std::stoi(config_value(cfg, "max_levels")), sweeps,
                                           run.out())
                       : mafem_run_adaptive(cfg.get(), nullptr, run.out());
  if (s == MAFEM_ERR_ADAPT && run.get()) {
    std::fprintf(stderr, "loop failed; completed levels:\n");
    print_records(run.get());
  }
  check(s, uniform ? "uniform run" : "adaptive run");
  check(mafem_run_attach_reference(run.get(), cfg.get()), "reference");
}

void print_rate(const mafem_run* run) {
  double rate = 0.0;
  int of_error = 0;
  const mafem_status s = mafem_run_rate(run, &rate, &of_error);
  if (s == MAFEM_OK) {
    std::printf("rate: %.4f (%s vs ndofs)\n", rate,
                of_error ? "|lambda_ref - lambda_h|" : "eta^2");
  } else {
    std::printf("rate: n/a (%s)\n", mafem_last_error());
  }
}

int cmd_adapt(const CommonArgs& args, bool uniform, int sweeps) {
  Config cfg;
  load_config(args, cfg);
  Run run;
  run_loop(cfg, run, uniform, sweeps);
  print_records(run.get());
  double lref = 0.0;
  check(mafem_run_lambda_ref(run.get(), &lref), "run");
  if (std::isfinite(lref)) std::printf("lambda_ref = %.15g\n", lref);
  print_rate(run.get());
  const auto dir = prepare_out_dir(cfg);
  const auto csv = (dir / "adapt.csv").string();
  check(mafem_run_write_csv(run.get(), csv.c_str()), "csv");
  std::printf("wrote %s\n", csv.c_str());
  if (config_value(cfg, "write_vtk") == "true") {
    int n = 0;
    check(mafem_run_levels(run.get(), &n), "run");
    for (int l = 0; l < n; ++l) {
      const auto path = (dir / level_vtk_name(l)).string();
      check(mafem_run_write_vtk(run.get(), l, path.c_str()), "vtk");
    }
    std::printf("wrote %d VTK files to %s\n", n, dir.string().c_str());
  }
  return kExitOk;
}

int print_report(Report& rep, const std::filesystem::path* dir) {
  const char* text = nullptr;
  check(mafem_report_text(rep.get(), &text), "report");
  std::fputs(text, stdout);
  if (dir) {
    const char* csv = nullptr;
    check(mafem_report_csv(rep.get(), &csv), "report");
    const auto path = (*dir / "report.csv").string();
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Failure("cannot open '" + path + "' for writing");
    std::fputs(csv, f);
    std::fclose(f);
    std::printf("wrote %s\n", path.c_str());
  }
  int passed = 0;
  check(mafem_report_passed(rep.get(), &passed), "report");
  return passed ? kExitOk : kExitCheckFailed;
}

int cmd_verify(const CommonArgs& args, bool uniform, int sweeps) {
  Config cfg;
  load_config(args, cfg);
  if (config_value(cfg, "selftest") == "fail") {
    Report rep;
    check(mafem_verify_selftest_fail(rep.out()), "selftest");
    return print_report(rep, nullptr);
  }
  Run run;
  run_loop(cfg, run, uniform, sweeps);
  print_records(run.get());
  print_rate(run.get());
  Report rep;
  check(mafem_verify(run.get(), uniform ? 1 : 0, rep.out()), "verify");
  const auto dir = prepare_out_dir(cfg);
  const auto csv = (dir / "adapt.csv").string();
  check(mafem_run_write_csv(run.get(), csv.c_str()), "csv");
  return print_report(rep, &dir);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive edge-element solver for the Maxwell eigenvalue problem"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 1 a verification check failed, 2 error.\n"
             "Precedence: command-line flags > --config file > built-in defaults.");

  CommonArgs solve_args, adapt_args, verify_args;
  auto* solve = app.add_subcommand("solve", "Smallest positive eigenvalues on one mesh");
  add_config_flags(solve, solve_args.config_path, solve_args.values, solve_args.threads);

  bool adapt_uniform = false, verify_uniform = false;
  int adapt_sweeps = 3, verify_sweeps = 3;
  auto* adapt = app.add_subcommand("adapt", "Adaptive loop with CSV and VTK output");
  add_config_flags(adapt, adapt_args.config_path, adapt_args.values, adapt_args.threads);
  adapt->add_flag("--uniform", adapt_uniform, "refine every element instead of marking");
  adapt->add_option("--sweeps", adapt_sweeps, "bisection sweeps per uniform level")
      ->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Run a loop and the theory checks");
  add_config_flags(verify, verify_args.config_path, verify_args.values, verify_args.threads);
  verify->add_flag("--uniform", verify_uniform,
                   "uniform sequence; trend checks become pass/fail");
  verify->add_option("--sweeps", verify_sweeps, "bisection sweeps per uniform level")
      ->check(CLI::PositiveNumber);

  std::string mesh_domain = "cube", mesh_in, mesh_out;
  int mesh_n = 2, mesh_sweeps = 0;
  auto* mesh = app.add_subcommand("mesh", "Generate, refine or inspect a mesh");
  mesh->add_option("--domain", mesh_domain, "cube | fichera")
      ->check(CLI::IsMember({"cube", "fichera"}));
  mesh->add_option("--n", mesh_n, "subdivisions per unit cube")->check(CLI::PositiveNumber);
  mesh->add_option("--in", mesh_in, "read this mesh file instead of generating")
      ->check(CLI::ExistingFile);
  mesh->add_option("--refine", mesh_sweeps, "uniform bisection sweeps")
      ->check(CLI::NonNegativeNumber);
  mesh->add_option("--out", mesh_out, "write the mesh to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }

  try {
    if (*solve) return cmd_solve(solve_args);
    if (*adapt) return cmd_adapt(adapt_args, adapt_uniform, adapt_sweeps);
    if (*verify) return cmd_verify(verify_args, verify_uniform, verify_sweeps);
    if (*mesh) return cmd_mesh(mesh_domain, mesh_n, mesh_sweeps, mesh_in, mesh_out);
  } catch (const Failure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
