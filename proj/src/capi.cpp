#include "mafem/mafem.h"

#include "mafem/adapt.hpp"
#include "mafem/estimator.hpp"
#include "mafem/io.hpp"
#include "mafem/reference.hpp"
#include "mafem/verify.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <thread>

struct mafem_config {
  mafem::RunConfig cfg;
  std::string text;
};

struct mafem_mesh {
  mafem::Mesh mesh;
};

struct mafem_spectrum {
  mafem::Mesh mesh;
  mafem::EdgeSpace space;
  mafem::Material material;
  std::vector<mafem::EigenPair> pairs;
  int positive_dim = 0;
};

struct mafem_run {
  mafem::AdaptResult result;
};

struct mafem_report {
  mafem::TheoryReport report;
  std::string text;
  std::string csv;
};

namespace {

thread_local std::string g_last_error;

mafem_status fail(mafem_status s, const std::string& what) {
  g_last_error = what;
  return s;
}

template <class Fn>
mafem_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return MAFEM_OK;
  } catch (const mafem::AdaptError& e) {
    return fail(MAFEM_ERR_ADAPT, e.what());
  } catch (const mafem::ConvergenceError& e) {
    return fail(MAFEM_ERR_CONVERGENCE, e.what());
  } catch (const mafem::TopologyError& e) {
    return fail(MAFEM_ERR_TOPOLOGY, e.what());
  } catch (const mafem::GeometryError& e) {
    return fail(MAFEM_ERR_GEOMETRY, e.what());
  } catch (const mafem::RefinementError& e) {
    return fail(MAFEM_ERR_REFINEMENT, e.what());
  } catch (const mafem::LineageError& e) {
    return fail(MAFEM_ERR_LINEAGE, e.what());
  } catch (const mafem::FactorizationError& e) {
    return fail(MAFEM_ERR_FACTORIZATION, e.what());
  } catch (const mafem::DimensionError& e) {
    return fail(MAFEM_ERR_DIMENSION, e.what());
  } catch (const mafem::ArgumentError& e) {
    return fail(MAFEM_ERR_ARGUMENT, e.what());
  } catch (const mafem::ConfigError& e) {
    return fail(MAFEM_ERR_CONFIG, e.what());
  } catch (const mafem::IoError& e) {
    return fail(MAFEM_ERR_IO, e.what());
  } catch (const mafem::SignError& e) {
    return fail(MAFEM_ERR_SIGN, e.what());
  } catch (const mafem::Error& e) {
    return fail(MAFEM_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MAFEM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MAFEM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MAFEM_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* name) {
  if (!p) throw mafem::ArgumentError(std::string(name) + " must not be NULL");
}

mafem::Mesh initial_mesh(const mafem_config* cfg, const mafem_mesh* mesh) {
  return mesh ? mesh->mesh : mafem::make_initial_mesh(cfg->cfg);
}

void check_level(const mafem_run* run, int level) {
  if (level < 0 || level >= static_cast<int>(run->result.records.size())) {
    throw mafem::ArgumentError("level out of range");
  }
}

} // namespace

extern "C" {

const char* mafem_version(void) { return "0.1.0"; }

const char* mafem_status_string(mafem_status status) {
  switch (status) {
  case MAFEM_OK:
    return "ok";
  case MAFEM_ERR_ARGUMENT:
    return "invalid argument";
  case MAFEM_ERR_TOPOLOGY:
    return "topology error";
  case MAFEM_ERR_GEOMETRY:
    return "geometry error";
  case MAFEM_ERR_REFINEMENT:
    return "refinement error";
  case MAFEM_ERR_LINEAGE:
    return "lineage error";
  case MAFEM_ERR_FACTORIZATION:
    return "factorization error";
  case MAFEM_ERR_CONVERGENCE:
    return "convergence error";
  case MAFEM_ERR_DIMENSION:
    return "dimension error";
  case MAFEM_ERR_CONFIG:
    return "configuration error";
  case MAFEM_ERR_IO:
    return "i/o error";
  case MAFEM_ERR_SIGN:
    return "sign error";
  case MAFEM_ERR_ADAPT:
    return "adaptive loop error";
  case MAFEM_ERR_INTERNAL:
    return "internal error";
  }
  return "unknown status";
}

const char* mafem_last_error(void) { return g_last_error.c_str(); }

mafem_status mafem_set_threads(int n) {
  return guarded([&] {
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    mafem::set_num_threads(n >= 1 ? n : std::max(1, hw));
  });
}

int mafem_get_threads(void) { return mafem::num_threads(); }

mafem_status mafem_config_new(mafem_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new mafem_config();
  });
}

mafem_status mafem_config_read(const char* path, mafem_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto c = std::make_unique<mafem_config>();
    c->cfg = mafem::read_config(path);
    *out = c.release();
  });
}

mafem_status mafem_config_parse(const char* text, mafem_config** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    std::istringstream is(text);
    auto c = std::make_unique<mafem_config>();
    c->cfg = mafem::parse_config(is);
    *out = c.release();
  });
}

mafem_status mafem_config_set(mafem_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    need(value, "value");
    mafem::RunConfig next = cfg->cfg;
    mafem::set_config_value(next, key, value);
    mafem::validate_config(next);
    cfg->cfg = next;
  });
}

mafem_status mafem_config_text(mafem_config* cfg, const char** text) {
  return guarded([&] {
    need(cfg, "cfg");
    need(text, "text");
    std::ostringstream os;
    mafem::write_config(os, cfg->cfg);
    cfg->text = os.str();
    *text = cfg->text.c_str();
  });
}

mafem_status mafem_config_write(const mafem_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "cfg");
    need(path, "path");
    std::ofstream out(path);
    if (!out) throw mafem::IoError(std::string("cannot open '") + path + "' for writing");
    mafem::write_config(out, cfg->cfg);
    if (!out) throw mafem::IoError(std::string("write to '") + path + "' failed");
  });
}

void mafem_config_free(mafem_config* cfg) { delete cfg; }

mafem_status mafem_mesh_generate(const char* domain, int n, mafem_mesh** out) {
  return guarded([&] {
    need(domain, "domain");
    need(out, "out");
    const std::string d = domain;
    if (d != "cube" && d != "fichera") {
      throw mafem::ArgumentError("domain must be cube or fichera");
    }
    if (n < 1) throw mafem::ArgumentError("n must be >= 1");
    auto m = std::make_unique<mafem_mesh>();
    m->mesh = d == "cube" ? mafem::generate_cube(n) : mafem::generate_fichera(n);
    *out = m.release();
  });
}

mafem_status mafem_mesh_from_config(const mafem_config* cfg, mafem_mesh** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    auto m = std::make_unique<mafem_mesh>();
    m->mesh = mafem::make_initial_mesh(cfg->cfg);
    *out = m.release();
  });
}

mafem_status mafem_mesh_read(const char* path, mafem_mesh** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto m = std::make_unique<mafem_mesh>();
    m->mesh = mafem::read_mesh_file(path);
    *out = m.release();
  });
}

mafem_status mafem_mesh_write(const mafem_mesh* mesh, const char* path) {
  return guarded([&] {
    need(mesh, "mesh");
    need(path, "path");
    mafem::write_mesh_file(path, mesh->mesh);
  });
}

mafem_status mafem_mesh_refine_uniform(const mafem_mesh* mesh, int sweeps, mafem_mesh** out) {
  return guarded([&] {
    need(mesh, "mesh");
    need(out, "out");
    if (sweeps < 0) throw mafem::ArgumentError("sweeps must be >= 0");
    auto m = std::make_unique<mafem_mesh>();
    m->mesh = mesh->mesh;
    for (int s = 0; s < sweeps; ++s) m->mesh = mafem::refine_uniform(m->mesh);
    *out = m.release();
  });
}

mafem_status mafem_mesh_refine(const mafem_mesh* mesh, const int* marked, size_t n_marked,
                               mafem_mesh** out) {
  return guarded([&] {
    need(mesh, "mesh");
    need(out, "out");
    if (n_marked > 0) need(marked, "marked");
    std::vector<int> m(marked, marked + n_marked);
    auto r = std::make_unique<mafem_mesh>();
    r->mesh = mafem::refine(mesh->mesh, m);
    *out = r.release();
  });
}

mafem_status mafem_mesh_counts(const mafem_mesh* mesh, size_t* n_vertices, size_t* n_edges,
                               size_t* n_faces, size_t* n_tets) {
  return guarded([&] {
    need(mesh, "mesh");
    if (n_vertices) *n_vertices = mesh->mesh.num_vertices();
    if (n_edges) *n_edges = mesh->mesh.num_edges();
    if (n_faces) *n_faces = mesh->mesh.num_faces();
    if (n_tets) *n_tets = mesh->mesh.num_tets();
  });
}

mafem_status mafem_mesh_is_conforming(const mafem_mesh* mesh, int* conforming) {
  return guarded([&] {
    need(mesh, "mesh");
    need(conforming, "conforming");
    *conforming = mafem::is_conforming(mesh->mesh) ? 1 : 0;
  });
}

void mafem_mesh_free(mafem_mesh* mesh) { delete mesh; }

mafem_status mafem_solve(const mafem_config* cfg, const mafem_mesh* mesh, int k,
                         mafem_spectrum** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(mesh, "mesh");
    need(out, "out");
    if (k < 1) throw mafem::ArgumentError("k must be >= 1");
    mafem::validate_config(cfg->cfg);
    auto sp = std::make_unique<mafem_spectrum>();
    sp->mesh = mesh->mesh;
    sp->material = mafem::make_material(cfg->cfg);
    sp->space = mafem::EdgeSpace::build(sp->mesh);
    const mafem::NodalSpace nodal = mafem::NodalSpace::build(sp->mesh);
    sp->positive_dim = mafem::count_positive_dim(sp->space, nodal);
    if (sp->positive_dim > 0) {
      const mafem::SystemMatrices sys = mafem::assemble(sp->mesh, sp->space, sp->material);
      const mafem::SparseRect g = mafem::discrete_gradient(sp->mesh, nodal, sp->space);
      mafem::EigenConfig ecfg;
      ecfg.k = std::min(k, sp->positive_dim);
      ecfg.tol = cfg->cfg.eig_tol;
      ecfg.seed = cfg->cfg.seed;
      ecfg.shift = cfg->cfg.eig_shift > 0.0 ? cfg->cfg.eig_shift : 1.0;
      sp->pairs = mafem::solve_smallest_positive(sys.stiffness, sys.mass, g, ecfg);
      for (mafem::EigenPair& p : sp->pairs) mafem::fix_sign(p, sys.mass);
    }
    *out = sp.release();
  });
}

mafem_status mafem_spectrum_count(const mafem_spectrum* sp, int* count) {
  return guarded([&] {
    need(sp, "spectrum");
    need(count, "count");
    *count = static_cast<int>(sp->pairs.size());
  });
}

mafem_status mafem_spectrum_lambda(const mafem_spectrum* sp, int index, double* lambda) {
  return guarded([&] {
    need(sp, "spectrum");
    need(lambda, "lambda");
    if (index < 0 || index >= static_cast<int>(sp->pairs.size())) {
      throw mafem::ArgumentError("eigenpair index out of range");
    }
    *lambda = sp->pairs[index].lambda;
  });
}

mafem_status mafem_spectrum_dofs(const mafem_spectrum* sp, int* n_dofs) {
  return guarded([&] {
    need(sp, "spectrum");
    need(n_dofs, "n_dofs");
    *n_dofs = sp->space.n_dofs;
  });
}

mafem_status mafem_spectrum_positive_dim(const mafem_spectrum* sp, int* n) {
  return guarded([&] {
    need(sp, "spectrum");
    need(n, "n");
    *n = sp->positive_dim;
  });
}

mafem_status mafem_spectrum_write_vtk(const mafem_spectrum* sp, int index, const char* path) {
  return guarded([&] {
    need(sp, "spectrum");
    need(path, "path");
    if (index < 0 || index >= static_cast<int>(sp->pairs.size())) {
      throw mafem::ArgumentError("eigenpair index out of range");
    }
    const mafem::EigenPair& p = sp->pairs[index];
    const mafem::IndicatorField eta =
        mafem::indicator_standard(sp->mesh, sp->space, p, sp->material);
    mafem::write_vtk_file(path, sp->mesh,
                          mafem::solution_fields(sp->mesh, sp->space, p.u, eta.eta_sq));
  });
}

void mafem_spectrum_free(mafem_spectrum* sp) { delete sp; }

mafem_status mafem_run_adaptive(const mafem_config* cfg, const mafem_mesh* mesh, mafem_run** out) {
  if (out) *out = nullptr;
  std::vector<mafem::AdaptRecord> partial;
  const mafem_status s = guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    const mafem::LoopConfig loop = mafem::make_loop_config(cfg->cfg);
    auto run = std::make_unique<mafem_run>();
    try {
      run->result = mafem::run_adaptive(initial_mesh(cfg, mesh), mafem::make_material(cfg->cfg), loop);
    } catch (const mafem::AdaptError& e) {
      partial = e.partial();
      throw;
    }
    *out = run.release();
  });
  if (s == MAFEM_ERR_ADAPT && out) {
    *out = new mafem_run();
    (*out)->result.records = std::move(partial);
  }
  return s;
}

mafem_status mafem_run_uniform(const mafem_config* cfg, const mafem_mesh* mesh, int levels,
                               int sweeps, mafem_run** out) {
  if (out) *out = nullptr;
  std::vector<mafem::AdaptRecord> partial;
  const mafem_status s = guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    mafem::LoopConfig loop = mafem::make_loop_config(cfg->cfg);
    auto run = std::make_unique<mafem_run>();
    try {
      run->result = mafem::run_uniform(initial_mesh(cfg, mesh), mafem::make_material(cfg->cfg),
                                       loop, levels, sweeps);
    } catch (const mafem::AdaptError& e) {
      partial = e.partial();
      throw;
    }
    *out = run.release();
  });
  if (s == MAFEM_ERR_ADAPT && out) {
    *out = new mafem_run();
    (*out)->result.records = std::move(partial);
  }
  return s;
}

mafem_status mafem_run_attach_reference(mafem_run* run, const mafem_config* cfg) {
  return guarded([&] {
    need(run, "run");
    need(cfg, "cfg");
    if (run->result.levels.empty()) throw mafem::ArgumentError("run has no level data");
    const mafem::LoopConfig loop = mafem::make_loop_config(cfg->cfg);
    const auto ref = mafem::make_reference(run->result, loop);
    if (ref) mafem::attach_reference(run->result, *ref);
  });
}

mafem_status mafem_run_levels(const mafem_run* run, int* n_levels) {
  return guarded([&] {
    need(run, "run");
    need(n_levels, "n_levels");
    *n_levels = static_cast<int>(run->result.records.size());
  });
}

mafem_status mafem_run_record(const mafem_run* run, int level, mafem_record* out) {
  return guarded([&] {
    need(run, "run");
    need(out, "out");
    check_level(run, level);
    const mafem::AdaptRecord& r = run->result.records[level];
    *out = mafem_record{r.level, r.n_tets, r.n_dofs, r.lambda, r.eta_sq,
                        r.n_marked, r.gap, r.xi_sq, r.seconds};
  });
}

mafem_status mafem_run_lambda_ref(const mafem_run* run, double* lambda_ref) {
  return guarded([&] {
    need(run, "run");
    need(lambda_ref, "lambda_ref");
    *lambda_ref = run->result.lambda_ref;
  });
}

mafem_status mafem_run_rate(const mafem_run* run, double* rate, int* of_error) {
  return guarded([&] {
    need(run, "run");
    need(rate, "rate");
    const auto& recs = run->result.records;
    const double ref = run->result.lambda_ref;
    const bool with_ref = std::isfinite(ref);
    std::vector<double> x, y;
    for (const mafem::AdaptRecord& r : recs) {
      x.push_back(r.n_dofs);
      y.push_back(with_ref ? std::abs(ref - r.lambda) : r.eta_sq);
    }
    *rate = mafem::rate_fit(x, y);
    if (of_error) *of_error = with_ref ? 1 : 0;
  });
}

mafem_status mafem_run_warning_count(const mafem_run* run, int* count) {
  return guarded([&] {
    need(run, "run");
    need(count, "count");
    *count = static_cast<int>(run->result.warnings.size());
  });
}

mafem_status mafem_run_warning(const mafem_run* run, int index, const char** text) {
  return guarded([&] {
    need(run, "run");
    need(text, "text");
    if (index < 0 || index >= static_cast<int>(run->result.warnings.size())) {
      throw mafem::ArgumentError("warning index out of range");
    }
    *text = run->result.warnings[index].c_str();
  });
}

mafem_status mafem_run_write_csv(const mafem_run* run, const char* path) {
  return guarded([&] {
    need(run, "run");
    need(path, "path");
    mafem::write_csv_file(path, run->result.records);
  });
}

mafem_status mafem_run_write_vtk(const mafem_run* run, int level, const char* path) {
  return guarded([&] {
    need(run, "run");
    need(path, "path");
    if (level < 0 || level >= static_cast<int>(run->result.levels.size())) {
      throw mafem::ArgumentError("level out of range or run without level data");
    }
    const mafem::LevelSnapshot& s = run->result.levels[level];
    const mafem::EdgeSpace space = mafem::EdgeSpace::build(s.mesh);
    mafem::write_vtk_file(path, s.mesh,
                          mafem::solution_fields(s.mesh, space, s.pair.u, s.eta.eta_sq));
  });
}

void mafem_run_free(mafem_run* run) { delete run; }

namespace {

void render(mafem_report& r) {
  std::ostringstream text, csv;
  r.report.write_text(text);
  r.report.write_csv(csv);
  r.text = text.str();
  r.csv = csv.str();
}

mafem_check_status to_c(mafem::CheckStatus s) {
  switch (s) {
  case mafem::CheckStatus::pass:
    return MAFEM_CHECK_PASS;
  case mafem::CheckStatus::fail:
    return MAFEM_CHECK_FAIL;
  case mafem::CheckStatus::info:
    return MAFEM_CHECK_INFO;
  case mafem::CheckStatus::skipped:
    return MAFEM_CHECK_SKIPPED;
  }
  return MAFEM_CHECK_INFO;
}

} // namespace

mafem_status mafem_verify(const mafem_run* run, int uniform, mafem_report** out) {
  return guarded([&] {
    need(run, "run");
    need(out, "out");
    if (run->result.levels.empty()) throw mafem::ArgumentError("run has no level data");
    mafem::TheoryOptions opt;
    opt.uniform = uniform != 0;
    auto r = std::make_unique<mafem_report>();
    r->report = mafem::run_theory_checks(run->result, opt);
    render(*r);
    *out = r.release();
  });
}

mafem_status mafem_verify_selftest_fail(mafem_report** out) {
  return guarded([&] {
    need(out, "out");
    auto r = std::make_unique<mafem_report>();
    r->report = mafem::selftest_failure_report();
    render(*r);
    *out = r.release();
  });
}

mafem_status mafem_report_passed(const mafem_report* rep, int* passed) {
  return guarded([&] {
    need(rep, "report");
    need(passed, "passed");
    *passed = rep->report.passed() ? 1 : 0;
  });
}

mafem_status mafem_report_check_count(const mafem_report* rep, int* count) {
  return guarded([&] {
    need(rep, "report");
    need(count, "count");
    *count = static_cast<int>(rep->report.summary.size());
  });
}

mafem_status mafem_report_check(const mafem_report* rep, int index, const char** name,
                                mafem_check_status* status, const char** detail) {
  return guarded([&] {
    need(rep, "report");
    if (index < 0 || index >= static_cast<int>(rep->report.summary.size())) {
      throw mafem::ArgumentError("check index out of range");
    }
    const mafem::CheckSummary& s = rep->report.summary[index];
    if (name) *name = s.check.c_str();
    if (status) *status = to_c(s.status);
    if (detail) *detail = s.detail.c_str();
  });
}

mafem_status mafem_report_text(const mafem_report* rep, const char** text) {
  return guarded([&] {
    need(rep, "report");
    need(text, "text");
    *text = rep->text.c_str();
  });
}

mafem_status mafem_report_csv(const mafem_report* rep, const char** csv) {
  return guarded([&] {
    need(rep, "report");
    need(csv, "csv");
    *csv = rep->csv.c_str();
  });
}

void mafem_report_free(mafem_report* rep) { delete rep; }

} // extern "C"
