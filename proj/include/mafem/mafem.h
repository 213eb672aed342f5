#ifndef MAFEM_MAFEM_H
#define MAFEM_MAFEM_H

/* C interface of the Maxwell eigenvalue AFEM library.
 *
 * Every function returns a mafem_status. On failure the message of the last
 * error on the calling thread is available from mafem_last_error(). Objects
 * are opaque handles released by their *_free function; passing NULL to a
 * *_free function is a no-op. Strings returned by the library stay valid
 * until the owning handle is freed or the next call on the same thread,
 * whichever the function documents. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mafem_status {
  MAFEM_OK = 0,
  MAFEM_ERR_ARGUMENT = 1,
  MAFEM_ERR_TOPOLOGY = 2,
  MAFEM_ERR_GEOMETRY = 3,
  MAFEM_ERR_REFINEMENT = 4,
  MAFEM_ERR_LINEAGE = 5,
  MAFEM_ERR_FACTORIZATION = 6,
  MAFEM_ERR_CONVERGENCE = 7,
  MAFEM_ERR_DIMENSION = 8,
  MAFEM_ERR_CONFIG = 9,
  MAFEM_ERR_IO = 10,
  MAFEM_ERR_SIGN = 11,
  MAFEM_ERR_ADAPT = 12,
  MAFEM_ERR_INTERNAL = 13
} mafem_status;

typedef enum mafem_check_status {
  MAFEM_CHECK_PASS = 0,
  MAFEM_CHECK_FAIL = 1,
  MAFEM_CHECK_INFO = 2,
  MAFEM_CHECK_SKIPPED = 3
} mafem_check_status;

typedef struct mafem_config mafem_config;
typedef struct mafem_mesh mafem_mesh;
typedef struct mafem_spectrum mafem_spectrum;
typedef struct mafem_run mafem_run;
typedef struct mafem_report mafem_report;

typedef struct mafem_record {
  int level;
  int n_tets;
  int n_dofs;
  double lambda;
  double eta_sq;
  int n_marked;
  double gap;   /* NaN without a reference */
  double xi_sq; /* NaN without a reference */
  double seconds;
} mafem_record;

/* Library */
const char* mafem_version(void);
const char* mafem_status_string(mafem_status status);
/* Message of the last failed call on this thread ("" if none). */
const char* mafem_last_error(void);
/* Caps the data-parallel width; n < 1 selects the hardware concurrency. */
mafem_status mafem_set_threads(int n);
int mafem_get_threads(void);

/* Configuration */
mafem_status mafem_config_new(mafem_config** out);
mafem_status mafem_config_read(const char* path, mafem_config** out);
mafem_status mafem_config_parse(const char* text, mafem_config** out);
/* Sets one key; the value is range-checked immediately. */
mafem_status mafem_config_set(mafem_config* cfg, const char* key, const char* value);
/* Normalized `key = value` text, owned by cfg until the next call on it. */
mafem_status mafem_config_text(mafem_config* cfg, const char** text);
mafem_status mafem_config_write(const mafem_config* cfg, const char* path);
void mafem_config_free(mafem_config* cfg);

/* Meshes */
/* domain: "cube" or "fichera". */
mafem_status mafem_mesh_generate(const char* domain, int n, mafem_mesh** out);
/* Initial mesh named by the config's domain key. */
mafem_status mafem_mesh_from_config(const mafem_config* cfg, mafem_mesh** out);
mafem_status mafem_mesh_read(const char* path, mafem_mesh** out);
mafem_status mafem_mesh_write(const mafem_mesh* mesh, const char* path);
mafem_status mafem_mesh_refine_uniform(const mafem_mesh* mesh, int sweeps, mafem_mesh** out);
/* Bisects the listed tets and the closure they require. */
mafem_status mafem_mesh_refine(const mafem_mesh* mesh, const int* marked, size_t n_marked,
                               mafem_mesh** out);
mafem_status mafem_mesh_counts(const mafem_mesh* mesh, size_t* n_vertices, size_t* n_edges,
                               size_t* n_faces, size_t* n_tets);
mafem_status mafem_mesh_is_conforming(const mafem_mesh* mesh, int* conforming);
void mafem_mesh_free(mafem_mesh* mesh);

/* Single-mesh eigensolve: the k smallest positive eigenvalues (k capped by
 * the number of positive discrete eigenvalues), using the config's material
 * and eigensolver settings. */
mafem_status mafem_solve(const mafem_config* cfg, const mafem_mesh* mesh, int k,
                         mafem_spectrum** out);
mafem_status mafem_spectrum_count(const mafem_spectrum* sp, int* count);
mafem_status mafem_spectrum_lambda(const mafem_spectrum* sp, int index, double* lambda);
mafem_status mafem_spectrum_dofs(const mafem_spectrum* sp, int* n_dofs);
/* Number of positive discrete eigenvalues of the mesh. */
mafem_status mafem_spectrum_positive_dim(const mafem_spectrum* sp, int* n);
/* VTK of eigenpair `index` with its standard indicator field. */
mafem_status mafem_spectrum_write_vtk(const mafem_spectrum* sp, int index, const char* path);
void mafem_spectrum_free(mafem_spectrum* sp);

/* Adaptive and uniform runs. mesh may be NULL to start from the config's
 * domain. On MAFEM_ERR_ADAPT, *out (if out is non-NULL) holds a run with
 * the records of the completed levels and no level data. */
mafem_status mafem_run_adaptive(const mafem_config* cfg, const mafem_mesh* mesh, mafem_run** out);
mafem_status mafem_run_uniform(const mafem_config* cfg, const mafem_mesh* mesh, int levels,
                               int sweeps, mafem_run** out);
/* Computes the reference of the config's `reference` key and fills the
 * errors, gap and xi_sq of every level. A `none` reference is a no-op. */
mafem_status mafem_run_attach_reference(mafem_run* run, const mafem_config* cfg);
mafem_status mafem_run_levels(const mafem_run* run, int* n_levels);
mafem_status mafem_run_record(const mafem_run* run, int level, mafem_record* out);
/* NaN without a reference. */
mafem_status mafem_run_lambda_ref(const mafem_run* run, double* lambda_ref);
/* Fitted log-log slope of |lambda_ref - lambda_l| (with a reference) or of
 * eta_l^2 (without) against n_dofs. *of_error tells which one. */
mafem_status mafem_run_rate(const mafem_run* run, double* rate, int* of_error);
mafem_status mafem_run_warning_count(const mafem_run* run, int* count);
mafem_status mafem_run_warning(const mafem_run* run, int index, const char** text);
mafem_status mafem_run_write_csv(const mafem_run* run, const char* path);
mafem_status mafem_run_write_vtk(const mafem_run* run, int level, const char* path);
void mafem_run_free(mafem_run* run);

/* Theory checks. uniform != 0 makes the trend checks PASS/FAIL. */
mafem_status mafem_verify(const mafem_run* run, int uniform, mafem_report** out);
/* A report whose single check always fails. */
mafem_status mafem_verify_selftest_fail(mafem_report** out);
mafem_status mafem_report_passed(const mafem_report* rep, int* passed);
mafem_status mafem_report_check_count(const mafem_report* rep, int* count);
mafem_status mafem_report_check(const mafem_report* rep, int index, const char** name,
                                mafem_check_status* status, const char** detail);
/* Text and CSV renderings, owned by the report. */
mafem_status mafem_report_text(const mafem_report* rep, const char** text);
mafem_status mafem_report_csv(const mafem_report* rep, const char** csv);
void mafem_report_free(mafem_report* rep);

#ifdef __cplusplus
}
#endif

#endif
