#pragma once

#include "mafem/adapt.hpp"
#include "mafem/common.hpp"
#include "mafem/eigensolve.hpp"
#include "mafem/estimator.hpp"
#include "mafem/fem.hpp"
#include "mafem/mesh.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mafem {

/// Run settings read from a flat `key = value` file. Keys are
/// case-sensitive; `#` starts a comment. Ranges:
///   domain          cube | fichera | path of a mesh file
///   n               >= 1, initial subdivisions of the generated domain
///   theta           (0, 1]
///   target_index    >= 1
///   eps, mu         > 0
///   eig_tol         (0, 1e-2]
///   eig_shift       >= 0, 0 selects the shift automatically
///   max_dofs        >= 1
///   max_levels      >= 0
///   beta            > 0
///   reference       auto | none | analytic | fine
///   ref_refinements >= 1, bisection sweeps of the fine reference mesh
///                   (3 sweeps halve h)
///   num_eigs        >= 1, eigenvalues printed by `solve`
///   out_dir         output directory
///   seed            unsigned integer
///   write_vtk       true | false
///   selftest        off | fail
struct RunConfig {
  std::string domain = "cube";
  int n = 2;
  double theta = 0.5;
  int target_index = 1;
  double eps = 1.0;
  double mu = 1.0;
  double eig_tol = 1e-9;
  double eig_shift = 0.0;
  int max_dofs = 200000;
  int max_levels = 6;
  double beta = 1.0;
  std::string reference = "auto";
  int ref_refinements = 6;
  int num_eigs = 6;
  std::string out_dir = "out";
  std::uint64_t seed = 42;
  bool write_vtk = true;
  std::string selftest = "off";
};

/// Names of all keys in canonical order.
const std::vector<std::string>& config_keys();

/// Assigns one key from its textual value; throws ConfigError naming the key
/// for an unknown key, a malformed value or a range violation.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Throws ConfigError naming the first key out of range.
void validate_config(const RunConfig& cfg);

/// `source` prefixes error messages ("source:line: ...").
RunConfig parse_config(std::istream& is, const std::string& source = "<config>");
/// Throws IoError when the file cannot be opened.
RunConfig read_config(const std::string& path);
/// Normalized form: every key in canonical order, doubles with 17
/// significant digits. Parsing it back yields an identical RunConfig.
void write_config(std::ostream& os, const RunConfig& cfg);

/// Initial mesh named by cfg.domain.
Mesh make_initial_mesh(const RunConfig& cfg);
Material make_material(const RunConfig& cfg);
/// Reference mode after resolving `auto`: analytic for the cube, none
/// otherwise.
ReferenceMode resolve_reference(const RunConfig& cfg);
LoopConfig make_loop_config(const RunConfig& cfg);

/// Per-cell output fields; each array has one entry per tet.
struct CellFields {
  std::vector<double> eta_sq;
  std::vector<double> curl_norm;
  std::vector<Vec3> u_barycenter;
};

/// |curl u_h| and u_h at the barycenter of every tet, with the given
/// indicators (zeros when empty).
CellFields solution_fields(const Mesh& mesh, const EdgeSpace& space, const Vector& u,
                           const std::vector<double>& eta_sq = {});

/// Legacy ASCII unstructured grid (tets as cell type 10). Throws
/// ArgumentError when a field length differs from the tet count.
void write_vtk(std::ostream& os, const Mesh& mesh, const CellFields& fields,
               const std::string& title = "maxwell-afem");
void write_vtk_file(const std::string& path, const Mesh& mesh, const CellFields& fields,
                    const std::string& title = "maxwell-afem");

/// Minimal reader for files written by write_vtk: the named cell scalar.
std::vector<double> read_vtk_cell_scalar(std::istream& is, const std::string& name);

inline constexpr const char* kCsvHeader = "level,ntets,ndofs,lambda,eta_sq,marked,gap,xi_sq,seconds";

/// Header plus one row per record, 17 significant digits.
void write_csv(std::ostream& os, const std::vector<AdaptRecord>& records);
void write_csv_file(const std::string& path, const std::vector<AdaptRecord>& records);
/// Parses a file written by write_csv; throws IoError on malformed input.
std::vector<AdaptRecord> read_csv(std::istream& is);

} // namespace mafem
