#pragma once

#include "mafem/common.hpp"
#include "mafem/eigensolve.hpp"
#include "mafem/estimator.hpp"
#include "mafem/fem.hpp"
#include "mafem/mesh.hpp"

#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace mafem {

class Reference;

/// Minimal set M with theta * total <= sum over M: greedy by descending
/// eta^2, ties broken by the lower tet id. Returned ids are ascending.
std::vector<int> dorfler_mark(const std::vector<double>& eta_sq, double theta);
std::vector<int> dorfler_mark(const IndicatorField& eta, double theta);

/// Coefficients on `fine` of the coarse field u_H; exact for nested meshes.
/// Throws LineageError when `fine` does not refine `coarse`.
Vector prolong(const Vector& u_coarse, const Mesh& coarse, const Mesh& fine,
               const EdgeSpace& coarse_space, const EdgeSpace& fine_space);
/// Same, with a precomputed coarse_ancestor_map(coarse, fine).
Vector prolong(const Vector& u_coarse, const Mesh& coarse, const Mesh& fine,
               const EdgeSpace& coarse_space, const EdgeSpace& fine_space,
               const std::vector<int>& ancestor);

/// Least-squares slope of log y against log x over the last max(3, n/2)
/// points with positive x and y. Throws ArgumentError with fewer than 3.
double rate_fit(const std::vector<double>& x, const std::vector<double>& y);

inline constexpr double kNotAvailable = std::numeric_limits<double>::quiet_NaN();

struct AdaptRecord {
  int level = 0;
  int n_tets = 0;
  int n_dofs = 0;
  double lambda = 0.0;
  double eta_sq = 0.0;
  int n_marked = 0;
  double gap = kNotAvailable;   ///< curl-norm gap to the reference
  double xi_sq = kNotAvailable; ///< eta_m^2 + beta (err_sigma^2 + err_p^2)
  double seconds = 0.0;
};

/// Everything computed on one level, kept for the verification harness.
struct LevelSnapshot {
  Mesh mesh;
  EigenPair pair;
  IndicatorField eta;       ///< standard
  IndicatorField eta_mixed; ///< mixed
  std::vector<int> marked;
  double relative_gap_next = kNotAvailable; ///< (lambda_{j+1} - lambda_j) / lambda_j
};

enum class ReferenceMode { none, analytic, fine };

struct LoopConfig {
  double theta = 0.5;
  int target_index = 1;
  int max_dofs = 200000;
  int max_levels = 6;
  double beta = 1.0;
  EigenConfig eigen;
  /// 0 picks half the previous eigenvalue (1 on the first level).
  double shift = 0.0;
  ReferenceMode reference = ReferenceMode::none;
  /// Uniform bisection sweeps of the final mesh for ReferenceMode::fine;
  /// the default 6 halves h twice.
  int ref_refinements = 6;
};

/// Per-level errors against a reference, in the order of the records.
struct LevelErrors {
  double lambda_err = kNotAvailable; ///< |lambda_ref - lambda_l|
  double u_sq = kNotAvailable;
  double curl_sq = kNotAvailable;
  double sigma_sq = kNotAvailable;
  double p_sq = kNotAvailable;
  double gap_curl = kNotAvailable;
  double gap_mixed = kNotAvailable;
  double projection_defect = kNotAvailable; ///< ||P_h p - p_h||
};

struct AdaptResult {
  std::vector<AdaptRecord> records;
  std::vector<LevelSnapshot> levels;
  std::vector<LevelErrors> errors; ///< empty without a reference
  double lambda_ref = kNotAvailable;
  std::vector<std::string> warnings;
  Material material;
  double beta = 1.0;
};

/// solve / estimate / mark / refine until max_levels refinements were made or
/// the dof count reaches max_dofs. Eigensolver failures propagate as
/// AdaptError carrying the records of the completed levels.
AdaptResult run_adaptive(const Mesh& initial, const Material& material, const LoopConfig& cfg);

/// Levels made of `sweeps` uniform bisection sweeps each (3 sweeps halve h
/// on Kuhn meshes). `levels` counts the refined levels after the initial one.
AdaptResult run_uniform(const Mesh& initial, const Material& material, const LoopConfig& cfg,
                        int levels, int sweeps);

/// Fills errors, gap and xi_sq of every level from `reference`.
void attach_reference(AdaptResult& result, const Reference& reference);

/// Reference for a finished run according to cfg.reference.
std::unique_ptr<Reference> make_reference(const AdaptResult& result, const LoopConfig& cfg);

class AdaptError : public Error {
public:
  AdaptError(const std::string& what, std::vector<AdaptRecord> partial)
      : Error(what), partial_(std::move(partial)) {}
  const std::vector<AdaptRecord>& partial() const noexcept { return partial_; }

private:
  std::vector<AdaptRecord> partial_;
};

} // namespace mafem
