#pragma once

#include "mafem/adapt.hpp"
#include "mafem/common.hpp"
#include "mafem/eigensolve.hpp"
#include "mafem/estimator.hpp"
#include "mafem/fem.hpp"
#include "mafem/mesh.hpp"
#include "mafem/mixed.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mafem {

/// Differences of two nested discrete solutions, evaluated on the fine mesh
/// after exact prolongation of the coarse one.
struct LevelDifference {
  double lambda_diff = 0.0; ///< lambda_h - lambda_H
  double sigma_sq = 0.0;    ///< ||sigma_h - sigma_H||^2
  double p_sq = 0.0;        ///< ||p_h - p_H||^2
  double inner = 0.0;       ///< (eps u_h, u_H)
};

/// Throws SignError when (eps u_h, u_H) < 0 and LineageError when the
/// meshes are not nested.
LevelDifference level_difference(const Mesh& coarse, const EigenPair& coarse_pair,
                                 const Mesh& fine, const EigenPair& fine_pair,
                                 const Material& material);

/// lambda_h - lambda_H = ||sigma_h - sigma_H||^2 - lambda_H ||p_h - p_H||^2.
struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double discrepancy = 0.0; ///< |lhs - rhs| / max(|lhs|, ||sigma_h - sigma_H||^2)
};

IdentityCheck check_eigenvalue_identity(const LevelDifference& d, double lambda_coarse);
IdentityCheck check_eigenvalue_identity(const Mesh& coarse, const EigenPair& coarse_pair,
                                        const Mesh& fine, const EigenPair& fine_pair,
                                        const Material& material);

/// ||P_h p - p_h|| / (||sigma - sigma_h|| + ||p - p_h||) per level; the
/// sequence must decrease.
struct TrendCheck {
  std::vector<double> values;
  bool strictly_decreasing = false;
};

TrendCheck check_superconvergence(const std::vector<LevelErrors>& errors);

/// Normalized quasi-orthogonality residual for consecutive levels:
/// |D - (e_H^2 - e_h^2)| / (e_H^2 + e_h^2), with D the squared level
/// difference and e^2 = ||sigma - sigma_.||^2 + ||p - p_.||^2.
double quasi_orthogonality_residual(const LevelDifference& d, const LevelErrors& coarse,
                                    const LevelErrors& fine);
TrendCheck check_quasi_orthogonality(const std::vector<LevelDifference>& diffs,
                                     const std::vector<LevelErrors>& errors);

struct ContractionCheck {
  double beta = 1.0;
  std::vector<double> xi_sq;
  std::vector<double> ratios; ///< xi_{l+1}^2 / xi_l^2
  double max_ratio = 0.0;     ///< over first_level <= l <= last_level
  bool contracts = false;
};

/// xi_l^2 = eta_m(T_l)^2 + beta (||sigma - sigma_l||^2 + ||p - p_l||^2).
ContractionCheck check_contraction(const std::vector<double>& eta_mixed_sq,
                                   const std::vector<LevelErrors>& errors, double beta,
                                   int first_level = 2, int last_level = 10);

struct BandCheck {
  std::vector<double> values;
  double min = 0.0;
  double max = 0.0;
  double band = 0.0; ///< max / min
  bool passed = false;
  std::string note;
};

/// max/min of `values` over levels >= first_level (all levels when fewer
/// than three qualify) against `limit`. Non-finite or non-positive entries
/// fail the check.
BandCheck band_check(const std::vector<double>& values, int first_level = 2,
                     double limit = 50.0);

struct ReliabilityCheck {
  BandCheck curl;   ///< ||u - u_h||_curl / eta
  BandCheck lambda; ///< |lambda - lambda_h| / eta^2
};

ReliabilityCheck check_reliability_efficiency(const std::vector<double>& eta_sq,
                                              const std::vector<LevelErrors>& errors,
                                              int first_level = 2);

enum class CheckStatus { pass, fail, info, skipped };
const char* to_string(CheckStatus s);

/// One row of the report: a checked quantity on a level (or level pair).
struct ReportRow {
  std::string check;
  std::string level;
  double lhs = 0.0;
  double rhs = 0.0;
  double discrepancy = 0.0;
  CheckStatus status = CheckStatus::info;
};

struct CheckSummary {
  std::string check;
  CheckStatus status = CheckStatus::info;
  std::string detail;
};

struct TheoryReport {
  std::vector<ReportRow> rows;
  std::vector<CheckSummary> summary;

  bool passed() const;
  void add(const std::string& check, CheckStatus status, const std::string& detail);
  void write_csv(std::ostream& os) const;
  void write_text(std::ostream& os) const;
};

struct TheoryOptions {
  /// Trend checks (superconvergence, quasi-orthogonality) are PASS/FAIL
  /// for uniform sequences and informational for adaptive ones.
  bool uniform = false;
  double identity_tol = 1e-6;
  double relation_tol = 1e-12;
  double invariant_tol = 1e-10;
  double band_limit = 50.0;
};

/// All checks over a finished run; reference-dependent checks are skipped
/// when result.errors is empty.
TheoryReport run_theory_checks(const AdaptResult& result, const TheoryOptions& options);

/// Contraction check on a constant synthetic xi^2 sequence; always FAILs.
/// Exercises the failure path end to end.
TheoryReport selftest_failure_report();

} // namespace mafem
