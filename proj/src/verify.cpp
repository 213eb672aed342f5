#include "mafem/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace mafem {

LevelDifference level_difference(const Mesh& coarse, const EigenPair& coarse_pair,
                                 const Mesh& fine, const EigenPair& fine_pair,
                                 const Material& material) {
  if (!(coarse_pair.lambda > 0.0) || !(fine_pair.lambda > 0.0)) {
    throw ArgumentError("level_difference: eigenvalues must be positive");
  }
  const EdgeSpace cs = EdgeSpace::build(coarse);
  const EdgeSpace fs = EdgeSpace::build(fine);
  const SystemMatrices sys = assemble(fine, fs, material);
  const Vector v = prolong(coarse_pair.u, coarse, fine, cs, fs);
  const double wh = std::sqrt(fine_pair.lambda);
  const double wH = std::sqrt(coarse_pair.lambda);

  LevelDifference d;
  d.lambda_diff = fine_pair.lambda - coarse_pair.lambda;
  d.inner = fine_pair.u.dot(sys.mass * v);
  if (d.inner < 0.0) throw SignError("level_difference: eigenvectors have opposite signs");
  const Vector ds = wh * fine_pair.u - wH * v;
  d.sigma_sq = ds.dot(sys.mass * ds);
  const Vector dp = fine_pair.u / wh - v / wH;
  d.p_sq = dp.dot(sys.stiffness * dp);
  return d;
}

IdentityCheck check_eigenvalue_identity(const LevelDifference& d, double lambda_coarse) {
  IdentityCheck c;
  c.lhs = d.lambda_diff;
  c.rhs = d.sigma_sq - lambda_coarse * d.p_sq;
  const double scale = std::max(std::abs(c.lhs), d.sigma_sq);
  const double gap = std::abs(c.lhs - c.rhs);
  c.discrepancy = scale > 0.0 ? gap / scale : gap;
  return c;
}

IdentityCheck check_eigenvalue_identity(const Mesh& coarse, const EigenPair& coarse_pair,
                                        const Mesh& fine, const EigenPair& fine_pair,
                                        const Material& material) {
  return check_eigenvalue_identity(
      level_difference(coarse, coarse_pair, fine, fine_pair, material), coarse_pair.lambda);
}

namespace {

bool strictly_decreasing(const std::vector<double>& v) {
  if (v.size() < 2) return false;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

double mixed_err_sq(const LevelErrors& e) { return e.sigma_sq + e.p_sq; }

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(4) << std::scientific << x;
  return os.str();
}

} // namespace

TrendCheck check_superconvergence(const std::vector<LevelErrors>& errors) {
  TrendCheck t;
  for (const LevelErrors& e : errors) {
    const double denom = std::sqrt(e.sigma_sq) + std::sqrt(e.p_sq);
    t.values.push_back(denom > 0.0 ? e.projection_defect / denom : 0.0);
  }
  t.strictly_decreasing = strictly_decreasing(t.values);
  return t;
}

double quasi_orthogonality_residual(const LevelDifference& d, const LevelErrors& coarse,
                                    const LevelErrors& fine) {
  const double eh = mixed_err_sq(coarse);
  const double ef = mixed_err_sq(fine);
  const double lhs = d.sigma_sq + d.p_sq;
  const double denom = eh + ef;
  const double r = std::abs(lhs - (eh - ef));
  return denom > 0.0 ? r / denom : r;
}

TrendCheck check_quasi_orthogonality(const std::vector<LevelDifference>& diffs,
                                     const std::vector<LevelErrors>& errors) {
  if (errors.size() != diffs.size() + 1) {
    throw ArgumentError("quasi-orthogonality: need one difference per consecutive level pair");
  }
  TrendCheck t;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    t.values.push_back(quasi_orthogonality_residual(diffs[i], errors[i], errors[i + 1]));
  }
  t.strictly_decreasing = strictly_decreasing(t.values);
  return t;
}

ContractionCheck check_contraction(const std::vector<double>& eta_mixed_sq,
                                   const std::vector<LevelErrors>& errors, double beta,
                                   int first_level, int last_level) {
  if (eta_mixed_sq.size() != errors.size()) throw ArgumentError("contraction: length mismatch");
  ContractionCheck c;
  c.beta = beta;
  for (std::size_t l = 0; l < errors.size(); ++l) {
    c.xi_sq.push_back(eta_mixed_sq[l] + beta * mixed_err_sq(errors[l]));
  }
  for (std::size_t l = 0; l + 1 < c.xi_sq.size(); ++l) c.ratios.push_back(c.xi_sq[l + 1] / c.xi_sq[l]);
  const int last = std::min<int>(last_level, static_cast<int>(c.ratios.size()) - 1);
  if (last < first_level) return c;
  c.max_ratio = -std::numeric_limits<double>::infinity();
  for (int l = first_level; l <= last; ++l) c.max_ratio = std::max(c.max_ratio, c.ratios[l]);
  c.contracts = c.max_ratio < 1.0;
  return c;
}

BandCheck band_check(const std::vector<double>& values, int first_level, double limit) {
  BandCheck b;
  b.values = values;
  const int n = static_cast<int>(values.size());
  const int first = n - first_level >= 3 ? first_level : 0;
  if (n - first < 1) {
    b.note = "no levels";
    return b;
  }
  b.min = std::numeric_limits<double>::infinity();
  b.max = 0.0;
  for (int l = first; l < n; ++l) {
    const double v = values[l];
    if (!std::isfinite(v) || !(v > 0.0)) {
      b.note = "non-positive or non-finite ratio at level " + std::to_string(l);
      b.band = std::numeric_limits<double>::infinity();
      return b;
    }
    b.min = std::min(b.min, v);
    b.max = std::max(b.max, v);
  }
  b.band = b.max / b.min;
  b.passed = b.band <= limit;
  return b;
}

ReliabilityCheck check_reliability_efficiency(const std::vector<double>& eta_sq,
                                              const std::vector<LevelErrors>& errors,
                                              int first_level) {
  if (eta_sq.size() != errors.size()) throw ArgumentError("reliability: length mismatch");
  std::vector<double> r1, r2;
  for (std::size_t l = 0; l < errors.size(); ++l) {
    const double curl_err = std::sqrt(errors[l].u_sq + errors[l].curl_sq);
    // eta = 0 with a nonzero error gives an infinite ratio: a reliability
    // violation the band check reports.
    r1.push_back(eta_sq[l] > 0.0 ? curl_err / std::sqrt(eta_sq[l])
                                 : std::numeric_limits<double>::infinity());
    r2.push_back(eta_sq[l] > 0.0 ? errors[l].lambda_err / eta_sq[l]
                                 : std::numeric_limits<double>::infinity());
  }
  return {band_check(r1, first_level), band_check(r2, first_level)};
}

const char* to_string(CheckStatus s) {
  switch (s) {
  case CheckStatus::pass:
    return "PASS";
  case CheckStatus::fail:
    return "FAIL";
  case CheckStatus::info:
    return "INFO";
  case CheckStatus::skipped:
    return "SKIP";
  }
  return "?";
}

bool TheoryReport::passed() const {
  return std::none_of(summary.begin(), summary.end(),
                      [](const CheckSummary& s) { return s.status == CheckStatus::fail; });
}

void TheoryReport::add(const std::string& check, CheckStatus status, const std::string& detail) {
  summary.push_back({check, status, detail});
}

void TheoryReport::write_csv(std::ostream& os) const {
  os << "check,level,lhs,rhs,discrepancy,status\n";
  std::ostringstream line;
  line << std::setprecision(17);
  for (const ReportRow& r : rows) {
    line.str("");
    line << r.check << ',' << r.level << ',' << r.lhs << ',' << r.rhs << ',' << r.discrepancy
         << ',' << to_string(r.status) << '\n';
    os << line.str();
  }
}

void TheoryReport::write_text(std::ostream& os) const {
  for (const CheckSummary& s : summary) {
    os << to_string(s.status) << "  " << s.check << ": " << s.detail << '\n';
  }
  os << (passed() ? "all checks passed" : "some checks FAILED") << '\n';
}

TheoryReport run_theory_checks(const AdaptResult& result, const TheoryOptions& options) {
  TheoryReport rep;
  const auto& levels = result.levels;
  const std::size_t n = levels.size();
  const Material& mat = result.material;
  auto level_name = [](std::size_t l) { return std::to_string(l); };
  auto pair_name = [](std::size_t l) { return std::to_string(l) + "-" + std::to_string(l + 1); };

  // Mixed invariants and the indicator relation on every level.
  double worst_norm = 0.0, worst_curl = 0.0, worst_rel = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    const LevelSnapshot& s = levels[l];
    const EdgeSpace space = EdgeSpace::build(s.mesh);
    const MixedSolution m = to_mixed(s.mesh, space, s.pair, mat);
    const double p_norm = piecewise_l2_sq(s.mesh, m.p);
    const double norm_dev = std::abs(std::sqrt(p_norm) - 1.0);
    const double curl_dev = curl_identity_defect(s.mesh, space, m, mat);
    worst_norm = std::max(worst_norm, norm_dev);
    worst_curl = std::max(worst_curl, curl_dev);
    rep.rows.push_back({"p_norm", level_name(l), std::sqrt(p_norm), 1.0, norm_dev,
                        norm_dev <= options.invariant_tol ? CheckStatus::pass : CheckStatus::fail});
    rep.rows.push_back({"curl_identity", level_name(l), curl_dev, 0.0, curl_dev,
                        curl_dev <= options.invariant_tol ? CheckStatus::pass : CheckStatus::fail});

    double rel = 0.0;
    for (std::size_t k = 0; k < s.eta.eta_sq.size(); ++k) {
      const double em = s.eta_mixed.eta_sq[k];
      const double diff = std::abs(s.eta.eta_sq[k] - em / s.pair.lambda);
      rel = std::max(rel, em > 0.0 ? diff / em : diff);
    }
    worst_rel = std::max(worst_rel, rel);
    rep.rows.push_back({"indicator_relation", level_name(l), s.eta.total,
                        s.eta_mixed.total / s.pair.lambda, rel,
                        rel <= options.relation_tol ? CheckStatus::pass : CheckStatus::fail});
  }
  rep.add("mixed_normalization",
          worst_norm <= options.invariant_tol ? CheckStatus::pass : CheckStatus::fail,
          "max | ||p_h|| - 1 | = " + fmt(worst_norm) + " (tol " + fmt(options.invariant_tol) + ")");
  rep.add("mixed_curl_identity",
          worst_curl <= options.invariant_tol ? CheckStatus::pass : CheckStatus::fail,
          "max relative |mu^-1/2 curl sigma_h + lambda_h p_h| = " + fmt(worst_curl));
  rep.add("indicator_relation",
          worst_rel <= options.relation_tol ? CheckStatus::pass : CheckStatus::fail,
          "max_K |eta_s^2 - eta_m^2/lambda_h| / eta_m^2 = " + fmt(worst_rel));

  // Exact identity on consecutive nested levels.
  std::vector<LevelDifference> diffs;
  double worst_id = 0.0;
  for (std::size_t l = 0; l + 1 < n; ++l) {
    const LevelDifference d = level_difference(levels[l].mesh, levels[l].pair,
                                               levels[l + 1].mesh, levels[l + 1].pair, mat);
    diffs.push_back(d);
    const IdentityCheck c = check_eigenvalue_identity(d, levels[l].pair.lambda);
    worst_id = std::max(worst_id, c.discrepancy);
    rep.rows.push_back({"eigenvalue_identity", pair_name(l), c.lhs, c.rhs, c.discrepancy,
                        c.discrepancy <= options.identity_tol ? CheckStatus::pass
                                                              : CheckStatus::fail});
  }
  if (diffs.empty()) {
    rep.add("eigenvalue_identity", CheckStatus::skipped, "needs two levels");
  } else {
    rep.add("eigenvalue_identity",
            worst_id <= options.identity_tol ? CheckStatus::pass : CheckStatus::fail,
            "max discrepancy " + fmt(worst_id) + " over " + std::to_string(diffs.size()) +
                " level pairs (tol " + fmt(options.identity_tol) + ")");
  }

  // Discrete reliability: (||sigma_h - sigma_H|| + ||p_h - p_H||) / eta_m,H(T_H \ T_h).
  std::vector<double> drel;
  for (std::size_t l = 0; l < diffs.size(); ++l) {
    const std::vector<int> refined = ancestors_not_in(levels[l].mesh, levels[l + 1].mesh);
    const double eta = std::sqrt(levels[l].eta_mixed.sum(refined));
    const double num = std::sqrt(diffs[l].sigma_sq) + std::sqrt(diffs[l].p_sq);
    drel.push_back(eta > 0.0 ? num / eta : std::numeric_limits<double>::infinity());
    rep.rows.push_back({"discrete_reliability", pair_name(l), num, eta, drel.back(),
                        CheckStatus::info});
  }
  if (drel.empty()) {
    rep.add("discrete_reliability", CheckStatus::skipped, "needs two levels");
  } else {
    const BandCheck b = band_check(drel, 2, options.band_limit);
    rep.add("discrete_reliability", b.passed ? CheckStatus::pass : CheckStatus::fail,
            "ratio band max/min = " + fmt(b.band) + " (limit " + fmt(options.band_limit) + ")" +
                (b.note.empty() ? "" : "; " + b.note));
  }

  if (result.errors.empty()) {
    for (const char* name : {"superconvergence", "quasi_orthogonality", "contraction",
                             "reliability_curl", "reliability_lambda"}) {
      rep.add(name, CheckStatus::skipped, "no reference");
    }
    return rep;
  }
  const auto& errors = result.errors;
  const CheckStatus trend_fail = options.uniform ? CheckStatus::fail : CheckStatus::info;
  const CheckStatus trend_pass = options.uniform ? CheckStatus::pass : CheckStatus::info;

  const TrendCheck sc = check_superconvergence(errors);
  for (std::size_t l = 0; l < sc.values.size(); ++l) {
    rep.rows.push_back({"superconvergence", level_name(l), errors[l].projection_defect,
                        std::sqrt(errors[l].sigma_sq) + std::sqrt(errors[l].p_sq), sc.values[l],
                        CheckStatus::info});
  }
  {
    std::string detail = "ratio by level:";
    for (double v : sc.values) detail += " " + fmt(v);
    rep.add("superconvergence", sc.strictly_decreasing ? trend_pass : trend_fail,
            detail + (sc.strictly_decreasing ? " (decreasing)" : " (not decreasing)"));
  }

  if (!diffs.empty()) {
    const TrendCheck qo = check_quasi_orthogonality(diffs, errors);
    std::string detail = "normalized residual by level pair:";
    for (std::size_t l = 0; l < qo.values.size(); ++l) {
      detail += " " + fmt(qo.values[l]);
      rep.rows.push_back({"quasi_orthogonality", pair_name(l), diffs[l].sigma_sq + diffs[l].p_sq,
                          mixed_err_sq(errors[l]) - mixed_err_sq(errors[l + 1]), qo.values[l],
                          CheckStatus::info});
    }
    const bool ok = qo.values.size() < 2 || qo.strictly_decreasing;
    rep.add("quasi_orthogonality", ok ? trend_pass : trend_fail,
            detail + (ok ? " (decreasing)" : " (not decreasing)"));
  } else {
    rep.add("quasi_orthogonality", CheckStatus::skipped, "needs two levels");
  }

  std::vector<double> eta_m;
  std::vector<double> eta_s;
  for (const LevelSnapshot& s : levels) {
    eta_m.push_back(s.eta_mixed.total);
    eta_s.push_back(s.eta.total);
  }
  if (n >= 4) {
    std::string detail;
    bool any = false;
    std::vector<double> betas{0.1, 1.0, 10.0};
    if (std::find(betas.begin(), betas.end(), result.beta) == betas.end()) betas.push_back(result.beta);
    for (double beta : betas) {
      const ContractionCheck c = check_contraction(eta_m, errors, beta);
      any = any || c.contracts;
      detail += "beta=" + fmt(beta) + ": max ratio " + fmt(c.max_ratio) + "; ";
      for (std::size_t l = 0; l < c.ratios.size(); ++l) {
        rep.rows.push_back({"contraction_beta_" + fmt(beta), pair_name(l), c.xi_sq[l + 1],
                            c.xi_sq[l], c.ratios[l], CheckStatus::info});
      }
    }
    rep.add("contraction", any ? CheckStatus::pass : CheckStatus::fail, detail);
  } else {
    rep.add("contraction", CheckStatus::skipped, "needs at least 4 levels");
  }

  const ReliabilityCheck rel = check_reliability_efficiency(eta_s, errors);
  for (std::size_t l = 0; l < n; ++l) {
    rep.rows.push_back({"reliability_curl", level_name(l),
                        std::sqrt(errors[l].u_sq + errors[l].curl_sq), std::sqrt(eta_s[l]),
                        rel.curl.values[l], CheckStatus::info});
    rep.rows.push_back({"reliability_lambda", level_name(l), errors[l].lambda_err, eta_s[l],
                        rel.lambda.values[l], CheckStatus::info});
  }
  rep.add("reliability_curl", rel.curl.passed ? CheckStatus::pass : CheckStatus::fail,
          "||u - u_h||_curl / eta band " + fmt(rel.curl.band) + " (limit " +
              fmt(options.band_limit) + ")" + (rel.curl.note.empty() ? "" : "; " + rel.curl.note));
  rep.add("reliability_lambda", rel.lambda.passed ? CheckStatus::pass : CheckStatus::fail,
          "|lambda - lambda_h| / eta^2 band " + fmt(rel.lambda.band) + " (limit " +
              fmt(options.band_limit) + ")" +
              (rel.lambda.note.empty() ? "" : "; " + rel.lambda.note));
  return rep;
}

TheoryReport selftest_failure_report() {
  TheoryReport rep;
  const std::vector<double> eta(6, 1.0);
  const std::vector<LevelErrors> errors(6, LevelErrors{0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  const ContractionCheck c = check_contraction(eta, errors, 1.0);
  for (std::size_t l = 0; l < c.ratios.size(); ++l) {
    rep.rows.push_back({"selftest_contraction", std::to_string(l) + "-" + std::to_string(l + 1),
                        c.xi_sq[l + 1], c.xi_sq[l], c.ratios[l], CheckStatus::info});
  }
  rep.add("selftest_contraction", c.contracts ? CheckStatus::pass : CheckStatus::fail,
          "constant synthetic xi^2, max ratio " + fmt(c.max_ratio));
  return rep;
}

} // namespace mafem
