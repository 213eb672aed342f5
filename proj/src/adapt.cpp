#include "mafem/adapt.hpp"

#include "mafem/parallel.hpp"
#include "mafem/reference.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace mafem {

std::vector<int> dorfler_mark(const std::vector<double>& eta_sq, double theta) {
  if (!(theta > 0.0) || theta > 1.0) throw ArgumentError("dorfler_mark: theta must lie in (0, 1]");
  std::vector<int> order(eta_sq.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return eta_sq[a] > eta_sq[b]; });
  // Summing in the selection order makes theta = 1 stop exactly after the
  // last positive entry.
  double total = 0.0;
  for (int i : order) {
    if (!(eta_sq[i] >= 0.0)) throw ArgumentError("dorfler_mark: negative or NaN indicator");
    total += eta_sq[i];
  }
  std::vector<int> marked;
  const double goal = theta * total;
  double acc = 0.0;
  for (int i : order) {
    if (acc >= goal) break;
    acc += eta_sq[i];
    marked.push_back(i);
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

std::vector<int> dorfler_mark(const IndicatorField& eta, double theta) {
  return dorfler_mark(eta.eta_sq, theta);
}

Vector prolong(const Vector& u_coarse, const Mesh& coarse, const Mesh& fine,
               const EdgeSpace& coarse_space, const EdgeSpace& fine_space,
               const std::vector<int>& ancestor) {
  if (u_coarse.size() != coarse_space.n_dofs) throw ArgumentError("prolong: length mismatch");
  if (ancestor.size() != fine.num_tets()) throw ArgumentError("prolong: ancestor map mismatch");
  std::vector<LinearField> fields(coarse.num_tets());
  parallel_for(coarse.num_tets(), [&](std::size_t t) {
    fields[t] = element_field(coarse, coarse_space, u_coarse, static_cast<int>(t));
  });
  Vector u = Vector::Zero(fine_space.n_dofs);
  std::vector<char> done(static_cast<std::size_t>(fine_space.n_dofs), 0);
  for (std::size_t t = 0; t < fine.num_tets(); ++t) {
    const LinearField& f = fields[ancestor[t]];
    for (int le = 0; le < 6; ++le) {
      const int d = fine_space.tet_dofs[t][le];
      if (d < 0 || done[d]) continue;
      // The field is linear, so the midpoint rule gives the exact moment.
      const auto& e = fine.edges()[fine.tet_edges()[t][le]];
      const Vec3& xa = fine.vertices()[e[0]];
      const Vec3& xb = fine.vertices()[e[1]];
      u(d) = f(0.5 * (xa + xb)).dot(xb - xa);
      done[d] = 1;
    }
  }
  return u;
}

Vector prolong(const Vector& u_coarse, const Mesh& coarse, const Mesh& fine,
               const EdgeSpace& coarse_space, const EdgeSpace& fine_space) {
  return prolong(u_coarse, coarse, fine, coarse_space, fine_space,
                 coarse_ancestor_map(coarse, fine));
}

double rate_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ArgumentError("rate_fit: length mismatch");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      pts.emplace_back(std::log(x[i]), std::log(y[i]));
    }
  }
  if (pts.size() < 3) throw ArgumentError("rate_fit: fewer than 3 usable points");
  const std::size_t m = std::max<std::size_t>(3, pts.size() / 2);
  const std::size_t first = pts.size() - m;
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = first; i < pts.size(); ++i) {
    sx += pts[i].first;
    sy += pts[i].second;
  }
  const double mx = sx / static_cast<double>(m);
  const double my = sy / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = first; i < pts.size(); ++i) {
    sxx += (pts[i].first - mx) * (pts[i].first - mx);
    sxy += (pts[i].first - mx) * (pts[i].second - my);
  }
  if (sxx == 0.0) throw ArgumentError("rate_fit: abscissae coincide");
  return sxy / sxx;
}

namespace {

using Clock = std::chrono::steady_clock;
using Refiner = std::function<Mesh(const Mesh&, const IndicatorField&, std::vector<int>&)>;

AdaptResult run_loop(const Mesh& initial, const Material& material, const LoopConfig& cfg,
                     int max_levels, const Refiner& next_mesh) {
  if (cfg.target_index < 1) throw ArgumentError("target_index must be >= 1");
  if (max_levels < 0) throw ArgumentError("max_levels must be >= 0");
  AdaptResult result;
  result.material = material;
  result.beta = cfg.beta;

  Mesh mesh = initial;
  Vector warm;
  double prev_lambda = 0.0;
  for (int level = 0;; ++level) {
    const auto t0 = Clock::now();
    const EdgeSpace space = EdgeSpace::build(mesh);
    const NodalSpace nodal = NodalSpace::build(mesh);
    const SystemMatrices sys = assemble(mesh, space, material);
    const SparseRect g = discrete_gradient(mesh, nodal, space);
    const int available = count_positive_dim(space, nodal);

    EigenConfig ecfg = cfg.eigen;
    ecfg.k = std::min(cfg.target_index + 1, available);
    if (cfg.target_index > available) {
      throw AdaptError("target index exceeds the number of positive eigenvalues",
                       result.records);
    }
    ecfg.shift = cfg.shift > 0.0 ? cfg.shift : (level == 0 ? 1.0 : 0.5 * prev_lambda);
    std::vector<EigenPair> pairs;
    try {
      pairs = solve_smallest_positive(sys.stiffness, sys.mass, g, ecfg,
                                      warm.size() ? &warm : nullptr);
    } catch (const Error& e) {
      throw AdaptError(std::string("level ") + std::to_string(level) + ": " + e.what(),
                       result.records);
    }

    int t = cfg.target_index - 1;
    auto in_cluster = [&](int i) {
      return std::abs(pairs[i].lambda - pairs[t].lambda) <= ecfg.tol * pairs[t].lambda;
    };
    // A numerically degenerate cluster has no preferred basis: follow the
    // prolonged coarse solution inside it.
    if (warm.size() && static_cast<int>(pairs.size()) > t + 1 && in_cluster(t + 1)) {
      while (static_cast<int>(pairs.size()) < available && in_cluster(ecfg.k - 1) &&
             ecfg.k < cfg.target_index + 8) {
        ecfg.k = std::min(ecfg.k + 2, available);
        try {
          pairs = solve_smallest_positive(sys.stiffness, sys.mass, g, ecfg, &warm);
        } catch (const Error& e) {
          throw AdaptError(std::string("level ") + std::to_string(level) + ": " + e.what(),
                           result.records);
        }
      }
      const Vector mw = sys.mass * warm;
      Vector u = Vector::Zero(warm.size());
      std::vector<EigenPair> rest;
      int first = -1;
      for (int i = 0; i < static_cast<int>(pairs.size()); ++i) {
        if (in_cluster(i)) {
          if (first < 0) first = i;
          u += pairs[i].u.dot(mw) * pairs[i].u;
        } else {
          rest.push_back(pairs[i]);
        }
      }
      const double norm = std::sqrt(u.dot(sys.mass * u));
      if (norm > 0.0) {
        EigenPair aligned;
        aligned.u = u / norm;
        aligned.lambda = aligned.u.dot(sys.stiffness * aligned.u);
        const int size = static_cast<int>(pairs.size() - rest.size());
        rest.insert(rest.begin() + first, aligned);
        pairs = std::move(rest);
        t = first;
        std::ostringstream os;
        os << "level " << level << ": eigenvalue " << cfg.target_index
           << " is numerically degenerate (cluster of " << size
           << "); following the prolonged coarse solution inside it";
        result.warnings.push_back(os.str());
      }
    }

    LevelSnapshot snap;
    snap.pair = pairs[t];
    fix_sign(snap.pair, sys.mass, warm.size() ? &warm : nullptr);
    if (static_cast<int>(pairs.size()) > t + 1) {
      const double l0 = snap.pair.lambda;
      snap.relative_gap_next = (pairs[t + 1].lambda - l0) / l0;
      if (snap.relative_gap_next < 1e-6) {
        std::ostringstream os;
        os << "level " << level << ": eigenvalue " << cfg.target_index
           << " looks multiple (relative gap " << snap.relative_gap_next
           << "); continuing with a single pair";
        result.warnings.push_back(os.str());
      }
    }
    snap.eta = indicator_standard(mesh, space, snap.pair, material);
    snap.eta_mixed = indicator_mixed(mesh, space, snap.pair, material);

    AdaptRecord rec;
    rec.level = level;
    rec.n_tets = static_cast<int>(mesh.num_tets());
    rec.n_dofs = space.n_dofs;
    rec.lambda = snap.pair.lambda;
    rec.eta_sq = snap.eta.total;
    prev_lambda = snap.pair.lambda;

    const bool stop = level >= max_levels || space.n_dofs >= cfg.max_dofs;
    Mesh next;
    if (!stop) {
      next = next_mesh(mesh, snap.eta, snap.marked);
      rec.n_marked = static_cast<int>(snap.marked.size());
      const EdgeSpace next_space = EdgeSpace::build(next);
      warm = prolong(snap.pair.u, mesh, next, space, next_space);
    }
    rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    snap.mesh = std::move(mesh);
    result.records.push_back(rec);
    result.levels.push_back(std::move(snap));
    if (stop) break;
    mesh = std::move(next);
  }
  return result;
}

} // namespace

AdaptResult run_adaptive(const Mesh& initial, const Material& material, const LoopConfig& cfg) {
  if (!(cfg.theta > 0.0) || cfg.theta > 1.0) throw ArgumentError("theta must lie in (0, 1]");
  return run_loop(initial, material, cfg, cfg.max_levels,
                  [&](const Mesh& m, const IndicatorField& eta, std::vector<int>& marked) {
                    marked = dorfler_mark(eta, cfg.theta);
                    return refine(m, marked);
                  });
}

AdaptResult run_uniform(const Mesh& initial, const Material& material, const LoopConfig& cfg,
                        int levels, int sweeps) {
  if (sweeps < 1) throw ArgumentError("sweeps must be >= 1");
  return run_loop(initial, material, cfg, levels,
                  [&](const Mesh& m, const IndicatorField&, std::vector<int>& marked) {
                    marked.resize(m.num_tets());
                    std::iota(marked.begin(), marked.end(), 0);
                    Mesh out = refine_uniform(m);
                    for (int s = 1; s < sweeps; ++s) out = refine_uniform(out);
                    return out;
                  });
}

void attach_reference(AdaptResult& result, const Reference& reference) {
  result.lambda_ref = reference.lambda();
  result.errors.assign(result.levels.size(), LevelErrors{});
  for (std::size_t l = 0; l < result.levels.size(); ++l) {
    const LevelSnapshot& s = result.levels[l];
    const EdgeSpace space = EdgeSpace::build(s.mesh);
    const Comparison c = reference.compare(s.mesh, space, s.pair, result.material);
    LevelErrors& e = result.errors[l];
    e.lambda_err = std::abs(c.lambda_ref - s.pair.lambda);
    e.u_sq = c.u_sq;
    e.curl_sq = c.curl_sq;
    e.sigma_sq = c.sigma_sq;
    e.p_sq = c.p_sq;
    e.gap_curl = c.gap_curl;
    e.gap_mixed = c.gap_mixed;
    e.projection_defect = c.projection_defect;
    result.records[l].gap = c.gap_curl;
    result.records[l].xi_sq = s.eta_mixed.total + result.beta * (c.sigma_sq + c.p_sq);
  }
}

std::unique_ptr<Reference> make_reference(const AdaptResult& result, const LoopConfig& cfg) {
  switch (cfg.reference) {
  case ReferenceMode::none:
    return nullptr;
  case ReferenceMode::analytic:
    return make_cube_reference(result.material);
  case ReferenceMode::fine: {
    if (result.levels.empty()) throw ArgumentError("reference: empty run");
    if (cfg.ref_refinements < 1) throw ArgumentError("ref_refinements must be >= 1");
    const LevelSnapshot& last = result.levels.back();
    Mesh fine = last.mesh;
    for (int i = 0; i < cfg.ref_refinements; ++i) fine = refine_uniform(fine);
    const Vector start = prolong(last.pair.u, last.mesh, fine, EdgeSpace::build(last.mesh),
                                 EdgeSpace::build(fine));
    EigenConfig ecfg = cfg.eigen;
    // Negative shift: the fine solve factors a positive definite matrix.
    ecfg.shift = -0.1 * last.pair.lambda;
    return make_fine_reference(std::move(fine), result.material, cfg.target_index, ecfg, &start);
  }
  }
  throw ArgumentError("unknown reference mode");
}

} // namespace mafem
