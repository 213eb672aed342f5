#include "mafem/eigensolve.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mafem {

SparseSym gradient_gram(const SparseRect& gradient, const SparseSym& mass) {
  SparseSym gram = SparseSym(gradient.transpose()) * (mass * gradient);
  gram.prune(0.0);
  gram.makeCompressed();
  return gram;
}

GradientProjector::GradientProjector(const SparseRect& gradient, const SparseSym& mass)
    : gradient_(gradient), mass_(mass) {
  if (gradient.rows() != mass.rows()) throw ArgumentError("gradient/mass dimension mismatch");
  gram_ = std::make_unique<Factorization>(gradient_gram(gradient, mass),
                                          FactorKind::positive_definite);
}

Vector GradientProjector::divergence(const Vector& u) const {
  return gradient_.transpose() * (mass_ * u);
}

Vector GradientProjector::apply(const Vector& u) const {
  if (gradient_.cols() == 0) return u;
  return u - gradient_ * gram_->solve(divergence(u));
}

Vector project_out_gradients(const Vector& u, const SparseRect& gradient, const SparseSym& mass,
                             const Factorization& gram_factor) {
  if (gradient.cols() == 0) return u;
  const Vector rhs = gradient.transpose() * (mass * u);
  return u - gradient * gram_factor.solve(rhs);
}

int count_positive_dim(const EdgeSpace& edge, const NodalSpace& nodal) {
  const int n = edge.n_dofs - nodal.n_dofs;
  if (n < 0) {
    throw DimensionError("negative positive-eigenvalue count: domain not simply connected "
                         "or inconsistent boundary flags");
  }
  return n;
}

double relative_residual(const SparseSym& stiffness, const SparseSym& mass,
                         const EigenPair& pair) {
  const Vector mu = mass * pair.u;
  const Vector r = stiffness * pair.u - pair.lambda * mu;
  return r.norm() / (std::abs(pair.lambda) * mu.norm());
}

void fix_sign(EigenPair& pair, const SparseSym& mass, const Vector* reference) {
  double s = 0.0;
  if (reference) {
    s = reference->dot(mass * pair.u);
  } else {
    const double scale = pair.u.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < pair.u.size(); ++i) {
      if (std::abs(pair.u(i)) > 1e-8 * scale) {
        s = pair.u(i);
        break;
      }
    }
  }
  if (s < 0.0) pair.u = -pair.u;
}

namespace {

/// Shift-invert operator x -> P (A - sigma M)^{-1} M x restricted to the
/// complement of gradients and of already locked eigenvectors.
class ShiftInvert {
public:
  ShiftInvert(const SparseSym& a, const SparseSym& m, const GradientProjector& proj,
              const Factorization& shifted, const std::vector<EigenPair>& locked)
      : a_(a), m_(m), proj_(proj), shifted_(shifted), locked_(locked) {}

  Vector deflate(const Vector& x) const {
    Vector y = proj_.apply(x);
    for (const auto& p : locked_) y -= p.u * p.u.dot(m_ * y);
    return y;
  }

  Vector apply(const Vector& x) {
    ++count;
    return deflate(shifted_.solve(m_ * x));
  }

  const SparseSym& a() const { return a_; }
  const SparseSym& m() const { return m_; }
  int count = 0;

private:
  const SparseSym& a_;
  const SparseSym& m_;
  const GradientProjector& proj_;
  const Factorization& shifted_;
  const std::vector<EigenPair>& locked_;
};

struct LanczosOutcome {
  std::vector<EigenPair> pairs;
  double worst_residual = 0.0;
};

Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

/// Orthogonalizes w against the first `cols` basis vectors (two passes of
/// classical Gram-Schmidt in the M inner product); returns the coefficients.
Vector orthogonalize(Vector& w, const Eigen::MatrixXd& v, const Eigen::MatrixXd& mv, int cols) {
  Vector h = Vector::Zero(cols);
  for (int pass = 0; pass < 2; ++pass) {
    const Vector c = mv.leftCols(cols).transpose() * w;
    w -= v.leftCols(cols) * c;
    h += c;
  }
  return h;
}

/// Thick-restart Lanczos (Wu-Simon) for the `want` largest eigenvalues of the
/// shift-invert operator, i.e. the smallest eigenvalues above the shift.
LanczosOutcome thick_restart_lanczos(ShiftInvert& op, Vector start, int want, int basis,
                                     int available, double sigma, double tol, int max_restarts,
                                     std::mt19937_64& rng) {
  const Eigen::Index n = start.size();
  const int m = std::min(basis, available);
  want = std::min(want, m);
  Eigen::MatrixXd v(n, m + 1);
  Eigen::MatrixXd mv(n, m + 1);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m + 1);

  auto normalize_into = [&](Vector w, int col) -> bool {
    w = op.deflate(w);
    orthogonalize(w, v, mv, col);
    Vector mw = op.m() * w;
    double nrm = std::sqrt(std::max(0.0, w.dot(mw)));
    if (!(nrm > 1e-300)) return false;
    // A second pass if cancellation was severe.
    orthogonalize(w, v, mv, col);
    mw = op.m() * w;
    nrm = std::sqrt(std::max(0.0, w.dot(mw)));
    if (!(nrm > 1e-300)) return false;
    v.col(col) = w / nrm;
    mv.col(col) = mw / nrm;
    return true;
  };

  LanczosOutcome out;
  {
    Vector s0 = op.deflate(start);
    const double s0n = std::sqrt(std::max(0.0, s0.dot(op.m() * s0)));
    if (!(s0n > 0.0)) return out;
    v.col(0) = s0 / s0n;
    mv.col(0) = op.m() * v.col(0);
  }

  int j0 = 0;
  double last_worst = std::numeric_limits<double>::infinity();
  for (int cycle = 0; cycle <= max_restarts; ++cycle) {
    int m_eff = m;
    bool exhausted = false;
    for (int j = j0; j < m; ++j) {
      Vector w = op.apply(v.col(j));
      const double wnorm = std::sqrt(std::max(0.0, w.dot(op.m() * w)));
      Vector coeff = orthogonalize(w, v, mv, j + 1);
      // Rounding noise, gradients included, is amplified by 1/beta at every step.
      w = op.deflate(w);
      coeff += orthogonalize(w, v, mv, j + 1);
      const Vector mw = op.m() * w;
      double beta = std::sqrt(std::max(0.0, w.dot(mw)));
      for (int i = 0; i <= j; ++i) {
        h(i, j) = coeff(i);
        h(j, i) = coeff(i);
      }
      if (beta <= 1e-10 * wnorm) {
        // Invariant subspace: continue with a fresh direction, uncoupled.
        beta = 0.0;
        bool ok = false;
        for (int attempt = 0; attempt < 3 && !ok; ++attempt) {
          ok = normalize_into(random_vector(n, rng), j + 1);
        }
        if (!ok || j + 1 >= available) {
          m_eff = j + 1;
          exhausted = true;
          break;
        }
      } else {
        v.col(j + 1) = w / beta;
        mv.col(j + 1) = mw / beta;
      }
      h(j + 1, j) = beta;
      h(j, j + 1) = beta;
      if (j + 1 >= available) {
        m_eff = j + 1;
        exhausted = true;
        break;
      }
    }

    const Eigen::MatrixXd hm = h.topLeftCorner(m_eff, m_eff);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (hm + hm.transpose()));
    const Vector& theta = es.eigenvalues();
    const Eigen::MatrixXd& y = es.eigenvectors();
    const double beta_last = exhausted ? 0.0 : h(m_eff, m_eff - 1);

    // Largest theta <-> smallest lambda above the shift.
    std::vector<int> order(static_cast<std::size_t>(m_eff));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int p, int q) { return theta(p) > theta(q); });

    const int nwant = std::min(want, m_eff);
    std::vector<EigenPair> pairs;
    double worst = 0.0;
    for (int i = 0; i < nwant; ++i) {
      const int c = order[i];
      if (!(theta(c) > 0.0)) {
        worst = std::numeric_limits<double>::infinity();
        break;
      }
      EigenPair p;
      p.u = op.deflate(v.leftCols(m_eff) * y.col(c));
      const Vector mu = op.m() * p.u;
      const double norm2 = p.u.dot(mu);
      p.u /= std::sqrt(norm2);
      const Vector au = op.a() * p.u;
      p.lambda = p.u.dot(au);
      const Vector r = au - p.lambda * (mu / std::sqrt(norm2));
      const double res = r.norm() / (p.lambda * mu.norm() / std::sqrt(norm2));
      worst = std::max(worst, res);
      pairs.push_back(std::move(p));
    }
    last_worst = worst;
    if (worst <= tol || (exhausted && worst <= std::max(tol, 1e-8))) {
      std::sort(pairs.begin(), pairs.end(),
                [](const EigenPair& p, const EigenPair& q) { return p.lambda < q.lambda; });
      out.pairs = std::move(pairs);
      out.worst_residual = worst;
      return out;
    }
    if (exhausted) break;

    // Thick restart: keep the best Ritz vectors plus the residual direction.
    const int keep = std::clamp(nwant + (m_eff - nwant) / 2, 1, m_eff - 1);
    Eigen::MatrixXd ykeep(m_eff, keep);
    for (int i = 0; i < keep; ++i) ykeep.col(i) = y.col(order[i]);
    const Eigen::MatrixXd vk = v.leftCols(m_eff) * ykeep;
    const Eigen::MatrixXd mvk = mv.leftCols(m_eff) * ykeep;
    v.col(keep) = v.col(m_eff);
    mv.col(keep) = mv.col(m_eff);
    v.leftCols(keep) = vk;
    mv.leftCols(keep) = mvk;
    h.setZero();
    for (int i = 0; i < keep; ++i) {
      h(i, i) = theta(order[i]);
      h(keep, i) = h(i, keep) = beta_last * y(m_eff - 1, order[i]);
    }
    j0 = keep;
    (void)sigma;
  }
  throw ConvergenceError("Lanczos did not converge", last_worst);
}

} // namespace

std::vector<EigenPair> solve_smallest_positive(const SparseSym& stiffness, const SparseSym& mass,
                                               const SparseRect& gradient,
                                               const EigenConfig& cfg, const Vector* start,
                                               EigenStats* stats) {
  const int n = static_cast<int>(stiffness.rows());
  if (mass.rows() != n || gradient.rows() != n) throw ArgumentError("eigensolve: size mismatch");
  const int nodal = static_cast<int>(gradient.cols());
  const int npos = n - nodal;
  if (npos < 0) throw DimensionError("eigensolve: more gradient dofs than edge dofs");
  if (cfg.k < 1) throw ArgumentError("eigensolve: k must be >= 1");
  if (cfg.k > npos) {
    throw DimensionError("eigensolve: requested " + std::to_string(cfg.k) +
                         " eigenpairs but only " + std::to_string(npos) + " are positive");
  }
  if (!std::isfinite(cfg.shift) || cfg.shift == 0.0) {
    throw ArgumentError("eigensolve: shift must be nonzero and finite");
  }
  if (start && start->size() != n) throw ArgumentError("eigensolve: start vector size mismatch");

  const GradientProjector proj(gradient, mass);

  // Shifted factorization; the inertia of A - sigma M must equal the kernel
  // dimension, otherwise positive eigenvalues lie below sigma.
  double sigma = cfg.shift;
  std::unique_ptr<Factorization> shifted;
  if (sigma < 0.0) {
    // A - sigma M is positive definite: no inertia to check.
    SparseSym k = stiffness - sigma * mass;
    k.makeCompressed();
    shifted = std::make_unique<Factorization>(k, FactorKind::positive_definite);
  }
  for (int attempt = 0; attempt < 40 && !shifted; ++attempt) {
    SparseSym k = stiffness - sigma * mass;
    k.makeCompressed();
    try {
      auto f = std::make_unique<Factorization>(k, FactorKind::indefinite);
      if (f->negative_pivots() > nodal) {
        sigma *= 0.25;
        continue;
      }
      shifted = std::move(f);
    } catch (const FactorizationError&) {
      sigma *= 0.9;
    }
  }
  if (!shifted) {
    throw ConvergenceError("eigensolve: no admissible shift found (eigenvalues at or below "
                           "the shift, or the domain is not simply connected)",
                           std::numeric_limits<double>::quiet_NaN());
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<EigenPair> locked;
  ShiftInvert op(stiffness, mass, proj, *shifted, locked);
  const int basis = cfg.max_lanczos > 0 ? cfg.max_lanczos : std::max(3 * cfg.k + 20, 60);

  bool first = true;
  int failures = 0;
  int runs = 0;
  for (;;) {
    const int available = npos - static_cast<int>(locked.size());
    const bool verifying = static_cast<int>(locked.size()) >= cfg.k;
    if (verifying && available <= 0) break;
    const int want = verifying ? 1 : cfg.k - static_cast<int>(locked.size());

    Vector v0 = random_vector(n, rng);
    if (first && start && start->norm() > 0.0) {
      v0 = *start + 1e-3 * (start->norm() / v0.norm()) * v0;
    }
    first = false;

    ++runs;
    LanczosOutcome res = thick_restart_lanczos(op, v0, want, std::max(basis, want + 10),
                                               available, sigma, cfg.tol, cfg.max_restarts,
                                               rng);
    if (res.pairs.empty()) {
      if (++failures > 3) {
        throw ConvergenceError("eigensolve: Lanczos breakdown persisted after restarts",
                               res.worst_residual);
      }
      continue;
    }
    if (verifying) {
      const EigenPair& cand = res.pairs.front();
      if (cand.lambda >= locked.back().lambda * (1.0 - 1e-10)) break;
      locked.push_back(cand);
    } else {
      for (auto& p : res.pairs) locked.push_back(std::move(p));
    }
    std::sort(locked.begin(), locked.end(),
              [](const EigenPair& p, const EigenPair& q) { return p.lambda < q.lambda; });
    if (static_cast<int>(locked.size()) > cfg.k) locked.resize(static_cast<std::size_t>(cfg.k));
  }

  for (auto& p : locked) fix_sign(p, mass);
  if (stats) {
    stats->shift_used = sigma;
    stats->operator_applications = op.count;
    stats->lanczos_runs = runs;
  }
  return locked;
}

} // namespace mafem
