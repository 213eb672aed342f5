#pragma once

#include "mafem/common.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <memory>

namespace mafem {

/// Symmetric sparse matrix, both triangles stored (compressed columns, which
/// for a symmetric matrix coincide with compressed rows).
using SparseSym = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
/// Rectangular sparse matrix (discrete gradient, evaluation maps).
using SparseRect = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

enum class FactorKind {
  /// Cholesky; fails on a non-positive pivot.
  positive_definite,
  /// LDL^T with static fill-reducing ordering; accepts negative pivots and
  /// reports the inertia.
  indefinite,
};

/// Sparse direct factorization (fill-reducing AMD ordering). Immutable after
/// construction; solve() is safe to call concurrently.
class Factorization {
public:
  Factorization(const SparseSym& matrix, FactorKind kind);
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;
  Factorization(const Factorization&) = delete;
  Factorization& operator=(const Factorization&) = delete;

  Vector solve(const Vector& b) const;
  /// solve() followed by one step of iterative refinement against `matrix`.
  Vector solve_refined(const SparseSym& matrix, const Vector& b) const;

  int dim() const;
  FactorKind kind() const;
  /// Counts of negative and positive pivots (Sylvester inertia); only
  /// meaningful for FactorKind::indefinite.
  int negative_pivots() const;
  int positive_pivots() const;
  /// Smallest |pivot| relative to the largest.
  double pivot_ratio() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Whether supernodal Cholesky produced correct results in a one-time probe.
/// It relies on the system BLAS; when the probe fails (or the environment
/// sets MAXWELL_AFEM_SUPERNODAL=0) every factorization is simplicial.
bool supernodal_available();

using Preconditioner = std::function<Vector(const Vector&)>;

Preconditioner jacobi_preconditioner(const SparseSym& matrix);
Preconditioner identity_preconditioner();

struct PcgResult {
  Vector x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned conjugate gradients. Throws ConvergenceError (carrying the
/// last relative residual) when maxit is exceeded.
PcgResult pcg(const SparseSym& matrix, const Vector& b, const Preconditioner& precond,
              double tol, int maxit, const Vector* x0 = nullptr);

/// ||A - A^T||_inf (0 for exactly symmetric storage).
double asymmetry(const SparseSym& matrix);

} // namespace mafem
