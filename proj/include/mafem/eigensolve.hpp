#pragma once

#include "mafem/common.hpp"
#include "mafem/fem.hpp"
#include "mafem/linalg.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace mafem {

/// One discrete eigenpair: lambda = omega_h^2 and coefficients u with
/// u^T M u = 1.
struct EigenPair {
  double lambda = 0.0;
  Vector u;
};

struct EigenConfig {
  int k = 1;
  /// Relative residual bound ||A u - lambda M u|| <= tol * lambda * ||M u||.
  double tol = 1e-9;
  /// Shift sigma of the shift-invert operator. A positive shift must lie
  /// below the smallest wanted eigenvalue (it is lowered automatically when
  /// the inertia of the LDL^T factor of A - sigma M shows eigenvalues below
  /// it). A negative shift makes A - sigma M positive definite, so a
  /// Cholesky factorization is used instead.
  double shift = 1.0;
  /// Lanczos basis size; 0 selects max(3k + 20, 60).
  int max_lanczos = 0;
  std::uint64_t seed = 42;
  int max_restarts = 400;
};

/// M-orthogonal projection onto the complement of grad(N_h):
/// u -> u - G (G^T M G)^{-1} G^T M u.
class GradientProjector {
public:
  GradientProjector(const SparseRect& gradient, const SparseSym& mass);

  Vector apply(const Vector& u) const;
  /// G^T M u, zero exactly for discretely divergence-free u.
  Vector divergence(const Vector& u) const;
  const Factorization& gram_factor() const { return *gram_; }

private:
  SparseRect gradient_;
  SparseSym mass_;
  std::unique_ptr<Factorization> gram_;
};

/// Gram matrix G^T M G of the gradient kernel (SPD).
SparseSym gradient_gram(const SparseRect& gradient, const SparseSym& mass);

Vector project_out_gradients(const Vector& u, const SparseRect& gradient, const SparseSym& mass,
                             const Factorization& gram_factor);

/// N(h) = dim S_h - dim grad(N_h) on a simply connected domain; throws
/// DimensionError when negative.
int count_positive_dim(const EdgeSpace& edge, const NodalSpace& nodal);

struct EigenStats {
  double shift_used = 0.0;
  int operator_applications = 0;
  int lanczos_runs = 0;
};

/// The k smallest positive eigenpairs of A u = lambda M u (ascending), by
/// shift-invert thick-restart Lanczos on the gradient-free complement.
/// `start`, when given, seeds the first Krylov space (warm start).
std::vector<EigenPair> solve_smallest_positive(const SparseSym& stiffness, const SparseSym& mass,
                                               const SparseRect& gradient,
                                               const EigenConfig& cfg,
                                               const Vector* start = nullptr,
                                               EigenStats* stats = nullptr);

/// Flips u so that u^T M reference > 0, or, without a reference, so that its
/// first non-negligible coefficient is positive.
void fix_sign(EigenPair& pair, const SparseSym& mass, const Vector* reference = nullptr);

/// Relative residual ||A u - lambda M u|| / (lambda ||M u||).
double relative_residual(const SparseSym& stiffness, const SparseSym& mass,
                         const EigenPair& pair);

} // namespace mafem
