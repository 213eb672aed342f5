#pragma once

#include "mafem/common.hpp"
#include "mafem/eigensolve.hpp"
#include "mafem/fem.hpp"
#include "mafem/mesh.hpp"

#include <vector>

namespace mafem {

/// Mixed form of a standard eigenpair: sigma_h = omega_h u_h and the
/// elementwise constant p_h = -mu^{-1/2} curl u_h / omega_h.
struct MixedSolution {
  double lambda = 0.0;
  double omega = 0.0;
  Vector sigma;        ///< edge coefficients of sigma_h
  std::vector<Vec3> p; ///< one vector per tet
};

/// Throws ArgumentError for lambda <= 0.
MixedSolution to_mixed(const Mesh& mesh, const EdgeSpace& space, const EigenPair& pair,
                       const Material& material);

/// Sum over tets of |K| |p_K|^2.
double piecewise_l2_sq(const Mesh& mesh, const std::vector<Vec3>& p);

/// max_K |mu^{-1/2} curl sigma_h + lambda_h p_h| relative to max_K |lambda_h p_h|.
double curl_identity_defect(const Mesh& mesh, const EdgeSpace& space, const MixedSolution& mixed,
                            const Material& material);

} // namespace mafem
