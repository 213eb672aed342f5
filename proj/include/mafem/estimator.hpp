#pragma once

#include "mafem/common.hpp"
#include "mafem/eigensolve.hpp"
#include "mafem/fem.hpp"
#include "mafem/mesh.hpp"
#include "mafem/mixed.hpp"

#include <vector>

namespace mafem {

enum class IndicatorKind { standard, mixed };

/// Squared local indicators, one per tet.
struct IndicatorField {
  std::vector<double> eta_sq;
  double total = 0.0;
  IndicatorKind kind = IndicatorKind::standard;

  /// Sum of eta_sq over the given tets.
  double sum(const std::vector<int>& tets) const;
};

/// L2 norms of the two jumps on one interior face.
struct FaceJump {
  int face = -1;
  double tangential = 0.0; ///< ||[[(mu^-1 curl u_h / lambda_h) x n]]||_F
  double normal = 0.0;     ///< ||[[eps u_h . n]]||_F
};

/// Jumps on every interior face, in face order.
std::vector<FaceJump> face_jumps(const Mesh& mesh, const EdgeSpace& space, const EigenPair& pair,
                                 const Material& material);

/// eta_K^2 = h_K^2 ||eps u_h - curl(mu^-1 curl u_h)/lambda_h||_K^2 + h_K^2 ||div(eps u_h)||_K^2
///         + 1/2 sum over inner faces h_F (||[[(mu^-1 curl u_h/lambda_h) x n]]||^2
///                                         + ||[[eps u_h . n]]||^2).
/// Throws ArgumentError for lambda <= 0.
IndicatorField indicator_standard(const Mesh& mesh, const EdgeSpace& space, const EigenPair& pair,
                                  const Material& material);

/// The same residual written in (sigma_h, p_h):
/// h_K^2 ||eps sigma_h + curl(mu^-1/2 p_h)||_K^2 + h_K^2 ||div(eps sigma_h)||_K^2
/// + 1/2 sum h_F (||[[mu^-1/2 p_h x n]]||^2 + ||[[eps sigma_h . n]]||^2).
IndicatorField indicator_mixed(const Mesh& mesh, const EdgeSpace& space, const MixedSolution& mixed,
                               const Material& material);
IndicatorField indicator_mixed(const Mesh& mesh, const EdgeSpace& space, const EigenPair& pair,
                               const Material& material);

} // namespace mafem
