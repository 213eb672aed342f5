#pragma once

#include "mafem/common.hpp"
#include "mafem/eigensolve.hpp"
#include "mafem/fem.hpp"
#include "mafem/mesh.hpp"

#include <memory>

namespace mafem {

/// Errors of a discrete pair (u_h, lambda_h) against the reference pair
/// matched to it. `sign` is the factor s applied to u_h, chosen so that
/// (eps u, s u_h) >= 0; the gaps minimize over both signs.
struct Comparison {
  double lambda_ref = 0.0;
  double sign = 1.0;
  double u_sq = 0.0;     ///< ||eps^1/2 (u - s u_h)||^2
  double curl_sq = 0.0;  ///< ||mu^-1/2 curl(u - s u_h)||^2
  double sigma_sq = 0.0; ///< ||eps^1/2 (sigma - s sigma_h)||^2
  double p_sq = 0.0;     ///< ||p - s p_h||^2
  double gap_curl = 0.0;
  double gap_mixed = 0.0;
  double projection_defect = 0.0; ///< ||P_h p - s p_h||, P_h the L2 projection onto Q_h
};

class Reference {
public:
  virtual ~Reference() = default;
  virtual double lambda() const = 0;
  virtual Comparison compare(const Mesh& mesh, const EdgeSpace& space, const EigenPair& pair,
                             const Material& material) const = 0;
};

/// Lowest cavity mode of (0,1)^3 with uniform eps, mu: lambda = 2 pi^2/(eps mu),
/// a three-dimensional eigenspace. Each discrete pair is compared with its
/// normalized projection onto that eigenspace. Throws ArgumentError for a
/// non-uniform material.
std::unique_ptr<Reference> make_cube_reference(const Material& material);

/// Reference pair computed on a fine mesh that refines every mesh it is
/// compared with. `start`, if given, is a warm start on `fine`.
std::unique_ptr<Reference> make_fine_reference(Mesh fine, const Material& material,
                                               int target_index, const EigenConfig& eigen,
                                               const Vector* start = nullptr);

/// Fine-mesh reference data, exposed for diagnostics.
class FineReference : public Reference {
public:
  FineReference(Mesh fine, const Material& material, int target_index, const EigenConfig& eigen,
                const Vector* start);
  double lambda() const override { return pair_.lambda; }
  Comparison compare(const Mesh& mesh, const EdgeSpace& space, const EigenPair& pair,
                     const Material& material) const override;

  const Mesh& mesh() const { return mesh_; }
  const EdgeSpace& space() const { return space_; }
  const EigenPair& pair() const { return pair_; }
  const SystemMatrices& system() const { return sys_; }

private:
  Mesh mesh_;
  EdgeSpace space_;
  SystemMatrices sys_;
  EigenPair pair_;
};

/// L2 projection onto mu^-1/2 curl(S_h) of a piecewise field given by its
/// integrals over the tets: returns x with P_h p = mu^-1/2 curl x.
Vector project_onto_curls(const Mesh& mesh, const EdgeSpace& space, const SparseSym& stiffness,
                          const std::vector<Vec3>& integrals, const Material& material);

} // namespace mafem
