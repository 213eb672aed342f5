#pragma once

#include "mafem/common.hpp"

#include <array>
#include <vector>

namespace mafem {

/// Quadrature on a simplex in barycentric coordinates. Weights sum to one, so
/// an integral is volume (or area) times the weighted sum.
template <int NB>
struct SimplexRule {
  std::vector<std::array<double, NB>> points;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
};

using TetRule = SimplexRule<4>;
using TriangleRule = SimplexRule<3>;

/// 4 points, exact for degree 2.
const TetRule& tet_rule_degree2();
/// 11 points (Keast), exact for degree 4.
const TetRule& tet_rule_degree4();
/// Collapsed Gauss-Legendre product rule with q points per direction; exact
/// for degree 2q-3 or better. Used for smooth non-polynomial integrands.
TetRule tet_rule_collapsed(int q);

/// 3 edge-midpoint points, exact for degree 2.
const TriangleRule& triangle_rule_degree2();

template <std::size_t NB>
Vec3 map_point(const std::array<Vec3, NB>& corners, const std::array<double, NB>& bary) {
  Vec3 x = Vec3::Zero();
  for (std::size_t i = 0; i < NB; ++i) x += bary[i] * corners[i];
  return x;
}

} // namespace mafem
