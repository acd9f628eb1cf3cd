#pragma once

// Discrete mean curvature of the lens back surface and the smoothness term
// sum_f H_f^2 A_f. Vertex curvature comes from the cotangent Laplacian
// normalized by the mixed (Voronoi / obtuse-fallback) area; a face takes the
// mean of its three vertex curvatures. Boundary vertices have H = 0.

#include <vector>

#include "caustic/geometry.hpp"

namespace caustic {

/// Signed mean curvature per vertex: H = -(L . n) / (2 A_mixed) with
/// L = 1/2 sum (cot a + cot b)(p_j - p_v) and n the area-weighted vertex
/// normal. Positive on a cap that bulges toward +z.
std::vector<double> vertex_mean_curvature(const LensSurface& lens);

struct SmoothnessTerm {
  double value = 0;
  std::vector<double> gradient;  ///< d value / d height, one per vertex
  int degenerate_vertices = 0;   ///< interior vertices with zero mixed area (H set to 0)
};

double e_smooth(const LensSurface& lens);

/// Value and height gradient. The vertex curvatures are differentiated with
/// a local dual over their one-ring (at most 9 heights); face areas with a
/// width-3 dual over the face's heights.
SmoothnessTerm e_smooth_with_gradient(const LensSurface& lens);

}  // namespace caustic
