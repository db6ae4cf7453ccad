#pragma once

#include <string>
#include <vector>

#include "mfilab/lattice.hpp"
#include "mfilab/laws.hpp"
#include "mfilab/pointproc.hpp"

namespace mfilab {

struct VoronoiFieldSpec {
  double intensity = 1.0;
  ScalarLaw value_law = ScalarLaw::uniform(0.0, 1.0);
};

/// Index of the nearest point for every site of a lattice (ties to the lowest
/// point index). Throws EmptyConfiguration.
std::vector<long> nearest_point_labels(const PointConfiguration& points, const Lattice& lattice);

/// Each observation site takes the mark `value` of its nearest point.
FieldSample voronoi_field(const PointConfiguration& points, const BoxSpec& box,
                          const std::string& value = "V");

/// Sites y of the padded lattice with d(y, Q) <= distance from y to the nearest
/// point outside Q, where Q = Q_{2l+1}(x). Found by flood fill from the cube;
/// indices refer to Lattice::padded(box). Throws UnboundedGSet when the set
/// reaches the outer layer of the padded lattice.
std::vector<long> g_set(const PointConfiguration& points, const Point& x, double ell,
                        const BoxSpec& box);

/// 1 + 2 max over boundary sites v of the G-set of d(v, Q).
double voronoi_action_radius(const PointConfiguration& points, const Point& x, double ell,
                             const BoxSpec& box);

}  // namespace mfilab
