#include "mfilab/tessellation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "mfilab/error.hpp"
#include "mfilab/spatial_hash.hpp"

namespace mfilab {

namespace {

double hash_cell(const BoxSpec& box, long points) {
  const double vol = std::max(box.padded_volume(), 1e-12);
  const double per_point = vol / static_cast<double>(std::max(points, 1L));
  return std::max(std::pow(per_point, 1.0 / box.dim), 1e-3);
}

}  // namespace

std::vector<long> nearest_point_labels(const PointConfiguration& points, const Lattice& lattice) {
  if (points.empty()) {
    throw Error(ErrorCode::EmptyConfiguration, "no points to label the lattice with");
  }
  const BoxSpec& box = points.box;
  const double lo = std::min(box.lower(), lattice.lower());
  const double hi = std::max(box.upper(), lattice.upper());
  SpatialHash hash(box.dim, lo, hi, hash_cell(box, points.size()));
  for (long i = 0; i < points.size(); ++i) {
    hash.insert(static_cast<int>(i), points.position(i));
  }
  std::vector<long> labels(static_cast<std::size_t>(lattice.size()));
  for (long s = 0; s < lattice.size(); ++s) {
    labels[static_cast<std::size_t>(s)] = hash.nearest(lattice.site(s));
  }
  return labels;
}

FieldSample voronoi_field(const PointConfiguration& points, const BoxSpec& box,
                          const std::string& value) {
  const int k = points.mark_index(value);
  if (k < 0) {
    throw Error(ErrorCode::MissingDecoration, "decoration '" + value + "' is absent");
  }
  const std::vector<long> labels = nearest_point_labels(points, Lattice::observation(box));
  FieldSample f{box, Eigen::VectorXd(static_cast<long>(labels.size()))};
  for (std::size_t s = 0; s < labels.size(); ++s) {
    f.values[static_cast<long>(s)] = points.mark(labels[s], k);
  }
  return f;
}

std::vector<long> g_set(const PointConfiguration& points, const Point& x, double ell,
                        const BoxSpec& box) {
  const Cube q = Cube::around(x, ell);
  const Lattice lat = Lattice::padded(box);
  SpatialHash outside(box.dim, std::min(box.lower(), lat.lower()),
                      std::max(box.upper(), lat.upper()), hash_cell(box, points.size()));
  long n_out = 0;
  for (long i = 0; i < points.size(); ++i) {
    const Point p = points.position(i);
    if (!q.contains_half_open(p)) {
      outside.insert(static_cast<int>(i), p);
      ++n_out;
    }
  }
  if (n_out == 0) {
    throw Error(ErrorCode::UnboundedGSet, "no points outside the cube");
  }
  auto member = [&](long s) {
    const Point y = lat.site(s);
    double nearest = 0.0;
    outside.nearest(y, &nearest);
    return q.distance(y) <= nearest;
  };
  std::vector<char> state(static_cast<std::size_t>(lat.size()), 0);  // 1 member, 2 rejected
  std::deque<long> frontier;
  for (long s = 0; s < lat.size(); ++s) {
    if (q.contains_half_open(lat.site(s))) {
      state[static_cast<std::size_t>(s)] = 1;
      frontier.push_back(s);
    }
  }
  std::vector<long> nb;
  while (!frontier.empty()) {
    const long s = frontier.front();
    frontier.pop_front();
    if (lat.on_boundary(s)) {
      throw Error(ErrorCode::UnboundedGSet, "G-set reaches the padded boundary");
    }
    lat.neighbours(s, nb);
    for (long t : nb) {
      char& st = state[static_cast<std::size_t>(t)];
      if (st != 0) {
        continue;
      }
      st = member(t) ? 1 : 2;
      if (st == 1) {
        frontier.push_back(t);
      }
    }
  }
  std::vector<long> out;
  for (long s = 0; s < lat.size(); ++s) {
    if (state[static_cast<std::size_t>(s)] == 1) {
      out.push_back(s);
    }
  }
  return out;
}

double voronoi_action_radius(const PointConfiguration& points, const Point& x, double ell,
                             const BoxSpec& box) {
  const std::vector<long> g = g_set(points, x, ell, box);
  const Lattice lat = Lattice::padded(box);
  const Cube q = Cube::around(x, ell);
  std::vector<char> in(static_cast<std::size_t>(lat.size()), 0);
  for (long s : g) {
    in[static_cast<std::size_t>(s)] = 1;
  }
  double far = 0.0;
  std::vector<long> nb;
  for (long s : g) {
    lat.neighbours(s, nb);
    const bool boundary = std::any_of(nb.begin(), nb.end(),
                                      [&](long t) { return !in[static_cast<std::size_t>(t)]; });
    if (boundary) {
      far = std::max(far, q.distance(lat.site(s)));
    }
  }
  return 1.0 + 2.0 * far;
}

}  // namespace mfilab
