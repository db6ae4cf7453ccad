#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace mfilab {

/// A point of R^d with d <= 3, stored inline.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;

enum class Boundary { PaddedFree, Periodic };

/// Observation window [0, L)^d sampled at pitch h, simulated on [-m, L + m)^d.
struct BoxSpec {
  int dim = 1;
  double side = 1.0;
  double spacing = 1.0;
  double margin = 0.0;
  Boundary boundary = Boundary::PaddedFree;

  /// Throws InvalidArgument when an invariant fails. A side of 0 is accepted
  /// and denotes the empty box.
  void validate() const;

  long sites_per_axis() const;
  long site_count() const;
  double lower() const { return -margin; }
  double upper() const { return side + margin; }
  double padded_side() const { return side + 2.0 * margin; }
  double padded_volume() const;
  bool periodic() const { return boundary == Boundary::Periodic; }
  BoxSpec with_margin(double m) const;
};

bool operator==(const BoxSpec& a, const BoxSpec& b);

/// Regular cubic lattice with sites at h (k + 1/2), k = first .. first + count - 1
/// on every axis. Sites are numbered lexicographically, first axis slowest.
struct Lattice {
  int dim = 1;
  long first = 0;
  long count = 0;
  double spacing = 1.0;
  bool periodic = false;

  static Lattice observation(const BoxSpec& box);
  /// Extends the observation lattice by floor(m / h) layers on each side.
  static Lattice padded(const BoxSpec& box);

  long size() const;
  Point site(long index) const;
  void multi_index(long index, long* k) const;
  long linear_index(const long* k) const;
  /// Index of the site whose cell contains p, or -1 outside a free lattice.
  long locate(const Point& p) const;
  /// Nearest site to p; wraps on periodic lattices, clamps otherwise.
  long nearest(const Point& p) const;
  double lower() const { return spacing * static_cast<double>(first); }
  double upper() const { return spacing * static_cast<double>(first + count); }
  /// True when the site lies on the outermost layer.
  bool on_boundary(long index) const;
  /// 2d lattice neighbours (fewer at free edges).
  void neighbours(long index, std::vector<long>& out) const;
};

/// All observation sites, one column per site, in lexicographic order.
Eigen::MatrixXd lattice_sites(const BoxSpec& box);

/// Euclidean distance; minimum image along each axis for periodic boxes.
double box_distance(const BoxSpec& box, const Point& a, const Point& b);

/// Observation sites within distance radius of center (closed ball), ascending.
std::vector<long> ball_restriction(const BoxSpec& box, const Point& center, double radius);

/// Closed cube centre + [-half, half]^d.
struct Cube {
  Point center;
  double half = 0.5;

  /// Cube Q_{2l+1}(x).
  static Cube around(const Point& x, double ell) { return Cube{x, ell + 0.5}; }
  double distance(const Point& y) const;
  bool contains_half_open(const Point& y) const;
};

/// A lattice field on the observation window.
struct FieldSample {
  BoxSpec box;
  Eigen::VectorXd values;

  void validate() const;
};

/// Unit cells [j, j + 1)^d covering the padded box; the hidden product
/// structure of point models is indexed by these cells.
struct UnitCells {
  int dim = 1;
  long first = 0;
  long count = 0;
  double lower = 0.0;
  double upper = 0.0;

  static UnitCells covering(const BoxSpec& box);
  long size() const;
  Point center(long index) const;
  /// Cell intersected with the padded box: lower corner and widths.
  void extent(long index, Point& lo, Point& width) const;
  double volume(long index) const;
  long locate(const Point& p) const;
};

}  // namespace mfilab
