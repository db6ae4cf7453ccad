#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "mfilab/lattice.hpp"

namespace mfilab {

/// Uniform bucket grid over [lower, upper)^d. Positions outside the range are
/// clamped into the border buckets, so queries stay correct anywhere.
class SpatialHash {
 public:
  SpatialHash(int dim, double lower, double upper, double cell);

  void insert(int id, const Point& p);
  void clear();
  bool empty() const { return ids_.empty(); }
  int dim() const { return dim_; }

  /// Calls f(id, distance) for every stored point with |p - q| <= r.
  template <class F>
  void for_each_within(const Point& p, double r, F&& f) const {
    long lo[3] = {0, 0, 0};
    long hi[3] = {0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
      lo[a] = bucket_coord(p[a] - r);
      hi[a] = bucket_coord(p[a] + r);
    }
    const double r2 = r * r;
    long k[3] = {lo[0], lo[1], lo[2]};
    for (;;) {
      const auto& bucket = buckets_[flat(k)];
      for (int slot : bucket) {
        const double d2 = (positions_[slot] - p).squaredNorm();
        if (d2 <= r2) {
          f(ids_[slot], std::sqrt(d2));
        }
      }
      int a = dim_ - 1;
      while (a >= 0) {
        if (++k[a] <= hi[a]) break;
        k[a] = lo[a];
        --a;
      }
      if (a < 0) break;
    }
  }

  /// Nearest stored point (ties to the lowest id); returns -1 when empty.
  int nearest(const Point& p, double* distance = nullptr) const;

 private:
  long bucket_coord(double x) const;
  long flat(const long* k) const;

  int dim_;
  double lower_;
  double cell_;
  long per_axis_;
  std::vector<std::vector<int>> buckets_;
  std::vector<int> ids_;
  std::vector<Point> positions_;
};

}  // namespace mfilab
