#include "mfilab/spatial_hash.hpp"

#include <algorithm>

#include "mfilab/error.hpp"

namespace mfilab {

SpatialHash::SpatialHash(int dim, double lower, double upper, double cell)
    : dim_(dim), lower_(lower), cell_(cell) {
  if (!(cell > 0.0) || !(upper >= lower)) {
    throw Error(ErrorCode::InvalidArgument, "spatial hash needs a positive cell and a range");
  }
  per_axis_ = std::max<long>(1, static_cast<long>(std::ceil((upper - lower) / cell)));
  long total = 1;
  for (int a = 0; a < dim; ++a) {
    total *= per_axis_;
  }
  buckets_.resize(static_cast<std::size_t>(total));
}

long SpatialHash::bucket_coord(double x) const {
  const double c = std::floor((x - lower_) / cell_);
  if (c < 0.0) return 0;
  if (c >= static_cast<double>(per_axis_)) return per_axis_ - 1;
  return static_cast<long>(c);
}

long SpatialHash::flat(const long* k) const {
  long index = 0;
  for (int a = 0; a < dim_; ++a) {
    index = index * per_axis_ + k[a];
  }
  return index;
}

void SpatialHash::insert(int id, const Point& p) {
  long k[3];
  for (int a = 0; a < dim_; ++a) {
    k[a] = bucket_coord(p[a]);
  }
  buckets_[flat(k)].push_back(static_cast<int>(ids_.size()));
  ids_.push_back(id);
  positions_.push_back(p);
}

void SpatialHash::clear() {
  for (auto& b : buckets_) {
    b.clear();
  }
  ids_.clear();
  positions_.clear();
}

int SpatialHash::nearest(const Point& p, double* distance) const {
  if (ids_.empty()) {
    return -1;
  }
  long c[3] = {0, 0, 0};
  double excess2 = 0.0;
  for (int a = 0; a < dim_; ++a) {
    c[a] = bucket_coord(p[a]);
    const double lo = lower_ + cell_ * static_cast<double>(c[a]);
    const double e = std::max({lo - p[a], p[a] - (lo + cell_), 0.0});
    excess2 += e * e;
  }
  double best2 = std::numeric_limits<double>::infinity();
  int best_id = -1;
  for (long s = 0; s < per_axis_; ++s) {
    // Points in shell s lie at least (s - 1) cells away from p's bucket.
    if (s >= 1) {
      const double bound = std::max(0.0, static_cast<double>(s - 1) * cell_);
      if (bound * bound + excess2 > best2) {
        break;
      }
    }
    long lo[3], hi[3];
    for (int a = 0; a < dim_; ++a) {
      lo[a] = std::max(0L, c[a] - s);
      hi[a] = std::min(per_axis_ - 1, c[a] + s);
    }
    long k[3] = {lo[0], lo[1], lo[2]};
    for (;;) {
      long cheb = 0;
      for (int a = 0; a < dim_; ++a) {
        cheb = std::max(cheb, std::labs(k[a] - c[a]));
      }
      if (cheb == s) {
        for (int slot : buckets_[flat(k)]) {
          const double d2 = (positions_[slot] - p).squaredNorm();
          if (d2 < best2 || (d2 == best2 && ids_[slot] < best_id)) {
            best2 = d2;
            best_id = ids_[slot];
          }
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
  if (distance != nullptr) {
    *distance = std::sqrt(best2);
  }
  return best_id;
}

}  // namespace mfilab
