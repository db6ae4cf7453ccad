#include "mfilab/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "mfilab/error.hpp"

namespace mfilab {

namespace {

long ipow(long base, int exp) {
  long r = 1;
  for (int i = 0; i < exp; ++i) {
    r *= base;
  }
  return r;
}

double wrap_delta(double delta, double period) {
  if (period <= 0.0) {
    return delta;
  }
  delta = std::fmod(delta, period);
  if (delta > 0.5 * period) {
    delta -= period;
  } else if (delta < -0.5 * period) {
    delta += period;
  }
  return delta;
}

}  // namespace

void BoxSpec::validate() const {
  if (dim < 1 || dim > 3) {
    throw Error(ErrorCode::InvalidArgument, "dimension must be 1, 2 or 3");
  }
  if (!(side >= 0.0) || !std::isfinite(side)) {
    throw Error(ErrorCode::InvalidArgument, "side must be finite and nonnegative");
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw Error(ErrorCode::InvalidArgument, "spacing must be positive");
  }
  const double ratio = side / spacing;
  if (std::fabs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(ErrorCode::InvalidArgument, "side / spacing must be an integer");
  }
  if (!(margin >= 0.0) || !std::isfinite(margin)) {
    throw Error(ErrorCode::InvalidArgument, "margin must be nonnegative");
  }
  if (periodic() && margin != 0.0) {
    throw Error(ErrorCode::InvalidArgument, "periodic boxes carry no margin");
  }
  // Padded lattice and unit cells both have to fit in memory.
  const double per_axis = std::ceil(padded_side() / spacing) + 2.0 * std::ceil(1.0 / spacing) + 2.0;
  const double cells = std::ceil(padded_side()) + 2.0;
  if (std::pow(std::max(per_axis, cells), dim) > 4e8) {
    throw Error(ErrorCode::InvalidArgument, "padded box is too large to tabulate");
  }
}

long BoxSpec::sites_per_axis() const { return std::lround(side / spacing); }

long BoxSpec::site_count() const { return ipow(sites_per_axis(), dim); }

double BoxSpec::padded_volume() const { return std::pow(padded_side(), dim); }

BoxSpec BoxSpec::with_margin(double m) const {
  BoxSpec b = *this;
  b.margin = m;
  return b;
}

bool operator==(const BoxSpec& a, const BoxSpec& b) {
  return a.dim == b.dim && a.side == b.side && a.spacing == b.spacing && a.margin == b.margin &&
         a.boundary == b.boundary;
}

Lattice Lattice::observation(const BoxSpec& box) {
  Lattice l;
  l.dim = box.dim;
  l.first = 0;
  l.count = box.sites_per_axis();
  l.spacing = box.spacing;
  l.periodic = box.periodic();
  return l;
}

Lattice Lattice::padded(const BoxSpec& box) {
  Lattice l = observation(box);
  const long layers = static_cast<long>(std::floor(box.margin / box.spacing + 1e-9));
  l.first = -layers;
  l.count += 2 * layers;
  return l;
}

long Lattice::size() const { return ipow(count, dim); }

void Lattice::multi_index(long index, long* k) const {
  for (int a = dim - 1; a >= 0; --a) {
    k[a] = index % count;
    index /= count;
  }
}

long Lattice::linear_index(const long* k) const {
  long index = 0;
  for (int a = 0; a < dim; ++a) {
    index = index * count + k[a];
  }
  return index;
}

Point Lattice::site(long index) const {
  long k[3];
  multi_index(index, k);
  Point p(dim);
  for (int a = 0; a < dim; ++a) {
    p[a] = spacing * (static_cast<double>(first + k[a]) + 0.5);
  }
  return p;
}

long Lattice::locate(const Point& p) const {
  long k[3];
  for (int a = 0; a < dim; ++a) {
    long j = static_cast<long>(std::floor(p[a] / spacing)) - first;
    if (periodic) {
      j = ((j % count) + count) % count;
    } else if (j < 0 || j >= count) {
      return -1;
    }
    k[a] = j;
  }
  return linear_index(k);
}

long Lattice::nearest(const Point& p) const {
  long k[3];
  for (int a = 0; a < dim; ++a) {
    long j = static_cast<long>(std::floor(p[a] / spacing)) - first;
    if (periodic) {
      j = ((j % count) + count) % count;
    } else {
      j = std::clamp(j, 0L, count - 1);
    }
    k[a] = j;
  }
  return linear_index(k);
}

bool Lattice::on_boundary(long index) const {
  long k[3];
  multi_index(index, k);
  for (int a = 0; a < dim; ++a) {
    if (k[a] == 0 || k[a] == count - 1) {
      return true;
    }
  }
  return false;
}

void Lattice::neighbours(long index, std::vector<long>& out) const {
  out.clear();
  long k[3];
  multi_index(index, k);
  for (int a = 0; a < dim; ++a) {
    for (int s = -1; s <= 1; s += 2) {
      long kk[3] = {k[0], k[1], k[2]};
      kk[a] += s;
      if (kk[a] < 0 || kk[a] >= count) {
        if (!periodic) {
          continue;
        }
        kk[a] = (kk[a] + count) % count;
      }
      out.push_back(linear_index(kk));
    }
  }
}

Eigen::MatrixXd lattice_sites(const BoxSpec& box) {
  box.validate();
  const Lattice lat = Lattice::observation(box);
  Eigen::MatrixXd sites(box.dim, lat.size());
  for (long i = 0; i < lat.size(); ++i) {
    sites.col(i) = lat.site(i);
  }
  return sites;
}

double box_distance(const BoxSpec& box, const Point& a, const Point& b) {
  double s = 0.0;
  const double period = box.periodic() ? box.side : 0.0;
  for (int i = 0; i < box.dim; ++i) {
    const double d = wrap_delta(a[i] - b[i], period);
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<long> ball_restriction(const BoxSpec& box, const Point& center, double radius) {
  if (!(radius >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "radius must be nonnegative");
  }
  const Lattice lat = Lattice::observation(box);
  std::vector<long> out;
  if (lat.count == 0) {
    return out;
  }
  const double h = box.spacing;
  long lo[3] = {0, 0, 0};
  long hi[3] = {0, 0, 0};
  for (int a = 0; a < box.dim; ++a) {
    lo[a] = static_cast<long>(std::floor((center[a] - radius) / h - 0.5)) - 1;
    hi[a] = static_cast<long>(std::ceil((center[a] + radius) / h - 0.5)) + 1;
    if (!box.periodic() || hi[a] - lo[a] + 1 >= lat.count) {
      lo[a] = box.periodic() ? 0 : std::max(lo[a], 0L);
      hi[a] = box.periodic() ? lat.count - 1 : std::min(hi[a], lat.count - 1);
    }
  }
  const double r2 = radius * radius * (1.0 + 1e-12) + 1e-300;
  long k[3] = {lo[0], lo[1], lo[2]};
  for (;;) {
    long w[3];
    Point p(box.dim);
    for (int a = 0; a < box.dim; ++a) {
      w[a] = ((k[a] % lat.count) + lat.count) % lat.count;
      p[a] = h * (static_cast<double>(w[a]) + 0.5);
    }
    const double dist = box_distance(box, p, center);
    if (dist * dist <= r2) {
      out.push_back(lat.linear_index(w));
    }
    int a = box.dim - 1;
    while (a >= 0) {
      if (++k[a] <= hi[a]) {
        break;
      }
      k[a] = lo[a];
      --a;
    }
    if (a < 0) {
      break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double Cube::distance(const Point& y) const {
  double s = 0.0;
  for (int a = 0; a < center.size(); ++a) {
    const double e = std::max(std::fabs(y[a] - center[a]) - half, 0.0);
    s += e * e;
  }
  return std::sqrt(s);
}

bool Cube::contains_half_open(const Point& y) const {
  for (int a = 0; a < center.size(); ++a) {
    if (y[a] < center[a] - half || y[a] >= center[a] + half) {
      return false;
    }
  }
  return true;
}

void FieldSample::validate() const {
  if (values.size() != box.site_count()) {
    throw Error(ErrorCode::InvalidArgument, "field size does not match the box");
  }
  if (!values.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "field values must be finite");
  }
}

UnitCells UnitCells::covering(const BoxSpec& box) {
  UnitCells c;
  c.dim = box.dim;
  c.lower = box.lower();
  c.upper = box.upper();
  if (box.padded_side() <= 0.0) {
    c.first = 0;
    c.count = 0;
    return c;
  }
  c.first = static_cast<long>(std::floor(c.lower));
  c.count = static_cast<long>(std::ceil(c.upper)) - c.first;
  return c;
}

long UnitCells::size() const { return ipow(count, dim); }

Point UnitCells::center(long index) const {
  Point p(dim);
  for (int a = dim - 1; a >= 0; --a) {
    p[a] = static_cast<double>(first + index % count) + 0.5;
    index /= count;
  }
  return p;
}

void UnitCells::extent(long index, Point& lo, Point& width) const {
  lo.resize(dim);
  width.resize(dim);
  for (int a = dim - 1; a >= 0; --a) {
    const double j = static_cast<double>(first + index % count);
    index /= count;
    const double a0 = std::max(j, lower);
    const double a1 = std::min(j + 1.0, upper);
    lo[a] = a0;
    width[a] = std::max(a1 - a0, 0.0);
  }
}

double UnitCells::volume(long index) const {
  Point lo, width;
  extent(index, lo, width);
  return width.prod();
}

long UnitCells::locate(const Point& p) const {
  long index = 0;
  for (int a = 0; a < dim; ++a) {
    const long j = static_cast<long>(std::floor(p[a])) - first;
    if (j < 0 || j >= count) {
      return -1;
    }
    index = index * count + j;
  }
  return index;
}

}  // namespace mfilab
