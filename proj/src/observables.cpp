#include "mfilab/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfilab/config.hpp"
#include "mfilab/error.hpp"

namespace mfilab {

namespace {

nlohmann::json point_json(const Point& p) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < p.size(); ++i) a.push_back(p[i]);
  return a;
}

Point read_point(ConfigView& v, const std::string& name, const BoxSpec& box) {
  std::vector<double> fallback(static_cast<std::size_t>(box.dim), 0.5 * box.side);
  const std::vector<double> xs = v.numbers(name, fallback);
  if (static_cast<int>(xs.size()) != box.dim) {
    throw Error(ErrorCode::ConfigValidation,
                v.key(name) + ": expected " + std::to_string(box.dim) + " coordinates");
  }
  Point p(box.dim);
  for (int a = 0; a < box.dim; ++a) p[a] = xs[static_cast<std::size_t>(a)];
  return p;
}

}  // namespace

Observable Observable::constant(const BoxSpec& box, double c) {
  Observable o;
  o.kind_ = Kind::Constant;
  o.name_ = "constant";
  o.params_ = {{"value", c}};
  o.box_ = box;
  o.c_ = c;
  return o;
}

Observable Observable::window_average(const BoxSpec& box, const Point& center, double width) {
  if (!(width > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "window width must be positive");
  }
  Observable o;
  o.kind_ = Kind::WindowAverage;
  o.name_ = "window_average";
  o.params_ = {{"center", point_json(center)}, {"width", width}};
  o.box_ = box;
  const Lattice lat = Lattice::observation(box);
  double total = 0.0;
  for (long s : ball_restriction(box, center, width)) {
    const double u = box_distance(box, lat.site(s), center) / width;
    if (u < 1.0) {
      const double phi = std::exp(-1.0 / (1.0 - u * u));
      if (phi > 0.0) {
        o.support_.push_back(s);
        o.weights_.push_back(phi);
        total += phi;
      }
    }
  }
  if (o.support_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "window contains no lattice site");
  }
  for (double& w : o.weights_) w /= total;
  return o;
}

Observable Observable::clipped_exp(const BoxSpec& box, const Point& center, double width,
                                   double kappa, double clip) {
  if (!(clip > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "clip level must be positive");
  }
  Observable o = window_average(box, center, width);
  o.kind_ = Kind::ClippedExp;
  o.name_ = "clipped_exp";
  o.params_["kappa"] = kappa;
  o.params_["clip"] = clip;
  o.kappa_ = kappa;
  o.clip_ = clip;
  return o;
}

Observable Observable::site_max(const BoxSpec& box, const Point& center, double half) {
  if (!(half >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "subwindow half-width must be nonnegative");
  }
  Observable o;
  o.kind_ = Kind::SiteMax;
  o.name_ = "site_max";
  o.params_ = {{"center", point_json(center)}, {"half", half}};
  o.box_ = box;
  const Lattice lat = Lattice::observation(box);
  // Sup-norm ball of radius `half`.
  for (long s : ball_restriction(box, center, half * std::sqrt(static_cast<double>(box.dim)))) {
    const Point y = lat.site(s);
    bool inside = true;
    for (int a = 0; a < box.dim; ++a) {
      double diff = std::fabs(y[a] - center[a]);
      if (box.periodic()) diff = std::min(diff, box.side - diff);
      inside = inside && diff <= half + 1e-12;
    }
    if (inside) o.support_.push_back(s);
  }
  if (o.support_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "subwindow contains no lattice site");
  }
  return o;
}

Observable Observable::two_point(const BoxSpec& box, const Point& x1, const Point& x2) {
  Observable o;
  o.kind_ = Kind::TwoPoint;
  o.name_ = "two_point";
  o.params_ = {{"x1", point_json(x1)}, {"x2", point_json(x2)}};
  o.box_ = box;
  const Lattice lat = Lattice::observation(box);
  const long a = lat.nearest(x1);
  const long b = lat.nearest(x2);
  o.support_ = {a, b};
  o.site1_ = a;
  o.site2_ = b;
  std::sort(o.support_.begin(), o.support_.end());
  o.support_.erase(std::unique(o.support_.begin(), o.support_.end()), o.support_.end());
  return o;
}

double Observable::operator()(const Eigen::VectorXd& v) const {
  switch (kind_) {
    case Kind::Constant:
      return c_;
    case Kind::WindowAverage:
    case Kind::ClippedExp: {
      double z = 0.0;
      for (std::size_t i = 0; i < support_.size(); ++i) {
        z += weights_[i] * v[support_[i]];
      }
      if (kind_ == Kind::WindowAverage) return z;
      return std::exp(std::clamp(kappa_ * z, -clip_, clip_));
    }
    case Kind::SiteMax: {
      double m = -std::numeric_limits<double>::infinity();
      for (long s : support_) m = std::max(m, v[s]);
      return m;
    }
    case Kind::TwoPoint:
      return v[site1_] * v[site2_];
  }
  return 0.0;
}

nlohmann::json Observable::to_json() const {
  nlohmann::json j = params_;
  j["kind"] = name_;
  return j;
}

Observable Observable::from_json(const BoxSpec& box, const nlohmann::json& j,
                                 const std::string& key) {
  ConfigView v(j, key);
  const std::string kind = v.choice(
      "kind", {"constant", "window_average", "clipped_exp", "site_max", "two_point"});
  Observable o;
  try {
    if (kind == "constant") {
      o = constant(box, v.number("value", 1.0));
    } else if (kind == "window_average") {
      const Point c = read_point(v, "center", box);
      o = window_average(box, c, v.number("width", 2.0));
    } else if (kind == "clipped_exp") {
      const Point c = read_point(v, "center", box);
      const double w = v.number("width", 2.0);
      o = clipped_exp(box, c, w, v.number("kappa", 1.0), v.number("clip", 2.0));
    } else if (kind == "site_max") {
      const Point c = read_point(v, "center", box);
      o = site_max(box, c, v.number("half", 1.0));
    } else {
      const Point a = read_point(v, "x1", box);
      const Point b = read_point(v, "x2", box);
      o = two_point(box, a, b);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigValidation) throw;
    throw Error(ErrorCode::ConfigValidation, key + ": " + e.what());
  }
  v.finish();
  return o;
}

}  // namespace mfilab
