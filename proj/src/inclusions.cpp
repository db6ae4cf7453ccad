#include "mfilab/inclusions.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "mfilab/error.hpp"
#include "mfilab/tessellation.hpp"

namespace mfilab {

ScalarLaw bounded_uniform_radius(double r_max) { return ScalarLaw::uniform(0.0, r_max); }

std::vector<std::string> InclusionModelSpec::required_marks() const {
  switch (scheme) {
    case Scheme::TwoPhase: return {"V"};
    case Scheme::Sum: return {"V", "W"};
    case Scheme::Priority: return {"V", "W", "U"};
  }
  return {};
}

std::vector<DecorationLaw> InclusionModelSpec::mark_laws() const {
  return {{"V", radius}, {"W", value}, {"U", ScalarLaw::uniform(0.0, 1.0)}};
}

double InclusionModelSpec::apply_map(double s) const {
  return map == SumMap::Clip ? std::clamp(s, clip_lo, clip_hi) : s;
}

double InclusionModelSpec::default_margin() const { return radius.quantile(1.0 - 1e-4) + 1.0; }

std::string InclusionModelSpec::scheme_name() const {
  switch (scheme) {
    case Scheme::TwoPhase: return "two_phase";
    case Scheme::Sum: return "sum";
    case Scheme::Priority: return "priority";
  }
  return "unknown";
}

nlohmann::json InclusionModelSpec::to_json() const {
  nlohmann::json j{{"scheme", scheme_name()},
                   {"beta", beta},
                   {"radius", radius.to_json()},
                   {"intensity", intensity}};
  if (scheme == Scheme::TwoPhase) {
    j["alpha"] = alpha;
  } else {
    j["value"] = value.to_json();
  }
  if (scheme == Scheme::Sum) {
    j["map"] = map == SumMap::Clip ? "clip" : "identity";
    if (map == SumMap::Clip) {
      j["clip_lo"] = clip_lo;
      j["clip_hi"] = clip_hi;
    }
  }
  if (scheme == Scheme::Priority) {
    j["priority"] = priority == PriorityKey::Zero ? "zero"
                    : priority == PriorityKey::Radius ? "V"
                                                      : "-V";
  }
  return j;
}

namespace {

// Calls f(site) for every observation site in the closed ball B(c, r).
template <class F>
void for_sites_in_ball(const Lattice& lat, const Point& c, double r, F&& f) {
  if (!(r >= 0.0) || lat.count == 0) {
    return;
  }
  const int d = lat.dim;
  const double h = lat.spacing;
  long lo[3] = {0, 0, 0};
  long hi[3] = {0, 0, 0};
  for (int a = 0; a < d; ++a) {
    lo[a] = std::max(0L, static_cast<long>(std::ceil((c[a] - r) / h - 0.5)) - lat.first);
    hi[a] = std::min(lat.count - 1,
                     static_cast<long>(std::floor((c[a] + r) / h - 0.5)) - lat.first);
    if (hi[a] < lo[a]) {
      return;
    }
  }
  const double r2 = r * r;
  long k[3] = {lo[0], lo[1], lo[2]};
  for (;;) {
    double d2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double y = h * (static_cast<double>(lat.first + k[a]) + 0.5) - c[a];
      d2 += y * y;
    }
    if (d2 <= r2) {
      f(lat.linear_index(k));
    }
    int a = d - 1;
    while (a >= 0) {
      if (++k[a] <= hi[a]) break;
      k[a] = lo[a];
      --a;
    }
    if (a < 0) break;
  }
}

FieldSample paint_priority(const PointConfiguration& points, const InclusionModelSpec& spec,
                           const BoxSpec& box, const std::vector<double>& values) {
  const Lattice lat = Lattice::observation(box);
  const int kv = points.mark_index("V");
  const int ku = points.mark_index("U");
  std::vector<long> order(static_cast<std::size_t>(points.size()));
  std::iota(order.begin(), order.end(), 0L);
  auto key = [&](long i) {
    const double v = points.mark(i, kv);
    switch (spec.priority) {
      case InclusionModelSpec::PriorityKey::Zero: return 0.0;
      case InclusionModelSpec::PriorityKey::Radius: return v;
      case InclusionModelSpec::PriorityKey::NegRadius: return -v;
    }
    return 0.0;
  };
  std::sort(order.begin(), order.end(), [&](long i, long j) {
    const double pi = key(i), pj = key(j);
    if (pi != pj) return pi < pj;
    const double ui = points.mark(i, ku), uj = points.mark(j, ku);
    if (ui != uj) return ui < uj;
    return i < j;
  });
  FieldSample f{box, Eigen::VectorXd::Constant(lat.size(), spec.beta)};
  std::vector<char> painted(static_cast<std::size_t>(lat.size()), 0);
  for (long i : order) {
    const double w = values[static_cast<std::size_t>(i)];
    for_sites_in_ball(lat, points.position(i), points.mark(i, kv), [&](long s) {
      if (!painted[static_cast<std::size_t>(s)]) {
        painted[static_cast<std::size_t>(s)] = 1;
        f.values[s] = w;
      }
    });
  }
  return f;
}

}  // namespace

FieldSample inclusion_field(const PointConfiguration& points, const InclusionModelSpec& spec,
                            const BoxSpec& box) {
  points.require_marks(spec.required_marks());
  const Lattice lat = Lattice::observation(box);
  const int kv = points.mark_index("V");
  switch (spec.scheme) {
    case InclusionModelSpec::Scheme::TwoPhase: {
      FieldSample f{box, Eigen::VectorXd::Constant(lat.size(), spec.beta)};
      for (long i = 0; i < points.size(); ++i) {
        for_sites_in_ball(lat, points.position(i), points.mark(i, kv),
                          [&](long s) { f.values[s] = spec.alpha; });
      }
      return f;
    }
    case InclusionModelSpec::Scheme::Sum: {
      const int kw = points.mark_index("W");
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(lat.size());
      std::vector<char> covered(static_cast<std::size_t>(lat.size()), 0);
      for (long i = 0; i < points.size(); ++i) {
        const double w = points.mark(i, kw);
        for_sites_in_ball(lat, points.position(i), points.mark(i, kv), [&](long s) {
          sum[s] += w;
          covered[static_cast<std::size_t>(s)] = 1;
        });
      }
      FieldSample f{box, Eigen::VectorXd::Constant(lat.size(), spec.beta)};
      for (long s = 0; s < lat.size(); ++s) {
        if (covered[static_cast<std::size_t>(s)]) {
          f.values[s] = spec.apply_map(sum[s]);
        }
      }
      return f;
    }
    case InclusionModelSpec::Scheme::Priority: {
      const int kw = points.mark_index("W");
      std::vector<double> values(static_cast<std::size_t>(points.size()));
      for (long i = 0; i < points.size(); ++i) {
        values[static_cast<std::size_t>(i)] = points.mark(i, kw);
      }
      return paint_priority(points, spec, box, values);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown inclusion scheme");
}

GammaTilde::GammaTilde(const ScalarLaw& law) : law_(law) {
  // gamma vanishes below -1/2 (radii are nonnegative) and is nonincreasing
  // beyond the end of the grid: past the support for bounded laws, past the
  // mode for the unbounded ones.
  v0_ = -4.0;
  double v_end = 1.0;
  if (std::isfinite(law.upper())) {
    v_end = law.upper() + 1.0;
  } else if (law.family() == ScalarLaw::Family::Pareto) {
    v_end = law.param(1) + 2.0;
  } else if (law.family() == ScalarLaw::Family::Normal) {
    v_end = std::max(1.0, law.mean() + 1.0);
  }
  const long n = static_cast<long>(std::ceil((v_end - v0_) / step_)) + 1;
  suffix_max_.assign(static_cast<std::size_t>(n), 0.0);
  double run = gamma(v0_ + step_ * static_cast<double>(n - 1));
  for (long i = n - 1; i >= 0; --i) {
    run = std::max(run, gamma(v0_ + step_ * static_cast<double>(i)));
    suffix_max_[static_cast<std::size_t>(i)] = run;
  }
}

double GammaTilde::gamma(double v) const { return law_.mass(v - 0.5, v + 0.5); }

double GammaTilde::operator()(double v) const {
  const double g = gamma(v);
  const double pos = std::ceil((v - v0_) / step_);
  if (pos < 0.0) {
    return std::max(g, suffix_max_.front());
  }
  if (pos >= static_cast<double>(suffix_max_.size())) {
    return g;
  }
  return std::max(g, suffix_max_[static_cast<std::size_t>(pos)]);
}

WeightFunction gamma_weight(const ScalarLaw& radius_law, double intensity, int dim) {
  if (!(intensity > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "intensity must be positive");
  }
  if (radius_law.lower() < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "radius law must be nonnegative");
  }
  const auto gt = std::make_shared<GammaTilde>(radius_law);
  const double sd = std::sqrt(static_cast<double>(dim));
  WeightFunction w("radius_law",
                   {{"radius", radius_law.to_json()}, {"intensity", intensity}, {"d", dim}},
                   [gt, intensity, dim, sd](double l) {
                     return intensity * std::pow(l + 1.0, dim) * (*gt)(l / sd - 3.0);
                   });
  std::vector<double> kinks;
  for (double b : {radius_law.lower(), radius_law.upper()}) {
    for (double s : {-0.5, 0.5}) {
      const double l = sd * (b + s + 3.0);
      if (std::isfinite(l) && l > 0.0) {
        kinks.push_back(l);
      }
    }
  }
  std::sort(kinks.begin(), kinks.end());
  w.set_kinks(kinks);
  if (std::isfinite(radius_law.upper())) {
    w.set_support_end(sd * (radius_law.upper() + 3.5));
  }
  if (radius_law.family() == ScalarLaw::Family::Pareto && radius_law.param(0) <= dim) {
    w.set_integrable(false);
    warn("radius-law weight is not integrable: pareto exponent does not exceed d");
  }
  return w;
}

FieldSample dependent_color_field(const PointConfiguration& points, ColorBase base,
                                  const FieldSample& color, const BoxSpec& box,
                                  const InclusionModelSpec& spec) {
  const Lattice color_lat = Lattice::observation(color.box);
  std::vector<double> values(static_cast<std::size_t>(points.size()));
  for (long i = 0; i < points.size(); ++i) {
    values[static_cast<std::size_t>(i)] = color.values[color_lat.nearest(points.position(i))];
  }
  if (base == ColorBase::Voronoi) {
    const std::vector<long> labels = nearest_point_labels(points, Lattice::observation(box));
    FieldSample f{box, Eigen::VectorXd(static_cast<long>(labels.size()))};
    for (std::size_t s = 0; s < labels.size(); ++s) {
      f.values[static_cast<long>(s)] = values[static_cast<std::size_t>(labels[s])];
    }
    return f;
  }
  points.require_marks({"V", "U"});
  return paint_priority(points, spec, box, values);
}

}  // namespace mfilab
