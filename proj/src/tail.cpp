#include "mfilab/tail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfilab/config.hpp"
#include "mfilab/error.hpp"

namespace mfilab {

double TailFamily::link(double ell) const {
  switch (kind) {
    case Kind::Exponential: return ell;
    case Kind::Weibull: return std::pow(ell, shape);
    case Kind::ExpLog: return ell > 0.0 ? ell * std::log(ell) : 0.0;
  }
  return ell;
}

std::string TailFamily::name() const {
  switch (kind) {
    case Kind::Exponential: return "exponential";
    case Kind::Weibull: return "weibull";
    case Kind::ExpLog: return "exp-log";
  }
  return "?";
}

TailFamily TailFamily::from_json(const nlohmann::json& j, const std::string& key) {
  ConfigView v(j, key);
  const std::string f = v.choice("family", "exponential", {"exponential", "weibull", "exp-log"});
  TailFamily out;
  if (f == "weibull") {
    out = weibull(v.number("shape", 2.0));
    if (!(out.shape > 0.0)) {
      throw Error(ErrorCode::ConfigValidation, v.key("shape") + ": must be positive");
    }
  } else if (f == "exp-log") {
    out = exp_log();
  }
  v.finish();
  return out;
}

double TailEstimate::parameter(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p.value;
  }
  throw Error(ErrorCode::InvalidArgument, "no fitted parameter '" + name + "'");
}

nlohmann::json TailEstimate::to_json() const {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& p : parameters) {
    params[p.name] = {{"value", p.value}, {"ci95", {p.ci_low, p.ci_high}}};
  }
  nlohmann::json fam = {{"family", family.name()}};
  if (family.kind == TailFamily::Kind::Weibull) fam["shape"] = family.shape;
  return {{"fit_family", fam},
          {"parameters", params},
          {"r_squared", r_squared},
          {"fit_window", {window_low, window_high}},
          {"fit_points", fit_points},
          {"n_samples", samples.size()},
          {"survival", {{"ell", survival_ell}, {"S", survival}}}};
}

double empirical_survival(const std::vector<double>& sorted, double ell) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), ell);
  return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

namespace {

struct Fit {
  double intercept = 0.0;
  double rate = 0.0;
  double r2 = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  long points = 0;
  bool ok = false;
};

double nearest_rank(const std::vector<double>& sorted, double q) {
  const double n = static_cast<double>(sorted.size());
  const long k = std::max(1L, static_cast<long>(std::ceil(q * n)));
  return sorted[static_cast<std::size_t>(std::min<long>(k, static_cast<long>(sorted.size())) - 1)];
}

Fit fit_sorted(const std::vector<double>& sorted, const TailFamily& family) {
  Fit f;
  f.lo = nearest_rank(sorted, 0.5);
  f.hi = nearest_rank(sorted, 0.995);
  const double n = static_cast<double>(sorted.size());
  std::vector<double> xs, ys;
  auto it = std::lower_bound(sorted.begin(), sorted.end(), f.lo);
  while (it != sorted.end() && *it <= f.hi) {
    const double v = *it;
    xs.push_back(family.link(v));
    ys.push_back(std::log(static_cast<double>(sorted.end() - it) / n));
    it = std::upper_bound(it, sorted.end(), v);
  }
  f.points = static_cast<long>(xs.size());
  if (xs.size() < 2) return f;
  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) return f;
  const double slope = sxy / sxx;
  f.rate = -slope;
  f.intercept = my - slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  f.ok = true;
  return f;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  const double t = pos - static_cast<double>(i);
  return (1.0 - t) * v[i] + t * v[i + 1];
}

}  // namespace

TailEstimate tail_fit(const std::vector<double>& samples, const TailFamily& family,
                      const RngStream& rng, int bootstrap) {
  if (samples.size() < 200) {
    throw Error(ErrorCode::InsufficientSamples,
                "tail fit needs at least 200 samples, got " + std::to_string(samples.size()));
  }
  for (double s : samples) {
    if (!std::isfinite(s) || s < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "radii must be finite and nonnegative");
    }
  }
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) {
    throw Error(ErrorCode::DegenerateSamples, "all samples are equal");
  }
  const Fit base = fit_sorted(sorted, family);
  if (!base.ok) {
    throw Error(ErrorCode::DegenerateSamples, "fewer than two distinct values in the fit window");
  }

  TailEstimate out;
  out.samples = samples;
  out.family = family;
  out.r_squared = base.r2;
  out.window_low = base.lo;
  out.window_high = base.hi;
  out.fit_points = base.points;
  constexpr int kGrid = 200;
  for (int i = 0; i <= kGrid; ++i) {
    const double ell = sorted.back() * i / kGrid;
    out.survival_ell.push_back(ell);
    out.survival.push_back(empirical_survival(sorted, ell));
  }

  std::vector<double> bi, br;
  std::vector<double> resample(sorted.size());
  const double n = static_cast<double>(sorted.size());
  for (int b = 0; b < bootstrap; ++b) {
    Philox e(unit_key(rng, static_cast<std::uint64_t>(b)));
    for (auto& v : resample) {
      const auto k = std::min(sorted.size() - 1, static_cast<std::size_t>(uniform01(e) * n));
      v = sorted[k];
    }
    std::sort(resample.begin(), resample.end());
    const Fit f = fit_sorted(resample, family);
    if (!f.ok) continue;
    bi.push_back(f.intercept);
    br.push_back(f.rate);
  }
  auto param = [&](const std::string& name, double value, std::vector<double> boot) {
    FitParameter p{name, value, value, value};
    if (boot.size() >= 2) {
      p.ci_low = percentile(boot, 0.025);
      p.ci_high = percentile(boot, 0.975);
    }
    return p;
  };
  out.parameters.push_back(param("intercept", base.intercept, bi));
  out.parameters.push_back(param("rate", base.rate, br));
  if (family.kind == TailFamily::Kind::Weibull) {
    auto scale = [&](double rate) {
      return rate > 0.0 ? std::pow(rate, -1.0 / family.shape)
                        : std::numeric_limits<double>::infinity();
    };
    std::vector<double> bs;
    for (double r : br) bs.push_back(scale(r));
    FitParameter p = param("scale", scale(base.rate), bs);
    out.parameters.push_back(p);
  }
  return out;
}

}  // namespace mfilab
