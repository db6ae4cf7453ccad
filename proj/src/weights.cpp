#include "mfilab/weights.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "mfilab/error.hpp"

namespace mfilab {

namespace {

double gk(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) {
    return 0.0;
  }
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

}  // namespace

WeightFunction::WeightFunction(std::string family, nlohmann::json params, Density density)
    : family_(std::move(family)), params_(std::move(params)), density_(std::move(density)) {}

double WeightFunction::operator()(double ell) const {
  if (ell < 0.0) {
    return 0.0;
  }
  if (support_end_ && ell > *support_end_) {
    return 0.0;
  }
  if (!tab_ell_.empty()) {
    if (ell > tab_ell_.back()) {
      return 0.0;
    }
    auto it = std::upper_bound(tab_ell_.begin(), tab_ell_.end(), ell);
    if (it == tab_ell_.begin()) {
      return normalization_ * tab_val_.front();
    }
    if (it == tab_ell_.end()) {
      return normalization_ * tab_val_.back();
    }
    const std::size_t i = static_cast<std::size_t>(it - tab_ell_.begin());
    const double t = (ell - tab_ell_[i - 1]) / (tab_ell_[i] - tab_ell_[i - 1]);
    return normalization_ * ((1.0 - t) * tab_val_[i - 1] + t * tab_val_[i]);
  }
  if (!density_) {
    return 0.0;
  }
  return normalization_ * density_(ell);
}

double WeightFunction::density_integral(double a, double b) const {
  a = std::max(a, 0.0);
  if (support_end_) {
    b = std::min(b, *support_end_);
  }
  if (!(b > a)) {
    return 0.0;
  }
  if (!tab_ell_.empty()) {
    b = std::min(b, tab_ell_.back());
    double s = 0.0;
    for (std::size_t i = 1; i < tab_ell_.size(); ++i) {
      const double lo = std::max(a, tab_ell_[i - 1]);
      const double hi = std::min(b, tab_ell_[i]);
      if (hi > lo) {
        s += 0.5 * (hi - lo) * ((*this)(lo) + (*this)(hi));
      }
    }
    return s;
  }
  if (!density_) {
    return 0.0;
  }
  const std::function<double(double)> f = [this](double x) { return (*this)(x); };
  std::vector<double> cuts{a};
  for (double k : kinks_) {
    if (k > a && k < b) {
      cuts.push_back(k);
    }
  }
  const double finite_end = std::isfinite(b) ? b : std::max(cuts.back(), a) + 32.0;
  cuts.push_back(finite_end);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    // Pieces of length at most 4 keep the adaptive rule well conditioned.
    const double lo = cuts[i - 1];
    const double hi = cuts[i];
    const int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / 4.0)));
    for (int p = 0; p < pieces; ++p) {
      s += gk(f, lo + (hi - lo) * p / pieces, lo + (hi - lo) * (p + 1) / pieces);
    }
  }
  if (!std::isfinite(b)) {
    try {
      boost::math::quadrature::exp_sinh<double> tail;
      s += tail.integrate(f, finite_end, std::numeric_limits<double>::infinity());
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return s;
}

double WeightFunction::integral(double a, double b) const {
  double s = density_integral(a, b);
  if (atom_ && atom_->first >= a && atom_->first <= b) {
    s += normalization_ * atom_->second;
  }
  return s;
}

double WeightFunction::total_mass() const { return integral(0.0, kInfinity); }

double WeightFunction::mass_quantile(double q) const {
  const double total = total_mass();
  if (!(total > 0.0) || !std::isfinite(total)) {
    return 0.0;
  }
  const double target = (1.0 - q) * total;
  double hi = 1.0;
  while (tail_mass(hi) > target) {
    hi *= 2.0;
    if (hi > 1e7) {
      return hi;
    }
  }
  double lo = 0.0;
  for (int it = 0; it < 80 && hi - lo > 1e-6 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (tail_mass(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

double WeightFunction::ball_radius(double ell, int dim) const {
  if (influence_) {
    return std::sqrt(static_cast<double>(dim)) * (influence_(ell) + 1.0);
  }
  return ell + 1.0;
}

WeightFunction WeightFunction::scaled(double factor) const {
  WeightFunction w = *this;
  w.normalization_ *= factor;
  return w;
}

WeightFunction& WeightFunction::set_normalization(double c) {
  if (!(c > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "weight normalization must be positive");
  }
  normalization_ = c;
  return *this;
}

WeightFunction& WeightFunction::set_integrable(bool flag) {
  integrable_ = flag;
  return *this;
}

WeightFunction& WeightFunction::set_atom(double position, double mass) {
  atom_ = std::make_pair(position, mass);
  return *this;
}

WeightFunction& WeightFunction::set_influence(std::function<double(double)> f) {
  influence_ = std::move(f);
  return *this;
}

WeightFunction& WeightFunction::set_support_end(double end) {
  support_end_ = end;
  return *this;
}

WeightFunction& WeightFunction::set_kinks(std::vector<double> kinks) {
  kinks_ = std::move(kinks);
  return *this;
}

WeightFunction& WeightFunction::set_tabulation(std::vector<double> ell,
                                               std::vector<double> values) {
  if (ell.size() != values.size() || ell.empty()) {
    throw Error(ErrorCode::InvalidArgument, "tabulation needs matching nonempty arrays");
  }
  for (std::size_t i = 0; i < ell.size(); ++i) {
    if ((i > 0 && !(ell[i] > ell[i - 1])) || !(values[i] >= 0.0) || !std::isfinite(values[i])) {
      throw Error(ErrorCode::InvalidArgument,
                  "tabulation needs increasing nodes and finite nonnegative values");
    }
  }
  tab_ell_ = std::move(ell);
  tab_val_ = std::move(values);
  return *this;
}

nlohmann::json WeightFunction::to_json() const {
  nlohmann::json j;
  j["family"] = family_;
  j["params"] = params_;
  j["normalization"] = normalization_;
  j["integrable"] = integrable_;
  if (atom_) {
    j["atom"] = {{"position", atom_->first}, {"mass", atom_->second}};
  }
  if (influence_) {
    j["influence"] = true;
  }
  return j;
}

WeightFunction exponential_weight(double c) {
  if (!(c > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "exponential weight needs C > 0");
  }
  return WeightFunction("exponential", {{"C", c}}, [c](double l) { return std::exp(-l / c); });
}

WeightFunction stretched_exp_weight(double c, int dim) {
  if (!(c > 0.0) || dim < 1) {
    throw Error(ErrorCode::InvalidArgument, "stretched exponential weight needs C > 0, d >= 1");
  }
  return WeightFunction("stretched_exp", {{"C", c}, {"d", dim}},
                        [c, dim](double l) { return std::exp(-std::pow(l, dim) / c); });
}

WeightFunction exp_log_weight(double c) {
  if (!(c > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "exp-log weight needs C > 0");
  }
  return WeightFunction("exp_log", {{"C", c}}, [c](double l) {
    if (l <= 0.0) {
      return 1.0;
    }
    const double u = l / c;
    return std::exp(-u * std::log(u));
  });
}

WeightFunction compact_weight(double r0, int dim) {
  if (!(r0 >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "compact weight needs R0 >= 0");
  }
  WeightFunction w("compact", {{"R0", r0}, {"d", dim}}, [](double) { return 0.0; });
  w.set_atom(r0, std::pow(r0 + 1.0, dim));
  w.set_support_end(r0);
  return w;
}

WeightFunction tabulated_weight(std::vector<double> ell, std::vector<double> values) {
  WeightFunction w("tabulated", {{"nodes", ell.size()}}, nullptr);
  w.set_tabulation(std::move(ell), std::move(values));
  return w;
}

WeightFunction weight_thm_ar(const std::vector<ActionRadiusSlot>& slots, int dim,
                             std::function<double(double)> influence, double ell_max) {
  if (!(ell_max > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tabulation range must be positive");
  }
  const int steps = static_cast<int>(std::ceil(ell_max * 64.0));
  std::vector<double> ell(static_cast<std::size_t>(steps) + 1);
  std::vector<double> val(ell.size(), 0.0);
  for (int k = 0; k <= steps; ++k) {
    const double l = k / 64.0;
    ell[static_cast<std::size_t>(k)] = l;
    if (influence) {
      const double fl = influence(l);
      if (!(fl >= l - 1e-12)) {
        throw Error(ErrorCode::InfluenceViolation,
                    "influence f(" + std::to_string(l) + ") = " + std::to_string(fl) + " < u");
      }
    }
    double sum = 0.0;
    for (const auto& slot : slots) {
      auto s = [&](double u) { return u <= 0.0 ? 1.0 : slot.survival(u); };
      const double p = slot.perturbation_prob;
      const double num = p * (s(l - 1.0) - s(l));
      const double den = 1.0 - p * s(l);
      if (num == 0.0 || den <= 0.0) {
        continue;
      }
      sum += num / den;
    }
    val[static_cast<std::size_t>(k)] = std::pow(l + 1.0, dim) * std::max(sum, 0.0);
  }
  WeightFunction w("thm_ar", {{"d", dim}, {"slots", slots.size()}, {"ell_max", ell_max}}, nullptr);
  w.set_tabulation(std::move(ell), std::move(val));
  if (influence) {
    w.set_influence(std::move(influence));
  }
  return w;
}

WeightFunction weight_thm_ar_rpm(std::function<double(double)> pi0, double r, int dim,
                                 const std::vector<ExceedanceSample>& exceedances,
                                 double check_max) {
  if (!(r >= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "R must be at least 1");
  }
  double prev = pi0(0.0);
  for (int k = 1; k <= static_cast<int>(check_max * 16.0); ++k) {
    const double v = pi0(k / 16.0);
    if (v > prev * (1.0 + 1e-12) + 1e-300) {
      throw Error(ErrorCode::InvalidArgument, "pi0 must be nonincreasing");
    }
    prev = v;
  }
  double sup = 0.0;
  for (const auto& e : exceedances) {
    if (e.ell >= r) {
      sup = std::max(sup, e.probability);
    }
  }
  if (sup > 0.25) {
    throw Error(ErrorCode::QuarterConditionViolated,
                "sup over l >= R of P[rho >= l] is " + std::to_string(sup) + " > 1/4");
  }
  const double d = static_cast<double>(dim);
  WeightFunction w("thm_ar_rpm", {{"R", r}, {"d", dim}, {"measured_sup", sup}},
                   [pi0 = std::move(pi0), r, d](double l) {
                     const double base = std::pow(l + 1.0, d);
                     if (l <= 4.0 * r) {
                       return base;
                     }
                     return base * 8.0 / l * pi0(0.5 * l);
                   });
  w.set_kinks({4.0 * r});
  return w;
}

}  // namespace mfilab
