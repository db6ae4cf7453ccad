#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "mfilab/random.hpp"

namespace mfilab {

/// log S(l) = a - rate * link(l) with link l (exponential), l^shape (weibull)
/// or l log l (exp-log).
struct TailFamily {
  enum class Kind { Exponential, Weibull, ExpLog };
  Kind kind = Kind::Exponential;
  double shape = 1.0;

  static TailFamily exponential() { return {Kind::Exponential, 1.0}; }
  static TailFamily weibull(double shape) { return {Kind::Weibull, shape}; }
  static TailFamily exp_log() { return {Kind::ExpLog, 1.0}; }

  double link(double ell) const;
  std::string name() const;
  /// "exponential", "weibull" (with shape), "exp-log".
  static TailFamily from_json(const nlohmann::json& j, const std::string& key);
};

struct FitParameter {
  std::string name;
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct TailEstimate {
  std::vector<double> samples;
  /// S(l) = P[rho >= l] tabulated on an even grid from 0 to max(rho).
  std::vector<double> survival_ell;
  std::vector<double> survival;
  TailFamily family;
  /// intercept, rate, and for weibull the scale rate^(-1/shape); 95% bootstrap CIs.
  std::vector<FitParameter> parameters;
  double r_squared = 0.0;
  double window_low = 0.0;
  double window_high = 0.0;
  long fit_points = 0;

  double parameter(const std::string& name) const;
  nlohmann::json to_json() const;
};

/// Empirical survival P[rho >= l].
double empirical_survival(const std::vector<double>& sorted_samples, double ell);

/// Least-squares fit of log S against the family link over the distinct sample
/// values in [q50, q99.5]. Throws InsufficientSamples below 200 samples and
/// DegenerateSamples when all samples agree.
TailEstimate tail_fit(const std::vector<double>& samples, const TailFamily& family,
                      const RngStream& rng, int bootstrap = 200);

}  // namespace mfilab
