#pragma once

#include <json.hpp>
#include <string>

#include "mfilab/random.hpp"

namespace mfilab {

/// One-dimensional laws used for marks, cell values and radii.
/// Every draw consumes a fixed number of engine outputs (two for normal,
/// one otherwise) so that streams stay aligned across laws.
class ScalarLaw {
 public:
  enum class Family { Constant, Uniform, TwoPoint, Normal, Exponential, Pareto };

  static ScalarLaw constant(double value);
  static ScalarLaw uniform(double a, double b);
  /// Value a with probability p, b otherwise.
  static ScalarLaw two_point(double a, double b, double p = 0.5);
  static ScalarLaw normal(double mean, double sd);
  static ScalarLaw exponential(double rate);
  /// P[V >= v] = (scale / v)^alpha for v >= scale.
  static ScalarLaw pareto(double alpha, double scale);

  Family family() const { return family_; }
  double param(int i) const { return p_[i]; }
  std::string name() const;

  double sample(Philox& engine) const;
  double cdf(double x) const;
  /// P[V >= x].
  double survival(double x) const;
  /// P[a <= V < b].
  double mass(double a, double b) const;
  double quantile(double p) const;
  double mean() const;
  double variance() const;
  double lower() const;
  double upper() const;

  nlohmann::json to_json() const;
  /// Accepts {"family": name, ...params}; throws ConfigValidation on bad input.
  static ScalarLaw from_json(const nlohmann::json& j, const std::string& key);

 private:
  Family family_ = Family::Constant;
  double p_[3] = {0.0, 0.0, 0.0};
};

}  // namespace mfilab
