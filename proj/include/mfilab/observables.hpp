#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <string>
#include <vector>

#include "mfilab/lattice.hpp"

namespace mfilab {

/// A bounded functional Z(A) of a lattice field that only reads the sites in
/// its support.
class Observable {
 public:
  enum class Kind { Constant, WindowAverage, ClippedExp, SiteMax, TwoPoint };

  /// Z = c.
  static Observable constant(const BoxSpec& box, double c);
  /// Z = sum_s phi(s) A(s) h^d with phi a bump on the open ball B(center, width),
  /// normalized so that sum_s phi(s) h^d = 1.
  static Observable window_average(const BoxSpec& box, const Point& center, double width);
  /// Z = exp(clamp(kappa <A phi>, -clip, clip)).
  static Observable clipped_exp(const BoxSpec& box, const Point& center, double width,
                                double kappa, double clip);
  /// Z = max of A over the sites of the closed cube center + [-half, half]^d.
  static Observable site_max(const BoxSpec& box, const Point& center, double half);
  /// Z = A(x1) A(x2) at the sites nearest to x1 and x2.
  static Observable two_point(const BoxSpec& box, const Point& x1, const Point& x2);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const nlohmann::json& params() const { return params_; }
  const BoxSpec& box() const { return box_; }
  bool smooth() const { return kind_ != Kind::SiteMax; }

  /// Observation-lattice indices read by the observable, ascending.
  const std::vector<long>& support() const { return support_; }
  /// Bump weights phi(s) h^d on the support (averages only).
  const std::vector<double>& weights() const { return weights_; }

  double operator()(const Eigen::VectorXd& values) const;
  double operator()(const FieldSample& field) const { return (*this)(field.values); }

  nlohmann::json to_json() const;
  /// {"kind": ..., ...}; throws ConfigValidation.
  static Observable from_json(const BoxSpec& box, const nlohmann::json& j,
                              const std::string& key);

 private:
  Kind kind_ = Kind::Constant;
  std::string name_;
  nlohmann::json params_;
  BoxSpec box_;
  std::vector<long> support_;
  std::vector<double> weights_;
  double c_ = 0.0;
  double kappa_ = 1.0;
  double clip_ = 1.0;
  long site1_ = 0;
  long site2_ = 0;
};

}  // namespace mfilab
