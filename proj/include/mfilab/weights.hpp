#pragma once

#include <functional>
#include <limits>
#include <json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mfilab {

/// A scale weight pi(l) on [0, inf): a density part plus an optional atom.
/// Values and masses include the normalization multiplier.
class WeightFunction {
 public:
  using Density = std::function<double(double)>;

  WeightFunction() = default;
  WeightFunction(std::string family, nlohmann::json params, Density density);

  const std::string& family() const { return family_; }
  const nlohmann::json& params() const { return params_; }
  double normalization() const { return normalization_; }
  bool integrable() const { return integrable_; }

  /// Density part at l (atoms excluded).
  double operator()(double ell) const;
  /// Mass of [a, b], atoms included; b may be +inf.
  double integral(double a, double b) const;
  double total_mass() const;
  double tail_mass(double ell) const { return integral(ell, kInfinity); }
  /// Smallest l (to 1e-6 relative) with mass beyond l at most (1 - q) of the total.
  double mass_quantile(double q) const;

  std::optional<std::pair<double, double>> atom() const { return atom_; }
  /// Radius of the ball attached to scale l; l + 1 unless an influence is set.
  double ball_radius(double ell, int dim) const;
  bool has_influence() const { return static_cast<bool>(influence_); }
  /// Support of the density when known to be compact.
  std::optional<double> support_end() const { return support_end_; }
  const std::vector<double>& kinks() const { return kinks_; }

  WeightFunction scaled(double factor) const;
  WeightFunction& set_normalization(double c);
  WeightFunction& set_integrable(bool flag);
  WeightFunction& set_atom(double position, double mass);
  WeightFunction& set_influence(std::function<double(double)> f);
  WeightFunction& set_support_end(double end);
  WeightFunction& set_kinks(std::vector<double> kinks);
  /// Piecewise-linear density, integrated exactly.
  WeightFunction& set_tabulation(std::vector<double> ell, std::vector<double> values);

  nlohmann::json to_json() const;

  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

 private:
  double density_integral(double a, double b) const;

  std::string family_ = "zero";
  nlohmann::json params_ = nlohmann::json::object();
  Density density_;
  double normalization_ = 1.0;
  bool integrable_ = true;
  std::optional<std::pair<double, double>> atom_;
  std::function<double(double)> influence_;
  std::optional<double> support_end_;
  std::vector<double> kinks_;
  std::vector<double> tab_ell_;
  std::vector<double> tab_val_;
};

/// exp(-l / C).
WeightFunction exponential_weight(double c);
/// exp(-l^d / C).
WeightFunction stretched_exp_weight(double c, int dim);
/// exp(-(l / C) log(l / C)).
WeightFunction exp_log_weight(double c);
/// Standard functional inequality on balls of radius R0 + 1: an atom of
/// mass (R0 + 1)^d at l = R0.
WeightFunction compact_weight(double r0, int dim);
/// Piecewise-linear through (l_i, v_i), zero beyond the last node.
WeightFunction tabulated_weight(std::vector<double> ell, std::vector<double> values);

/// Conditional tail of an action radius for one perturbation slot.
struct ActionRadiusSlot {
  /// P[slot perturbed].
  double perturbation_prob = 1.0;
  /// S(u) = P[rho >= u | perturbed]; S(u) = 1 for u <= 0 is enforced.
  std::function<double(double)> survival;
};

/// Weight assembled from conditional action-radius tails: for every scale
/// l, (l+1)^d sum_t p_t (S_t(l-1) - S_t(l)) / (1 - p_t S_t(l)), with 0/0 = 0.
/// Tabulated at step 1/64 up to l_max. The influence f must satisfy f(u) >= u
/// on the tabulation, otherwise InfluenceViolation.
WeightFunction weight_thm_ar(const std::vector<ActionRadiusSlot>& slots, int dim,
                             std::function<double(double)> influence, double ell_max);

/// Measured exceedance P[rho^l >= l] at scale l.
struct ExceedanceSample {
  double ell = 0.0;
  double probability = 0.0;
};

/// Iterated action-radius weight: (l+1)^d for l <= 4R, (l+1)^d 8 pi0(l/2) / l
/// beyond. pi0 must be nonincreasing on the check grid; the supplied
/// exceedances at l >= R must not exceed 1/4 (QuarterConditionViolated).
WeightFunction weight_thm_ar_rpm(std::function<double(double)> pi0, double r, int dim,
                                 const std::vector<ExceedanceSample>& exceedances = {},
                                 double check_max = 256.0);

}  // namespace mfilab
