#pragma once

#include <json.hpp>
#include <string>

#include "mfilab/lattice.hpp"
#include "mfilab/laws.hpp"
#include "mfilab/pointproc.hpp"
#include "mfilab/weights.hpp"

namespace mfilab {

/// Radius laws: bounded uniform on [0, r_max], exponential, pareto.
ScalarLaw bounded_uniform_radius(double r_max);

struct InclusionModelSpec {
  enum class Scheme { TwoPhase, Sum, Priority };
  enum class SumMap { Identity, Clip };
  enum class PriorityKey { Zero, Radius, NegRadius };

  Scheme scheme = Scheme::TwoPhase;
  double alpha = 1.0;
  double beta = 0.0;
  SumMap map = SumMap::Clip;
  double clip_lo = 0.0;
  double clip_hi = 1.0;
  PriorityKey priority = PriorityKey::Radius;
  ScalarLaw radius = ScalarLaw::exponential(1.0);
  ScalarLaw value = ScalarLaw::uniform(0.0, 1.0);
  double intensity = 1.0;

  std::vector<std::string> required_marks() const;
  /// Mark laws for a cell process in the order V, W, U.
  std::vector<DecorationLaw> mark_laws() const;
  double apply_map(double s) const;
  /// quantile(V, 1 - 1e-4) + 1.
  double default_margin() const;
  std::string scheme_name() const;
  nlohmann::json to_json() const;
};

/// Rasterizes balls B(P_j, V_j) (closed) on the observation lattice.
FieldSample inclusion_field(const PointConfiguration& points, const InclusionModelSpec& spec,
                            const BoxSpec& box);

/// gamma(v) = P[v - 1/2 <= V < v + 1/2] and its right running supremum.
class GammaTilde {
 public:
  explicit GammaTilde(const ScalarLaw& law);
  double gamma(double v) const;
  double operator()(double v) const;

 private:
  ScalarLaw law_;
  double v0_ = 0.0;
  double step_ = 1.0 / 256.0;
  std::vector<double> suffix_max_;
};

/// pi(l) = mu (l + 1)^d gamma~(l / sqrt(d) - 3). Flags the weight as not
/// integrable (with a warning) when a pareto exponent does not exceed d.
WeightFunction gamma_weight(const ScalarLaw& radius_law, double intensity, int dim);

enum class ColorBase { Inclusions, Voronoi };

/// Cell or inclusion values read from a color field at the lattice site
/// nearest to each generating point. The inclusion base paints with the
/// priority scheme of `spec` (beta outside).
FieldSample dependent_color_field(const PointConfiguration& points, ColorBase base,
                                  const FieldSample& color, const BoxSpec& box,
                                  const InclusionModelSpec& spec = {});

}  // namespace mfilab
