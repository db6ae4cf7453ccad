#pragma once

#include <cstdint>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfilab/gaussian.hpp"
#include "mfilab/inclusions.hpp"
#include "mfilab/lattice.hpp"
#include "mfilab/laws.hpp"
#include "mfilab/pointproc.hpp"
#include "mfilab/random.hpp"
#include "mfilab/tessellation.hpp"

namespace mfilab {

using Keys = std::vector<std::uint64_t>;

/// A random field written as a deterministic map of independent units. Each
/// unit owns a 64-bit key; a realization is the key vector, and resampling a
/// block replaces the keys of the units it contains.
class FieldModel {
 public:
  explicit FieldModel(const BoxSpec& box) : box_(box) {}
  virtual ~FieldModel() = default;

  const BoxSpec& box() const { return box_; }
  virtual std::string id() const = 0;
  virtual nlohmann::json describe() const = 0;

  virtual long unit_count() const = 0;
  virtual Point unit_center(long unit) const = 0;
  virtual bool supports_block_resampling() const { return true; }

  /// The field on the observation lattice.
  virtual FieldSample render(const Keys& keys) const = 0;

  Keys draw_keys(const RngStream& rng) const;
  FieldSample sample(const RngStream& rng) const { return render(draw_keys(rng)); }

  /// Units whose centre lies in the half-open cube.
  std::vector<long> units_in_cube(const Cube& cube) const;
  /// Units whose centre lies within distance r of x (box metric).
  std::vector<long> units_in_ball(const Point& x, double r) const;
  /// Copy of keys with the listed units redrawn from rng.
  Keys resample(const Keys& keys, const std::vector<long>& units, const RngStream& rng) const;

 protected:
  BoxSpec box_;
};

/// Units are observation sites; each value is an independent draw.
class WhiteNoiseModel : public FieldModel {
 public:
  WhiteNoiseModel(const BoxSpec& box, const ScalarLaw& law);
  std::string id() const override { return "white_noise"; }
  nlohmann::json describe() const override;
  long unit_count() const override { return lattice_.size(); }
  Point unit_center(long unit) const override { return lattice_.site(unit); }
  FieldSample render(const Keys& keys) const override;

 private:
  ScalarLaw law_;
  Lattice lattice_;
};

/// Average of padded-lattice noise over the closed ball of radius R.
class MovingAverageModel : public FieldModel {
 public:
  MovingAverageModel(const BoxSpec& box, double radius, const ScalarLaw& law);
  std::string id() const override { return "moving_average"; }
  nlohmann::json describe() const override;
  long unit_count() const override { return noise_.size(); }
  Point unit_center(long unit) const override { return noise_.site(unit); }
  FieldSample render(const Keys& keys) const override;
  double radius() const { return radius_; }

 private:
  double radius_;
  ScalarLaw law_;
  Lattice noise_;
  Lattice obs_;
  long layers_ = 0;
  std::vector<long> stencil_;  // linear offsets on the noise lattice
};

/// b(X) with X the spectral Gaussian field driven by per-site white noise.
class GaussianModel : public FieldModel {
 public:
  GaussianModel(const BoxSpec& box, const CovarianceModel& cov, const LipschitzClamp& clamp);
  std::string id() const override { return "gaussian"; }
  nlohmann::json describe() const override;
  long unit_count() const override { return lattice_.size(); }
  Point unit_center(long unit) const override { return lattice_.site(unit); }
  FieldSample render(const Keys& keys) const override;
  /// The field before the clamp.
  FieldSample latent(const Keys& keys) const;
  const CovarianceModel& covariance() const { return cov_; }
  const LipschitzClamp& clamp() const { return clamp_; }

 private:
  CovarianceModel cov_;
  LipschitzClamp clamp_;
  GaussianSynthesizer synth_;
  Lattice lattice_;
};

/// Common base of the models driven by a cell process (units are unit cells).
class PointFieldModel : public FieldModel {
 public:
  PointFieldModel(const BoxSpec& box, double intensity, std::vector<DecorationLaw> marks);
  long unit_count() const override { return process_.cells().size(); }
  Point unit_center(long unit) const override { return process_.cells().center(unit); }
  const CellProcess& process() const { return process_; }
  /// The point configuration that generates the field.
  virtual PointConfiguration points(const Keys& keys) const = 0;

 protected:
  CellProcess process_;
};

class VoronoiModel : public PointFieldModel {
 public:
  VoronoiModel(const BoxSpec& box, const VoronoiFieldSpec& spec);
  std::string id() const override { return "voronoi"; }
  nlohmann::json describe() const override;
  PointConfiguration points(const Keys& keys) const override;
  FieldSample render(const Keys& keys) const override;

 private:
  VoronoiFieldSpec spec_;
};

class PoissonInclusionModel : public PointFieldModel {
 public:
  PoissonInclusionModel(const BoxSpec& box, const InclusionModelSpec& spec);
  std::string id() const override { return "inclusions"; }
  nlohmann::json describe() const override;
  PointConfiguration points(const Keys& keys) const override;
  FieldSample render(const Keys& keys) const override;
  const InclusionModelSpec& spec() const { return spec_; }

 private:
  InclusionModelSpec spec_;
};

/// Inclusions centred on the accepted points of a hardcore construction. With
/// no inclusion spec the field is the indicator of the union of the balls
/// B(y, R) around accepted points.
class HardcoreFieldModel : public PointFieldModel {
 public:
  enum class Kind { Parking, Hardcore };

  HardcoreFieldModel(const BoxSpec& box, Kind kind, const HardcoreSpec& hardcore,
                     std::optional<InclusionModelSpec> inclusions = std::nullopt,
                     const ParkingOptions& options = {});
  std::string id() const override;
  nlohmann::json describe() const override;
  PointConfiguration points(const Keys& keys) const override;
  FieldSample render(const Keys& keys) const override;
  /// Full parking run (parking kind only).
  ParkingRun run(const Keys& keys) const;
  Kind kind() const { return kind_; }
  const HardcoreSpec& hardcore() const { return hardcore_; }
  const InclusionModelSpec& field_spec() const { return field_; }
  bool indicator() const { return !inclusions_; }

 private:
  Kind kind_;
  HardcoreSpec hardcore_;
  bool inclusions_;
  InclusionModelSpec field_;
  ParkingOptions options_;
};

/// Voronoi cells or priority inclusions coloured by a Gaussian field read at
/// the generating points. Units are the cells of the point process followed by
/// the sites of the colour lattice, a periodic box of the padded side.
class ColoredModel : public FieldModel {
 public:
  ColoredModel(const BoxSpec& box, ColorBase base, double intensity,
               const CovarianceModel& cov, const LipschitzClamp& clamp,
               const InclusionModelSpec& inclusions = {});
  std::string id() const override;
  nlohmann::json describe() const override;
  long unit_count() const override;
  Point unit_center(long unit) const override;
  FieldSample render(const Keys& keys) const override;

 private:
  ColorBase base_;
  InclusionModelSpec inclusions_;
  CellProcess process_;
  GaussianModel color_;
};

/// Precomputed samples; key k selects sample k mod n. Block resampling is
/// not available.
class SampleSetModel : public FieldModel {
 public:
  explicit SampleSetModel(std::vector<FieldSample> samples);
  std::string id() const override { return "sample_set"; }
  nlohmann::json describe() const override;
  long unit_count() const override { return 1; }
  Point unit_center(long) const override;
  bool supports_block_resampling() const override { return false; }
  FieldSample render(const Keys& keys) const override;

 private:
  std::vector<FieldSample> samples_;
};

BoxSpec box_from_json(const nlohmann::json& j, const std::string& key = "box");
nlohmann::json box_to_json(const BoxSpec& box);
InclusionModelSpec inclusion_spec_from_json(const nlohmann::json& j, const std::string& key);
CovarianceModel covariance_from_json(const nlohmann::json& j, const std::string& key);
LipschitzClamp clamp_from_json(const nlohmann::json& j, const std::string& key);

/// Builds a model from {"type": ..., "box": {...}, ...}. Throws
/// ConfigValidation naming the offending key.
std::unique_ptr<FieldModel> make_model(const nlohmann::json& j);

}  // namespace mfilab
