#include "mfilab/models.hpp"

#include <cmath>

#include "mfilab/config.hpp"
#include "mfilab/error.hpp"

namespace mfilab {

Keys FieldModel::draw_keys(const RngStream& rng) const {
  Keys keys(static_cast<std::size_t>(unit_count()));
  for (std::size_t u = 0; u < keys.size(); ++u) {
    keys[u] = unit_key(rng, u);
  }
  return keys;
}

std::vector<long> FieldModel::units_in_cube(const Cube& cube) const {
  std::vector<long> out;
  for (long u = 0; u < unit_count(); ++u) {
    if (cube.contains_half_open(unit_center(u))) {
      out.push_back(u);
    }
  }
  return out;
}

std::vector<long> FieldModel::units_in_ball(const Point& x, double r) const {
  std::vector<long> out;
  const double tol = 1e-12 * std::max(1.0, r);
  for (long u = 0; u < unit_count(); ++u) {
    if (box_distance(box_, unit_center(u), x) <= r + tol) {
      out.push_back(u);
    }
  }
  return out;
}

Keys FieldModel::resample(const Keys& keys, const std::vector<long>& units,
                          const RngStream& rng) const {
  if (!supports_block_resampling()) {
    throw Error(ErrorCode::UnsupportedGenerator, id() + " does not expose block resampling");
  }
  Keys out = keys;
  for (long u : units) {
    out[static_cast<std::size_t>(u)] = unit_key(rng, static_cast<std::uint64_t>(u));
  }
  return out;
}

// ---------------------------------------------------------------------------

WhiteNoiseModel::WhiteNoiseModel(const BoxSpec& box, const ScalarLaw& law)
    : FieldModel(box), law_(law), lattice_(Lattice::observation(box)) {
  box.validate();
}

nlohmann::json WhiteNoiseModel::describe() const {
  return {{"type", id()}, {"box", box_to_json(box_)}, {"law", law_.to_json()}};
}

FieldSample WhiteNoiseModel::render(const Keys& keys) const {
  FieldSample f{box_, Eigen::VectorXd(lattice_.size())};
  for (long s = 0; s < lattice_.size(); ++s) {
    Philox e(keys[static_cast<std::size_t>(s)]);
    f.values[s] = law_.sample(e);
  }
  return f;
}

// ---------------------------------------------------------------------------

MovingAverageModel::MovingAverageModel(const BoxSpec& box, double radius, const ScalarLaw& law)
    : FieldModel(box),
      radius_(radius),
      law_(law),
      noise_(Lattice::padded(box)),
      obs_(Lattice::observation(box)) {
  box.validate();
  if (!(radius >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "moving-average radius must be nonnegative");
  }
  if (box.periodic()) {
    throw Error(ErrorCode::InvalidArgument, "moving average needs a padded box");
  }
  layers_ = -noise_.first;
  const long reach = static_cast<long>(std::floor(radius / box.spacing + 1e-9));
  if (reach > layers_) {
    throw Error(ErrorCode::InvalidArgument, "margin must be at least the averaging radius");
  }
  const int d = box.dim;
  long o[3] = {-reach, -reach, -reach};
  const double r2 = radius * radius * (1.0 + 1e-12);
  const double h = box.spacing;
  for (;;) {
    double d2 = 0.0;
    long lin = 0;
    for (int a = 0; a < d; ++a) {
      d2 += static_cast<double>(o[a] * o[a]) * h * h;
      lin = lin * noise_.count + o[a];
    }
    if (d2 <= r2) {
      stencil_.push_back(lin);
    }
    int a = d - 1;
    while (a >= 0) {
      if (++o[a] <= reach) break;
      o[a] = -reach;
      --a;
    }
    if (a < 0) break;
  }
}

nlohmann::json MovingAverageModel::describe() const {
  return {{"type", id()}, {"box", box_to_json(box_)}, {"radius", radius_},
          {"law", law_.to_json()}};
}

FieldSample MovingAverageModel::render(const Keys& keys) const {
  Eigen::VectorXd noise(noise_.size());
  for (long s = 0; s < noise_.size(); ++s) {
    Philox e(keys[static_cast<std::size_t>(s)]);
    noise[s] = law_.sample(e);
  }
  FieldSample f{box_, Eigen::VectorXd(obs_.size())};
  const double inv = 1.0 / static_cast<double>(stencil_.size());
  long k[3];
  for (long s = 0; s < obs_.size(); ++s) {
    obs_.multi_index(s, k);
    long base = 0;
    for (int a = 0; a < box_.dim; ++a) {
      base = base * noise_.count + k[a] + layers_;
    }
    double sum = 0.0;
    for (long o : stencil_) {
      sum += noise[base + o];
    }
    f.values[s] = sum * inv;
  }
  return f;
}

// ---------------------------------------------------------------------------

GaussianModel::GaussianModel(const BoxSpec& box, const CovarianceModel& cov,
                             const LipschitzClamp& clamp)
    : FieldModel(box), cov_(cov), clamp_(clamp), synth_(box, cov),
      lattice_(Lattice::observation(box)) {}

nlohmann::json GaussianModel::describe() const {
  return {{"type", id()}, {"box", box_to_json(box_)}, {"covariance", cov_.to_json()},
          {"clamp", clamp_.to_json()}};
}

FieldSample GaussianModel::latent(const Keys& keys) const {
  Eigen::VectorXd w(lattice_.size());
  for (long s = 0; s < w.size(); ++s) {
    Philox e(keys[static_cast<std::size_t>(s)]);
    w[s] = standard_normal(e);
  }
  return FieldSample{box_, synth_.filter(w)};
}

FieldSample GaussianModel::render(const Keys& keys) const {
  FieldSample f = latent(keys);
  for (long s = 0; s < f.values.size(); ++s) {
    f.values[s] = clamp_(f.values[s]);
  }
  return f;
}

// ---------------------------------------------------------------------------

PointFieldModel::PointFieldModel(const BoxSpec& box, double intensity,
                                 std::vector<DecorationLaw> marks)
    : FieldModel(box), process_(box, intensity, std::move(marks)) {
  if (box.periodic()) {
    throw Error(ErrorCode::InvalidArgument, "point models need a padded box");
  }
}

VoronoiModel::VoronoiModel(const BoxSpec& box, const VoronoiFieldSpec& spec)
    : PointFieldModel(box, spec.intensity, {{"V", spec.value_law}}), spec_(spec) {}

nlohmann::json VoronoiModel::describe() const {
  return {{"type", id()}, {"box", box_to_json(box_)}, {"intensity", spec_.intensity},
          {"value", spec_.value_law.to_json()}};
}

PointConfiguration VoronoiModel::points(const Keys& keys) const {
  return process_.generate_all(keys, 0, 0.0, 0.0, 1.0);
}

FieldSample VoronoiModel::render(const Keys& keys) const {
  return voronoi_field(points(keys), box_);
}

PoissonInclusionModel::PoissonInclusionModel(const BoxSpec& box, const InclusionModelSpec& spec)
    : PointFieldModel(box, spec.intensity, spec.mark_laws()), spec_(spec) {}

nlohmann::json PoissonInclusionModel::describe() const {
  nlohmann::json j = spec_.to_json();
  j["type"] = id();
  j["box"] = box_to_json(box_);
  return j;
}

PointConfiguration PoissonInclusionModel::points(const Keys& keys) const {
  return process_.generate_all(keys, 0, 0.0, 0.0, 1.0);
}

FieldSample PoissonInclusionModel::render(const Keys& keys) const {
  return inclusion_field(points(keys), spec_, box_);
}

namespace {

InclusionModelSpec indicator_spec(double radius) {
  InclusionModelSpec s;
  s.scheme = InclusionModelSpec::Scheme::TwoPhase;
  s.alpha = 1.0;
  s.beta = 0.0;
  s.radius = ScalarLaw::constant(radius);
  return s;
}

}  // namespace

HardcoreFieldModel::HardcoreFieldModel(const BoxSpec& box, Kind kind, const HardcoreSpec& hardcore,
                                       std::optional<InclusionModelSpec> inclusions,
                                       const ParkingOptions& options)
    : PointFieldModel(box, kind == Kind::Parking ? 1.0 : hardcore.lambda,
                      (inclusions ? *inclusions : indicator_spec(hardcore.radius)).mark_laws()),
      kind_(kind),
      hardcore_(hardcore),
      inclusions_(inclusions.has_value()),
      field_(inclusions ? *inclusions : indicator_spec(hardcore.radius)),
      options_(options) {
  if (!(hardcore.radius > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "hardcore radius must be positive");
  }
  if (kind == Kind::Hardcore && hardcore.lambda * std::pow(hardcore.radius, box.dim) > 1.0) {
    warn("hardcore intensity lambda R^d exceeds 1");
  }
}

std::string HardcoreFieldModel::id() const {
  std::string base = kind_ == Kind::Parking ? "parking" : "hardcore";
  return inclusions_ ? base + "_inclusions" : base;
}

nlohmann::json HardcoreFieldModel::describe() const {
  nlohmann::json j{{"type", kind_ == Kind::Parking ? "parking" : "hardcore"},
                   {"box", box_to_json(box_)},
                   {"radius", hardcore_.radius},
                   {"field", inclusions_ ? "inclusions" : "indicator"}};
  if (kind_ == Kind::Hardcore) {
    j["lambda"] = hardcore_.lambda;
    j["horizon"] = hardcore_.horizon;
  } else {
    j["horizon_cap"] = options_.horizon_cap;
  }
  if (inclusions_) {
    j["inclusions"] = field_.to_json();
    j["inclusions"].erase("intensity");
  }
  return j;
}

ParkingRun HardcoreFieldModel::run(const Keys& keys) const {
  if (kind_ != Kind::Parking) {
    throw Error(ErrorCode::InvalidArgument, "run() is defined for parking models");
  }
  return run_parking(process_, keys, hardcore_.radius, options_);
}

PointConfiguration HardcoreFieldModel::points(const Keys& keys) const {
  if (kind_ == Kind::Parking) {
    return run(keys).accepted;
  }
  return run_hardcore(process_, keys, hardcore_);
}

FieldSample HardcoreFieldModel::render(const Keys& keys) const {
  return inclusion_field(points(keys), field_, box_);
}

// ---------------------------------------------------------------------------

namespace {

BoxSpec color_box(const BoxSpec& box) {
  BoxSpec c = box;
  c.side = box.padded_side();
  c.margin = 0.0;
  c.boundary = Boundary::Periodic;
  c.validate();
  return c;
}

}  // namespace

ColoredModel::ColoredModel(const BoxSpec& box, ColorBase base, double intensity,
                           const CovarianceModel& cov, const LipschitzClamp& clamp,
                           const InclusionModelSpec& inclusions)
    : FieldModel(box),
      base_(base),
      inclusions_(inclusions),
      process_(box, intensity,
               base == ColorBase::Inclusions ? inclusions.mark_laws()
                                             : std::vector<DecorationLaw>{}),
      color_(color_box(box), cov, clamp) {
  if (box.periodic()) {
    throw Error(ErrorCode::InvalidArgument, "colored models need a padded box");
  }
}

std::string ColoredModel::id() const {
  return base_ == ColorBase::Voronoi ? "colored_voronoi" : "colored_inclusions";
}

nlohmann::json ColoredModel::describe() const {
  nlohmann::json j{{"type", "colored"},
                   {"base", base_ == ColorBase::Voronoi ? "voronoi" : "inclusions"},
                   {"box", box_to_json(box_)},
                   {"intensity", process_.intensity()},
                   {"covariance", color_.covariance().to_json()},
                   {"clamp", color_.clamp().to_json()}};
  if (base_ == ColorBase::Inclusions) {
    j["inclusions"] = inclusions_.to_json();
    j["inclusions"].erase("intensity");
    j["inclusions"].erase("value");
  }
  return j;
}

long ColoredModel::unit_count() const { return process_.cells().size() + color_.unit_count(); }

Point ColoredModel::unit_center(long unit) const {
  const long nc = process_.cells().size();
  if (unit < nc) {
    return process_.cells().center(unit);
  }
  // Colour site y in [0, L') is read by points congruent to y in the padded box.
  Point y = color_.unit_center(unit - nc);
  for (int a = 0; a < box_.dim; ++a) {
    if (y[a] >= box_.upper()) {
      y[a] -= box_.padded_side();
    }
  }
  return y;
}

FieldSample ColoredModel::render(const Keys& keys) const {
  const long nc = process_.cells().size();
  const Keys cell_keys(keys.begin(), keys.begin() + nc);
  const Keys color_keys(keys.begin() + nc, keys.end());
  const PointConfiguration pts = process_.generate_all(cell_keys, 0, 0.0, 0.0, 1.0);
  return dependent_color_field(pts, base_, color_.render(color_keys), box_, inclusions_);
}

// ---------------------------------------------------------------------------

SampleSetModel::SampleSetModel(std::vector<FieldSample> samples)
    : FieldModel(samples.empty() ? BoxSpec{} : samples.front().box), samples_(std::move(samples)) {
  if (samples_.empty()) {
    throw Error(ErrorCode::InsufficientSamples, "sample set is empty");
  }
}

nlohmann::json SampleSetModel::describe() const {
  return {{"type", id()}, {"box", box_to_json(box_)}, {"samples", samples_.size()}};
}

Point SampleSetModel::unit_center(long) const { return Point::Zero(box_.dim); }

FieldSample SampleSetModel::render(const Keys& keys) const {
  return samples_[static_cast<std::size_t>(keys.at(0) % samples_.size())];
}

// ---------------------------------------------------------------------------

namespace {

BoxSpec read_box(ConfigView v, double default_margin, Boundary default_boundary) {
  BoxSpec b;
  b.dim = static_cast<int>(v.integer("dim", 1));
  b.side = v.number("side", 16.0);
  b.spacing = v.number("spacing", 1.0);
  const std::string bd =
      v.choice("boundary", default_boundary == Boundary::Periodic ? "periodic" : "padded_free",
               {"padded_free", "periodic"});
  b.boundary = bd == "periodic" ? Boundary::Periodic : Boundary::PaddedFree;
  b.margin = v.number("margin", b.periodic() ? 0.0 : default_margin);
  v.finish();
  try {
    b.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigValidation, v.prefix() + ": " + e.what());
  }
  return b;
}

ScalarLaw read_law(ConfigView& v, const std::string& name, const ScalarLaw& fallback) {
  if (!v.has(name)) {
    v.raw(name);
    return fallback;
  }
  return ScalarLaw::from_json(v.raw(name), v.key(name));
}

InclusionModelSpec read_inclusions(ConfigView& v, bool with_intensity) {
  InclusionModelSpec s;
  const std::string scheme = v.choice("scheme", "two_phase", {"two_phase", "sum", "priority"});
  s.scheme = scheme == "two_phase" ? InclusionModelSpec::Scheme::TwoPhase
             : scheme == "sum"     ? InclusionModelSpec::Scheme::Sum
                                   : InclusionModelSpec::Scheme::Priority;
  s.alpha = v.number("alpha", s.alpha);
  s.beta = v.number("beta", s.beta);
  s.map = v.choice("map", "clip", {"clip", "identity"}) == "clip"
              ? InclusionModelSpec::SumMap::Clip
              : InclusionModelSpec::SumMap::Identity;
  s.clip_lo = v.number("clip_lo", s.clip_lo);
  s.clip_hi = v.number("clip_hi", s.clip_hi);
  const std::string p = v.choice("priority", "V", {"zero", "V", "-V"});
  s.priority = p == "zero" ? InclusionModelSpec::PriorityKey::Zero
               : p == "V"  ? InclusionModelSpec::PriorityKey::Radius
                           : InclusionModelSpec::PriorityKey::NegRadius;
  s.radius = read_law(v, "radius", s.radius);
  s.value = read_law(v, "value", s.value);
  if (s.radius.lower() < 0.0) {
    throw Error(ErrorCode::ConfigValidation, v.key("radius") + ": radii must be nonnegative");
  }
  if (with_intensity) {
    s.intensity = v.number("intensity", s.intensity);
    if (!(s.intensity > 0.0)) {
      throw Error(ErrorCode::ConfigValidation, v.key("intensity") + ": must be positive");
    }
  }
  return s;
}

CovarianceModel read_covariance(ConfigView v) {
  const std::string f =
      v.choice("family", "exponential", {"exponential", "gaussian_bump", "polynomial"});
  const double s2 = v.number("sigma2", 1.0);
  const double xi = v.number("xi", 1.0);
  const double alpha = v.number("alpha", 3.0);
  v.finish();
  try {
    if (f == "exponential") return CovarianceModel::exponential(s2, xi);
    if (f == "gaussian_bump") return CovarianceModel::gaussian_bump(s2, xi);
    return CovarianceModel::polynomial(s2, xi, alpha);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigValidation, v.prefix() + ": " + e.what());
  }
}

LipschitzClamp read_clamp(ConfigView v) {
  const std::string k = v.choice("kind", "identity", {"identity", "tanh"});
  const double slope = v.number("slope", 1.0);
  const double range = v.number("range", 1.0);
  v.finish();
  if (k == "identity") return LipschitzClamp::identity();
  try {
    return LipschitzClamp::tanh(slope, range);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigValidation, v.prefix() + ": " + e.what());
  }
}

double positive(ConfigView& v, const std::string& name, double fallback) {
  const double x = v.number(name, fallback);
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw Error(ErrorCode::ConfigValidation, v.key(name) + ": must be positive");
  }
  return x;
}

}  // namespace

BoxSpec box_from_json(const nlohmann::json& j, const std::string& key) {
  return read_box(ConfigView(j, key), 0.0, Boundary::PaddedFree);
}

nlohmann::json box_to_json(const BoxSpec& box) {
  return {{"dim", box.dim},
          {"side", box.side},
          {"spacing", box.spacing},
          {"margin", box.margin},
          {"boundary", box.periodic() ? "periodic" : "padded_free"}};
}

InclusionModelSpec inclusion_spec_from_json(const nlohmann::json& j, const std::string& key) {
  ConfigView v(j, key);
  InclusionModelSpec s = read_inclusions(v, true);
  v.finish();
  return s;
}

CovarianceModel covariance_from_json(const nlohmann::json& j, const std::string& key) {
  return read_covariance(ConfigView(j, key));
}

LipschitzClamp clamp_from_json(const nlohmann::json& j, const std::string& key) {
  return read_clamp(ConfigView(j, key));
}

std::unique_ptr<FieldModel> make_model(const nlohmann::json& j) {
  ConfigView v(j, "model");
  const std::string type =
      v.choice("type", {"white_noise", "moving_average", "gaussian", "voronoi", "inclusions",
                        "parking", "hardcore", "colored"});
  std::unique_ptr<FieldModel> model;
  try {
    if (type == "white_noise") {
      const ScalarLaw law = read_law(v, "law", ScalarLaw::normal(0.0, 1.0));
      model = std::make_unique<WhiteNoiseModel>(
          read_box(v.child("box"), 0.0, Boundary::PaddedFree), law);
    } else if (type == "moving_average") {
      const double r = v.number("radius", 1.0);
      const ScalarLaw law = read_law(v, "law", ScalarLaw::normal(0.0, 1.0));
      model = std::make_unique<MovingAverageModel>(
          read_box(v.child("box"), r, Boundary::PaddedFree), r, law);
    } else if (type == "gaussian") {
      const CovarianceModel cov = read_covariance(v.child("covariance"));
      const LipschitzClamp clamp = read_clamp(v.child("clamp"));
      const BoxSpec box = read_box(v.child("box"), 0.0, Boundary::Periodic);
      if (!box.periodic()) {
        throw Error(ErrorCode::ConfigValidation,
                    "model.box.boundary: gaussian fields need 'periodic'");
      }
      model = std::make_unique<GaussianModel>(box, cov, clamp);
    } else if (type == "voronoi") {
      VoronoiFieldSpec spec;
      spec.intensity = positive(v, "intensity", 1.0);
      spec.value_law = read_law(v, "value", spec.value_law);
      const auto& bj = v.raw("box");
      const int d = bj.is_object() && bj.contains("dim") && bj["dim"].is_number_integer()
                        ? bj["dim"].get<int>()
                        : 1;
      const double m = 4.0 * std::pow(spec.intensity, -1.0 / std::max(d, 1));
      model = std::make_unique<VoronoiModel>(read_box(v.child("box"), m, Boundary::PaddedFree),
                                             spec);
    } else if (type == "inclusions") {
      const InclusionModelSpec spec = read_inclusions(v, true);
      model = std::make_unique<PoissonInclusionModel>(
          read_box(v.child("box"), spec.default_margin(), Boundary::PaddedFree), spec);
    } else if (type == "parking" || type == "hardcore") {
      HardcoreSpec hc;
      hc.radius = positive(v, "radius", hc.radius);
      ParkingOptions opt;
      if (type == "hardcore") {
        hc.lambda = positive(v, "lambda", hc.lambda);
        hc.horizon = positive(v, "horizon", hc.horizon);
      } else {
        opt.horizon_cap = positive(v, "horizon_cap", opt.horizon_cap);
      }
      std::optional<InclusionModelSpec> incl;
      if (v.choice("field", "indicator", {"indicator", "inclusions"}) == "inclusions") {
        ConfigView iv = v.child("inclusions");
        incl = read_inclusions(iv, false);
        iv.finish();
      } else {
        v.raw("inclusions");
      }
      double m = 8.0 * hc.radius;
      if (incl) {
        m = std::max(m, incl->default_margin());
      }
      model = std::make_unique<HardcoreFieldModel>(
          read_box(v.child("box"), m, Boundary::PaddedFree),
          type == "parking" ? HardcoreFieldModel::Kind::Parking
                            : HardcoreFieldModel::Kind::Hardcore,
          hc, incl, opt);
    } else {
      const ColorBase base = v.choice("base", "voronoi", {"voronoi", "inclusions"}) == "voronoi"
                                 ? ColorBase::Voronoi
                                 : ColorBase::Inclusions;
      const double intensity = positive(v, "intensity", 1.0);
      const CovarianceModel cov = read_covariance(v.child("covariance"));
      const LipschitzClamp clamp = read_clamp(v.child("clamp"));
      InclusionModelSpec incl;
      if (base == ColorBase::Inclusions) {
        ConfigView iv = v.child("inclusions");
        incl = read_inclusions(iv, false);
        iv.finish();
      } else {
        v.raw("inclusions");
      }
      incl.intensity = intensity;
      const double m = base == ColorBase::Inclusions ? incl.default_margin() : 4.0;
      model = std::make_unique<ColoredModel>(read_box(v.child("box"), m, Boundary::PaddedFree),
                                             base, intensity, cov, clamp, incl);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigValidation) throw;
    throw Error(ErrorCode::ConfigValidation, "model: " + std::string(e.what()));
  }
  v.finish();
  return model;
}

}  // namespace mfilab
