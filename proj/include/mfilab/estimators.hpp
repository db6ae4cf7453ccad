#pragma once

#include <cstdint>
#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

#include "mfilab/laws.hpp"
#include "mfilab/models.hpp"
#include "mfilab/observables.hpp"
#include "mfilab/random.hpp"
#include "mfilab/weights.hpp"

namespace mfilab {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;

  nlohmann::json to_json() const { return {{"value", value}, {"stderr", std_error}}; }
};

/// Calls f(i) for i in [0, n) on up to `workers` threads. Callers write to
/// per-index slots, so results do not depend on the worker count.
void parallel_for(long n, int workers, const std::function<void(long)>& f);

/// Stream of the i-th independent realization drawn from rng.
RngStream realization_stream(const RngStream& rng, long i);

// ---------------------------------------------------------------------------
// Derivatives

/// max - min of every observable over the field and the accepted block
/// resamples inside B_r(x). Resample k redraws the units within r s_k of x
/// (s_k cycles through 1, 1/2, 3/4, 1/4) and is accepted when the field is
/// unchanged at every observation site outside the closed ball.
std::vector<double> osc_derivative(const FieldModel& model, const Keys& keys,
                                   const FieldSample& field,
                                   const std::vector<const Observable*>& observables,
                                   const Point& x, double r, int K, const RngStream& rng);

/// Single-observable form on B_{l+1}(x) for the realization drawn from `realization`.
double osc_derivative(const FieldModel& model, const RngStream& realization,
                      const Observable& observable, const Point& x, double ell, int K);

/// Central-difference estimate of sum_{s in region} |dZ(b(X))/dX(s)|, which is the
/// integral of |dZ/dA| over the region in the continuum normalization. The
/// perturbation acts on `latent` and passes through `clamp`. Throws
/// NonSmoothObservable for site maxima.
double fct_derivative(const FieldSample& latent, const Observable& observable,
                      const std::vector<long>& region, double step,
                      const LipschitzClamp& clamp = LipschitzClamp::identity());

/// Partial derivatives dZ(b(X))/dX(s) on the observable's support.
std::vector<double> fct_gradient(const FieldSample& latent, const Observable& observable,
                                 double step, const LipschitzClamp& clamp);

/// A realization and its copy with the units of Q_{2l+1}(x) redrawn.
struct BlockResample {
  Cube block;
  std::vector<long> units;
  Keys keys;
  Keys resampled;
  FieldSample field;
  FieldSample resampled_field;
};

BlockResample block_resample(const FieldModel& model, const Point& x, double ell,
                             const RngStream& rng);

/// Largest cube distance of an observation site where the two fields differ
/// (0 when equal). Throws BoundaryHit when such a site lies on the outer
/// layer of a padded observation window.
double difference_radius(const FieldSample& a, const FieldSample& b, const Cube& block);

double empirical_action_radius(const FieldModel& model, const Point& x, double ell,
                               const RngStream& rng);

// ---------------------------------------------------------------------------
// Left-hand sides

/// Observable values on realizations 0..n-1, one row per realization.
Eigen::MatrixXd sample_observables(const FieldModel& model,
                                   const std::vector<const Observable*>& observables, long n,
                                   const RngStream& rng, int workers = 1);

/// Unbiased variance with jackknife standard error.
Estimate variance_of(const Eigen::VectorXd& z);
/// Unbiased covariance with jackknife standard error.
Estimate covariance_of(const Eigen::VectorXd& y, const Eigen::VectorXd& z);
/// Plug-in E[Z^2 log(Z^2 / E Z^2)] with bootstrap standard error.
Estimate entropy_of(const Eigen::VectorXd& z, const RngStream& rng, int bootstrap = 200);

Estimate variance_estimate(const FieldModel& model, const Observable& z, long n,
                           const RngStream& rng, int workers = 1);
Estimate entropy_estimate(const FieldModel& model, const Observable& z, long n,
                          const RngStream& rng, int workers = 1);
Estimate covariance_estimate(const FieldModel& model, const Observable& y, const Observable& z,
                             long n, const RngStream& rng, int workers = 1);

// ---------------------------------------------------------------------------
// Right-hand sides

enum class Inequality { MSG, MLSI, MCI };
enum class DerivativeKind { Automatic, Oscillation, Functional };

std::string to_string(Inequality q);
Inequality inequality_from_string(const std::string& s);

struct RhsSettings {
  int K = 32;
  long n = 200;
  /// Each level halves the x spacing and bisects the scale grid.
  int refine = 0;
  /// Explicit scale grid; empty selects 0, 1, 2, 4, ... up to the 99% point.
  std::vector<double> scales;
  DerivativeKind derivative = DerivativeKind::Automatic;
  int workers = 1;
};

struct ScaleGrid {
  std::vector<double> ell;
  /// Weight of I(l_j) in the integral of I(l) (l+1)^-d pi(l) dl for I
  /// interpolated linearly between grid points, atoms included.
  std::vector<double> quad;
  double ell_max = 0.0;
};

ScaleGrid make_scale_grid(const WeightFunction& weight, int dim,
                          const std::vector<double>& scales, int refine);

/// x-grid spacing at scale l: max(h, l / 4) / 2^refine.
double x_spacing(double h, double ell, int refine);

/// Centres x of the x-grid at spacing s whose ball of radius r meets the
/// given observation sites.
std::vector<Point> x_grid(const BoxSpec& box, const std::vector<long>& sites, double r, double s);

/// Squared derivatives D(x, l)^2 per realization, observable and (l, x) cell,
/// with the cell weights q(l) s(l)^d.
struct DerivativeTable {
  std::vector<double> cell_weight;
  std::vector<double> cell_ell;
  std::vector<Point> cell_x;
  /// [realization][observable][cell]
  std::vector<std::vector<std::vector<double>>> d2;
  ScaleGrid grid;
  DerivativeKind derivative = DerivativeKind::Oscillation;
};

DerivativeTable derivative_table(const FieldModel& model,
                                 const std::vector<const Observable*>& observables,
                                 const WeightFunction& weight, const RhsSettings& settings,
                                 const RngStream& rng);

/// E[sum_cells q D^2] with the standard error over realizations.
Estimate msg_rhs_from(const DerivativeTable& table, std::size_t observable);
/// sum_cells q E[D_Y^2]^(1/2) E[D_Z^2]^(1/2), jackknife standard error.
Estimate mci_rhs_from(const DerivativeTable& table, std::size_t y, std::size_t z);

Estimate msg_rhs(const FieldModel& model, const Observable& z, const WeightFunction& weight,
                 const RhsSettings& settings, const RngStream& rng);
Estimate mci_rhs(const FieldModel& model, const Observable& y, const Observable& z,
                 const WeightFunction& weight, const RhsSettings& settings,
                 const RngStream& rng);

// ---------------------------------------------------------------------------
// Reports

struct MfiReport {
  Inequality inequality = Inequality::MSG;
  std::string model;
  nlohmann::json model_spec;
  std::vector<nlohmann::json> observables;
  nlohmann::json weight;
  Estimate lhs;
  Estimate rhs;
  double best_constant = 0.0;
  std::vector<double> scale_grid;
  std::string x_grid;
  std::string derivative;
  int K = 0;
  long n = 0;
  long n_rhs = 0;
  int refine = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static MfiReport from_json(const nlohmann::json& j);
  static std::vector<std::string> csv_header();
  std::vector<std::string> csv_row() const;
};

/// lhs / rhs, 0 when lhs <= 0, +inf when only rhs vanishes.
double best_constant(double lhs, double rhs);

struct VerifySettings {
  long n = 4000;
  RhsSettings rhs;
};

/// MSG and MLSI give one report per observable; MCI takes exactly two
/// observables (Y, Z) and gives one report. LHS and RHS share realizations.
std::vector<MfiReport> verify(Inequality inequality, const FieldModel& model,
                              const std::vector<Observable>& observables,
                              const WeightFunction& weight, const VerifySettings& settings,
                              const RngStream& rng);

// ---------------------------------------------------------------------------

struct EfronStein {
  Estimate lhs;
  Estimate rhs;
  Estimate ratio;
};

/// Var[Y(X)] against (1/2) E[sum_i (Y(X) - Y(X^i))^2] for i.i.d. coordinates,
/// with X^i the copy of X whose i-th coordinate is redrawn. Both sides use the
/// same draws.
EfronStein efron_stein_check(int n_vars, const ScalarLaw& law,
                             const std::function<double(const Eigen::VectorXd&)>& functional,
                             long n_mc, const RngStream& rng);

}  // namespace mfilab
