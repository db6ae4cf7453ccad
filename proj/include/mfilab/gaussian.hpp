#pragma once

#include <Eigen/Dense>
#include <functional>
#include <json.hpp>
#include <vector>

#include "mfilab/lattice.hpp"
#include "mfilab/random.hpp"
#include "mfilab/weights.hpp"

namespace mfilab {

/// Isotropic covariance c(|x|).
struct CovarianceModel {
  enum class Family { Exponential, GaussianBump, Polynomial, Tabulated };

  Family family = Family::Exponential;
  double sigma2 = 1.0;
  double xi = 1.0;
  double alpha = 1.0;
  /// Piecewise-linear profile (tabulated family), constant past the last node.
  std::vector<double> nodes;
  std::vector<double> values;

  static CovarianceModel exponential(double sigma2, double xi);
  static CovarianceModel gaussian_bump(double sigma2, double xi);
  static CovarianceModel polynomial(double sigma2, double xi, double alpha);
  static CovarianceModel tabulated(std::vector<double> r, std::vector<double> c);

  void validate() const;
  double operator()(double r) const;
  double derivative(double r) const;
  double at_zero() const { return (*this)(0.0); }
  double at_infinity() const;
  std::string name() const;
  nlohmann::json to_json() const;
};

/// b(u) = u, or b(u) = range * tanh(slope * u / range).
struct LipschitzClamp {
  enum class Kind { Identity, Tanh };

  Kind kind = Kind::Identity;
  double slope = 1.0;
  double range = 1.0;

  static LipschitzClamp identity() { return {}; }
  static LipschitzClamp tanh(double slope, double range);

  double operator()(double u) const;
  double derivative(double u) const;
  double lipschitz() const { return kind == Kind::Identity ? 1.0 : slope; }
  nlohmann::json to_json() const;
};

/// Spectral synthesis on a periodic lattice. The filter is the square root of
/// the DFT of the periodized covariance; small negative entries are clipped.
class GaussianSynthesizer {
 public:
  GaussianSynthesizer(const BoxSpec& box, const CovarianceModel& cov);

  const BoxSpec& box() const { return box_; }
  /// Centered field with the target covariance from site-wise white noise.
  Eigen::VectorXd filter(const Eigen::VectorXd& noise) const;
  /// Exact lattice covariance of the synthesized field at the given offset.
  double lattice_covariance(long offset_index) const;
  const Eigen::VectorXd& spectrum() const { return spectrum_; }

 private:
  BoxSpec box_;
  Eigen::VectorXd spectrum_;
  Eigen::VectorXd sqrt_spectrum_;
  Eigen::VectorXd periodized_;
};

/// In-place multidimensional DFT on a cubic array of side n (lexicographic
/// layout). Forward is unnormalized; inverse divides by the site count.
void fft_nd(Eigen::VectorXcd& data, int dim, long n, bool inverse);

FieldSample sample_gaussian_field(const BoxSpec& box, const CovarianceModel& cov,
                                  const LipschitzClamp& clamp, const RngStream& rng);

/// Standard normal white noise per site, one substream draw per site.
Eigen::VectorXd white_noise(long sites, const RngStream& rng);

struct CovarianceEstimate {
  std::vector<double> lags;
  std::vector<double> value;
  std::vector<double> std_error;
};

/// Cross-sample covariance of A(x), A(x + r e_a), averaged over sites x and
/// axes a. Lags are rounded to the lattice.
CovarianceEstimate empirical_covariance(const std::vector<FieldSample>& samples,
                                        const std::vector<double>& lags);

/// pi(l) = (-c'(l))_+.
WeightFunction gaussian_weight(const CovarianceModel& cov);

struct BrascampLieb {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Var[Z(F W)] and sum_ij |(F F^t)_ij| E[|d_i Z| |d_j Z|] for standard Gaussian
/// W, by tensor Gauss-Hermite quadrature with `level` nodes per axis.
/// Gradients default to central finite differences.
BrascampLieb brascamp_lieb_oracle(
    const Eigen::MatrixXd& f, const std::function<double(const Eigen::VectorXd&)>& z,
    int level, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient = {},
    int budget = 48);

/// Probabilists' Gauss-Hermite nodes and weights (weights sum to 1).
void gauss_hermite(int level, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

}  // namespace mfilab
