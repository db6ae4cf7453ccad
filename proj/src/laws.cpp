#include "mfilab/laws.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "mfilab/error.hpp"

namespace mfilab {

namespace {

void require(bool ok, const char* what) {
  if (!ok) {
    throw Error(ErrorCode::InvalidArgument, what);
  }
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Acklam's rational approximation refined by one Halley step.
double normal_quantile(double p) {
  if (p <= 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  if (p >= 1.0) {
    return std::numeric_limits<double>::infinity();
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00, 2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  double x;
  if (p < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p > 1.0 - 0.02425) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace

ScalarLaw ScalarLaw::constant(double value) {
  require(std::isfinite(value), "constant law needs a finite value");
  ScalarLaw l;
  l.family_ = Family::Constant;
  l.p_[0] = value;
  return l;
}

ScalarLaw ScalarLaw::uniform(double a, double b) {
  require(std::isfinite(a) && std::isfinite(b) && a <= b, "uniform law needs a <= b");
  ScalarLaw l;
  l.family_ = Family::Uniform;
  l.p_[0] = a;
  l.p_[1] = b;
  return l;
}

ScalarLaw ScalarLaw::two_point(double a, double b, double p) {
  require(std::isfinite(a) && std::isfinite(b) && p >= 0.0 && p <= 1.0,
          "two-point law needs finite values and p in [0,1]");
  ScalarLaw l;
  l.family_ = Family::TwoPoint;
  l.p_[0] = a;
  l.p_[1] = b;
  l.p_[2] = p;
  return l;
}

ScalarLaw ScalarLaw::normal(double mean, double sd) {
  require(std::isfinite(mean) && sd >= 0.0, "normal law needs sd >= 0");
  ScalarLaw l;
  l.family_ = Family::Normal;
  l.p_[0] = mean;
  l.p_[1] = sd;
  return l;
}

ScalarLaw ScalarLaw::exponential(double rate) {
  require(rate > 0.0 && std::isfinite(rate), "exponential law needs rate > 0");
  ScalarLaw l;
  l.family_ = Family::Exponential;
  l.p_[0] = rate;
  return l;
}

ScalarLaw ScalarLaw::pareto(double alpha, double scale) {
  require(alpha > 0.0 && scale > 0.0, "pareto law needs alpha > 0 and scale > 0");
  ScalarLaw l;
  l.family_ = Family::Pareto;
  l.p_[0] = alpha;
  l.p_[1] = scale;
  return l;
}

std::string ScalarLaw::name() const {
  switch (family_) {
    case Family::Constant: return "constant";
    case Family::Uniform: return "uniform";
    case Family::TwoPoint: return "two_point";
    case Family::Normal: return "normal";
    case Family::Exponential: return "exponential";
    case Family::Pareto: return "pareto";
  }
  return "unknown";
}

double ScalarLaw::sample(Philox& engine) const {
  switch (family_) {
    case Family::Normal:
      return p_[0] + p_[1] * standard_normal(engine);
    case Family::TwoPoint:
      return uniform01(engine) < p_[2] ? p_[0] : p_[1];
    case Family::Uniform:
      return p_[0] + (p_[1] - p_[0]) * uniform01(engine);
    default:
      return quantile(uniform01(engine));
  }
}

double ScalarLaw::cdf(double x) const {
  switch (family_) {
    case Family::Constant: return x >= p_[0] ? 1.0 : 0.0;
    case Family::Uniform:
      if (x < p_[0]) return 0.0;
      if (x >= p_[1]) return 1.0;
      return (x - p_[0]) / (p_[1] - p_[0]);
    case Family::TwoPoint: {
      double c = 0.0;
      if (x >= p_[0]) c += p_[2];
      if (x >= p_[1]) c += 1.0 - p_[2];
      return c;
    }
    case Family::Normal:
      if (p_[1] == 0.0) return x >= p_[0] ? 1.0 : 0.0;
      return normal_cdf((x - p_[0]) / p_[1]);
    case Family::Exponential: return x <= 0.0 ? 0.0 : -std::expm1(-p_[0] * x);
    case Family::Pareto: return x <= p_[1] ? 0.0 : 1.0 - std::pow(p_[1] / x, p_[0]);
  }
  return 0.0;
}

double ScalarLaw::survival(double x) const {
  switch (family_) {
    case Family::Constant: return x <= p_[0] ? 1.0 : 0.0;
    case Family::Uniform:
      if (x <= p_[0]) return 1.0;
      if (x > p_[1]) return 0.0;
      return p_[1] > p_[0] ? (p_[1] - x) / (p_[1] - p_[0]) : 1.0;
    case Family::TwoPoint: {
      double s = 0.0;
      if (x <= p_[0]) s += p_[2];
      if (x <= p_[1]) s += 1.0 - p_[2];
      return s;
    }
    case Family::Normal:
      if (p_[1] == 0.0) return x <= p_[0] ? 1.0 : 0.0;
      return normal_cdf(-(x - p_[0]) / p_[1]);
    case Family::Exponential: return x <= 0.0 ? 1.0 : std::exp(-p_[0] * x);
    case Family::Pareto: return x <= p_[1] ? 1.0 : std::pow(p_[1] / x, p_[0]);
  }
  return 0.0;
}

double ScalarLaw::mass(double a, double b) const {
  if (!(b > a)) {
    return 0.0;
  }
  return std::max(survival(a) - survival(b), 0.0);
}

double ScalarLaw::quantile(double p) const {
  switch (family_) {
    case Family::Constant: return p_[0];
    case Family::Uniform: return p_[0] + (p_[1] - p_[0]) * p;
    case Family::TwoPoint: return p < p_[2] ? std::min(p_[0], p_[1]) : std::max(p_[0], p_[1]);
    case Family::Normal: return p_[0] + p_[1] * normal_quantile(p);
    case Family::Exponential: return -std::log1p(-p) / p_[0];
    case Family::Pareto: return p_[1] * std::pow(1.0 - p, -1.0 / p_[0]);
  }
  return 0.0;
}

double ScalarLaw::mean() const {
  switch (family_) {
    case Family::Constant: return p_[0];
    case Family::Uniform: return 0.5 * (p_[0] + p_[1]);
    case Family::TwoPoint: return p_[2] * p_[0] + (1.0 - p_[2]) * p_[1];
    case Family::Normal: return p_[0];
    case Family::Exponential: return 1.0 / p_[0];
    case Family::Pareto:
      return p_[0] > 1.0 ? p_[0] * p_[1] / (p_[0] - 1.0) : std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

double ScalarLaw::variance() const {
  switch (family_) {
    case Family::Constant: return 0.0;
    case Family::Uniform: return (p_[1] - p_[0]) * (p_[1] - p_[0]) / 12.0;
    case Family::TwoPoint: return p_[2] * (1.0 - p_[2]) * (p_[0] - p_[1]) * (p_[0] - p_[1]);
    case Family::Normal: return p_[1] * p_[1];
    case Family::Exponential: return 1.0 / (p_[0] * p_[0]);
    case Family::Pareto: {
      const double a = p_[0];
      if (a <= 2.0) return std::numeric_limits<double>::infinity();
      return p_[1] * p_[1] * a / ((a - 1.0) * (a - 1.0) * (a - 2.0));
    }
  }
  return 0.0;
}

double ScalarLaw::lower() const {
  switch (family_) {
    case Family::Constant: return p_[0];
    case Family::Uniform: return p_[0];
    case Family::TwoPoint: return std::min(p_[0], p_[1]);
    case Family::Normal: return p_[1] == 0.0 ? p_[0] : -std::numeric_limits<double>::infinity();
    case Family::Exponential: return 0.0;
    case Family::Pareto: return p_[1];
  }
  return 0.0;
}

double ScalarLaw::upper() const {
  switch (family_) {
    case Family::Constant: return p_[0];
    case Family::Uniform: return p_[1];
    case Family::TwoPoint: return std::max(p_[0], p_[1]);
    case Family::Normal: return p_[1] == 0.0 ? p_[0] : std::numeric_limits<double>::infinity();
    default: return std::numeric_limits<double>::infinity();
  }
}

nlohmann::json ScalarLaw::to_json() const {
  nlohmann::json j;
  j["family"] = name();
  switch (family_) {
    case Family::Constant: j["value"] = p_[0]; break;
    case Family::Uniform: j["a"] = p_[0]; j["b"] = p_[1]; break;
    case Family::TwoPoint: j["a"] = p_[0]; j["b"] = p_[1]; j["p"] = p_[2]; break;
    case Family::Normal: j["mean"] = p_[0]; j["sd"] = p_[1]; break;
    case Family::Exponential: j["rate"] = p_[0]; break;
    case Family::Pareto: j["alpha"] = p_[0]; j["scale"] = p_[1]; break;
  }
  return j;
}

ScalarLaw ScalarLaw::from_json(const nlohmann::json& j, const std::string& key) {
  auto bad = [&](const std::string& msg) {
    return Error(ErrorCode::ConfigValidation, key + ": " + msg);
  };
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) {
    throw bad("expected a law with a family among constant, uniform, two_point, normal, "
              "exponential, pareto");
  }
  auto num = [&](const char* name, double fallback) {
    if (!j.contains(name)) {
      return fallback;
    }
    if (!j[name].is_number()) {
      throw bad(std::string(name) + " must be a number");
    }
    return j[name].get<double>();
  };
  const std::string f = j["family"].get<std::string>();
  try {
    if (f == "constant") return constant(num("value", 0.0));
    if (f == "uniform") return uniform(num("a", 0.0), num("b", 1.0));
    if (f == "two_point") return two_point(num("a", 0.0), num("b", 1.0), num("p", 0.5));
    if (f == "normal") return normal(num("mean", 0.0), num("sd", 1.0));
    if (f == "exponential") return exponential(num("rate", 1.0));
    if (f == "pareto") return pareto(num("alpha", 3.0), num("scale", 1.0));
  } catch (const Error& e) {
    throw bad(e.what());
  }
  throw bad("unknown family '" + f +
            "'; allowed: constant, uniform, two_point, normal, exponential, pareto");
}

}  // namespace mfilab
