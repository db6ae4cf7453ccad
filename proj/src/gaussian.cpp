#include "mfilab/gaussian.hpp"

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <complex>

#include "mfilab/error.hpp"

namespace mfilab {

CovarianceModel CovarianceModel::exponential(double sigma2, double xi) {
  CovarianceModel c;
  c.family = Family::Exponential;
  c.sigma2 = sigma2;
  c.xi = xi;
  c.validate();
  return c;
}

CovarianceModel CovarianceModel::gaussian_bump(double sigma2, double xi) {
  CovarianceModel c;
  c.family = Family::GaussianBump;
  c.sigma2 = sigma2;
  c.xi = xi;
  c.validate();
  return c;
}

CovarianceModel CovarianceModel::polynomial(double sigma2, double xi, double alpha) {
  CovarianceModel c;
  c.family = Family::Polynomial;
  c.sigma2 = sigma2;
  c.xi = xi;
  c.alpha = alpha;
  c.validate();
  return c;
}

CovarianceModel CovarianceModel::tabulated(std::vector<double> r, std::vector<double> v) {
  CovarianceModel c;
  c.family = Family::Tabulated;
  c.nodes = std::move(r);
  c.values = std::move(v);
  c.sigma2 = c.values.empty() ? 0.0 : c.values.front();
  c.validate();
  return c;
}

void CovarianceModel::validate() const {
  if (family == Family::Tabulated) {
    if (nodes.size() != values.size() || nodes.size() < 2 || nodes.front() != 0.0) {
      throw Error(ErrorCode::InvalidArgument, "tabulated covariance needs nodes from 0");
    }
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      if (!(nodes[i] > nodes[i - 1]) || values[i] > values[i - 1]) {
        throw Error(ErrorCode::InvalidArgument,
                    "tabulated covariance must be nonincreasing on increasing nodes");
      }
    }
    return;
  }
  if (!(sigma2 > 0.0) || !(xi > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "covariance needs sigma2 > 0 and xi > 0");
  }
  if (family == Family::Polynomial && !(alpha > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "polynomial covariance needs alpha > 0");
  }
}

double CovarianceModel::operator()(double r) const {
  r = std::fabs(r);
  switch (family) {
    case Family::Exponential: return sigma2 * std::exp(-r / xi);
    case Family::GaussianBump: return sigma2 * std::exp(-(r * r) / (xi * xi));
    case Family::Polynomial: return sigma2 * std::pow(1.0 + r / xi, -alpha);
    case Family::Tabulated: {
      if (r >= nodes.back()) {
        return values.back();
      }
      const auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
      const std::size_t i = static_cast<std::size_t>(it - nodes.begin());
      const double t = (r - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
      return (1.0 - t) * values[i - 1] + t * values[i];
    }
  }
  return 0.0;
}

double CovarianceModel::derivative(double r) const {
  r = std::fabs(r);
  switch (family) {
    case Family::Exponential: return -sigma2 / xi * std::exp(-r / xi);
    case Family::GaussianBump: return -2.0 * r * sigma2 / (xi * xi) * std::exp(-(r * r) / (xi * xi));
    case Family::Polynomial: return -sigma2 * alpha / xi * std::pow(1.0 + r / xi, -alpha - 1.0);
    case Family::Tabulated: {
      if (r >= nodes.back()) {
        return 0.0;
      }
      const auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
      const std::size_t i = static_cast<std::size_t>(it - nodes.begin());
      return (values[i] - values[i - 1]) / (nodes[i] - nodes[i - 1]);
    }
  }
  return 0.0;
}

double CovarianceModel::at_infinity() const {
  return family == Family::Tabulated ? values.back() : 0.0;
}

std::string CovarianceModel::name() const {
  switch (family) {
    case Family::Exponential: return "exponential";
    case Family::GaussianBump: return "gaussian_bump";
    case Family::Polynomial: return "polynomial";
    case Family::Tabulated: return "tabulated";
  }
  return "unknown";
}

nlohmann::json CovarianceModel::to_json() const {
  nlohmann::json j{{"family", name()}, {"sigma2", sigma2}};
  if (family == Family::Tabulated) {
    j["nodes"] = nodes;
    j["values"] = values;
  } else {
    j["xi"] = xi;
    if (family == Family::Polynomial) {
      j["alpha"] = alpha;
    }
  }
  return j;
}

LipschitzClamp LipschitzClamp::tanh(double slope, double range) {
  if (!(slope > 0.0) || !(range > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "clamp needs positive slope and range");
  }
  LipschitzClamp c;
  c.kind = Kind::Tanh;
  c.slope = slope;
  c.range = range;
  return c;
}

double LipschitzClamp::operator()(double u) const {
  return kind == Kind::Identity ? u : range * std::tanh(slope * u / range);
}

double LipschitzClamp::derivative(double u) const {
  if (kind == Kind::Identity) {
    return 1.0;
  }
  const double t = std::tanh(slope * u / range);
  return slope * (1.0 - t * t);
}

nlohmann::json LipschitzClamp::to_json() const {
  if (kind == Kind::Identity) {
    return {{"kind", "identity"}};
  }
  return {{"kind", "tanh"}, {"slope", slope}, {"range", range}};
}

void fft_nd(Eigen::VectorXcd& data, int dim, long n, bool inverse) {
  if (n <= 1) {
    return;
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> line(static_cast<std::size_t>(n));
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  const long total = data.size();
  long stride = 1;
  for (int a = dim - 1; a >= 0; --a) {
    // Lines along axis a: indices base + j * stride.
    for (long base = 0; base < total; ++base) {
      if ((base / stride) % n != 0) {
        continue;
      }
      for (long j = 0; j < n; ++j) {
        line[static_cast<std::size_t>(j)] = data[base + j * stride];
      }
      if (inverse) {
        fft.inv(out, line);
      } else {
        fft.fwd(out, line);
      }
      for (long j = 0; j < n; ++j) {
        data[base + j * stride] = out[static_cast<std::size_t>(j)];
      }
    }
    stride *= n;
  }
}

GaussianSynthesizer::GaussianSynthesizer(const BoxSpec& box, const CovarianceModel& cov)
    : box_(box) {
  box.validate();
  cov.validate();
  if (!box.periodic()) {
    throw Error(ErrorCode::InvalidArgument, "spectral synthesis needs a periodic box");
  }
  const Lattice lat = Lattice::observation(box);
  const long n = lat.count;
  const long sites = lat.size();
  const int d = box.dim;
  const double h = box.spacing;
  const double period = box.side;
  const double c_inf = cov.at_infinity();
  // Image count: until the covariance excess falls below 1e-14 sigma^2, bounded
  // so that the periodization stays cheap.
  long images = 0;
  const long budget = 50'000'000;
  while (true) {
    const double far = period * (static_cast<double>(images) + 0.5);
    if (std::fabs(cov(far) - c_inf) <= 1e-14 * cov.sigma2) {
      break;
    }
    long cost = sites;
    for (int a = 0; a < d; ++a) {
      cost *= 2 * (images + 1) + 1;
    }
    if (cost > budget) {
      break;
    }
    ++images;
  }
  periodized_.resize(sites);
  long k[3];
  for (long i = 0; i < sites; ++i) {
    lat.multi_index(i, k);
    double s = 0.0;
    long m[3] = {-images, d > 1 ? -images : 0, d > 2 ? -images : 0};
    for (;;) {
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) {
        long kk = k[a];
        if (kk > n / 2) {
          kk -= n;
        }
        const double off = h * static_cast<double>(kk) + period * static_cast<double>(m[a]);
        r2 += off * off;
      }
      s += cov(std::sqrt(r2)) - c_inf;
      int a = d - 1;
      while (a >= 0) {
        if (++m[a] <= images) break;
        m[a] = -images;
        --a;
      }
      if (a < 0) break;
    }
    periodized_[i] = s + c_inf;
  }
  Eigen::VectorXcd spec = periodized_.cast<std::complex<double>>();
  fft_nd(spec, d, n, false);
  spectrum_ = spec.real();
  const double tol = 1e-10 * cov.sigma2;
  sqrt_spectrum_.resize(sites);
  for (long i = 0; i < sites; ++i) {
    double v = spectrum_[i];
    if (v < -tol) {
      throw Error(ErrorCode::NegativeSpectrum,
                  "spectral entry " + std::to_string(i) + " equals " + std::to_string(v));
    }
    sqrt_spectrum_[i] = std::sqrt(std::max(v, 0.0));
  }
}

Eigen::VectorXd GaussianSynthesizer::filter(const Eigen::VectorXd& noise) const {
  const long n = box_.sites_per_axis();
  Eigen::VectorXcd w = noise.cast<std::complex<double>>();
  fft_nd(w, box_.dim, n, false);
  w.array() *= sqrt_spectrum_.array().cast<std::complex<double>>();
  fft_nd(w, box_.dim, n, true);
  return w.real();
}

double GaussianSynthesizer::lattice_covariance(long offset_index) const {
  return periodized_[offset_index];
}

Eigen::VectorXd white_noise(long sites, const RngStream& rng) {
  Eigen::VectorXd w(sites);
  for (long i = 0; i < sites; ++i) {
    Philox e(unit_key(rng, static_cast<std::uint64_t>(i)));
    w[i] = standard_normal(e);
  }
  return w;
}

FieldSample sample_gaussian_field(const BoxSpec& box, const CovarianceModel& cov,
                                  const LipschitzClamp& clamp, const RngStream& rng) {
  const GaussianSynthesizer synth(box, cov);
  FieldSample f{box, synth.filter(white_noise(box.site_count(), rng))};
  for (long i = 0; i < f.values.size(); ++i) {
    f.values[i] = clamp(f.values[i]);
  }
  return f;
}

CovarianceEstimate empirical_covariance(const std::vector<FieldSample>& samples,
                                        const std::vector<double>& lags) {
  if (samples.size() < 2) {
    throw Error(ErrorCode::InsufficientSamples, "covariance estimation needs two samples");
  }
  const BoxSpec& box = samples.front().box;
  for (const auto& s : samples) {
    if (!(s.box == box)) {
      throw Error(ErrorCode::InvalidArgument, "samples must share one box");
    }
  }
  const Lattice lat = Lattice::observation(box);
  const long sites = lat.size();
  const double ns = static_cast<double>(samples.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(sites);
  for (const auto& s : samples) {
    mean += s.values;
  }
  mean /= ns;
  CovarianceEstimate est;
  est.lags = lags;
  for (double lag : lags) {
    const long step = std::lround(lag / box.spacing);
    std::vector<double> per_sample(samples.size(), 0.0);
    long pairs = 0;
    long k[3];
    for (int a = 0; a < box.dim; ++a) {
      for (long i = 0; i < sites; ++i) {
        lat.multi_index(i, k);
        long kk[3] = {k[0], k[1], k[2]};
        kk[a] += step;
        if (kk[a] < 0 || kk[a] >= lat.count) {
          if (!lat.periodic) {
            continue;
          }
          kk[a] = ((kk[a] % lat.count) + lat.count) % lat.count;
        }
        const long j = lat.linear_index(kk);
        ++pairs;
        for (std::size_t s = 0; s < samples.size(); ++s) {
          per_sample[s] +=
              (samples[s].values[i] - mean[i]) * (samples[s].values[j] - mean[j]);
        }
      }
    }
    if (pairs == 0) {
      est.value.push_back(0.0);
      est.std_error.push_back(0.0);
      continue;
    }
    // Each per-sample term carries the n / (n - 1) correction of the
    // unbiased cross-sample covariance.
    Eigen::Map<Eigen::VectorXd> q(per_sample.data(), static_cast<long>(per_sample.size()));
    q *= ns / ((ns - 1.0) * static_cast<double>(pairs));
    const double value = q.mean();
    const double var = (q.array() - value).square().sum() / (ns - 1.0);
    est.value.push_back(value);
    est.std_error.push_back(std::sqrt(var / ns));
  }
  return est;
}

WeightFunction gaussian_weight(const CovarianceModel& cov) {
  cov.validate();
  WeightFunction w("gaussian", {{"covariance", cov.to_json()}},
                   [cov](double l) { return std::max(-cov.derivative(l), 0.0); });
  if (cov.family == CovarianceModel::Family::Tabulated) {
    w.set_kinks(cov.nodes);
    w.set_support_end(cov.nodes.back());
  }
  return w;
}

void gauss_hermite(int level, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (level < 1) {
    throw Error(ErrorCode::InvalidArgument, "quadrature level must be positive");
  }
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(level, level);
  for (int k = 1; k < level; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  nodes = eig.eigenvalues();
  weights = eig.eigenvectors().row(0).transpose().array().square();
  weights /= weights.sum();
}

BrascampLieb brascamp_lieb_oracle(
    const Eigen::MatrixXd& f, const std::function<double(const Eigen::VectorXd&)>& z, int level,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient, int budget) {
  const long n = f.rows();
  if (n < 1 || n > 8 || f.cols() != n) {
    throw Error(ErrorCode::InvalidArgument, "F must be square with 1 <= N <= 8");
  }
  if (n * level > budget) {
    throw Error(ErrorCode::QuadratureOverflow,
                "N * level = " + std::to_string(n * level) + " exceeds " + std::to_string(budget));
  }
  Eigen::VectorXd nodes, weights;
  gauss_hermite(level, nodes, weights);
  const Eigen::MatrixXd cov = (f * f.transpose()).cwiseAbs();
  auto grad = [&](const Eigen::VectorXd& a) {
    if (gradient) {
      return gradient(a);
    }
    Eigen::VectorXd g(n);
    for (long i = 0; i < n; ++i) {
      const double step = 1e-5 * std::max(1.0, std::fabs(a[i]));
      Eigen::VectorXd p = a, m = a;
      p[i] += step;
      m[i] -= step;
      g[i] = (z(p) - z(m)) / (2.0 * step);
    }
    return g;
  };
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  double m1 = 0.0, m2 = 0.0, rhs = 0.0;
  Eigen::VectorXd w(n);
  for (;;) {
    double weight = 1.0;
    for (long i = 0; i < n; ++i) {
      w[i] = nodes[idx[static_cast<std::size_t>(i)]];
      weight *= weights[idx[static_cast<std::size_t>(i)]];
    }
    const Eigen::VectorXd a = f * w;
    const double value = z(a);
    m1 += weight * value;
    m2 += weight * value * value;
    const Eigen::VectorXd g = grad(a).cwiseAbs();
    rhs += weight * g.dot(cov * g);
    long i = n - 1;
    while (i >= 0) {
      if (++idx[static_cast<std::size_t>(i)] < level) break;
      idx[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
  }
  return {std::max(m2 - m1 * m1, 0.0), rhs};
}

}  // namespace mfilab
