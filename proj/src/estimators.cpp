#include "mfilab/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "mfilab/error.hpp"
#include "mfilab/io.hpp"

namespace mfilab {

void parallel_for(long n, int workers, const std::function<void(long)>& f) {
  if (n <= 0) return;
  const long threads = std::min<long>(std::max(workers, 1), n);
  if (threads == 1) {
    for (long i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  auto body = [&] {
    for (long i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (long t = 0; t < threads; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  // Report the failure of the lowest index, whatever the schedule.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

RngStream realization_stream(const RngStream& rng, long i) {
  return rng.substream("realization").substream(static_cast<std::uint64_t>(i));
}

// ---------------------------------------------------------------------------

std::vector<double> osc_derivative(const FieldModel& model, const Keys& keys,
                                   const FieldSample& field,
                                   const std::vector<const Observable*>& observables,
                                   const Point& x, double r, int K, const RngStream& rng) {
  if (K < 0) {
    throw Error(ErrorCode::InvalidArgument, "resample count must be nonnegative");
  }
  if (!model.supports_block_resampling()) {
    throw Error(ErrorCode::UnsupportedGenerator, model.id() + " does not expose block resampling");
  }
  const std::size_t m = observables.size();
  std::vector<double> lo(m), hi(m);
  for (std::size_t o = 0; o < m; ++o) {
    lo[o] = hi[o] = (*observables[o])(field);
  }
  const BoxSpec& box = model.box();
  const Lattice lat = Lattice::observation(box);
  const double tol = 1e-12 * std::max(1.0, r);
  std::vector<long> outside;
  for (long s = 0; s < lat.size(); ++s) {
    if (box_distance(box, lat.site(s), x) > r + tol) outside.push_back(s);
  }
  static constexpr double kSchedule[4] = {1.0, 0.5, 0.75, 0.25};
  std::vector<long> blocks[4];
  bool built[4] = {false, false, false, false};
  for (int k = 0; k < K; ++k) {
    const int slot = k % 4;
    if (!built[slot]) {
      blocks[slot] = model.units_in_ball(x, r * kSchedule[slot]);
      built[slot] = true;
    }
    if (blocks[slot].empty()) continue;
    FieldSample g;
    try {
      g = model.render(model.resample(keys, blocks[slot], rng.substream(static_cast<std::uint64_t>(k))));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptyConfiguration) continue;
      throw;
    }
    bool same = true;
    for (long s : outside) {
      if (g.values[s] != field.values[s]) {
        same = false;
        break;
      }
    }
    if (!same) continue;
    for (std::size_t o = 0; o < m; ++o) {
      const double z = (*observables[o])(g);
      lo[o] = std::min(lo[o], z);
      hi[o] = std::max(hi[o], z);
    }
  }
  std::vector<double> out(m);
  for (std::size_t o = 0; o < m; ++o) out[o] = hi[o] - lo[o];
  return out;
}

double osc_derivative(const FieldModel& model, const RngStream& realization,
                      const Observable& observable, const Point& x, double ell, int K) {
  if (K < 2) {
    throw Error(ErrorCode::InvalidArgument, "oscillation needs at least two resamples");
  }
  const Keys keys = model.draw_keys(realization.substream("field"));
  const FieldSample field = model.render(keys);
  return osc_derivative(model, keys, field, {&observable}, x, ell + 1.0, K,
                        realization.substream("osc"))[0];
}

std::vector<double> fct_gradient(const FieldSample& latent, const Observable& observable,
                                 double step, const LipschitzClamp& clamp) {
  if (!observable.smooth()) {
    throw Error(ErrorCode::NonSmoothObservable,
                observable.name() + " has no functional derivative");
  }
  if (!(step > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  }
  Eigen::VectorXd a(latent.values.size());
  for (long s = 0; s < a.size(); ++s) a[s] = clamp(latent.values[s]);
  std::vector<double> g;
  g.reserve(observable.support().size());
  for (long s : observable.support()) {
    const double keep = a[s];
    const double x = latent.values[s];
    a[s] = clamp(x + step);
    const double up = observable(a);
    a[s] = clamp(x - step);
    const double down = observable(a);
    a[s] = keep;
    g.push_back((up - down) / (2.0 * step));
  }
  return g;
}

double fct_derivative(const FieldSample& latent, const Observable& observable,
                      const std::vector<long>& region, double step, const LipschitzClamp& clamp) {
  const std::vector<double> g = fct_gradient(latent, observable, step, clamp);
  const auto& sup = observable.support();
  std::vector<long> sorted = region;
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (std::size_t i = 0; i < sup.size(); ++i) {
    if (std::binary_search(sorted.begin(), sorted.end(), sup[i])) total += std::fabs(g[i]);
  }
  return total;
}

BlockResample block_resample(const FieldModel& model, const Point& x, double ell,
                             const RngStream& rng) {
  if (!model.supports_block_resampling()) {
    throw Error(ErrorCode::UnsupportedGenerator, model.id() + " does not expose block resampling");
  }
  BlockResample b;
  b.block = Cube::around(x, ell);
  b.units = model.units_in_cube(b.block);
  b.keys = model.draw_keys(rng.substream("field"));
  b.resampled = model.resample(b.keys, b.units, rng.substream("block"));
  b.field = model.render(b.keys);
  b.resampled_field = model.render(b.resampled);
  return b;
}

double difference_radius(const FieldSample& a, const FieldSample& b, const Cube& block) {
  const Lattice lat = Lattice::observation(a.box);
  double rho = 0.0;
  for (long s = 0; s < lat.size(); ++s) {
    if (a.values[s] == b.values[s]) continue;
    if (!a.box.periodic() && lat.on_boundary(s)) {
      throw Error(ErrorCode::BoundaryHit, "field difference reaches the window boundary");
    }
    rho = std::max(rho, block.distance(lat.site(s)));
  }
  return rho;
}

double empirical_action_radius(const FieldModel& model, const Point& x, double ell,
                               const RngStream& rng) {
  const BlockResample b = block_resample(model, x, ell, rng);
  return difference_radius(b.field, b.resampled_field, b.block);
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd sample_observables(const FieldModel& model,
                                   const std::vector<const Observable*>& observables, long n,
                                   const RngStream& rng, int workers) {
  Eigen::MatrixXd out(n, static_cast<long>(observables.size()));
  parallel_for(n, workers, [&](long i) {
    const FieldSample f = model.render(model.draw_keys(realization_stream(rng, i).substream("field")));
    for (std::size_t o = 0; o < observables.size(); ++o) {
      out(i, static_cast<long>(o)) = (*observables[o])(f);
    }
  });
  return out;
}

namespace {

double jackknife_se(const std::vector<double>& loo) {
  const double n = static_cast<double>(loo.size());
  double mean = 0.0;
  for (double v : loo) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return std::sqrt((n - 1.0) / n * ss);
}

void require_two(long n) {
  if (n < 2) {
    throw Error(ErrorCode::InsufficientSamples, "at least two samples are required");
  }
}

}  // namespace

Estimate covariance_of(const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  const long n = y.size();
  require_two(n);
  if (z.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "paired samples differ in length");
  }
  const double my = y.mean(), mz = z.mean();
  double sp = 0.0;
  for (long i = 0; i < n; ++i) sp += (y[i] - my) * (z[i] - mz);
  const double nd = static_cast<double>(n);
  Estimate e{sp / (nd - 1.0), 0.0};
  if (n >= 3) {
    std::vector<double> loo(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
      const double spi = sp - (y[i] - my) * (z[i] - mz) * nd / (nd - 1.0);
      loo[static_cast<std::size_t>(i)] = spi / (nd - 2.0);
    }
    e.std_error = jackknife_se(loo);
  } else {
    e.std_error = std::numeric_limits<double>::infinity();
  }
  return e;
}

Estimate variance_of(const Eigen::VectorXd& z) { return covariance_of(z, z); }

Estimate entropy_of(const Eigen::VectorXd& z, const RngStream& rng, int bootstrap) {
  const long n = z.size();
  require_two(n);
  auto ent = [&](const std::vector<long>* idx) {
    double m2 = 0.0;
    for (long i = 0; i < n; ++i) {
      const double v = z[idx ? (*idx)[static_cast<std::size_t>(i)] : i];
      m2 += v * v;
    }
    m2 /= static_cast<double>(n);
    if (m2 == 0.0) return 0.0;
    double e = 0.0;
    for (long i = 0; i < n; ++i) {
      const double v2 = std::pow(z[idx ? (*idx)[static_cast<std::size_t>(i)] : i], 2);
      if (v2 > 0.0) e += v2 * std::log(v2 / m2);
    }
    return e / static_cast<double>(n);
  };
  if (z.squaredNorm() == 0.0) {
    throw Error(ErrorCode::ZeroObservable, "Z vanishes on every sample");
  }
  Estimate out{ent(nullptr), 0.0};
  std::vector<double> boot;
  std::vector<long> idx(static_cast<std::size_t>(n));
  for (int b = 0; b < bootstrap; ++b) {
    Philox e(unit_key(rng, static_cast<std::uint64_t>(b)));
    for (auto& i : idx) {
      i = static_cast<long>(uniform01(e) * static_cast<double>(n));
      i = std::min(i, n - 1);
    }
    boot.push_back(ent(&idx));
  }
  if (boot.size() >= 2) {
    double mean = 0.0;
    for (double v : boot) mean += v;
    mean /= static_cast<double>(boot.size());
    double ss = 0.0;
    for (double v : boot) ss += (v - mean) * (v - mean);
    out.std_error = std::sqrt(ss / static_cast<double>(boot.size() - 1));
  }
  return out;
}

Estimate variance_estimate(const FieldModel& model, const Observable& z, long n,
                           const RngStream& rng, int workers) {
  require_two(n);
  return variance_of(sample_observables(model, {&z}, n, rng, workers).col(0));
}

Estimate entropy_estimate(const FieldModel& model, const Observable& z, long n,
                          const RngStream& rng, int workers) {
  require_two(n);
  return entropy_of(sample_observables(model, {&z}, n, rng, workers).col(0),
                    rng.substream("bootstrap"));
}

Estimate covariance_estimate(const FieldModel& model, const Observable& y, const Observable& z,
                             long n, const RngStream& rng, int workers) {
  require_two(n);
  const Eigen::MatrixXd v = sample_observables(model, {&y, &z}, n, rng, workers);
  return covariance_of(v.col(0), v.col(1));
}

// ---------------------------------------------------------------------------

std::string to_string(Inequality q) {
  switch (q) {
    case Inequality::MSG: return "MSG";
    case Inequality::MLSI: return "MLSI";
    case Inequality::MCI: return "MCI";
  }
  return "?";
}

Inequality inequality_from_string(const std::string& s) {
  if (s == "MSG") return Inequality::MSG;
  if (s == "MLSI") return Inequality::MLSI;
  if (s == "MCI") return Inequality::MCI;
  throw Error(ErrorCode::ConfigValidation, "inequality '" + s + "' is not one of MSG, MLSI, MCI");
}

namespace {

double integrate_segment(const WeightFunction& w, int dim, double a, double b, bool left) {
  // Integral over [a, b] of hat(l) (l + 1)^-d pi(l); hat is 1 at a (left) or at b.
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a};
  for (double k : w.kinks()) {
    if (k > a && k < b) cuts.push_back(k);
  }
  if (auto end = w.support_end(); end && *end > a && *end < b) cuts.push_back(*end);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  const double len = b - a;
  auto f = [&](double l) {
    const double hat = left ? (b - l) / len : (l - a) / len;
    return hat * w(l) * std::pow(l + 1.0, -dim);
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] > cuts[i]) {
      total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, cuts[i],
                                                                             cuts[i + 1], 10);
    }
  }
  return total;
}

}  // namespace

ScaleGrid make_scale_grid(const WeightFunction& weight, int dim, const std::vector<double>& scales,
                          int refine) {
  if (!weight.integrable()) {
    throw Error(ErrorCode::InvalidArgument, "weight '" + weight.family() + "' is not integrable");
  }
  ScaleGrid g;
  const double total = weight.total_mass();
  std::vector<double> pts;
  if (!scales.empty()) {
    pts = scales;
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.front() < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "scales must be nonnegative");
    }
    g.ell_max = pts.back();
    const double beyond = total - weight.integral(0.0, g.ell_max);
    if (beyond > 0.01 * total) {
      throw Error(ErrorCode::WeightSupportNotCovered,
                  "weight mass beyond l = " + format_double(g.ell_max) + " is " +
                      format_double(beyond / total) + " of the total");
    }
  } else {
    g.ell_max = total > 0.0 ? weight.mass_quantile(0.99) : 0.0;
    if (auto atom = weight.atom(); atom && atom->first <= g.ell_max) {
      pts.push_back(atom->first);
    }
    pts.push_back(0.0);
    for (double l = 1.0; l < g.ell_max; l *= 2.0) pts.push_back(l);
    pts.push_back(g.ell_max);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  }
  for (int r = 0; r < refine; ++r) {
    std::vector<double> finer;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i > 0) finer.push_back(0.5 * (pts[i - 1] + pts[i]));
      finer.push_back(pts[i]);
    }
    pts.swap(finer);
  }
  g.ell = pts;
  g.quad.assign(pts.size(), 0.0);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    g.quad[i] += integrate_segment(weight, dim, pts[i], pts[i + 1], true);
    g.quad[i + 1] += integrate_segment(weight, dim, pts[i], pts[i + 1], false);
  }
  if (auto atom = weight.atom(); atom && atom->first <= g.ell_max) {
    const double p = atom->first;
    const double mass = atom->second * std::pow(p + 1.0, -dim);
    const auto it = std::lower_bound(pts.begin(), pts.end(), p);
    const std::size_t j = static_cast<std::size_t>(it - pts.begin());
    if (pts[j] == p || j == 0) {
      g.quad[j] += mass;
    } else {
      const double t = (p - pts[j - 1]) / (pts[j] - pts[j - 1]);
      g.quad[j - 1] += (1.0 - t) * mass;
      g.quad[j] += t * mass;
    }
  }
  return g;
}

double x_spacing(double h, double ell, int refine) {
  return std::max(h, ell / 4.0) / std::ldexp(1.0, refine);
}

std::vector<Point> x_grid(const BoxSpec& box, const std::vector<long>& sites, double r, double s) {
  const Lattice lat = Lattice::observation(box);
  const int d = box.dim;
  std::vector<Point> pts;
  pts.reserve(sites.size());
  for (long i : sites) pts.push_back(lat.site(i));
  std::vector<Point> out;
  if (pts.empty()) return out;
  long lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
  double step = s;
  if (box.periodic()) {
    const long cells = static_cast<long>(std::ceil(box.side / s - 1e-9));
    step = box.side / static_cast<double>(cells);
    for (int a = 0; a < d; ++a) hi[a] = cells - 1;
  } else {
    for (int a = 0; a < d; ++a) {
      double mn = pts[0][a], mx = pts[0][a];
      for (const Point& p : pts) {
        mn = std::min(mn, p[a]);
        mx = std::max(mx, p[a]);
      }
      lo[a] = static_cast<long>(std::floor((mn - r) / step - 0.5));
      hi[a] = static_cast<long>(std::ceil((mx + r) / step - 0.5));
    }
  }
  const double tol = 1e-12 * std::max(1.0, r);
  long k[3] = {lo[0], lo[1], lo[2]};
  Point x(d);
  for (;;) {
    for (int a = 0; a < d; ++a) x[a] = step * (static_cast<double>(k[a]) + 0.5);
    for (const Point& p : pts) {
      if (box_distance(box, p, x) <= r + tol) {
        out.push_back(x);
        break;
      }
    }
    int a = d - 1;
    while (a >= 0) {
      if (++k[a] <= hi[a]) break;
      k[a] = lo[a];
      --a;
    }
    if (a < 0) break;
  }
  return out;
}

DerivativeTable derivative_table(const FieldModel& model,
                                 const std::vector<const Observable*>& observables,
                                 const WeightFunction& weight, const RhsSettings& settings,
                                 const RngStream& rng) {
  require_two(settings.n);
  const BoxSpec& box = model.box();
  const int d = box.dim;
  DerivativeTable t;
  const auto* gauss = dynamic_cast<const GaussianModel*>(&model);
  t.derivative = settings.derivative;
  if (t.derivative == DerivativeKind::Automatic) {
    t.derivative = gauss ? DerivativeKind::Functional : DerivativeKind::Oscillation;
  }
  if (t.derivative == DerivativeKind::Functional) {
    if (!gauss) {
      throw Error(ErrorCode::InvalidArgument, "functional derivatives need a gaussian model");
    }
    for (const Observable* o : observables) {
      if (!o->smooth()) {
        throw Error(ErrorCode::NonSmoothObservable, o->name() + " has no functional derivative");
      }
    }
  } else {
    if (!model.supports_block_resampling()) {
      throw Error(ErrorCode::UnsupportedGenerator,
                  model.id() + " does not expose block resampling");
    }
    if (settings.K < 2) {
      throw Error(ErrorCode::InvalidArgument, "oscillation needs at least two resamples");
    }
  }
  t.grid = make_scale_grid(weight, d, settings.scales, settings.refine);
  std::vector<long> support;
  for (const Observable* o : observables) {
    support.insert(support.end(), o->support().begin(), o->support().end());
  }
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  std::vector<double> cell_r;
  for (std::size_t j = 0; j < t.grid.ell.size(); ++j) {
    if (t.grid.quad[j] == 0.0) continue;
    const double ell = t.grid.ell[j];
    const double r = weight.ball_radius(ell, d);
    const double s = x_spacing(box.spacing, ell, settings.refine);
    double step = s;
    if (box.periodic()) {
      step = box.side / std::ceil(box.side / s - 1e-9);
    }
    for (const Point& x : x_grid(box, support, r, s)) {
      t.cell_weight.push_back(t.grid.quad[j] * std::pow(step, d));
      t.cell_ell.push_back(ell);
      t.cell_x.push_back(x);
      cell_r.push_back(r);
    }
  }
  const std::size_t nc = t.cell_x.size();
  const std::size_t m = observables.size();
  t.d2.assign(static_cast<std::size_t>(settings.n),
              std::vector<std::vector<double>>(m, std::vector<double>(nc, 0.0)));
  const Lattice lat = Lattice::observation(box);
  parallel_for(settings.n, settings.workers, [&](long i) {
    const RngStream stream = realization_stream(rng, i);
    const Keys keys = model.draw_keys(stream.substream("field"));
    auto& row = t.d2[static_cast<std::size_t>(i)];
    if (t.derivative == DerivativeKind::Functional) {
      const FieldSample latent = gauss->latent(keys);
      const double step = 1e-3 * std::sqrt(gauss->covariance().at_zero());
      for (std::size_t o = 0; o < m; ++o) {
        const Observable& obs = *observables[o];
        const std::vector<double> g = fct_gradient(latent, obs, step, gauss->clamp());
        std::vector<Point> sites;
        for (long s : obs.support()) sites.push_back(lat.site(s));
        for (std::size_t c = 0; c < nc; ++c) {
          double sum = 0.0;
          const double tol = 1e-12 * std::max(1.0, cell_r[c]);
          for (std::size_t k = 0; k < sites.size(); ++k) {
            if (box_distance(box, sites[k], t.cell_x[c]) <= cell_r[c] + tol) {
              sum += std::fabs(g[k]);
            }
          }
          row[o][c] = sum * sum;
        }
      }
      return;
    }
    const FieldSample field = model.render(keys);
    const RngStream osc = stream.substream("osc");
    for (std::size_t c = 0; c < nc; ++c) {
      const std::vector<double> v =
          osc_derivative(model, keys, field, observables, t.cell_x[c], cell_r[c], settings.K,
                         osc.substream(static_cast<std::uint64_t>(c)));
      for (std::size_t o = 0; o < m; ++o) row[o][c] = v[o] * v[o];
    }
  });
  return t;
}

Estimate msg_rhs_from(const DerivativeTable& table, std::size_t observable) {
  const long n = static_cast<long>(table.d2.size());
  require_two(n);
  Eigen::VectorXd per(n);
  for (long i = 0; i < n; ++i) {
    const auto& row = table.d2[static_cast<std::size_t>(i)][observable];
    double s = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) s += table.cell_weight[c] * row[c];
    per[i] = s;
  }
  const double mean = per.mean();
  const double var = (per.array() - mean).square().sum() / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

Estimate mci_rhs_from(const DerivativeTable& table, std::size_t y, std::size_t z) {
  const long n = static_cast<long>(table.d2.size());
  require_two(n);
  const std::size_t nc = table.cell_weight.size();
  std::vector<double> sy(nc, 0.0), sz(nc, 0.0);
  for (const auto& row : table.d2) {
    for (std::size_t c = 0; c < nc; ++c) {
      sy[c] += row[y][c];
      sz[c] += row[z][c];
    }
  }
  const double nd = static_cast<double>(n);
  auto value = [&](long skip) {
    const double denom = skip < 0 ? nd : nd - 1.0;
    double total = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      double a = sy[c], b = sz[c];
      if (skip >= 0) {
        a -= table.d2[static_cast<std::size_t>(skip)][y][c];
        b -= table.d2[static_cast<std::size_t>(skip)][z][c];
      }
      total += table.cell_weight[c] * std::sqrt(std::max(a, 0.0) / denom) *
               std::sqrt(std::max(b, 0.0) / denom);
    }
    return total;
  };
  std::vector<double> loo(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) loo[static_cast<std::size_t>(i)] = value(i);
  return {value(-1), jackknife_se(loo)};
}

Estimate msg_rhs(const FieldModel& model, const Observable& z, const WeightFunction& weight,
                 const RhsSettings& settings, const RngStream& rng) {
  return msg_rhs_from(derivative_table(model, {&z}, weight, settings, rng), 0);
}

Estimate mci_rhs(const FieldModel& model, const Observable& y, const Observable& z,
                 const WeightFunction& weight, const RhsSettings& settings,
                 const RngStream& rng) {
  return mci_rhs_from(derivative_table(model, {&y, &z}, weight, settings, rng), 0, 1);
}

// ---------------------------------------------------------------------------

double best_constant(double lhs, double rhs) {
  if (!(lhs > 0.0)) return 0.0;
  if (!(rhs > 0.0)) return std::numeric_limits<double>::infinity();
  return lhs / rhs;
}

namespace {

nlohmann::json number_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

nlohmann::json MfiReport::to_json() const {
  return {{"inequality", to_string(inequality)},
          {"model", model},
          {"model_spec", model_spec},
          {"observables", observables},
          {"weight", weight},
          {"lhs", {{"value", lhs.value}, {"stderr", number_or_null(lhs.std_error)}}},
          {"rhs", {{"value", rhs.value}, {"stderr", number_or_null(rhs.std_error)}}},
          {"best_constant", number_or_null(best_constant)},
          {"grids", {{"scale_grid", scale_grid}, {"x_grid", x_grid}, {"refine", refine}}},
          {"derivative", derivative},
          {"K", K},
          {"n", n},
          {"n_rhs", n_rhs},
          {"seed", seed}};
}

MfiReport MfiReport::from_json(const nlohmann::json& j) {
  auto num = [](const nlohmann::json& v) {
    return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
  };
  try {
    MfiReport r;
    r.inequality = inequality_from_string(j.at("inequality").get<std::string>());
    r.model = j.at("model").get<std::string>();
    r.model_spec = j.value("model_spec", nlohmann::json::object());
    r.observables = j.at("observables").get<std::vector<nlohmann::json>>();
    r.weight = j.value("weight", nlohmann::json::object());
    r.lhs = {j.at("lhs").at("value").get<double>(), num(j.at("lhs").at("stderr"))};
    r.rhs = {j.at("rhs").at("value").get<double>(), num(j.at("rhs").at("stderr"))};
    r.best_constant = num(j.at("best_constant"));
    r.scale_grid = j.at("grids").at("scale_grid").get<std::vector<double>>();
    r.x_grid = j.at("grids").at("x_grid").get<std::string>();
    r.refine = j.at("grids").at("refine").get<int>();
    r.derivative = j.value("derivative", "");
    r.K = j.at("K").get<int>();
    r.n = j.at("n").get<long>();
    r.n_rhs = j.at("n_rhs").get<long>();
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigValidation, std::string("malformed report: ") + e.what());
  }
}

std::vector<std::string> MfiReport::csv_header() {
  return {"inequality", "model", "observables", "lhs", "lhs_stderr", "rhs", "rhs_stderr",
          "best_constant", "K", "n", "n_rhs", "refine", "derivative", "x_grid", "scale_grid",
          "seed"};
}

std::vector<std::string> MfiReport::csv_row() const {
  std::string obs;
  for (const auto& o : observables) {
    if (!obs.empty()) obs += ';';
    obs += o.value("kind", "?");
  }
  return {to_string(inequality),
          model,
          obs,
          format_double(lhs.value),
          format_double(lhs.std_error),
          format_double(rhs.value),
          format_double(rhs.std_error),
          format_double(best_constant),
          std::to_string(K),
          std::to_string(n),
          std::to_string(n_rhs),
          std::to_string(refine),
          derivative,
          x_grid,
          join_numbers(scale_grid),
          std::to_string(seed)};
}

std::vector<MfiReport> verify(Inequality inequality, const FieldModel& model,
                              const std::vector<Observable>& observables,
                              const WeightFunction& weight, const VerifySettings& settings,
                              const RngStream& rng) {
  if (inequality == Inequality::MCI && observables.size() != 2) {
    throw Error(ErrorCode::InvalidArgument, "MCI takes exactly two observables");
  }
  if (observables.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no observable given");
  }
  require_two(settings.n);
  std::vector<const Observable*> ptrs;
  for (const auto& o : observables) ptrs.push_back(&o);
  const Eigen::MatrixXd values = sample_observables(model, ptrs, settings.n, rng,
                                                    settings.rhs.workers);
  const DerivativeTable table = derivative_table(model, ptrs, weight, settings.rhs, rng);

  MfiReport base;
  base.inequality = inequality;
  base.model = model.id();
  base.model_spec = model.describe();
  base.weight = weight.to_json();
  base.scale_grid = table.grid.ell;
  base.x_grid = "max(h, l/4) / 2^" + std::to_string(settings.rhs.refine);
  base.derivative = table.derivative == DerivativeKind::Functional ? "functional" : "oscillation";
  base.K = table.derivative == DerivativeKind::Functional ? 0 : settings.rhs.K;
  base.n = settings.n;
  base.n_rhs = settings.rhs.n;
  base.refine = settings.rhs.refine;
  base.seed = rng.seed();

  std::vector<MfiReport> out;
  if (inequality == Inequality::MCI) {
    MfiReport r = base;
    r.observables = {observables[0].to_json(), observables[1].to_json()};
    r.lhs = covariance_of(values.col(0), values.col(1));
    r.rhs = mci_rhs_from(table, 0, 1);
    r.best_constant = best_constant(r.lhs.value, r.rhs.value);
    out.push_back(std::move(r));
    return out;
  }
  for (std::size_t o = 0; o < observables.size(); ++o) {
    MfiReport r = base;
    r.observables = {observables[o].to_json()};
    r.lhs = inequality == Inequality::MSG
                ? variance_of(values.col(static_cast<long>(o)))
                : entropy_of(values.col(static_cast<long>(o)),
                             rng.substream("bootstrap").substream(static_cast<std::uint64_t>(o)));
    r.rhs = msg_rhs_from(table, o);
    r.best_constant = best_constant(r.lhs.value, r.rhs.value);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------

EfronStein efron_stein_check(int n_vars, const ScalarLaw& law,
                             const std::function<double(const Eigen::VectorXd&)>& functional,
                             long n_mc, const RngStream& rng) {
  if (n_vars < 1 || n_vars > 64) {
    throw Error(ErrorCode::InvalidArgument, "Efron-Stein check takes 1 to 64 variables");
  }
  require_two(n_mc);
  Eigen::VectorXd y(n_mc), r(n_mc);
  Eigen::VectorXd x(n_vars), xc(n_vars), xi(n_vars);
  for (long j = 0; j < n_mc; ++j) {
    Philox e(unit_key(rng, static_cast<std::uint64_t>(j)));
    for (int i = 0; i < n_vars; ++i) x[i] = law.sample(e);
    for (int i = 0; i < n_vars; ++i) xc[i] = law.sample(e);
    const double f = functional(x);
    double s = 0.0;
    xi = x;
    for (int i = 0; i < n_vars; ++i) {
      xi[i] = xc[i];
      const double fi = functional(xi);
      s += (f - fi) * (f - fi);
      xi[i] = x[i];
    }
    y[j] = f;
    r[j] = 0.5 * s;
  }
  EfronStein out;
  out.lhs = variance_of(y);
  const double nd = static_cast<double>(n_mc);
  const double rm = r.mean();
  out.rhs = {rm, std::sqrt((r.array() - rm).square().sum() / (nd - 1.0) / nd)};
  auto ratio = [](double a, double b) { return b > 0.0 ? a / b : 0.0; };
  out.ratio.value = ratio(out.lhs.value, rm);
  if (n_mc >= 3) {
    const double my = y.mean();
    double ss = 0.0;
    for (long j = 0; j < n_mc; ++j) ss += (y[j] - my) * (y[j] - my);
    std::vector<double> loo(static_cast<std::size_t>(n_mc));
    for (long j = 0; j < n_mc; ++j) {
      const double v = (ss - (y[j] - my) * (y[j] - my) * nd / (nd - 1.0)) / (nd - 2.0);
      const double m = (rm * nd - r[j]) / (nd - 1.0);
      loo[static_cast<std::size_t>(j)] = ratio(v, m);
    }
    out.ratio.std_error = jackknife_se(loo);
  }
  return out;
}

}  // namespace mfilab
