// Acceptance runs. Prints one PASS/FAIL line per criterion; arguments select
// criteria by number (default: all). Exit status is the number of failures,
// leaving out criteria named with --known-red N (still reported as FAIL).

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mfilab/error.hpp"
#include "mfilab/estimators.hpp"
#include "mfilab/gaussian.hpp"
#include "mfilab/inclusions.hpp"
#include "mfilab/models.hpp"
#include "mfilab/observables.hpp"
#include "mfilab/pointproc.hpp"
#include "mfilab/tail.hpp"
#include "mfilab/tessellation.hpp"
#include "mfilab/weights.hpp"

using namespace mfilab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void note(const std::string& s) {
  std::printf("  %s\n", s.c_str());
  std::fflush(stdout);
}

BoxSpec box(int d, double side, double margin, double h = 1.0) {
  BoxSpec b;
  b.dim = d;
  b.side = side;
  b.margin = margin;
  b.spacing = h;
  b.validate();
  return b;
}

Point at(std::initializer_list<double> xs) {
  Point p(static_cast<long>(xs.size()));
  long i = 0;
  for (double x : xs) p[i++] = x;
  return p;
}

RngStream trial_stream(std::uint64_t seed, long t) {
  return RngStream(seed).substream(static_cast<std::uint64_t>(t));
}

// Sites where the fields differ farther from the block than rho.
long violations(const BlockResample& br, double rho) {
  const Lattice lat = Lattice::observation(br.field.box);
  long bad = 0;
  for (long s = 0; s < lat.size(); ++s) {
    if (br.field.values[s] != br.resampled_field.values[s] &&
        br.block.distance(lat.site(s)) > rho + 1e-9) {
      ++bad;
    }
  }
  return bad;
}

std::vector<char> block_mask(const FieldModel& m, const std::vector<long>& units) {
  std::vector<char> in(static_cast<std::size_t>(m.unit_count()), 0);
  for (long u : units) in[static_cast<std::size_t>(u)] = 1;
  return in;
}

// Rare residual gaps need horizons past the default cap.
ParkingOptions long_horizon() {
  ParkingOptions o;
  o.horizon_cap = 1073741824.0;
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Philox e(2024);
  long mismatches = 0, close = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 1 + trial % 3;
    const BoxSpec b = box(d, d == 1 ? 30.0 : (d == 2 ? 10.0 : 5.0), 0.5);
    const long n = 1 + static_cast<long>(uniform01(e) * 300.0);
    const double r = 0.1 + 0.7 * uniform01(e);
    PointConfiguration c(b);
    for (long i = 0; i < n; ++i) {
      Point p(d);
      for (int a = 0; a < d; ++a) p[a] = b.lower() + b.padded_side() * uniform01(e);
      // A few exact time ties exercise the lexicographic rule.
      const double t = trial % 10 == 0 ? std::floor(4.0 * uniform01(e)) : uniform01(e);
      c.push_back(p, t);
    }
    const PointConfiguration p = penrose_parking(c, r);
    mismatches += !same_points(p, sequential_rsa_oracle(c, r));
    close += !(min_pair_distance(p) > 2.0 * r);
  }
  return {mismatches == 0 && close == 0,
          fmt("1000 configs: %ld oracle mismatches, %ld with min distance <= 2R", mismatches, close)};
}

// ---------------------------------------------------------------------------

struct SoundnessCount {
  long trials = 0;
  long bad_trials = 0;
  long bad_sites = 0;
  long changed = 0;
  long skipped = 0;
  long outside = 0;  // trials with a change outside the block itself
  std::string extra;

  std::string text(const std::string& name) const {
    return fmt("%s: %ld trials (%ld changed, %ld beyond the block, %ld unbounded rho) %ld "
               "violating trials%s",
               name.c_str(), trials, changed, outside, skipped, bad_trials, extra.c_str());
  }
};

void tally(SoundnessCount& c, const BlockResample& br, double rho) {
  ++c.trials;
  c.changed += br.field.values != br.resampled_field.values;
  c.outside += violations(br, 0.0) > 0;
  const long v = violations(br, rho);
  c.bad_sites += v;
  c.bad_trials += v > 0;
}

SoundnessCount soundness_voronoi(long trials) {
  const BoxSpec b = box(2, 12.0, 10.0);
  const VoronoiModel model(b, VoronoiFieldSpec{});
  SoundnessCount c;
  for (long t = 0; t < trials; ++t) {
    const Point x = at({2.5 + t % 8, 3.5 + t % 6});
    const BlockResample br = block_resample(model, x, t % 3, trial_stream(201, t));
    double rho = 0.0;
    try {
      rho = voronoi_action_radius(model.points(br.keys), x, t % 3, b);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnboundedGSet) throw;
      ++c.skipped;
      rho = std::numeric_limits<double>::infinity();
    }
    tally(c, br, rho);
  }
  return c;
}

// Parking: every point outside the block up to the larger of the two
// saturation horizons, flagged by its acceptance in the unperturbed run,
// with the block points of both runs as chain sources.
SoundnessCount soundness_parking(long trials) {
  HardcoreSpec hc;
  hc.radius = 0.5;
  const BoxSpec b = box(1, 30.0, 4.0, 0.25);
  const HardcoreFieldModel model(b, HardcoreFieldModel::Kind::Parking, hc, std::nullopt,
                                 long_horizon());
  const CellProcess& proc = model.process();
  SoundnessCount c;
  long inexact = 0;
  double max_h = 0.0;
  for (long t = 0; t < trials; ++t) {
    const Point x = at({8.5 + t % 13});
    const BlockResample br = block_resample(model, x, t % 3, trial_stream(202, t));
    const ParkingRun r1 = model.run(br.keys);
    const ParkingRun r2 = model.run(br.resampled);
    inexact += !r1.exact + !r2.exact;
    const double horizon = std::max(r1.horizon, r2.horizon);
    max_h = std::max(max_h, horizon);
    const std::vector<char> in = block_mask(model, br.units);

    std::set<std::pair<double, double>> kept;
    for (long i = 0; i < r1.accepted.size(); ++i) {
      kept.insert({r1.accepted.time(i), r1.accepted.position(i)[0]});
    }
    PointConfiguration outside(b), sources(b);
    outside.names = sources.names = proc.mark_names();
    for (int chunk = 0;; ++chunk) {
      double t0 = 0.0, t1 = 0.0;
      parking_chunk(chunk, t0, t1);
      if (t0 >= horizon) break;
      for (long u = 0; u < model.unit_count(); ++u) {
        const auto cu = static_cast<std::size_t>(u);
        if (in[cu]) {
          proc.generate(br.keys[cu], u, static_cast<std::uint64_t>(chunk), t0, t1, t1 - t0, sources);
          proc.generate(br.resampled[cu], u, static_cast<std::uint64_t>(chunk), t0, t1, t1 - t0,
                        sources);
        } else {
          proc.generate(br.keys[cu], u, static_cast<std::uint64_t>(chunk), t0, t1, t1 - t0, outside);
        }
      }
    }
    std::vector<char> flags(static_cast<std::size_t>(outside.size()), 0);
    long matched = 0;
    for (long i = 0; i < outside.size(); ++i) {
      flags[static_cast<std::size_t>(i)] = kept.count({outside.time(i), outside.position(i)[0]}) > 0;
      matched += flags[static_cast<std::size_t>(i)];
    }
    long kept_outside = 0;
    for (long i = 0; i < r1.accepted.size(); ++i) {
      kept_outside += !in[static_cast<std::size_t>(proc.cells().locate(r1.accepted.position(i)))];
    }
    if (matched != kept_outside) {
      throw Error(ErrorCode::InvalidArgument, "accepted points not found in the regenerated process");
    }
    tally(c, br, shielded_chain_radius(outside, flags, sources, hc.radius, br.block));
  }
  c.extra = fmt(", %ld inexact runs, max horizon %.0f", inexact, max_h);
  return c;
}

SoundnessCount soundness_hardcore(long trials) {
  HardcoreSpec hc;
  hc.radius = 0.3;
  hc.lambda = 1.0;
  hc.horizon = 1.0;
  const BoxSpec b = box(2, 12.0, 2.4, 0.5);
  const HardcoreFieldModel model(b, HardcoreFieldModel::Kind::Hardcore, hc);
  SoundnessCount c;
  for (long t = 0; t < trials; ++t) {
    const Point x = at({3.5 + t % 5, 4.5 + t % 4});
    const BlockResample br = block_resample(model, x, t % 3, trial_stream(203, t));
    const PointConfiguration all =
        model.process().generate_all(br.keys, 0, 0.0, hc.horizon, hc.horizon);
    tally(c, br, std::max(hc.radius, causal_chain_radius(all, hc.radius, br.block)));
  }
  return c;
}

SoundnessCount soundness_inclusions(long trials) {
  InclusionModelSpec spec;
  spec.scheme = InclusionModelSpec::Scheme::Priority;
  spec.radius = ScalarLaw::exponential(1.0);
  spec.intensity = 0.5;
  const BoxSpec b = box(2, 12.0, spec.default_margin(), 0.5);
  const PoissonInclusionModel model(b, spec);
  SoundnessCount c;
  for (long t = 0; t < trials; ++t) {
    const Point x = at({3.5 + t % 5, 4.5 + t % 4});
    const BlockResample br = block_resample(model, x, t % 3, trial_stream(204, t));
    const std::vector<char> in = block_mask(model, br.units);
    double rho = 0.0;
    for (const Keys* k : {&br.keys, &br.resampled}) {
      const PointConfiguration p = model.points(*k);
      const int v = p.mark_index("V");
      for (long i = 0; i < p.size(); ++i) {
        if (in[static_cast<std::size_t>(model.process().cells().locate(p.position(i)))]) {
          rho = std::max(rho, p.mark(i, v));
        }
      }
    }
    tally(c, br, rho);
  }
  return c;
}

Outcome criterion2() {
  const long n = 500;
  Outcome o{true, ""};
  const std::vector<std::pair<std::string, std::function<SoundnessCount(long)>>> runs = {
      {"voronoi", soundness_voronoi},
      {"parking", soundness_parking},
      {"hardcore", soundness_hardcore},
      {"inclusions", soundness_inclusions}};
  for (const auto& [name, f] : runs) {
    const SoundnessCount c = f(n);
    note(c.text(name));
    o.pass = o.pass && c.bad_trials == 0 && c.trials == n && c.outside > n / 4;
  }
  o.detail = "0 violations required over 500 trials per model";
  return o;
}

// ---------------------------------------------------------------------------

std::vector<double> radii(long n, const std::function<double(long)>& f, long* hits) {
  std::vector<double> out;
  for (long i = 0; i < n; ++i) {
    try {
      out.push_back(f(i));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BoundaryHit && e.code() != ErrorCode::UnboundedGSet) throw;
      ++*hits;
    }
  }
  return out;
}

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome criterion3() {
  const long n = 2000;
  Outcome o{true, ""};

  {  // (a) Voronoi G-set radius in d = 2.
    const BoxSpec b = box(2, 8.0, 8.0, 0.25);
    const VoronoiModel model(b, VoronoiFieldSpec{});
    const RngStream rng(301);
    long hits = 0;
    std::vector<double> r;
    const double s = seconds([&] {
      r = radii(n, [&](long i) {
        const Keys k = model.draw_keys(realization_stream(rng, i).substream("field"));
        return voronoi_action_radius(model.points(k), at({4.5, 4.5}), 0.0, b);
      }, &hits);
    });
    const TailEstimate t = tail_fit(r, TailFamily::weibull(2.0), rng.substream("bootstrap"));
    const bool ok = t.r_squared >= 0.95 && t.parameter("rate") > 0.0 && hits == 0 && s <= 600.0;
    note(fmt("(a) voronoi d=2: R^2 %.4f, rate %.4f, window [%.3f, %.3f], %ld fit points, %ld "
             "unbounded, %.1f s: %s",
             t.r_squared, t.parameter("rate"), t.window_low, t.window_high, t.fit_points, hits, s,
             ok ? "ok" : "FAIL"));
    o.pass = o.pass && ok;
  }
  {  // (b) parking, empirical action radius in d = 1.
    HardcoreSpec hc;
    hc.radius = 0.5;
    const BoxSpec b = box(1, 40.0, 4.0, 0.1);
    const HardcoreFieldModel model(b, HardcoreFieldModel::Kind::Parking, hc, std::nullopt,
                                 long_horizon());
    const RngStream rng(302);
    long hits = 0;
    std::vector<double> r;
    const double s = seconds([&] {
      r = radii(n, [&](long i) {
        return empirical_action_radius(model, at({20.5}), 0.0, realization_stream(rng, i));
      }, &hits);
    });
    const TailEstimate t = tail_fit(r, TailFamily::exponential(), rng.substream("bootstrap"));
    const bool ok = t.r_squared >= 0.95 && t.parameter("rate") > 0.0 && hits == 0 && s <= 600.0;
    note(fmt("(b) parking d=1: R^2 %.4f, rate %.4f, window [%.3f, %.3f], %ld fit points, %ld "
             "boundary hits, %.1f s: %s",
             t.r_squared, t.parameter("rate"), t.window_low, t.window_high, t.fit_points, hits, s,
             ok ? "ok" : "FAIL"));
    o.pass = o.pass && ok;
  }
  {  // (c) two-phase inclusions with exponential radii against the radius-law tail.
    InclusionModelSpec spec;
    spec.radius = ScalarLaw::exponential(1.0);
    spec.intensity = 0.5;
    const BoxSpec b = box(2, 24.0, spec.default_margin(), 0.5);
    const PoissonInclusionModel model(b, spec);
    const RngStream rng(303);
    long hits = 0;
    std::vector<double> r;
    const double s = seconds([&] {
      r = radii(n, [&](long i) {
        return empirical_action_radius(model, at({12.5, 12.5}), 0.0, realization_stream(rng, i));
      }, &hits);
    });
    const TailEstimate t = tail_fit(r, TailFamily::exponential(), rng.substream("bootstrap"));
    std::vector<double> sorted = r, ells;
    std::sort(sorted.begin(), sorted.end());
    for (double v : sorted) {
      // The atom at 0 (no visible change) carries no tail information.
      if (v > 0.0 && v >= t.window_low && v <= t.window_high && (ells.empty() || v != ells.back())) {
        ells.push_back(v);
      }
    }
    // Normalization: least squares in log space over the window.
    double shift = 0.0;
    for (double l : ells) {
      shift += std::log(empirical_survival(sorted, l)) - std::log(spec.radius.survival(l - 1.0));
    }
    shift /= static_cast<double>(ells.size());
    double worst = 1.0;
    std::string table;
    for (double l : ells) {
      const double ratio =
          empirical_survival(sorted, l) / (std::exp(shift) * spec.radius.survival(l - 1.0));
      worst = std::max({worst, ratio, 1.0 / ratio});
      table += fmt(" %.2f:%.3f", l, ratio);
    }
    note("(c) ratio S/T by l:" + table);
    const bool ok = !ells.empty() && worst <= 2.0 && hits == 0 && s <= 600.0;
    note(fmt("(c) inclusions d=2: %zu window points in [%.3f, %.3f], worst factor %.3f, "
             "normalization %.4f, fitted rate %.4f (law 1), %ld boundary hits, %.1f s: %s",
             ells.size(), t.window_low, t.window_high, worst, std::exp(shift),
             t.parameter("rate"), hits, s, ok ? "ok" : "FAIL"));
    o.pass = o.pass && ok;
  }
  o.detail = "2000 radii per model";
  return o;
}

// ---------------------------------------------------------------------------

struct VerifyCase {
  std::string name;
  std::unique_ptr<FieldModel> model;
  WeightFunction weight;
  std::vector<Observable> observables;
};

std::vector<VerifyCase> verify_cases() {
  std::vector<VerifyCase> out;
  {
    BoxSpec b = box(1, 64.0, 0.0);
    b.boundary = Boundary::Periodic;
    const CovarianceModel cov = CovarianceModel::exponential(1.0, 2.0);
    VerifyCase c;
    c.name = "gaussian+gaussian_weight";
    c.model = std::make_unique<GaussianModel>(b, cov, LipschitzClamp::tanh(1.0, 2.0));
    c.weight = gaussian_weight(cov);
    c.observables = {Observable::window_average(b, at({32.0}), 4.0),
                     Observable::clipped_exp(b, at({32.0}), 4.0, 1.0, 2.0),
                     Observable::two_point(b, at({30.5}), at({33.5}))};
    out.push_back(std::move(c));
  }
  {
    const BoxSpec b = box(1, 24.0, 4.0);
    VerifyCase c;
    c.name = "voronoi+stretched-exp";
    c.model = std::make_unique<VoronoiModel>(b, VoronoiFieldSpec{});
    c.weight = stretched_exp_weight(2.0, 1);
    c.observables = {Observable::window_average(b, at({12.0}), 3.0),
                     Observable::clipped_exp(b, at({12.0}), 3.0, 2.0, 1.0),
                     Observable::site_max(b, at({12.0}), 1.0)};
    out.push_back(std::move(c));
  }
  {
    HardcoreSpec hc;
    hc.radius = 0.5;
    InclusionModelSpec incl;
    incl.scheme = InclusionModelSpec::Scheme::Priority;
    incl.radius = bounded_uniform_radius(1.0);
    const BoxSpec b = box(1, 24.0, 4.0);
    VerifyCase c;
    c.name = "parking_inclusions+exponential";
    c.model = std::make_unique<HardcoreFieldModel>(b, HardcoreFieldModel::Kind::Parking, hc, incl,
                                                   long_horizon());
    c.weight = exponential_weight(2.0);
    c.observables = {Observable::window_average(b, at({12.0}), 3.0),
                     Observable::clipped_exp(b, at({12.0}), 3.0, 2.0, 1.0),
                     Observable::site_max(b, at({12.0}), 1.0)};
    out.push_back(std::move(c));
  }
  {
    HardcoreSpec hc;
    hc.radius = 0.5;
    hc.lambda = 1.0;
    hc.horizon = 1.0;
    const BoxSpec b = box(1, 24.0, 4.0);
    VerifyCase c;
    c.name = "hardcore+exp-log";
    c.model = std::make_unique<HardcoreFieldModel>(b, HardcoreFieldModel::Kind::Hardcore, hc);
    c.weight = exp_log_weight(1.0);
    c.observables = {Observable::window_average(b, at({12.0}), 3.0),
                     Observable::clipped_exp(b, at({12.0}), 3.0, 2.0, 1.0),
                     Observable::site_max(b, at({12.0}), 1.0)};
    out.push_back(std::move(c));
  }
  {
    InclusionModelSpec incl;
    incl.radius = ScalarLaw::exponential(2.0);
    incl.intensity = 0.5;
    const BoxSpec b = box(1, 24.0, incl.default_margin());
    VerifyCase c;
    c.name = "inclusions+radius-law";
    c.model = std::make_unique<PoissonInclusionModel>(b, incl);
    c.weight = gamma_weight(incl.radius, incl.intensity, 1);
    c.observables = {Observable::window_average(b, at({12.0}), 3.0),
                     Observable::clipped_exp(b, at({12.0}), 3.0, 2.0, 1.0),
                     Observable::site_max(b, at({12.0}), 1.0)};
    out.push_back(std::move(c));
  }
  return out;
}

VerifySettings base_settings() {
  VerifySettings s;
  s.n = 4000;
  s.rhs.n = 100;
  s.rhs.K = 32;
  s.rhs.refine = 1;
  return s;
}

VerifySettings doubled(VerifySettings s) {
  s.n *= 2;
  s.rhs.n *= 2;
  s.rhs.K *= 2;
  s.rhs.refine += 1;
  return s;
}

Outcome criterion4() {
  Outcome o{true, ""};
  double worst = 0.0;
  for (const VerifyCase& c : verify_cases()) {
    const RngStream rng(400);
    std::vector<MfiReport> a, b;
    const double sa = seconds([&] {
      a = verify(Inequality::MSG, *c.model, c.observables, c.weight, base_settings(), rng);
    });
    const double sb = seconds([&] {
      b = verify(Inequality::MSG, *c.model, c.observables, c.weight, doubled(base_settings()), rng);
    });
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double c1 = a[i].best_constant, c2 = b[i].best_constant;
      const double drift = std::fabs(c2 - c1) / c1;
      const bool holds = std::isfinite(c1) && std::isfinite(c2) && c1 > 0.0 &&
                         a[i].lhs.value <= c1 * a[i].rhs.value * (1.0 + 1e-12) && drift <= 0.2;
      worst = std::max(worst, drift);
      note(fmt("%s %s: lhs %.4g +- %.2g rhs %.4g +- %.2g C %.4g | doubled lhs %.4g rhs %.4g "
               "+- %.2g C %.4g | drift %.3f: %s",
               c.name.c_str(), c.observables[i].name().c_str(), a[i].lhs.value, a[i].lhs.std_error,
               a[i].rhs.value, a[i].rhs.std_error, c1, b[i].lhs.value, b[i].rhs.value,
               b[i].rhs.std_error, c2, drift, holds ? "ok" : "FAIL"));
      o.pass = o.pass && holds;
    }
    note(fmt("%s: %.1f s base, %.1f s doubled", c.name.c_str(), sa, sb));
  }
  o.detail = fmt("largest relative drift %.3f (limit 0.2)", worst);
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion5() {
  const BoxSpec b = box(1, 40.0, 4.0);
  const VoronoiModel model(b, VoronoiFieldSpec{});
  const WeightFunction weight = compact_weight(1.0, 1);
  std::vector<double> constants;
  for (double w : {2.0, 4.0, 8.0}) {
    const Observable z = Observable::window_average(b, at({20.0}), w);
    VerifySettings s = base_settings();
    const auto r = verify(Inequality::MSG, model, {z}, weight, s, RngStream(500));
    constants.push_back(r[0].best_constant);
    note(fmt("window %.0f: lhs %.4g +- %.2g rhs %.4g +- %.2g C %.4g", w, r[0].lhs.value,
             r[0].lhs.std_error, r[0].rhs.value, r[0].rhs.std_error, r[0].best_constant));
  }
  const double g1 = constants[1] / constants[0], g2 = constants[2] / constants[1];
  return {g1 >= 1.5 && g2 >= 1.5, fmt("growth per doubling %.3f, %.3f (need >= 1.5 each)", g1, g2)};
}

// ---------------------------------------------------------------------------

Outcome criterion6() {
  bool ok = true;
  std::string detail;
  {
    BoxSpec b = box(2, 32.0, 0.0);
    b.boundary = Boundary::Periodic;
    const CovarianceModel cov = CovarianceModel::exponential(1.0, 4.0);
    const RngStream rng(600);
    std::vector<FieldSample> s;
    for (long i = 0; i < 5000; ++i) {
      s.push_back(sample_gaussian_field(b, cov, LipschitzClamp::identity(), realization_stream(rng, i)));
    }
    const std::vector<double> lags = {0.0, 2.0, 4.0, 8.0};
    const CovarianceEstimate e = empirical_covariance(s, lags);
    for (std::size_t i = 0; i < lags.size(); ++i) {
      const double err = std::fabs(e.value[i] - cov(lags[i]));
      const double tol = std::max(0.02, 3.0 * e.std_error[i]);
      ok = ok && err <= tol;
      note(fmt("lag %.0f: %.5f vs %.5f (tolerance %.4f)", lags[i], e.value[i], cov(lags[i]), tol));
    }
  }
  {
    const std::vector<CovarianceModel> models = {
        CovarianceModel::exponential(1.0, 1.0), CovarianceModel::exponential(2.5, 7.0),
        CovarianceModel::gaussian_bump(1.0, 3.0), CovarianceModel::polynomial(1.0, 1.0, 3.0),
        CovarianceModel::polynomial(0.7, 2.0, 1.5)};
    double worst = 0.0;
    for (const auto& c : models) {
      const double expect = c.at_zero() - c.at_infinity();
      worst = std::max(worst, std::fabs(gaussian_weight(c).total_mass() - expect) / expect);
    }
    ok = ok && worst <= 1e-6;
    note(fmt("weight mass: worst relative error %.3g over %zu covariances", worst, models.size()));
  }
  {
    using V = Eigen::VectorXd;
    struct Pair {
      std::string name;
      std::function<double(const V&)> z;
      std::function<V(const V&)> grad;
    };
    const std::vector<Pair> fns = {
        {"sum", [](const V& a) { return a.sum(); }, [](const V& a) { return V::Ones(a.size()).eval(); }},
        {"product", [](const V& a) { return a.prod(); },
         [](const V& a) {
           V g(a.size());
           for (long i = 0; i < a.size(); ++i) {
             double p = 1.0;
             for (long j = 0; j < a.size(); ++j) p *= j == i ? 1.0 : a[j];
             g[i] = p;
           }
           return g;
         }},
        {"tanh-sum", [](const V& a) { return a.array().tanh().sum(); },
         [](const V& a) { return (1.0 - a.array().tanh().square()).matrix().eval(); }},
        {"sin-first", [](const V& a) { return std::sin(a[0]) + 0.3 * a.squaredNorm(); },
         [](const V& a) {
           V g = 0.6 * a;
           g[0] += std::cos(a[0]);
           return g;
         }},
        {"log-sum-exp",
         [](const V& a) {
           const double m = a.maxCoeff();
           return m + std::log((a.array() - m).exp().sum());
         },
         [](const V& a) {
           const V e = (a.array() - a.maxCoeff()).exp().matrix();
           return (e / e.sum()).eval();
         }}};
    Philox e(606);
    long holds = 0;
    double tightest = 0.0;
    for (int k = 0; k < 20; ++k) {
      const long n = 1 + k % 4;
      Eigen::MatrixXd f(n, n);
      for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) f(i, j) = 2.0 * uniform01(e) - 1.0;
      }
      const auto& fn = fns[static_cast<std::size_t>(k) % fns.size()];
      const BrascampLieb r = brascamp_lieb_oracle(f, fn.z, 10, fn.grad);
      // Linear Z with F F^t >= 0 entrywise is an equality case; allow rounding.
      const bool ok = r.lhs <= r.rhs * (1.0 + 1e-12);
      if (!(r.lhs <= r.rhs)) {
        note(fmt("pair %d (%s, N=%ld): lhs %.17g rhs %.17g", k, fn.name.c_str(), n, r.lhs, r.rhs));
      }
      holds += ok;
      tightest = std::max(tightest, r.rhs > 0.0 ? r.lhs / r.rhs : 0.0);
    }
    ok = ok && holds == 20;
    note(fmt("brascamp-lieb: %ld of 20 pairs with lhs <= rhs, largest lhs/rhs %.4f", holds, tightest));
  }
  return {ok, "covariance at 4 lags, weight mass, oracle battery"};
}

// ---------------------------------------------------------------------------

Outcome criterion7() {
  const ScalarLaw u = ScalarLaw::uniform(0.0, 1.0);
  const EfronStein lin = efron_stein_check(
      4, u, [](const Eigen::VectorXd& x) { return 1.0 * x[0] - 2.0 * x[1] + 0.5 * x[2] + 3.0 * x[3]; },
      40000, RngStream(700));
  const bool lin_ok = std::fabs(lin.ratio.value - 1.0) <= 3.0 * lin.ratio.std_error;

  // Var[max(U1, U2)] by a midpoint rule on the unit square.
  const int m = 4000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double v = std::max(i + 0.5, j + 0.5) / m;
      s1 += v;
      s2 += v * v;
    }
  }
  const double cells = static_cast<double>(m) * m;
  const double exact = s2 / cells - (s1 / cells) * (s1 / cells);
  const EfronStein mx = efron_stein_check(
      2, u, [](const Eigen::VectorXd& x) { return x.maxCoeff(); }, 40000, RngStream(701));
  const bool max_ok = std::fabs(mx.lhs.value - exact) <= 3.0 * mx.lhs.std_error &&
                      mx.ratio.value <= 1.0 + 3.0 * mx.ratio.std_error;
  return {lin_ok && max_ok,
          fmt("linear ratio %.4f +- %.4f; max lhs %.5f +- %.5f vs double integral %.6f, ratio "
              "%.4f +- %.4f",
              lin.ratio.value, lin.ratio.std_error, mx.lhs.value, mx.lhs.std_error, exact,
              mx.ratio.value, mx.ratio.std_error)};
}

// ---------------------------------------------------------------------------

Outcome criterion8() {
  const auto pi0 = [](double l) { return std::exp(-l); };
  const WeightFunction w = weight_thm_ar_rpm(pi0, 1.0, 2);
  double worst = 0.0;
  auto rel = [&](double got, double want) {
    worst = std::max(worst, std::fabs(got - want) / std::fabs(want));
  };
  rel(w(5.0), 36.0 * (8.0 / 5.0) * std::exp(-2.5));
  for (double l : {0.0, 0.5, 1.0, 2.5, 4.0}) rel(w(l), (l + 1.0) * (l + 1.0));
  for (double l : {4.5, 7.0, 12.0}) rel(w(l), (l + 1.0) * (l + 1.0) * 8.0 / l * std::exp(-l / 2.0));

  auto fires = [&](double p) {
    try {
      weight_thm_ar_rpm(pi0, 1.0, 2, {{1.0, 0.1}, {2.0, p}});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::QuarterConditionViolated) return true;
      throw;
    }
    return false;
  };
  const bool edge = !fires(0.25) && fires(std::nextafter(0.25, 1.0)) && fires(0.4) && !fires(0.0);
  // Below R the exceedance is not constrained.
  bool below = true;
  try {
    weight_thm_ar_rpm(pi0, 2.0, 2, {{1.0, 0.9}});
  } catch (const Error&) {
    below = false;
  }
  return {worst <= 1e-12 && edge && below,
          fmt("worst relative error %.2g; threshold exact at 1/4: %s; exceedance below R ignored: %s",
              worst, edge ? "yes" : "no", below ? "yes" : "no")};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const fs::path& config, const fs::path& out, int workers) {
  const std::string cmd = std::string(MFI_LAB_BIN) + " run " + config.string() + " --workers " +
                          std::to_string(workers) + " --out " + out.string() + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion9() {
  const fs::path base = fs::temp_directory_path() / ("mfilab-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(base);
  fs::create_directories(base);
  const std::vector<std::pair<std::string, json>> configs = {
      {"tail-voronoi", {{"kind", "tail"}, {"seed", 301}, {"model.type", "voronoi"},
                        {"model.box.dim", 2}, {"model.box.side", 8}, {"model.box.spacing", 0.5},
                        {"n", 300}, {"x", {4.5, 4.5}}, {"fit.family", "weibull"}, {"fit.shape", 2}}},
      {"tail-parking", {{"kind", "tail"}, {"seed", 302}, {"model.type", "parking"},
                        {"model.box.dim", 1}, {"model.box.side", 40}, {"model.box.spacing", 0.1},
                        {"model.radius", 0.5}, {"n", 300}, {"x", {20.5}}}},
      {"radius-hardcore", {{"kind", "action-radius"}, {"seed", 203}, {"model.type", "hardcore"},
                           {"model.box.dim", 2}, {"model.box.side", 12}, {"model.radius", 0.3},
                           {"n", 200}, {"ell", 1}, {"x", {5.5, 5.5}}}},
      {"verify-inclusions",
       {{"kind", "verify"}, {"seed", 400}, {"inequality", "MSG"}, {"model.type", "inclusions"},
        {"model.box.dim", 1}, {"model.box.side", 24}, {"model.intensity", 0.5},
        {"model.radius.family", "exponential"}, {"model.radius.rate", 2.0},
        {"observables.0.kind", "window_average"}, {"observables.0.center", {12.0}},
        {"observables.0.width", 3.0}, {"observables.1.kind", "site_max"},
        {"observables.1.center", {12.0}}, {"observables.1.half", 1.0},
        {"weight.family", "radius-law"}, {"n", 4000}, {"rhs.n", 20}, {"rhs.K", 8}}},
      {"verify-gaussian-mci",
       {{"kind", "verify"}, {"seed", 401}, {"inequality", "MCI"}, {"model.type", "gaussian"},
        {"model.box.dim", 1}, {"model.box.side", 64}, {"model.covariance.family", "exponential"},
        {"model.covariance.xi", 2.0}, {"observables.0.kind", "window_average"},
        {"observables.0.center", {28.0}}, {"observables.0.width", 4.0},
        {"observables.1.kind", "window_average"}, {"observables.1.center", {36.0}},
        {"observables.1.width", 4.0}, {"weight.family", "gaussian"}, {"n", 4000}, {"rhs.n", 50}}},
      {"verify-parking-inclusions",
       {{"kind", "verify"}, {"seed", 402}, {"inequality", "MSG"}, {"model.type", "parking"},
        {"model.box.dim", 1}, {"model.box.side", 24}, {"model.radius", 0.5},
        {"model.horizon_cap", 1073741824.0}, {"model.field", "inclusions"},
        {"model.inclusions.scheme", "priority"}, {"model.inclusions.radius.family", "uniform"},
        {"model.inclusions.radius.a", 0.0}, {"model.inclusions.radius.b", 1.0},
        {"observables.0.kind", "clipped_exp"}, {"observables.0.center", {12.0}},
        {"observables.0.width", 3.0}, {"weight.family", "exponential"}, {"weight.c", 2.0},
        {"n", 4000}, {"rhs.n", 10}, {"rhs.K", 8}}},
      {"tail-inclusions", {{"kind", "tail"}, {"seed", 303}, {"model.type", "inclusions"},
                           {"model.box.dim", 2}, {"model.box.side", 24}, {"model.box.spacing", 0.5},
                           {"model.intensity", 0.5}, {"n", 300}, {"x", {12.5, 12.5}}}},
      {"generate-parking", {{"kind", "generate"}, {"seed", 9}, {"model.type", "parking"},
                            {"model.box.dim", 2}, {"model.box.side", 6}, {"n", 2}}},
      {"efron-stein", {{"kind", "efron-stein"}, {"seed", 701}, {"n_vars", 2}, {"n", 20000},
                       {"functional.type", "max"}}},
      {"brascamp-lieb", {{"kind", "brascamp-lieb"}, {"seed", 1}, {"matrix", {{1.0, 0.5}, {0.0, 1.0}}},
                         {"functional.type", "tanh-sum"}}},
  };
  long same = 0, files = 0;
  std::string failed;
  for (const auto& [name, cfg] : configs) {
    const fs::path dir = base / name;
    fs::create_directories(dir);
    const fs::path cfile = dir / "config.json";
    std::ofstream(cfile) << cfg.dump();
    const int a = run_cli(cfile, dir / "w1", 1);
    const int b = run_cli(cfile, dir / "w4", 4);
    bool ok = a == 0 && b == 0;
    if (ok) {
      std::vector<std::string> fa, fb;
      for (const auto& e : fs::directory_iterator(dir / "w1")) fa.push_back(e.path().filename());
      for (const auto& e : fs::directory_iterator(dir / "w4")) fb.push_back(e.path().filename());
      std::sort(fa.begin(), fa.end());
      std::sort(fb.begin(), fb.end());
      ok = fa == fb && !fa.empty();
      for (const auto& f : fa) {
        if (!ok) break;
        ++files;
        ok = slurp(dir / "w1" / f) == slurp(dir / "w4" / f);
      }
    }
    same += ok;
    if (!ok) failed += " " + name + fmt("(exit %d/%d)", a, b);
  }
  fs::remove_all(base);
  return {same == static_cast<long>(configs.size()),
          fmt("%ld of %zu runs byte-identical across --workers 1 and 4 (%ld files)%s", same,
              configs.size(), files, failed.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
  std::vector<int> selected;
  std::set<int> known_red;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--known-red" && i + 1 < argc) {
      known_red.insert(std::atoi(argv[++i]));
    } else {
      selected.push_back(std::atoi(argv[i]));
    }
  }
  if (selected.empty()) {
    for (const auto& [k, f] : criteria) selected.push_back(k);
  }
  int failures = 0;
  for (int k : selected) {
    const auto it = criteria.find(k);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", k);
      return 64;
    }
    std::printf("criterion %d: running\n", k);
    std::fflush(stdout);
    Outcome o;
    const double s = seconds([&] {
      try {
        o = it->second();
      } catch (const std::exception& e) {
        o = {false, std::string("error: ") + e.what()};
      }
    });
    const bool excused = !o.pass && known_red.count(k) > 0;
    std::printf("criterion %d: %s (%s; %.1f s)%s\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                s, excused ? " [known red, not counted in the exit status]" : "");
    std::fflush(stdout);
    failures += !o.pass && !excused;
  }
  return failures;
}
