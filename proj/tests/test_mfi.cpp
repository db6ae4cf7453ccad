#include <doctest.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "mfilab/error.hpp"
#include "mfilab/estimators.hpp"
#include "mfilab/models.hpp"
#include "mfilab/tail.hpp"
#include "mfilab/weights.hpp"

using namespace mfilab;

namespace {

BoxSpec box(int d, double side, double margin, double h = 1.0) {
  BoxSpec b;
  b.dim = d;
  b.side = side;
  b.margin = margin;
  b.spacing = h;
  return b;
}

Point at(std::initializer_list<double> xs) {
  Point p(static_cast<long>(xs.size()));
  long i = 0;
  for (double x : xs) p[i++] = x;
  return p;
}

bool within(const Estimate& e, double target, double k = 3.0) {
  return std::fabs(e.value - target) <= k * e.std_error;
}

}  // namespace

// ---------------------------------------------------------------------------
// Weights

TEST_CASE("weight from conditional action-radius tails") {
  const int d = 2;
  SUBCASE("exponential radius, one slot") {
    ActionRadiusSlot slot{1.0, [](double u) { return std::exp(-u); }};
    const WeightFunction w = weight_thm_ar({slot}, d, [](double u) { return u; }, 12.0);
    for (double l : {1.0, 2.0, 5.0}) {
      const double expect = (l + 1) * (l + 1) * (std::exp(-(l - 1)) - std::exp(-l)) / (1 - std::exp(-l));
      CHECK(w(l) == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(w.ball_radius(3.0, d) == doctest::Approx(std::sqrt(2.0) * 4.0));
  }
  SUBCASE("deterministic radius is a single shell") {
    const double r0 = 3.0;
    ActionRadiusSlot slot{1.0, [r0](double u) { return u <= r0 ? 1.0 : 0.0; }};
    const WeightFunction w = weight_thm_ar({slot}, d, {}, 8.0);
    for (double l = 0.0; l <= r0; l += 0.25) CHECK(w(l) == 0.0);
    CHECK(w(r0 + 0.5) == doctest::Approx(std::pow(r0 + 1.5, d)));
    for (double l = r0 + 1 + 1.0 / 64; l <= 8.0; l += 0.25) CHECK(w(l) == 0.0);
  }
  SUBCASE("never perturbed") {
    ActionRadiusSlot slot{0.0, [](double u) { return std::exp(-u); }};
    const WeightFunction w = weight_thm_ar({slot}, d, {}, 6.0);
    CHECK(w.total_mass() == 0.0);
  }
  SUBCASE("influence below the identity") {
    ActionRadiusSlot slot{1.0, [](double u) { return std::exp(-u); }};
    try {
      weight_thm_ar({slot}, d, [](double u) { return 0.5 * u; }, 4.0);
      FAIL("expected InfluenceViolation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InfluenceViolation);
    }
  }
}

TEST_CASE("iterated action-radius weight") {
  const auto pi0 = [](double l) { return std::exp(-l); };
  const WeightFunction w = weight_thm_ar_rpm(pi0, 1.0, 2);
  CHECK(w(5.0) == doctest::Approx(36.0 * (8.0 / 5.0) * std::exp(-2.5)).epsilon(1e-12));
  for (double l : {0.0, 1.0, 2.5, 4.0}) CHECK(w(l) == doctest::Approx((l + 1) * (l + 1)));
  try {
    weight_thm_ar_rpm(pi0, 1.0, 2, {{1.0, 0.4}});
    FAIL("expected QuarterConditionViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::QuarterConditionViolated);
    CHECK(std::string(e.what()).find("0.4") != std::string::npos);
  }
  CHECK_NOTHROW(weight_thm_ar_rpm(pi0, 1.0, 2, {{1.0, 0.2}, {3.0, 0.25}}));
  CHECK_THROWS_AS(weight_thm_ar_rpm([](double l) { return l; }, 1.0, 2), Error);
}

TEST_CASE("scale grid quadrature integrates the weight exactly for constant integrands") {
  using boost::math::quadrature::gauss_kronrod;
  for (int d : {1, 2}) {
    const WeightFunction w = exponential_weight(1.5);
    for (int refine : {0, 1, 2}) {
      const ScaleGrid g = make_scale_grid(w, d, {}, refine);
      double sum = 0.0;
      for (double q : g.quad) sum += q;
      const double exact = gauss_kronrod<double, 61>::integrate(
          [&](double l) { return std::pow(l + 1.0, -d) * w(l); }, 0.0, g.ell_max, 15, 1e-14);
      CHECK(sum == doctest::Approx(exact).epsilon(1e-9));
      CHECK(std::is_sorted(g.ell.begin(), g.ell.end()));
      CHECK(g.ell.front() == 0.0);
      CHECK(w.tail_mass(g.ell_max) <= 0.01 * w.total_mass() + 1e-12);
    }
  }
  const ScaleGrid c = make_scale_grid(compact_weight(2.0, 2), 2, {}, 0);
  double atom = 0.0;
  for (std::size_t j = 0; j < c.ell.size(); ++j) {
    if (c.ell[j] == 2.0) atom = c.quad[j];
  }
  CHECK(atom == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_scale_grid(exponential_weight(10.0), 1, {0.0, 1.0, 2.0}, 0), Error);
  CHECK(x_spacing(1.0, 0.0, 0) == 1.0);
  CHECK(x_spacing(1.0, 16.0, 1) == 2.0);
}

// ---------------------------------------------------------------------------
// Derivatives

TEST_CASE("oscillation derivative") {
  InclusionModelSpec spec;
  spec.scheme = InclusionModelSpec::Scheme::TwoPhase;
  spec.alpha = 1.0;
  spec.beta = 0.0;
  spec.radius = bounded_uniform_radius(1.0);
  spec.intensity = 0.3;
  const BoxSpec b = box(2, 12.0, 2.0);
  const PoissonInclusionModel model(b, spec);
  const Point x0 = at({6.5, 6.5});
  const RngStream rng(5);

  SUBCASE("constant observable") {
    const Observable c = Observable::constant(b, 3.0);
    for (int i = 0; i < 5; ++i) {
      CHECK(osc_derivative(model, realization_stream(rng, i), c, x0, 2.0, 16) == 0.0);
    }
  }
  SUBCASE("site value of a two-phase field reaches |alpha - beta|") {
    const Observable z = Observable::site_max(b, x0, 0.0);
    double mean = 0.0;
    const int n = 100;
    for (int i = 0; i < n; ++i) mean += osc_derivative(model, realization_stream(rng, i), z, x0, 2.0, 64);
    mean /= n;
    CHECK(mean >= 0.95);
    CHECK(mean <= 1.0);
  }
  SUBCASE("ball away from the support") {
    const Observable z = Observable::window_average(b, at({2.5, 2.5}), 1.5);
    for (int i = 0; i < 10; ++i) {
      CHECK(osc_derivative(model, realization_stream(rng, i), z, at({9.5, 9.5}), 1.0, 16) == 0.0);
    }
  }
  SUBCASE("nondecreasing in K on fixed draws") {
    const Observable z = Observable::window_average(b, x0, 2.0);
    for (int i = 0; i < 10; ++i) {
      double prev = 0.0;
      for (int k : {2, 4, 8, 16, 32}) {
        const double v = osc_derivative(model, realization_stream(rng, i), z, x0, 1.0, k);
        CHECK(v >= prev);
        prev = v;
      }
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(osc_derivative(model, rng, Observable::constant(b, 1.0), x0, 1.0, 1), Error);
    const SampleSetModel fixed({FieldSample{b, Eigen::VectorXd::Zero(144)}});
    try {
      osc_derivative(fixed, rng, Observable::constant(b, 1.0), x0, 1.0, 4);
      FAIL("expected UnsupportedGenerator");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnsupportedGenerator);
    }
  }
}

TEST_CASE("functional derivative") {
  BoxSpec b = box(2, 16.0, 0.0);
  b.boundary = Boundary::Periodic;
  const GaussianModel model(b, CovarianceModel::exponential(1.0, 2.0), LipschitzClamp::identity());
  const Lattice lat = Lattice::observation(b);
  std::vector<long> all(static_cast<std::size_t>(lat.size()));
  for (long s = 0; s < lat.size(); ++s) all[static_cast<std::size_t>(s)] = s;
  const RngStream rng(9);

  SUBCASE("linear observable") {
    const Observable z = Observable::window_average(b, at({8.0, 8.0}), 3.0);
    const FieldSample f = model.latent(model.draw_keys(rng));
    std::vector<long> half;
    for (long s : all) {
      if (lat.site(s)[0] < 8.0) half.push_back(s);
    }
    double expect_half = 0.0;
    for (std::size_t k = 0; k < z.support().size(); ++k) {
      if (lat.site(z.support()[k])[0] < 8.0) expect_half += std::fabs(z.weights()[k]);
    }
    CHECK(fct_derivative(f, z, all, 1e-3) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fct_derivative(f, z, half, 1e-3) == doctest::Approx(expect_half).epsilon(1e-9));
  }
  SUBCASE("constant observable") {
    const FieldSample f = model.latent(model.draw_keys(rng));
    CHECK(fct_derivative(f, Observable::constant(b, 2.0), all, 1e-3) == 0.0);
  }
  SUBCASE("clipped exponential against the chain rule") {
    const double kappa = 1.5, clip = 2.0;
    const Observable z = Observable::clipped_exp(b, at({8.0, 8.0}), 3.0, kappa, clip);
    const Observable avg = Observable::window_average(b, at({8.0, 8.0}), 3.0);
    const LipschitzClamp t = LipschitzClamp::tanh(1.0, 2.0);
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
      const FieldSample x = model.latent(model.draw_keys(rng.substream(static_cast<std::uint64_t>(i))));
      FieldSample a = x;
      for (long s = 0; s < a.values.size(); ++s) a.values[s] = t(x.values[s]);
      const double u = kappa * avg(a);
      if (std::fabs(u) >= clip - 1e-3) continue;
      // dZ/dX(s) = Z kappa w_s b'(X_s), b = range tanh(slope x / range)
      double expect = 0.0;
      for (std::size_t k = 0; k < avg.support().size(); ++k) {
        const double xs = x.values[avg.support()[k]];
        const double db = 1.0 / std::pow(std::cosh(xs / 2.0), 2);
        expect += std::exp(u) * kappa * avg.weights()[k] * db;
      }
      CHECK(fct_derivative(x, z, all, 1e-4, t) == doctest::Approx(expect).epsilon(1e-4));
      ++checked;
    }
    CHECK(checked >= 90);
  }
  SUBCASE("site maxima are not differentiable") {
    const FieldSample f = model.latent(model.draw_keys(rng));
    CHECK_THROWS_AS(fct_derivative(f, Observable::site_max(b, at({8.0, 8.0}), 1.0), all, 1e-3),
                    Error);
  }
}

// ---------------------------------------------------------------------------
// Action radii

TEST_CASE("empirical action radius") {
  const RngStream rng(13);
  SUBCASE("identical content") {
    const WhiteNoiseModel m(box(2, 10.0, 0.0), ScalarLaw::constant(1.0));
    for (int t = 0; t < 5; ++t) {
      CHECK(empirical_action_radius(m, at({4.5, 4.5}), 1.0, rng.substream(static_cast<std::uint64_t>(t))) == 0.0);
    }
  }
  SUBCASE("moving average is R-local") {
    for (double r : {0.0, 1.0, 2.5}) {
      const MovingAverageModel m(box(2, 20.0, 3.0), r, ScalarLaw::normal(0.0, 1.0));
      for (int t = 0; t < 30; ++t) {
        const double rho = empirical_action_radius(m, at({10.5, 9.5}), t % 3,
                                                   rng.substream(static_cast<std::uint64_t>(t)));
        CHECK(rho <= r + 1.0);
      }
    }
  }
  SUBCASE("voronoi: never above the geometric radius") {
    const BoxSpec b = box(2, 24.0, 8.0);
    const VoronoiModel m(b, VoronoiFieldSpec{});
    int violations = 0;
    for (int t = 0; t < 500; ++t) {
      const Point x = at({11.5, 12.5});
      const double ell = t % 2;
      const BlockResample br = block_resample(m, x, ell, rng.substream(static_cast<std::uint64_t>(t)));
      const double rho = voronoi_action_radius(m.points(br.keys), x, ell, b);
      if (difference_radius(br.field, br.resampled_field, br.block) > rho) ++violations;
    }
    CHECK(violations == 0);
  }
  SUBCASE("hardcore: never above the causal chain radius") {
    HardcoreSpec h;
    h.radius = 0.5;
    h.lambda = 0.8;
    h.horizon = 1.0;
    const BoxSpec b = box(1, 60.0, 6.0, 0.25);
    const HardcoreFieldModel m(b, HardcoreFieldModel::Kind::Hardcore, h);
    int violations = 0;
    for (int t = 0; t < 200; ++t) {
      const Point x = at({30.5});
      const BlockResample br = block_resample(m, x, t % 3, rng.substream(static_cast<std::uint64_t>(t)));
      const PointConfiguration all = m.process().generate_all(br.keys, 0, 0.0, h.horizon, h.horizon);
      const double rho = causal_chain_radius(all, h.radius, br.block);
      if (difference_radius(br.field, br.resampled_field, br.block) > std::max(rho, h.radius)) {
        ++violations;
      }
    }
    CHECK(violations == 0);
  }
  SUBCASE("boundary hits are reported") {
    const MovingAverageModel m(box(1, 6.0, 2.0), 2.0, ScalarLaw::normal(0.0, 1.0));
    CHECK_THROWS_AS(empirical_action_radius(m, at({0.5}), 0.0, rng), Error);
  }
}

// ---------------------------------------------------------------------------
// Tail fits

TEST_CASE("tail fits on synthetic laws") {
  const RngStream rng(17);
  std::vector<double> ex, wb;
  Philox e(unit_key(rng, 1));
  for (int i = 0; i < 10000; ++i) {
    ex.push_back(ScalarLaw::exponential(2.0).sample(e));
    wb.push_back(std::sqrt(-std::log(1.0 - uniform01(e))));
  }
  const TailEstimate fe = tail_fit(ex, TailFamily::exponential(), rng);
  CHECK(fe.parameter("rate") >= 1.9);
  CHECK(fe.parameter("rate") <= 2.1);
  CHECK(fe.r_squared > 0.99);
  for (const auto& p : fe.parameters) CHECK(p.ci_low <= p.ci_high);
  for (std::size_t i = 1; i < fe.survival.size(); ++i) CHECK(fe.survival[i] <= fe.survival[i - 1]);
  CHECK(fe.window_low >= *std::min_element(ex.begin(), ex.end()));
  CHECK(fe.window_high <= *std::max_element(ex.begin(), ex.end()));

  const TailEstimate w2 = tail_fit(wb, TailFamily::weibull(2.0), rng);
  const TailEstimate w1 = tail_fit(wb, TailFamily::exponential(), rng);
  CHECK(w2.r_squared > w1.r_squared);
  CHECK(w2.r_squared > 0.99);
  CHECK(w2.parameter("rate") == doctest::Approx(1.0).epsilon(0.1));

  CHECK_THROWS_AS(tail_fit(std::vector<double>(500, 2.0), TailFamily::exponential(), rng), Error);
  CHECK_THROWS_AS(tail_fit(std::vector<double>(ex.begin(), ex.begin() + 100),
                           TailFamily::exponential(), rng),
                  Error);
  CHECK(empirical_survival({1.0, 2.0, 2.0, 3.0}, 2.0) == 0.75);
}

// ---------------------------------------------------------------------------
// Left-hand sides

TEST_CASE("variance, entropy and covariance") {
  const BoxSpec b = box(1, 16.0, 0.0);
  const RngStream rng(23);
  const WhiteNoiseModel normal(b, ScalarLaw::normal(0.0, 1.0));
  const Observable site = Observable::site_max(b, at({4.5}), 0.0);

  SUBCASE("variance") {
    const Estimate c = variance_estimate(normal, Observable::constant(b, 2.0), 100, rng);
    CHECK(c.value == 0.0);
    CHECK(c.std_error == 0.0);
    CHECK(within(variance_estimate(normal, site, 10000, rng), 1.0));
    // A bump of width 2.5 on unit spacing covers sites 2..6 of the centre 4.5.
    const Observable avg = Observable::window_average(b, at({4.5}), 2.5);
    double w2 = 0.0;
    for (double w : avg.weights()) w2 += w * w;
    CHECK(within(variance_estimate(normal, avg, 10000, rng), w2));
  }
  SUBCASE("entropy") {
    const WhiteNoiseModel flat(b, ScalarLaw::constant(3.0));
    CHECK(entropy_estimate(flat, site, 200, rng).value == doctest::Approx(0.0).epsilon(1e-12));
    const WhiteNoiseModel two(b, ScalarLaw::two_point(1.0, 2.0, 0.5));
    const double expect = 0.5 * (std::log(0.4) + 4.0 * std::log(1.6));
    CHECK(within(entropy_estimate(two, site, 10000, rng), expect));
    const WhiteNoiseModel zero(b, ScalarLaw::constant(0.0));
    try {
      entropy_estimate(zero, site, 100, rng);
      FAIL("expected ZeroObservable");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ZeroObservable);
    }
  }
  SUBCASE("covariance") {
    const Observable avg = Observable::window_average(b, at({4.5}), 2.5);
    const Estimate v = variance_estimate(normal, avg, 2000, rng);
    const Estimate c = covariance_estimate(normal, avg, avg, 2000, rng);
    CHECK(c.value == doctest::Approx(v.value).epsilon(1e-12));
    const MovingAverageModel ma(box(1, 40.0, 2.0), 2.0, ScalarLaw::normal(0.0, 1.0));
    const Observable left = Observable::window_average(ma.box(), at({5.5}), 2.0);
    const Observable right = Observable::window_average(ma.box(), at({33.5}), 2.0);
    CHECK(within(covariance_estimate(ma, left, right, 4000, rng), 0.0));
    const Eigen::MatrixXd z = sample_observables(normal, {&avg}, 500, rng);
    const Eigen::VectorXd col = z.col(0);
    const Eigen::VectorXd neg = -col;
    CHECK(covariance_of(col, neg).value == doctest::Approx(-variance_of(col).value).epsilon(1e-12));
  }
}

// ---------------------------------------------------------------------------
// Right-hand sides

TEST_CASE("msg and mci right-hand sides") {
  const BoxSpec b = box(1, 24.0, 2.0);
  const MovingAverageModel ma(b, 1.0, ScalarLaw::normal(0.0, 1.0));
  const RngStream rng(29);
  const Observable z = Observable::window_average(b, at({12.0}), 3.0);
  const Observable y = Observable::window_average(b, at({10.0}), 2.0);

  RhsSettings s;
  s.K = 16;
  s.n = 40;

  SUBCASE("constant observable") {
    const Estimate r = msg_rhs(ma, Observable::constant(b, 1.0), exponential_weight(1.0), s, rng);
    CHECK(r.value == 0.0);
    CHECK(mci_rhs(ma, Observable::constant(b, 1.0), z, exponential_weight(1.0), s, rng).value == 0.0);
  }
  SUBCASE("mci with Y = Z is msg on the same draws") {
    const DerivativeTable t = derivative_table(ma, {&z, &z, &y}, exponential_weight(1.0), s, rng);
    CHECK(mci_rhs_from(t, 0, 1).value == doctest::Approx(msg_rhs_from(t, 0).value).epsilon(1e-13));
    CHECK(mci_rhs_from(t, 0, 0).value == mci_rhs_from(t, 0, 1).value);
    // Cauchy-Schwarz across cells.
    CHECK(mci_rhs_from(t, 0, 2).value <=
          std::sqrt(msg_rhs_from(t, 0).value * msg_rhs_from(t, 2).value) * (1 + 1e-12));
  }
  SUBCASE("compact weight reduces to a single-scale sum") {
    const double r0 = 2.0;
    const Estimate multi = msg_rhs(ma, z, compact_weight(r0, 1), s, rng);
    // Direct: sum over x on spacing max(h, r0/4) = 1 of E[osc(B_{r0+1}(x))^2].
    const RngStream direct = rng.substream("direct");
    const Lattice lat = Lattice::observation(b);
    Eigen::VectorXd per(s.n);
    for (long i = 0; i < s.n; ++i) {
      const RngStream r = realization_stream(direct, i);
      const Keys keys = ma.draw_keys(r.substream("field"));
      const FieldSample f = ma.render(keys);
      double sum = 0.0;
      for (long k = 0; k < lat.size(); ++k) {
        const double v = osc_derivative(ma, keys, f, {&z}, lat.site(k), r0 + 1.0, s.K,
                                        r.substream(static_cast<std::uint64_t>(k)))[0];
        sum += v * v;
      }
      per[i] = sum;
    }
    const double mean = per.mean();
    const double se = std::sqrt((per.array() - mean).square().sum() / (s.n - 1) / s.n);
    CHECK(std::fabs(multi.value - mean) <= 3.0 * std::hypot(se, multi.std_error));
    CHECK(multi.value > 0.0);
  }
  SUBCASE("a pointwise larger weight never lowers the rhs") {
    s.scales = {0.0, 1.0, 2.0, 4.0, 8.0, 16.0};
    const Estimate small = msg_rhs(ma, z, exponential_weight(1.0), s, rng);
    const Estimate large = msg_rhs(ma, z, exponential_weight(2.0), s, rng);
    CHECK(large.value >= small.value);
    s.scales = {0.0, 1.0};
    CHECK_THROWS_AS(msg_rhs(ma, z, exponential_weight(2.0), s, rng), Error);
  }
}

TEST_CASE("best constant and reports") {
  CHECK(best_constant(2.0, 4.0) == 0.5);
  CHECK(best_constant(0.0, 0.0) == 0.0);
  CHECK(best_constant(-1e-9, 1.0) == 0.0);
  CHECK(std::isinf(best_constant(1.0, 0.0)));

  const BoxSpec b = box(1, 12.0, 1.0);
  const MovingAverageModel ma(b, 1.0, ScalarLaw::uniform(-1.0, 1.0));
  VerifySettings v;
  v.n = 200;
  v.rhs.n = 20;
  v.rhs.K = 8;
  const std::vector<Observable> obs = {Observable::window_average(b, at({6.0}), 2.0),
                                       Observable::window_average(b, at({7.0}), 2.0)};
  const auto msg = verify(Inequality::MSG, ma, obs, exponential_weight(1.0), v, RngStream(3));
  REQUIRE(msg.size() == 2);
  const auto mci = verify(Inequality::MCI, ma, obs, exponential_weight(1.0), v, RngStream(3));
  REQUIRE(mci.size() == 1);
  CHECK_THROWS_AS(verify(Inequality::MCI, ma, {obs[0]}, exponential_weight(1.0), v, RngStream(3)),
                  Error);
  for (const MfiReport& r : {msg[0], msg[1], mci[0]}) {
    CHECK(std::isfinite(r.lhs.std_error));
    CHECK(std::isfinite(r.rhs.std_error));
    CHECK(r.best_constant >= 0.0);
    CHECK(r.lhs.value <= r.best_constant * r.rhs.value * (1 + 1e-12));
    const MfiReport back = MfiReport::from_json(r.to_json());
    CHECK(back.to_json() == r.to_json());
    CHECK(r.csv_row().size() == MfiReport::csv_header().size());
  }
  CHECK(msg[0].to_json()["inequality"] == "MSG");
}

// ---------------------------------------------------------------------------

TEST_CASE("efron-stein") {
  const RngStream rng(31);
  const ScalarLaw u = ScalarLaw::uniform(0.0, 1.0);
  const auto lin = efron_stein_check(3, u, [](const Eigen::VectorXd& x) {
    return 1.0 * x[0] - 2.0 * x[1] + 0.5 * x[2];
  }, 20000, rng);
  CHECK(within(lin.ratio, 1.0));
  CHECK(within(lin.lhs, 5.25 / 12.0));

  const auto c = efron_stein_check(4, u, [](const Eigen::VectorXd&) { return 1.0; }, 1000, rng);
  CHECK(c.lhs.value == 0.0);
  CHECK(c.rhs.value == 0.0);
  CHECK(c.ratio.value == 0.0);

  const auto mx = efron_stein_check(2, u, [](const Eigen::VectorXd& x) { return x.maxCoeff(); },
                                    20000, rng);
  CHECK(within(mx.lhs, 1.0 / 18.0));
  CHECK(mx.ratio.value <= 1.0 + 3.0 * mx.ratio.std_error);
}
