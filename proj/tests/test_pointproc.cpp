#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mfilab/error.hpp"
#include "mfilab/pointproc.hpp"

using namespace mfilab;

namespace {

BoxSpec box(int d, double side, double margin = 0.0) {
  BoxSpec b;
  b.dim = d;
  b.side = side;
  b.margin = margin;
  return b;
}

Point pt(double x) { return Point::Constant(1, x); }

PointConfiguration line(const BoxSpec& b, std::vector<std::pair<double, double>> xt) {
  PointConfiguration c(b);
  for (auto [x, t] : xt) c.push_back(pt(x), t);
  return c;
}

PointConfiguration random_config(const BoxSpec& b, long n, Philox& e) {
  PointConfiguration c(b);
  for (long i = 0; i < n; ++i) {
    Point p(b.dim);
    for (int a = 0; a < b.dim; ++a) p[a] = b.lower() + b.padded_side() * uniform01(e);
    c.push_back(p, uniform01(e));
  }
  return c;
}

long count_inside(const PointConfiguration& c) {
  long n = 0;
  for (long i = 0; i < c.size(); ++i) {
    const Point p = c.position(i);
    if ((p.array() >= 0.0).all() && (p.array() < c.box.side).all()) ++n;
  }
  return n;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> all = a;
  all.insert(all.end(), b.begin(), b.end());
  double d = 0.0;
  for (double v : all) {
    const double fa = static_cast<double>(std::upper_bound(a.begin(), a.end(), v) - a.begin()) / a.size();
    const double fb = static_cast<double>(std::upper_bound(b.begin(), b.end(), v) - b.begin()) / b.size();
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

}  // namespace

TEST_CASE("poisson counts: mean and equidispersion") {
  const BoxSpec b = box(2, 4.0, 1.0);
  const double mean = 1.5 * b.padded_volume();
  const int n = 2000;
  double s = 0, s2 = 0;
  const RngStream rng(1);
  for (int i = 0; i < n; ++i) {
    const double k = static_cast<double>(
        sample_poisson(b, 1.5, 0.0, rng.substream(static_cast<std::uint64_t>(i))).size());
    s += k;
    s2 += k * k;
  }
  const double m = s / n, v = (s2 - n * m * m) / (n - 1);
  CHECK(std::fabs(m - mean) < 3.0 * std::sqrt(mean / n));
  // Var of the sample variance of a Poisson(mu) count is about (mu + 2 mu^2) / n.
  CHECK(std::fabs(v - m) < 3.0 * std::sqrt((mean + 2.0 * mean * mean) / n));
  CHECK(sample_poisson(box(2, 0.0), 3.0, 0.0, rng).empty());
}

TEST_CASE("poisson times and positions") {
  const BoxSpec b = box(1, 10.0, 2.0);
  const auto c = sample_poisson(b, 2.0, 3.0, RngStream(8));
  CHECK_NOTHROW(c.validate());
  for (long i = 0; i < c.size(); ++i) {
    CHECK(c.time(i) >= 0.0);
    CHECK(c.time(i) < 3.0);
  }
}

TEST_CASE("decorations") {
  const BoxSpec b = box(2, 5.0);
  const auto c = sample_poisson(b, 3.0, 0.0, RngStream(2));
  const auto d = decorate(c, {"V", ScalarLaw::constant(2.5)}, RngStream(3));
  for (long i = 0; i < d.size(); ++i) CHECK(d.mark(i, "V") == 2.5);
  CHECK(same_points(c, d) == false);
  CHECK(d.coords == c.coords);
  CHECK(d.times == c.times);
  CHECK_THROWS_AS(decorate(d, {"V", ScalarLaw::constant(1.0)}, RngStream(3)), Error);
  CHECK(decorate(PointConfiguration(b), {"W", ScalarLaw::uniform(0, 1)}, RngStream(1)).empty());

  double s = 0.0;
  long n = 0;
  for (int k = 0; k < 100; ++k) {
    const auto u = decorate(sample_poisson(b, 3.0, 0.0, RngStream(10 + k)),
                            {"U", ScalarLaw::uniform(0, 1)}, RngStream(500 + k));
    for (long i = 0; i < u.size(); ++i, ++n) s += u.mark(i, "U");
  }
  CHECK(std::fabs(s / n - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("penrose parking hand cases") {
  const BoxSpec b = box(1, 2.0, 5.0);
  SUBCASE("single point") {
    CHECK(penrose_parking(line(b, {{1.0, 0.5}}), 1.0).size() == 1);
  }
  SUBCASE("direct offspring is removed") {
    const auto a = penrose_parking(line(b, {{0.0, 1.0}, {0.5, 2.0}}), 1.0);
    REQUIRE(a.size() == 1);
    CHECK(a.position(0)[0] == 0.0);
  }
  SUBCASE("second generation is accepted") {
    const auto c = line(b, {{3.0, 1.0}, {1.5, 2.0}, {0.0, 3.0}});
    for (const auto& a : {penrose_parking(c, 1.0), sequential_rsa_oracle(c, 1.0)}) {
      REQUIRE(a.size() == 2);
      CHECK(a.position(0)[0] == 3.0);
      CHECK(a.position(1)[0] == 0.0);
    }
  }
  SUBCASE("time ties follow lexicographic position") {
    const auto a = penrose_parking(line(b, {{1.0, 1.0}, {0.0, 1.0}}), 1.0);
    REQUIRE(a.size() == 1);
    CHECK(a.position(0)[0] == 0.0);
  }
  CHECK(sequential_rsa_oracle(PointConfiguration(b), 1.0).empty());
}

TEST_CASE("penrose parking equals the sequential oracle") {
  Philox e(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 1 + trial % 3;
    const BoxSpec b = box(d, d == 1 ? 20.0 : (d == 2 ? 8.0 : 4.0), 0.5);
    const long n = static_cast<long>(uniform01(e) * 201.0);
    const double r = 0.2 + 0.6 * uniform01(e);
    const auto c = random_config(b, n, e);
    const auto p = penrose_parking(c, r);
    CHECK(same_points(p, sequential_rsa_oracle(c, r)));
    CHECK(min_pair_distance(p) > 2.0 * r);
  }
}

TEST_CASE("saturated parking") {
  SUBCASE("a box that fits one ball") {
    BoxSpec b = box(2, 0.5);
    b.spacing = 0.5;
    for (int s = 0; s < 5; ++s) {
      CHECK(parking_saturated(b, 1.0, RngStream(s)).size() == 1);
    }
  }
  SUBCASE("jamming density in one dimension") {
    // Accepted count per length of a long interval; the limit is Renyi's constant.
    const BoxSpec b = box(1, 1000.0);
    double total = 0.0;
    for (int s = 0; s < 4; ++s) {
      const auto a = parking_saturated(b, 0.5, RngStream(100 + s));
      CHECK(min_pair_distance(a) > 1.0);
      total += static_cast<double>(a.size());
    }
    CHECK(std::fabs(total / 4000.0 - 0.7475) < 0.01);
  }
  SUBCASE("budget") {
    ParkingOptions o;
    o.horizon_cap = 2.0;
    CHECK_THROWS_AS(parking_saturated(box(2, 6.0), 0.5, RngStream(1), o), Error);
  }
}

TEST_CASE("hardcore poisson") {
  SUBCASE("earlier of two conflicting points wins") {
    const auto a = sequential_rsa_oracle(line(box(1, 4.0), {{1.0, 0.7}, {1.5, 0.3}}), 0.5);
    REQUIRE(a.size() == 1);
    CHECK(a.time(0) == 0.3);
  }
  SUBCASE("intensity at lambda R = 0.05 in one dimension") {
    HardcoreSpec h;
    h.radius = 0.05;
    h.lambda = 1.0;
    const BoxSpec b = box(1, 400.0, 8.0 * h.radius);
    double kept = 0.0;
    for (int s = 0; s < 200; ++s) {
      const auto a = hardcore_poisson(b, h, RngStream(1000 + s));
      CHECK(min_pair_distance(a) > 2.0 * h.radius);
      kept += static_cast<double>(count_inside(a));
    }
    const double intensity = kept / (200.0 * b.side);
    CHECK(intensity >= 0.85 * h.lambda);
    CHECK(intensity <= 1.05 * h.lambda);
  }
  SUBCASE("small lambda R^d keeps almost every point") {
    HardcoreSpec h;
    h.radius = 0.1;
    h.lambda = 0.1;  // lambda R^2 = 1e-3
    const BoxSpec b = box(2, 40.0, 0.8);
    const CellProcess proc(b, h.lambda);
    double all = 0.0, kept = 0.0;
    for (int s = 0; s < 20; ++s) {
      const auto keys = proc.draw_keys(RngStream(s));
      all += static_cast<double>(proc.generate_all(keys, 0, 0.0, 1.0, 1.0).size());
      kept += static_cast<double>(run_hardcore(proc, keys, h).size());
    }
    CHECK(kept / all >= 0.99);
  }
}

TEST_CASE("decimation") {
  const BoxSpec b = box(2, 10.0);
  const auto c = sample_poisson(b, 10.0, 0.0, RngStream(5));
  CHECK(same_points(decimate(c, 1.0, RngStream(1)), c));
  CHECK(decimate(c, 0.0, RngStream(1)).empty());
  double s = 0.0;
  const int n = 300;
  for (int k = 0; k < n; ++k) {
    Philox e(900 + k);
    const auto cfg = random_config(b, 1000, e);
    s += static_cast<double>(decimate(cfg, 0.5, RngStream(k)).size());
  }
  CHECK(std::fabs(s / n - 500.0) < 3.0 * std::sqrt(250.0 / n));
  CHECK_THROWS_AS(decimate(c, 1.5, RngStream(1)), Error);
}

TEST_CASE("causal chains") {
  const BoxSpec b = box(1, 2.0, 10.0);
  const Cube q = Cube::around(pt(0.0), 0.0);
  CHECK(causal_chain_radius(PointConfiguration(b), 1.0, q) == 0.0);
  CHECK(causal_chain_radius(line(b, {{1.2, 0.1}, {2.9, 0.2}, {4.6, 0.3}}), 1.0, q) ==
        doctest::Approx(6.1));
  // The hop 1.2 -> 2.9 goes back in time, so the chain stops at 1.2.
  CHECK(causal_chain_radius(line(b, {{1.2, 0.3}, {2.9, 0.2}, {4.6, 0.4}}), 1.0, q) ==
        doctest::Approx(2.7));
}

TEST_CASE("parking is dilation covariant in law") {
  // Counts of parking with R = 1 on L = 60 against R = 1/2 on L = 30.
  std::vector<double> big, small;
  for (int s = 0; s < 200; ++s) {
    big.push_back(static_cast<double>(parking_saturated(box(1, 60.0), 1.0, RngStream(s)).size()));
    small.push_back(
        static_cast<double>(parking_saturated(box(1, 30.0), 0.5, RngStream(5000 + s)).size()));
  }
  const double crit = 1.628 * std::sqrt(2.0 / 200.0);  // two-sample KS at 1%
  CHECK(ks_statistic(big, small) < crit);
}
