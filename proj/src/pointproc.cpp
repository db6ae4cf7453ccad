#include "mfilab/pointproc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mfilab/error.hpp"
#include "mfilab/spatial_hash.hpp"

namespace mfilab {

Point PointConfiguration::position(long i) const {
  Point p(box.dim);
  for (int a = 0; a < box.dim; ++a) {
    p[a] = coords[static_cast<std::size_t>(i) * box.dim + a];
  }
  return p;
}

int PointConfiguration::mark_index(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) {
      return static_cast<int>(k);
    }
  }
  return -1;
}

double PointConfiguration::mark(long i, const std::string& name) const {
  const int k = mark_index(name);
  if (k < 0) {
    throw Error(ErrorCode::MissingDecoration, "decoration '" + name + "' is absent");
  }
  return mark(i, k);
}

void PointConfiguration::require_marks(const std::vector<std::string>& required) const {
  for (const auto& name : required) {
    if (mark_index(name) < 0) {
      throw Error(ErrorCode::MissingDecoration, "decoration '" + name + "' is absent");
    }
  }
}

void PointConfiguration::push_back(const Point& p, double t, const double* point_marks) {
  for (int a = 0; a < box.dim; ++a) {
    coords.push_back(p[a]);
  }
  times.push_back(t);
  for (std::size_t k = 0; k < names.size(); ++k) {
    marks.push_back(point_marks != nullptr ? point_marks[k] : 0.0);
  }
}

PointConfiguration PointConfiguration::subset(const std::vector<long>& indices) const {
  PointConfiguration out(box);
  out.names = names;
  const std::size_t d = static_cast<std::size_t>(box.dim);
  const std::size_t k = names.size();
  out.coords.reserve(indices.size() * d);
  out.times.reserve(indices.size());
  out.marks.reserve(indices.size() * k);
  for (long i : indices) {
    const std::size_t u = static_cast<std::size_t>(i);
    out.coords.insert(out.coords.end(), coords.begin() + u * d, coords.begin() + (u + 1) * d);
    out.times.push_back(times[u]);
    out.marks.insert(out.marks.end(), marks.begin() + u * k, marks.begin() + (u + 1) * k);
  }
  return out;
}

void PointConfiguration::validate() const {
  std::set<std::string> seen(names.begin(), names.end());
  if (seen.size() != names.size()) {
    throw Error(ErrorCode::DuplicateDecoration, "decoration names must be unique");
  }
  for (long i = 0; i < size(); ++i) {
    const Point p = position(i);
    for (int a = 0; a < box.dim; ++a) {
      if (p[a] < box.lower() || p[a] > box.upper()) {
        throw Error(ErrorCode::InvalidArgument, "point outside the padded box");
      }
    }
    if (!(time(i) >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "time marks must be nonnegative");
    }
  }
}

bool same_points(const PointConfiguration& a, const PointConfiguration& b) {
  return a.box == b.box && a.coords == b.coords && a.times == b.times && a.names == b.names &&
         a.marks == b.marks;
}

namespace {

// Time order with lexicographic tie break on positions.
std::vector<long> time_order(const PointConfiguration& c) {
  std::vector<long> order(static_cast<std::size_t>(c.size()));
  std::iota(order.begin(), order.end(), 0L);
  const int d = c.dim();
  std::sort(order.begin(), order.end(), [&](long i, long j) {
    if (c.time(i) != c.time(j)) {
      return c.time(i) < c.time(j);
    }
    for (int a = 0; a < d; ++a) {
      const double xi = c.coords[static_cast<std::size_t>(i) * d + a];
      const double xj = c.coords[static_cast<std::size_t>(j) * d + a];
      if (xi != xj) {
        return xi < xj;
      }
    }
    return i < j;
  });
  return order;
}

SpatialHash make_hash(const BoxSpec& box, double cell) {
  return SpatialHash(box.dim, box.lower(), std::max(box.upper(), box.lower() + cell),
                     std::max(cell, 1e-9));
}

}  // namespace

CellProcess::CellProcess(const BoxSpec& box, double intensity, std::vector<DecorationLaw> marks)
    : box_(box), cells_(UnitCells::covering(box)), intensity_(intensity), marks_(std::move(marks)) {
  box.validate();
  if (!(intensity > 0.0) || !std::isfinite(intensity)) {
    throw Error(ErrorCode::InvalidArgument, "intensity must be positive");
  }
  std::set<std::string> seen;
  for (const auto& m : marks_) {
    if (!seen.insert(m.name).second) {
      throw Error(ErrorCode::DuplicateDecoration, "decoration '" + m.name + "' repeated");
    }
  }
}

std::vector<std::string> CellProcess::mark_names() const {
  std::vector<std::string> out;
  for (const auto& m : marks_) {
    out.push_back(m.name);
  }
  return out;
}

void CellProcess::generate(std::uint64_t key, long cell, std::uint64_t chunk, double t0,
                           double t1, double span, PointConfiguration& out) const {
  generate(key, cell, chunk, t0, t1, span, out, {});
}

void CellProcess::generate(std::uint64_t key, long cell, std::uint64_t chunk, double t0,
                           double t1, double span, PointConfiguration& out,
                           const std::function<bool(const Point&)>& keep) const {
  Point lo, width;
  cells_.extent(cell, lo, width);
  const double vol = width.prod();
  if (vol <= 0.0) {
    return;
  }
  Philox engine(key, chunk);
  const std::int64_t count = poisson_variate(engine, intensity_ * vol * span);
  const int d = box_.dim;
  Point p(d);
  double m[8];
  const std::size_t nm = std::min<std::size_t>(marks_.size(), 8);
  if (marks_.size() > 8) {
    throw Error(ErrorCode::InvalidArgument, "at most 8 decorations per process");
  }
  for (std::int64_t i = 0; i < count; ++i) {
    for (int a = 0; a < d; ++a) {
      p[a] = lo[a] + width[a] * uniform01(engine);
    }
    const double t = t1 > t0 ? t0 + (t1 - t0) * uniform01(engine) : t0;
    for (std::size_t k = 0; k < nm; ++k) {
      m[k] = marks_[k].law.sample(engine);
    }
    if (!keep || keep(p)) {
      out.push_back(p, t, m);
    }
  }
}

PointConfiguration CellProcess::generate_all(const std::vector<std::uint64_t>& keys,
                                             std::uint64_t chunk, double t0, double t1,
                                             double span) const {
  PointConfiguration out(box_);
  out.names = mark_names();
  for (long u = 0; u < cells_.size(); ++u) {
    generate(keys[static_cast<std::size_t>(u)], u, chunk, t0, t1, span, out);
  }
  return out;
}

std::vector<std::uint64_t> CellProcess::draw_keys(const RngStream& rng) const {
  std::vector<std::uint64_t> keys(static_cast<std::size_t>(cells_.size()));
  for (std::size_t u = 0; u < keys.size(); ++u) {
    keys[u] = unit_key(rng, u);
  }
  return keys;
}

void parking_chunk(int chunk, double& t0, double& t1) {
  if (chunk == 0) {
    t0 = 0.0;
    t1 = 1.0;
  } else {
    t0 = std::ldexp(1.0, chunk - 1);
    t1 = std::ldexp(1.0, chunk);
  }
}

PointConfiguration sample_poisson(const BoxSpec& box, double intensity, double time_horizon,
                                  const RngStream& rng) {
  if (!(time_horizon >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "time horizon must be nonnegative");
  }
  const CellProcess process(box, intensity);
  return process.generate_all(process.draw_keys(rng), 0, 0.0, time_horizon,
                              std::max(time_horizon, 1.0));
}

PointConfiguration decorate(const PointConfiguration& config, const DecorationLaw& law,
                            const RngStream& rng) {
  if (config.mark_index(law.name) >= 0) {
    throw Error(ErrorCode::DuplicateDecoration, "decoration '" + law.name + "' already present");
  }
  PointConfiguration out(config.box);
  out.names = config.names;
  out.names.push_back(law.name);
  out.coords = config.coords;
  out.times = config.times;
  const std::size_t k = config.names.size();
  out.marks.reserve(static_cast<std::size_t>(config.size()) * (k + 1));
  for (long i = 0; i < config.size(); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      out.marks.push_back(config.mark(i, static_cast<int>(j)));
    }
    Philox e(unit_key(rng, static_cast<std::uint64_t>(i)));
    out.marks.push_back(law.law.sample(e));
  }
  return out;
}

PointConfiguration penrose_parking(const PointConfiguration& config, double radius) {
  if (!(radius > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  }
  const long n = config.size();
  const std::vector<long> order = time_order(config);
  std::vector<long> rank(static_cast<std::size_t>(n));
  for (long r = 0; r < n; ++r) {
    rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
  }
  std::vector<Point> pos(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    pos[static_cast<std::size_t>(i)] = config.position(i);
  }
  const double reach = 2.0 * radius;
  std::vector<char> alive(static_cast<std::size_t>(n), 1);
  std::vector<long> accepted;
  std::vector<long> remaining = order;
  while (!remaining.empty()) {
    SpatialHash hash = make_hash(config.box, reach);
    for (long i : remaining) {
      hash.insert(static_cast<int>(i), pos[static_cast<std::size_t>(i)]);
    }
    // Roots: no earlier remaining point in conflict.
    std::vector<long> roots;
    for (long i : remaining) {
      bool root = true;
      hash.for_each_within(pos[static_cast<std::size_t>(i)], reach, [&](int j, double) {
        if (rank[static_cast<std::size_t>(j)] < rank[static_cast<std::size_t>(i)]) {
          root = false;
        }
      });
      if (root) {
        roots.push_back(i);
      }
    }
    for (long r : roots) {
      accepted.push_back(r);
      alive[static_cast<std::size_t>(r)] = 0;
      hash.for_each_within(pos[static_cast<std::size_t>(r)], reach,
                           [&](int j, double) { alive[static_cast<std::size_t>(j)] = 0; });
    }
    std::vector<long> next;
    for (long i : remaining) {
      if (alive[static_cast<std::size_t>(i)]) {
        next.push_back(i);
      }
    }
    remaining.swap(next);
  }
  std::sort(accepted.begin(), accepted.end());
  return config.subset(accepted);
}

PointConfiguration sequential_rsa_oracle(const PointConfiguration& config, double radius) {
  if (!(radius > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  }
  const double reach = 2.0 * radius;
  std::vector<long> accepted;
  for (long i : time_order(config)) {
    const Point p = config.position(i);
    bool ok = true;
    for (long j : accepted) {
      if ((config.position(j) - p).norm() <= reach) {
        ok = false;
        break;
      }
    }
    if (ok) {
      accepted.push_back(i);
    }
  }
  std::sort(accepted.begin(), accepted.end());
  return config.subset(accepted);
}

namespace {

enum class Coverage { Covered, Available, Unresolved };

// Classifies the box [lo, lo + w] against the closed balls of radius `reach`
// around accepted points.
Coverage classify(const SpatialHash& hash, const std::vector<Point>& centers, const Point& lo,
                  const Point& w, double reach, int depth) {
  const int d = static_cast<int>(lo.size());
  const Point mid = lo + 0.5 * w;
  const double half_diag = 0.5 * w.norm();
  std::vector<int> near;
  hash.for_each_within(mid, reach + half_diag, [&](int id, double) { near.push_back(id); });
  const double r2 = reach * reach;
  bool mid_covered = false;
  for (int id : near) {
    const Point& c = centers[static_cast<std::size_t>(id)];
    // Farthest corner from c.
    double far2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double e = std::max(std::fabs(lo[a] - c[a]), std::fabs(lo[a] + w[a] - c[a]));
      far2 += e * e;
    }
    if (far2 <= r2) {
      return Coverage::Covered;
    }
    if ((mid - c).squaredNorm() <= r2) {
      mid_covered = true;
    }
  }
  if (!mid_covered) {
    return Coverage::Available;
  }
  if (depth == 0) {
    return Coverage::Unresolved;
  }
  bool unresolved = false;
  const Point hw = 0.5 * w;
  for (int child = 0; child < (1 << d); ++child) {
    Point clo = lo;
    for (int a = 0; a < d; ++a) {
      if (child & (1 << a)) {
        clo[a] += hw[a];
      }
    }
    const Coverage c = classify(hash, centers, clo, hw, reach, depth - 1);
    if (c == Coverage::Available) {
      return Coverage::Available;
    }
    if (c == Coverage::Unresolved) {
      unresolved = true;
    }
  }
  return unresolved ? Coverage::Unresolved : Coverage::Covered;
}

}  // namespace

ParkingRun run_parking(const CellProcess& process, const std::vector<std::uint64_t>& keys,
                       double radius, const ParkingOptions& options) {
  if (!(radius > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  }
  const BoxSpec& box = process.box();
  const UnitCells& cells = process.cells();
  const double reach = 2.0 * radius;
  const int depth = options.max_depth > 0 ? options.max_depth : (box.dim == 1 ? 40 : box.dim == 2 ? 10 : 6);
  SpatialHash hash = make_hash(box, reach);
  std::vector<Point> centers;
  ParkingRun run;
  run.accepted = PointConfiguration(box);
  run.accepted.names = process.mark_names();
  std::vector<long> live(static_cast<std::size_t>(cells.size()));
  std::iota(live.begin(), live.end(), 0L);
  live.erase(std::remove_if(live.begin(), live.end(),
                            [&](long u) { return cells.volume(u) <= 0.0; }),
             live.end());
  PointConfiguration batch(box);
  batch.names = process.mark_names();
  const std::size_t nm = batch.names.size();
  for (int chunk = 0;; ++chunk) {
    double t0, t1;
    parking_chunk(chunk, t0, t1);
    if (t1 > options.horizon_cap) {
      throw Error(ErrorCode::SaturationBudgetExceeded,
                  "horizon " + std::to_string(t1) + " exceeds the cap");
    }
    batch.coords.clear();
    batch.times.clear();
    batch.marks.clear();
    // Points already in conflict can never be accepted; long chunks are
    // filtered while they are drawn.
    const auto open = [&](const Point& p) {
      bool blocked = false;
      hash.for_each_within(p, reach, [&](int, double) { blocked = true; });
      return !blocked;
    };
    for (long u : live) {
      process.generate(keys[static_cast<std::size_t>(u)], u, static_cast<std::uint64_t>(chunk),
                       t0, t1, t1 - t0, batch, open);
    }
    const PointConfiguration& cand = batch;
    long added = 0;
    for (long i : time_order(cand)) {
      const Point p = cand.position(i);
      bool blocked = false;
      hash.for_each_within(p, reach, [&](int, double) { blocked = true; });
      if (blocked) {
        continue;
      }
      hash.insert(static_cast<int>(centers.size()), p);
      centers.push_back(p);
      run.accepted.push_back(p, cand.time(i),
                             nm > 0 ? &cand.marks[static_cast<std::size_t>(i) * nm] : nullptr);
      ++added;
    }
    run.horizon = t1;
    bool any_available = false;
    std::vector<long> still;
    for (long u : live) {
      Point lo, w;
      cells.extent(u, lo, w);
      const Coverage c = classify(hash, centers, lo, w, reach, depth);
      if (c == Coverage::Covered) {
        continue;
      }
      if (c == Coverage::Available) {
        any_available = true;
      }
      still.push_back(u);
    }
    live.swap(still);
    if (live.empty()) {
      run.exact = true;
      break;
    }
    if (!any_available && chunk >= 1 && added == 0) {
      break;
    }
  }
  // Report accepted points in time order.
  std::vector<long> order = time_order(run.accepted);
  run.accepted = run.accepted.subset(order);
  return run;
}

PointConfiguration parking_saturated(const BoxSpec& box, double radius, const RngStream& rng,
                                     const ParkingOptions& options) {
  const CellProcess process(box, 1.0);
  return run_parking(process, process.draw_keys(rng), radius, options).accepted;
}

PointConfiguration run_hardcore(const CellProcess& process,
                                const std::vector<std::uint64_t>& keys, const HardcoreSpec& spec) {
  if (!(spec.radius > 0.0) || !(spec.lambda > 0.0) || !(spec.horizon > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "hardcore needs R > 0, lambda > 0, horizon > 0");
  }
  const PointConfiguration all = process.generate_all(keys, 0, 0.0, spec.horizon, spec.horizon);
  const double reach = 2.0 * spec.radius;
  SpatialHash hash = make_hash(process.box(), reach);
  std::vector<long> accepted;
  for (long i : time_order(all)) {
    const Point p = all.position(i);
    bool blocked = false;
    hash.for_each_within(p, reach, [&](int, double) { blocked = true; });
    if (!blocked) {
      hash.insert(static_cast<int>(i), p);
      accepted.push_back(i);
    }
  }
  std::sort(accepted.begin(), accepted.end());
  return all.subset(accepted);
}

PointConfiguration hardcore_poisson(const BoxSpec& box, const HardcoreSpec& spec,
                                    const RngStream& rng) {
  if (spec.lambda * std::pow(spec.radius, box.dim) > 1.0) {
    warn("hardcore intensity lambda R^d = " +
         std::to_string(spec.lambda * std::pow(spec.radius, box.dim)) + " exceeds 1");
  }
  const CellProcess process(box, spec.lambda);
  return run_hardcore(process, process.draw_keys(rng), spec);
}

PointConfiguration decimate(const PointConfiguration& config, double lambda,
                            const RngStream& rng) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "decimation parameter must lie in [0, 1]");
  }
  std::vector<long> kept;
  for (long i = 0; i < config.size(); ++i) {
    Philox e(unit_key(rng, static_cast<std::uint64_t>(i)));
    if (uniform01(e) < lambda) {
      kept.push_back(i);
    }
  }
  return config.subset(kept);
}

double causal_chain_radius(const PointConfiguration& config, double radius, const Cube& block) {
  const double reach = 2.0 * radius;
  SpatialHash infected = make_hash(config.box, reach);
  double best = 0.0;
  for (long i : time_order(config)) {
    const Point p = config.position(i);
    if (block.contains_half_open(p)) {
      continue;
    }
    const double dist = block.distance(p);
    bool hit = dist <= reach;
    if (!hit) {
      infected.for_each_within(p, reach, [&](int j, double r) {
        if (r < reach && config.time(j) < config.time(i)) {
          hit = true;
        }
      });
    }
    if (hit) {
      infected.insert(static_cast<int>(i), p);
      best = std::max(best, reach + dist);
    }
  }
  return best;
}

double shielded_chain_radius(const PointConfiguration& outside,
                             const std::vector<char>& accepted, const PointConfiguration& sources,
                             double radius, const Cube& block) {
  const double reach = 2.0 * radius;
  // Merge both sets in time order; ids >= outside.size() denote sources.
  struct Event {
    double t;
    long id;
  };
  std::vector<Event> events;
  events.reserve(static_cast<std::size_t>(outside.size() + sources.size()));
  for (long i = 0; i < outside.size(); ++i) {
    events.push_back({outside.time(i), i});
  }
  for (long i = 0; i < sources.size(); ++i) {
    events.push_back({sources.time(i), outside.size() + i});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.t != b.t ? a.t < b.t : a.id < b.id;
  });
  SpatialHash affected = make_hash(outside.box, reach);
  SpatialHash shields = make_hash(outside.box, reach);
  double best = sources.empty() ? 0.0 : reach;
  for (const Event& e : events) {
    if (e.id >= outside.size()) {
      affected.insert(0, sources.position(e.id - outside.size()));
      continue;
    }
    const Point p = outside.position(e.id);
    bool shielded = false;
    shields.for_each_within(p, reach, [&](int, double) { shielded = true; });
    bool hit = false;
    if (!shielded) {
      affected.for_each_within(p, reach, [&](int, double) { hit = true; });
    }
    if (hit) {
      affected.insert(0, p);
      best = std::max(best, reach + block.distance(p));
    } else if (accepted[static_cast<std::size_t>(e.id)]) {
      shields.insert(0, p);
    }
  }
  return best;
}

double min_pair_distance(const PointConfiguration& config) {
  double best = std::numeric_limits<double>::infinity();
  for (long i = 0; i < config.size(); ++i) {
    const Point p = config.position(i);
    for (long j = i + 1; j < config.size(); ++j) {
      best = std::min(best, (config.position(j) - p).norm());
    }
  }
  return best;
}

}  // namespace mfilab
