#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mfilab/lattice.hpp"
#include "mfilab/laws.hpp"
#include "mfilab/random.hpp"

namespace mfilab {

/// Finite set of space-time points with named real marks.
struct PointConfiguration {
  BoxSpec box;
  std::vector<double> coords;  // size() * dim, point-major
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<double> marks;  // size() * names.size(), point-major

  PointConfiguration() = default;
  explicit PointConfiguration(const BoxSpec& b) : box(b) {}

  int dim() const { return box.dim; }
  long size() const { return static_cast<long>(times.size()); }
  bool empty() const { return times.empty(); }
  Point position(long i) const;
  double time(long i) const { return times[static_cast<std::size_t>(i)]; }
  /// Index of a decoration, or -1.
  int mark_index(const std::string& name) const;
  double mark(long i, int k) const { return marks[static_cast<std::size_t>(i) * names.size() + k]; }
  /// Mark by name; throws MissingDecoration.
  double mark(long i, const std::string& name) const;
  void require_marks(const std::vector<std::string>& required) const;

  void push_back(const Point& p, double t, const double* point_marks = nullptr);
  PointConfiguration subset(const std::vector<long>& indices) const;
  /// Positions inside the padded box, times >= 0, unique names.
  void validate() const;
};

/// Equality of positions, times and marks, in order.
bool same_points(const PointConfiguration& a, const PointConfiguration& b);

struct DecorationLaw {
  std::string name;
  ScalarLaw law;
};

struct HardcoreSpec {
  double radius = 0.5;
  double lambda = 1.0;
  double horizon = 1.0;
};

/// Independent space-time Poisson points attached to the unit cells of a box.
/// Each cell owns a key; the points of cell u in time chunk c are a pure
/// function of (key_u, c), so resampling a set of cells replaces their keys.
class CellProcess {
 public:
  CellProcess(const BoxSpec& box, double intensity, std::vector<DecorationLaw> marks = {});

  const BoxSpec& box() const { return box_; }
  const UnitCells& cells() const { return cells_; }
  double intensity() const { return intensity_; }
  const std::vector<DecorationLaw>& mark_laws() const { return marks_; }
  std::vector<std::string> mark_names() const;

  /// Appends the points of one cell for the chunk [t0, t1). The expected count
  /// is intensity * volume * span; times are uniform on [t0, t1) (all t0 when
  /// t1 == t0).
  void generate(std::uint64_t key, long cell, std::uint64_t chunk, double t0, double t1,
                double span, PointConfiguration& out) const;
  /// Same draws, keeping only the points accepted by `keep`.
  void generate(std::uint64_t key, long cell, std::uint64_t chunk, double t0, double t1,
                double span, PointConfiguration& out,
                const std::function<bool(const Point&)>& keep) const;
  /// All cells, one chunk.
  PointConfiguration generate_all(const std::vector<std::uint64_t>& keys, std::uint64_t chunk,
                                  double t0, double t1, double span) const;
  std::vector<std::uint64_t> draw_keys(const RngStream& rng) const;

 private:
  BoxSpec box_;
  UnitCells cells_;
  double intensity_;
  std::vector<DecorationLaw> marks_;
};

/// Time chunk c of the saturation schedule: [0, 1), then [2^(c-1), 2^c).
void parking_chunk(int chunk, double& t0, double& t1);

PointConfiguration sample_poisson(const BoxSpec& box, double intensity, double time_horizon,
                                  const RngStream& rng);

PointConfiguration decorate(const PointConfiguration& config, const DecorationLaw& law,
                            const RngStream& rng);

/// Root-iteration acceptance: repeatedly accept the points with no earlier
/// conflicting point left and delete the points they conflict with. Points
/// conflict when |x - x'| <= 2R; time ties are broken lexicographically.
PointConfiguration penrose_parking(const PointConfiguration& config, double radius);

/// Direct time-ordered scan, quadratic; reference for penrose_parking.
PointConfiguration sequential_rsa_oracle(const PointConfiguration& config, double radius);

struct ParkingOptions {
  double horizon_cap = 65536.0;
  int max_depth = 0;  // coverage refinement depth, 0 picks a default per dimension
};

struct ParkingRun {
  PointConfiguration accepted;
  double horizon = 0.0;
  /// True when every cell was certified to hold no available position.
  bool exact = false;
};

/// Saturated parking from the cell process: chunks are processed in time
/// order, cells certified fully covered stop drawing points, and the run
/// ends once no cell holds available space, or once no cell is certified
/// to hold any and a full doubling of the horizon accepted nothing.
ParkingRun run_parking(const CellProcess& process, const std::vector<std::uint64_t>& keys,
                       double radius, const ParkingOptions& options = {});

PointConfiguration parking_saturated(const BoxSpec& box, double radius, const RngStream& rng,
                                     const ParkingOptions& options = {});

/// Time-ordered acceptance of the cell process on [0, horizon].
PointConfiguration run_hardcore(const CellProcess& process,
                                const std::vector<std::uint64_t>& keys, const HardcoreSpec& spec);

PointConfiguration hardcore_poisson(const BoxSpec& box, const HardcoreSpec& spec,
                                    const RngStream& rng);

PointConfiguration decimate(const PointConfiguration& config, double lambda,
                            const RngStream& rng);

/// Largest 2R + d(y, block) over points y reached by a chain starting in
/// (block + B_2R) minus block, with hops shorter than 2R and strictly
/// increasing times. Points inside the block are not relays.
double causal_chain_radius(const PointConfiguration& config, double radius, const Cube& block);

/// Influence overbound for a parking map whose input differs only inside a
/// block. `outside` holds every point outside the block up to the common
/// horizon with its acceptance flag in the unperturbed run; `sources` holds the
/// block points of both runs. A point is affected when it conflicts with an
/// earlier affected point and no earlier unaffected accepted point conflicts
/// with it. Returns the largest 2R + d(y, block) over affected points.
double shielded_chain_radius(const PointConfiguration& outside,
                             const std::vector<char>& accepted, const PointConfiguration& sources,
                             double radius, const Cube& block);

/// Minimum pairwise distance (inf for fewer than two points).
double min_pair_distance(const PointConfiguration& config);

}  // namespace mfilab
