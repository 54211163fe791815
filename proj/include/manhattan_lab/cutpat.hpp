#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "manhattan_lab/dynamics.hpp"
#include "manhattan_lab/environment.hpp"
#include "manhattan_lab/errors.hpp"
#include "manhattan_lab/geometry.hpp"

namespace mlab {

/// Perfect matching on the 2w boundary slots of a cylinder slab plus the
/// number of trajectories that never touch the boundary.
///
/// Slot i < w is L_i (the crossing edge in row i on the left cut), slot
/// w + i is R_i. L-L, R-R and L-R pairs are all allowed. For the mirror
/// model closed_loops counts undirected loops; for Manhattan, directed orbits.
struct ConnectionPattern {
  int width = 0;
  std::vector<int> partner;
  std::uint64_t closed_loops = 0;

  friend bool operator==(const ConnectionPattern&, const ConnectionPattern&) = default;
};

/// Straight-through pattern L_i <-> R_i, no loops; the unit of compose().
ConnectionPattern identity_pattern(int width);

/// Glue a's right cut to b's left cut. Cycles closed by the gluing are added
/// to closed_loops. Associative, with identity_pattern as unit.
ConnectionPattern compose(const ConnectionPattern& a, const ConnectionPattern& b);

/// Number of L-R pairs. Always congruent to the width mod 2.
int crossing_count(const ConnectionPattern& p);

/// Canonical form "w=3;pairs=(L0,R0),(L1,L2),(R1,R2);loops=0": each pair
/// written low slot first, pairs sorted by their low slot, L before R.
std::string to_string(const ConnectionPattern& p);
ConnectionPattern parse_pattern(std::string_view text);

namespace detail {

inline std::size_t interior_index(std::int64_t x, std::int64_t y, Direction d, std::int64_t x_min, int width) {
  return (static_cast<std::size_t>(x - x_min) * static_cast<std::size_t>(width) + static_cast<std::size_t>(y)) * 4 +
         static_cast<std::size_t>(d);
}

}  // namespace detail

/// Connection pattern of columns x_min..x_max of a width-w cylinder, reading
/// vertex states through `state_at(Point)`. Only vertices inside the slab are
/// queried. Rays are injected through every entry slot (both directions for
/// the mirror model, the orientation-allowed one for Manhattan) and chased
/// until they leave through a boundary slot.
template <class StateFn>
ConnectionPattern slab_pattern_with(Model model, int width, std::int64_t x_min, std::int64_t x_max, StateFn&& state_at) {
  if (width < 1) throw ConfigError("slab width must be positive");
  if (x_min > x_max) throw ConfigError("slab requires x_min <= x_max");
  if (model == Model::manhattan && width % 2 != 0) throw ConfigError("manhattan requires even width");

  const Geometry g = Geometry::cylinder(width);
  const std::int64_t length = x_max - x_min + 1;
  const std::size_t edge_count = static_cast<std::size_t>(length) * static_cast<std::size_t>(width) * 4;
  std::vector<std::uint8_t> visited(edge_count, 0);
  const std::size_t guard = edge_count + 2;

  ConnectionPattern p;
  p.width = width;
  p.partner.assign(static_cast<std::size_t>(2 * width), -1);

  auto chase = [&](DirectedEdge e) -> int {
    for (std::size_t n = 0; n < guard; ++n) {
      e = step_with(model, g, state_at, e);
      visited[detail::interior_index(e.tail.x, e.tail.y, e.dir, x_min, width)] = 1;
      if (e.dir == Direction::W && e.tail.x == x_min) return static_cast<int>(e.tail.y);
      if (e.dir == Direction::E && e.tail.x == x_max) return width + static_cast<int>(e.tail.y);
    }
    throw ContractViolation("boundary ray failed to leave the slab");
  };
  auto link = [&](int s, int t) {
    if (p.partner[s] != -1 || p.partner[t] != -1) {
      if (p.partner[s] == t && p.partner[t] == s) return;
      throw ContractViolation("slab chase is not an involution");
    }
    p.partner[s] = t;
    p.partner[t] = s;
  };

  for (int y = 0; y < width; ++y) {
    const bool east_entry = model == Model::mirror || manhattan_row_direction(y) == Direction::E;
    const bool west_entry = model == Model::mirror || manhattan_row_direction(y) == Direction::W;
    // Every entry is chased, even when its slot is already matched, so both
    // orientations of a mirror path are marked.
    if (east_entry) link(y, chase({{x_min - 1, y}, Direction::E}));
    if (west_entry) link(width + y, chase({{x_max + 1, y}, Direction::W}));
  }
  for (int s : p.partner) {
    if (s < 0) throw ContractViolation("unmatched boundary slot");
  }

  std::uint64_t orbits = 0;
  for (std::int64_t x = x_min; x <= x_max; ++x) {
    for (std::int64_t y = 0; y < width; ++y) {
      for (Direction d : {Direction::E, Direction::N, Direction::W, Direction::S}) {
        if ((d == Direction::W && x == x_min) || (d == Direction::E && x == x_max)) continue;
        const DirectedEdge start{{x, y}, d};
        if (model == Model::manhattan && !is_manhattan_valid(start)) continue;
        if (visited[detail::interior_index(x, y, d, x_min, width)]) continue;
        DirectedEdge e = start;
        std::size_t n = 0;
        do {
          visited[detail::interior_index(e.tail.x, e.tail.y, e.dir, x_min, width)] = 1;
          e = step_with(model, g, state_at, e);
          if (++n > guard) throw ContractViolation("interior orbit failed to close");
        } while (e != start);
        ++orbits;
      }
    }
  }
  if (model == Model::mirror) {
    if (orbits % 2 != 0) throw ContractViolation("mirror orbits must pair with their reversals");
    orbits /= 2;
  }
  p.closed_loops = orbits;
  return p;
}

/// Pattern of the given slab in the seeded environment.
ConnectionPattern slab_pattern(const EnvironmentSpec& spec, const Slab& slab);

struct ParityScanResult {
  Model model = Model::mirror;
  int width = 0;
  int length = 0;
  std::uint64_t configurations = 0;
  int min_crossings = 0;
  std::uint64_t min_count = 0;                          // configurations attaining the minimum
  std::vector<std::uint64_t> witnesses;                 // lowest configuration indices attaining it
  std::vector<std::uint64_t> crossing_histogram;        // index = crossing count
  std::uint64_t distinct_patterns = 0;                  // distinct matchings (loops ignored)
  std::uint64_t parity_violations = 0;                  // crossing_count mod 2 != width mod 2
};

/// Largest 3^(wL) (or 2^(wL) for Manhattan) accepted by the scan.
inline constexpr std::uint64_t kParityScanLimit = 10'000'000;

/// Vertex states of configuration `index` in a width x length slab; digit k
/// (base 3 for mirror: empty, NE, NW; base 2 for Manhattan: empty, mirror)
/// is the state of column k / width, row k % width.
std::vector<VertexState> decode_configuration(Model model, int width, int length, std::uint64_t index);

/// Enumerate every scatterer assignment on a width x length slab and collect
/// the crossing statistics. Results do not depend on the worker count.
ParityScanResult exhaustive_parity_scan(int width, int length, unsigned workers = 0,
                                        Model model = Model::mirror, std::size_t max_witnesses = 4);

/// Pattern of a decoded configuration (columns 0..length-1).
ConnectionPattern configuration_pattern(Model model, int width, int length, const std::vector<VertexState>& states);

}  // namespace mlab
