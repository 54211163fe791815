#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "manhattan_lab/geometry.hpp"
#include "manhattan_lab/rng.hpp"

namespace mlab {

enum class Model { manhattan, mirror };

std::string to_string(Model m);
Model parse_model(std::string_view text);

/// Scatterer at a vertex. Manhattan uses {empty, mirror}; the Lorentz mirror
/// model uses {empty, ne, nw} where NE is "/" and NW is "\".
enum class VertexState : std::uint8_t { empty = 0, mirror = 1, ne = 2, nw = 3 };

std::string to_string(VertexState s);

/// Everything that determines a quenched environment. The field itself is
/// never stored: vertex_state() recomputes it on demand.
struct EnvironmentSpec {
  Model model = Model::manhattan;
  Geometry geometry = Geometry::plane();
  double density = 0.5;      // probability that a vertex carries a mirror
  double ne_fraction = 0.5;  // mirror model only
  std::uint64_t seed = 0;

  /// Throws ConfigError on out-of-range probabilities or a geometry the
  /// model cannot run on (Manhattan needs even periodic dimensions).
  void validate() const;

  std::string canonical() const;
};

/// Random lane owned by vertex v: mix64(zigzag(x) ^ mix64(zigzag(y))).
constexpr std::uint64_t vertex_lane(Point v) {
  return mix64(zigzag(v.x) ^ mix64(zigzag(v.y)));
}

/// v must already be reduced into the geometry's fundamental domain.
VertexState vertex_state(const EnvironmentSpec& spec, Point v);

}  // namespace mlab
