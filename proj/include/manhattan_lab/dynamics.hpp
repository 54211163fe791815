#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "manhattan_lab/environment.hpp"
#include "manhattan_lab/geometry.hpp"

namespace mlab {

/// Outgoing direction for a ray arriving at a vertex heading `in`.
/// Manhattan: a mirror takes the perpendicular edge allowed by the
/// orientation at `head`. Mirror model: "/" swaps E<->N and W<->S, "\" swaps
/// E<->S and W<->N.
constexpr Direction scatter(Model model, VertexState state, Point head, Direction in) {
  if (state == VertexState::empty) return in;
  if (model == Model::manhattan) {
    return is_horizontal(in) ? manhattan_column_direction(head.x) : manhattan_row_direction(head.y);
  }
  if (state == VertexState::ne) {
    switch (in) {
      case Direction::E: return Direction::N;
      case Direction::N: return Direction::E;
      case Direction::W: return Direction::S;
      case Direction::S: return Direction::W;
    }
  }
  switch (in) {
    case Direction::E: return Direction::S;
    case Direction::S: return Direction::E;
    case Direction::W: return Direction::N;
    case Direction::N: return Direction::W;
  }
  return in;
}

/// Incoming direction that scatter() maps to `out` at `head`.
constexpr Direction unscatter(Model model, VertexState state, Point head, Direction out) {
  if (state == VertexState::empty) return out;
  if (model == Model::manhattan) {
    return is_horizontal(out) ? manhattan_column_direction(head.x) : manhattan_row_direction(head.y);
  }
  // Both mirror tables are involutions.
  return scatter(model, state, head, out);
}

/// One step against an explicit state lookup `state_at(Point) -> VertexState`.
template <class StateFn>
DirectedEdge step_with(Model model, const Geometry& g, StateFn&& state_at, const DirectedEdge& e) {
  const Point v = advance(e, g);
  return {v, scatter(model, state_at(v), v, e.dir)};
}

/// One application of the ray map. Throws ContractViolation for a Manhattan
/// edge that violates the orientation.
DirectedEdge step(const EnvironmentSpec& spec, const DirectedEdge& e);

/// Unique preimage of e under step().
DirectedEdge step_inverse(const EnvironmentSpec& spec, const DirectedEdge& e);

enum class TraceStatus { closed, window_escape, step_capped };

std::string to_string(TraceStatus s);

struct TrajectoryRecord {
  DirectedEdge start;
  TraceStatus status = TraceStatus::step_capped;
  std::uint64_t period = 0;    // closed only
  std::int64_t boundary = 0;   // window_escape only: x at which |x| first exceeded the window
  std::uint64_t steps_taken = 0;
  std::int64_t max_abs_x = 0;
  std::optional<std::uint64_t> distinct_vertices;
};

struct TraceOptions {
  std::uint64_t max_steps = 1'000'000;
  std::optional<std::int64_t> window;
  bool count_distinct = false;
};

/// Iterate step() from `start` until the start edge recurs, |x| exceeds the
/// window, or max_steps is reached.
TrajectoryRecord trace(const EnvironmentSpec& spec, const DirectedEdge& start, const TraceOptions& options);

/// Flat JSON object: start, status, period, boundary, steps_taken, max_abs_x,
/// distinct_vertices (null when not counted or not applicable).
std::string to_json(const TrajectoryRecord& record);

}  // namespace mlab
