#include "manhattan_lab/dynamics.hpp"

#include <cstdlib>
#include <unordered_set>

#include <json.hpp>

#include "manhattan_lab/errors.hpp"

namespace mlab {

namespace {

struct SpecState {
  const EnvironmentSpec& spec;
  VertexState operator()(Point v) const { return vertex_state(spec, v); }
};

}  // namespace

DirectedEdge step(const EnvironmentSpec& spec, const DirectedEdge& e) {
  if (spec.model == Model::manhattan && !is_manhattan_valid(e)) {
    throw ContractViolation("edge " + to_string(e) + " violates the Manhattan orientation");
  }
  return step_with(spec.model, spec.geometry, SpecState{spec}, e);
}

DirectedEdge step_inverse(const EnvironmentSpec& spec, const DirectedEdge& e) {
  if (spec.model == Model::manhattan && !is_manhattan_valid(e)) {
    throw ContractViolation("edge " + to_string(e) + " violates the Manhattan orientation");
  }
  const Point v = e.tail;
  const Direction in = unscatter(spec.model, vertex_state(spec, v), v, e.dir);
  return {spec.geometry.reduce({v.x - step_x(in), v.y - step_y(in)}), in};
}

std::string to_string(TraceStatus s) {
  switch (s) {
    case TraceStatus::closed: return "Closed";
    case TraceStatus::window_escape: return "WindowEscape";
    case TraceStatus::step_capped: return "StepCapped";
  }
  return {};
}

TrajectoryRecord trace(const EnvironmentSpec& spec, const DirectedEdge& start_edge, const TraceOptions& options) {
  const DirectedEdge start{spec.geometry.reduce(start_edge.tail), start_edge.dir};
  if (options.max_steps < 1) throw ConfigError("max_steps must be at least 1");
  if (spec.model == Model::manhattan && !is_manhattan_valid(start)) {
    throw ConfigError("start edge " + to_string(start) + " violates the Manhattan orientation");
  }

  TrajectoryRecord record;
  record.start = start;
  record.max_abs_x = std::llabs(start.tail.x);

  std::unordered_set<Point> seen;
  if (options.count_distinct) seen.insert(start.tail);

  const SpecState state{spec};
  DirectedEdge e = start;
  for (;;) {
    e = step_with(spec.model, spec.geometry, state, e);
    ++record.steps_taken;
    if (e == start) {
      record.status = TraceStatus::closed;
      record.period = record.steps_taken;
      break;
    }
    const std::int64_t ax = std::llabs(e.tail.x);
    if (ax > record.max_abs_x) record.max_abs_x = ax;
    if (options.count_distinct) seen.insert(e.tail);
    if (options.window && ax > *options.window) {
      record.status = TraceStatus::window_escape;
      record.boundary = e.tail.x;
      break;
    }
    if (record.steps_taken >= options.max_steps) {
      record.status = TraceStatus::step_capped;
      break;
    }
  }
  if (options.count_distinct) record.distinct_vertices = seen.size();
  return record;
}

std::string to_json(const TrajectoryRecord& record) {
  nlohmann::ordered_json j;
  j["start"] = to_string(record.start);
  j["status"] = to_string(record.status);
  j["period"] = record.status == TraceStatus::closed ? nlohmann::ordered_json(record.period) : nullptr;
  j["boundary"] = record.status == TraceStatus::window_escape ? nlohmann::ordered_json(record.boundary) : nullptr;
  j["steps_taken"] = record.steps_taken;
  j["max_abs_x"] = record.max_abs_x;
  j["distinct_vertices"] = record.distinct_vertices ? nlohmann::ordered_json(*record.distinct_vertices) : nullptr;
  return j.dump();
}

}  // namespace mlab
