#include "manhattan_lab/environment.hpp"

#include <cmath>
#include <numbers>

#include "manhattan_lab/errors.hpp"
#include "manhattan_lab/format.hpp"

namespace mlab {

RandomStream::NormalPair RandomStream::normal_pair() {
  // 1 - u lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

std::string to_string(Model m) { return m == Model::manhattan ? "manhattan" : "mirror"; }

Model parse_model(std::string_view text) {
  if (text == "manhattan") return Model::manhattan;
  if (text == "mirror") return Model::mirror;
  throw ConfigError("unknown model '" + std::string(text) + "'");
}

std::string to_string(VertexState s) {
  switch (s) {
    case VertexState::empty: return "empty";
    case VertexState::mirror: return "mirror";
    case VertexState::ne: return "NE";
    case VertexState::nw: return "NW";
  }
  return {};
}

void EnvironmentSpec::validate() const {
  if (!(density >= 0.0 && density <= 1.0)) throw ConfigError("density must lie in [0,1]");
  if (!(ne_fraction >= 0.0 && ne_fraction <= 1.0)) throw ConfigError("ne-fraction must lie in [0,1]");
  if (model == Model::manhattan && !geometry.supports_manhattan()) {
    throw ConfigError("manhattan requires even width");
  }
}

std::string EnvironmentSpec::canonical() const {
  std::string out = "model=" + to_string(model) + ";geometry=" + geometry.to_string() +
                    ";density=" + format_double(density);
  if (model == Model::mirror) out += ";ne_fraction=" + format_double(ne_fraction);
  return out + ";seed=" + std::to_string(seed);
}

VertexState vertex_state(const EnvironmentSpec& spec, Point v) {
  RandomStream stream(spec.seed, vertex_lane(v));
  const double u = stream.uniform01();
  if (spec.model == Model::manhattan) return u < spec.density ? VertexState::mirror : VertexState::empty;
  if (u >= spec.density) return VertexState::empty;
  return stream.uniform01() < spec.ne_fraction ? VertexState::ne : VertexState::nw;
}

}  // namespace mlab
