#include "manhattan_lab/geometry.hpp"

#include <charconv>

#include "manhattan_lab/errors.hpp"
#include "manhattan_lab/rng.hpp"

namespace mlab {

namespace {

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  std::int64_t value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw ConfigError("invalid " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

char to_char(Direction d) {
  constexpr char names[4] = {'E', 'N', 'W', 'S'};
  return names[static_cast<unsigned>(d)];
}

Direction parse_direction(char c) {
  switch (c) {
    case 'E': case 'e': return Direction::E;
    case 'N': case 'n': return Direction::N;
    case 'W': case 'w': return Direction::W;
    case 'S': case 's': return Direction::S;
  }
  throw ConfigError(std::string("invalid direction '") + c + "'");
}

std::string to_string(const DirectedEdge& e) {
  return std::to_string(e.tail.x) + "," + std::to_string(e.tail.y) + "," + to_char(e.dir);
}

DirectedEdge parse_directed_edge(std::string_view text) {
  const auto c1 = text.find(',');
  const auto c2 = c1 == std::string_view::npos ? c1 : text.find(',', c1 + 1);
  if (c2 == std::string_view::npos || c2 + 2 != text.size()) {
    throw ConfigError("invalid edge '" + std::string(text) + "', expected x,y,D");
  }
  return {{parse_int(text.substr(0, c1), "edge x"), parse_int(text.substr(c1 + 1, c2 - c1 - 1), "edge y")},
          parse_direction(text.back())};
}

Geometry Geometry::plane() { return {GeometryKind::plane, 0, 0}; }

Geometry Geometry::cylinder(std::int64_t width) {
  if (width < 1) throw ConfigError("cylinder width must be positive");
  return {GeometryKind::cylinder, 0, width};
}

Geometry Geometry::torus(std::int64_t wx, std::int64_t wy) {
  if (wx < 1 || wy < 1) throw ConfigError("torus dimensions must be positive");
  return {GeometryKind::torus, wx, wy};
}

Geometry Geometry::parse(std::string_view text) {
  if (text == "plane") return plane();
  if (text.starts_with("cylinder:")) return cylinder(parse_int(text.substr(9), "cylinder width"));
  if (text.starts_with("torus:")) {
    const auto rest = text.substr(6);
    const auto x = rest.find('x');
    if (x == std::string_view::npos) throw ConfigError("invalid torus '" + std::string(text) + "', expected torus:<wx>x<wy>");
    return torus(parse_int(rest.substr(0, x), "torus width"), parse_int(rest.substr(x + 1), "torus height"));
  }
  throw ConfigError("unknown geometry '" + std::string(text) + "'");
}

bool Geometry::supports_manhattan() const {
  switch (kind_) {
    case GeometryKind::plane: return true;
    case GeometryKind::cylinder: return wy_ % 2 == 0;
    case GeometryKind::torus: return wx_ % 2 == 0 && wy_ % 2 == 0;
  }
  return false;
}

Point Geometry::reduce(Point p) const {
  if (periodic_x()) p.x = floor_mod(p.x, wx_);
  if (periodic_y()) p.y = floor_mod(p.y, wy_);
  return p;
}

std::string Geometry::to_string() const {
  switch (kind_) {
    case GeometryKind::plane: return "plane";
    case GeometryKind::cylinder: return "cylinder:" + std::to_string(wy_);
    case GeometryKind::torus: return "torus:" + std::to_string(wx_) + "x" + std::to_string(wy_);
  }
  return {};
}

Point advance(const DirectedEdge& e, const Geometry& g) {
  Point head{e.tail.x + step_x(e.dir), e.tail.y + step_y(e.dir)};
  // Cheap wrap for the common single-step case.
  if (g.periodic_y()) {
    if (head.y < 0) head.y += g.width();
    else if (head.y >= g.width()) head.y -= g.width();
  }
  if (g.periodic_x()) {
    if (head.x < 0) head.x += g.torus_x();
    else if (head.x >= g.torus_x()) head.x -= g.torus_x();
  }
  return head;
}

DirectedEdge reversed(const DirectedEdge& e, const Geometry& g) { return {advance(e, g), reverse(e.dir)}; }

bool is_manhattan_valid(const DirectedEdge& e) {
  return is_horizontal(e.dir) ? e.dir == manhattan_row_direction(e.tail.y)
                              : e.dir == manhattan_column_direction(e.tail.x);
}

OutgoingPair manhattan_outgoing(Point v, const Geometry& g) {
  if (!g.supports_manhattan()) throw ConfigError("manhattan requires even width");
  v = g.reduce(v);
  return {{v, manhattan_row_direction(v.y)}, {v, manhattan_column_direction(v.x)}};
}

OutgoingPair manhattan_incoming(Point v, const Geometry& g) {
  if (!g.supports_manhattan()) throw ConfigError("manhattan requires even width");
  v = g.reduce(v);
  const Direction h = manhattan_row_direction(v.y);
  const Direction u = manhattan_column_direction(v.x);
  const Point htail = g.reduce({v.x - step_x(h), v.y});
  const Point vtail = g.reduce({v.x, v.y - step_y(u)});
  return {{htail, h}, {vtail, u}};
}

Slab make_slab(const Geometry& g, std::int64_t x_min, std::int64_t x_max) {
  if (g.kind() != GeometryKind::cylinder) throw ConfigError("slabs are defined on cylinders only");
  if (x_min > x_max) throw ConfigError("slab requires x_min <= x_max");
  return {g, x_min, x_max};
}

std::vector<CutSlot> cut_slots(const Geometry& g, std::int64_t k) {
  if (g.kind() != GeometryKind::cylinder) throw ConfigError("cut slots are defined on cylinders only");
  std::vector<CutSlot> slots;
  slots.reserve(static_cast<std::size_t>(g.width()));
  for (std::int64_t y = 0; y < g.width(); ++y) {
    slots.push_back({y, {{k, y}, Direction::E}, {{k + 1, y}, Direction::W}});
  }
  return slots;
}

}  // namespace mlab

std::size_t std::hash<mlab::Point>::operator()(const mlab::Point& p) const noexcept {
  return static_cast<std::size_t>(mlab::mix64(mlab::zigzag(p.x) ^ mlab::mix64(mlab::zigzag(p.y))));
}

std::size_t std::hash<mlab::DirectedEdge>::operator()(const mlab::DirectedEdge& e) const noexcept {
  return std::hash<mlab::Point>{}(e.tail) ^ (static_cast<std::size_t>(e.dir) * 0x9E3779B97F4A7C15ull);
}
