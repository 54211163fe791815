#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace mlab {

/// Compass direction of a unit lattice step.
enum class Direction : std::uint8_t { E = 0, N = 1, W = 2, S = 3 };

constexpr Direction reverse(Direction d) {
  return static_cast<Direction>((static_cast<unsigned>(d) + 2u) & 3u);
}

constexpr int step_x(Direction d) {
  constexpr int table[4] = {1, 0, -1, 0};
  return table[static_cast<unsigned>(d)];
}

constexpr int step_y(Direction d) {
  constexpr int table[4] = {0, 1, 0, -1};
  return table[static_cast<unsigned>(d)];
}

constexpr bool is_horizontal(Direction d) { return d == Direction::E || d == Direction::W; }

char to_char(Direction d);
Direction parse_direction(char c);

struct Point {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend constexpr auto operator<=>(const Point&, const Point&) = default;
};

struct DirectedEdge {
  Point tail;
  Direction dir = Direction::E;

  friend constexpr auto operator<=>(const DirectedEdge&, const DirectedEdge&) = default;
};

/// "x,y,D", e.g. "0,0,E". Also the CLI --start syntax.
std::string to_string(const DirectedEdge& e);
DirectedEdge parse_directed_edge(std::string_view text);

enum class GeometryKind { plane, cylinder, torus };

/// One of the three lattice families. Cylinders are infinite in x and
/// periodic in y; tori are periodic in both.
class Geometry {
 public:
  static Geometry plane();
  static Geometry cylinder(std::int64_t width);
  static Geometry torus(std::int64_t wx, std::int64_t wy);

  /// Accepts "plane", "cylinder:<w>", "torus:<wx>x<wy>".
  static Geometry parse(std::string_view text);

  GeometryKind kind() const { return kind_; }
  std::int64_t width() const { return wy_; }  // circumference; 0 on the plane
  std::int64_t torus_x() const { return wx_; }
  std::int64_t torus_y() const { return wy_; }

  bool periodic_x() const { return kind_ == GeometryKind::torus; }
  bool periodic_y() const { return kind_ != GeometryKind::plane; }

  /// True when every periodic dimension is even.
  bool supports_manhattan() const;

  /// Reduce coordinates into the fundamental domain.
  Point reduce(Point p) const;

  std::string to_string() const;

  friend bool operator==(const Geometry&, const Geometry&) = default;

 private:
  Geometry(GeometryKind kind, std::int64_t wx, std::int64_t wy) : kind_(kind), wx_(wx), wy_(wy) {}

  GeometryKind kind_;
  std::int64_t wx_;
  std::int64_t wy_;
};

/// Head vertex of e, wrapped into the fundamental domain.
Point advance(const DirectedEdge& e, const Geometry& g);

/// Same edge traversed the other way: tail becomes head(e).
DirectedEdge reversed(const DirectedEdge& e, const Geometry& g);

// Manhattan orientation: rows point E when y is even and W when y is odd;
// columns point N when x is even and S when x is odd.
constexpr Direction manhattan_row_direction(std::int64_t y) {
  return (y & 1) == 0 ? Direction::E : Direction::W;
}
constexpr Direction manhattan_column_direction(std::int64_t x) {
  return (x & 1) == 0 ? Direction::N : Direction::S;
}

bool is_manhattan_valid(const DirectedEdge& e);

struct OutgoingPair {
  DirectedEdge horizontal;
  DirectedEdge vertical;
};

/// The two outgoing Manhattan edges at v. Throws ConfigError when a
/// periodic dimension of g is odd.
OutgoingPair manhattan_outgoing(Point v, const Geometry& g);

/// The incoming Manhattan edges at v (each has head v).
OutgoingPair manhattan_incoming(Point v, const Geometry& g);

/// Columns x_min..x_max of a cylinder, full circumference.
struct Slab {
  Geometry geometry = Geometry::cylinder(1);
  std::int64_t x_min = 0;
  std::int64_t x_max = 0;

  std::int64_t length() const { return x_max - x_min + 1; }
};

Slab make_slab(const Geometry& g, std::int64_t x_min, std::int64_t x_max);

/// One undirected horizontal edge crossing the cut between columns k and k+1.
struct CutSlot {
  std::int64_t row;
  DirectedEdge eastbound;
  DirectedEdge westbound;
};

/// The w crossing edges of a cylinder cut, in increasing row order.
std::vector<CutSlot> cut_slots(const Geometry& g, std::int64_t k);

}  // namespace mlab

template <>
struct std::hash<mlab::Point> {
  std::size_t operator()(const mlab::Point& p) const noexcept;
};

template <>
struct std::hash<mlab::DirectedEdge> {
  std::size_t operator()(const mlab::DirectedEdge& e) const noexcept;
};
