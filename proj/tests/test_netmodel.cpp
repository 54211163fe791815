#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "manhattan_lab/errors.hpp"
#include "manhattan_lab/netmodel.hpp"

using namespace mlab;

namespace {

constexpr double kPi = std::numbers::pi;

// Leibniz determinant of the k x k matrix m[a][b] = S(out_a, in_b), visits
// taken in trail order. Reordering rows and columns to sorted channel order
// produces exactly the sign of the visit permutation.
double leibniz_weight(const Eigen::MatrixXd& s, const std::vector<ChannelVisit>& visits) {
  const int k = static_cast<int>(visits.size());
  std::vector<int> sigma(k);
  std::iota(sigma.begin(), sigma.end(), 0);
  double total = 0.0;
  do {
    int inversions = 0;
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) inversions += sigma[a] > sigma[b];
    double term = inversions % 2 ? -1.0 : 1.0;
    for (int a = 0; a < k; ++a) term *= s(visits[a].out_channel, visits[sigma[a]].in_channel);
    total += term;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return total;
}

// Brute force: every edge sequence from root of length <= max_len with
// distinct edges, closed when the last head feeds back into root.
std::map<int, double> brute_closed_weights(const NetworkModel& m, int root, int max_len, std::uint64_t& count) {
  const auto& g = m.graph;
  std::map<int, double> by_len;
  std::vector<int> path{root};
  auto weigh = [&]() {
    std::vector<std::vector<ChannelVisit>> visits(g.vertex_count());
    for (std::size_t k = 0; k < path.size(); ++k) {
      const auto& a = g.edge(path[k]);
      const auto& b = g.edge(path[(k + 1) % path.size()]);
      visits[a.head].push_back({a.head_channel, b.tail_channel});
    }
    double w = 1.0;
    for (int v = 0; v < g.vertex_count(); ++v)
      if (!visits[v].empty()) w *= leibniz_weight(m.nodes[v], visits[v]);
    return w;
  };
  auto rec = [&](auto&& self) -> void {
    const int v = g.edge(path.back()).head;
    if (v == g.edge(root).tail) {
      // closing transition must use root's tail channel, which is unused by construction
      by_len[static_cast<int>(path.size())] += weigh();
      ++count;
    }
    if (static_cast<int>(path.size()) == max_len) return;
    for (int e = 0; e < g.edge_count(); ++e) {
      if (g.edge(e).tail != v || std::ranges::find(path, e) != path.end()) continue;
      path.push_back(e);
      self(self);
      path.pop_back();
    }
  };
  rec(rec);
  return by_len;
}

}  // namespace

TEST_CASE("step unitary is unitary and zero z gives two") {
  const auto m = make_manhattan_torus(4, 4, kPi / 4);
  RandomStream s(1, 1);
  const auto u = build_step_unitary(m, draw_disorder(m, s));
  CHECK(u.rows() == 2 * 32);
  CHECK(unitarity_residual(u) < 1e-12);
  const auto g = averaged_green(m, 0, 0.0, 1000, 3, 1);
  CHECK(g.value == std::complex<double>(2.0, 0.0));
  CHECK(g.std_error == 0.0);
}

TEST_CASE("theta zero torus with trivial disorder is a permutation") {
  const auto m = make_manhattan_torus(4, 4, 0.0);
  std::vector<Eigen::Matrix2cd> id(m.graph.edge_count(), Eigen::Matrix2cd::Identity());
  const auto u = build_step_unitary(m, id);
  for (int r = 0; r < u.rows(); ++r) {
    int nonzero = 0;
    for (int c = 0; c < u.cols(); ++c) {
      if (std::abs(u(r, c)) > 1e-12) {
        ++nonzero;
        CHECK(std::abs(std::abs(u(r, c)) - 1.0) < 1e-12);
      }
    }
    CHECK(nonzero == 1);
  }
}

TEST_CASE("node weights match the Leibniz oracle") {
  const Eigen::Matrix2d s = rotation_node(0.37);
  CHECK(node_weight(s, std::vector<ChannelVisit>{{0, 1}}) == doctest::Approx(s(1, 0)));
  CHECK(node_weight(s, std::vector<ChannelVisit>{{1, 1}}) == doctest::Approx(s(1, 1)));
  const std::vector<ChannelVisit> twice_a{{0, 0}, {1, 1}}, twice_b{{0, 1}, {1, 0}}, twice_c{{1, 0}, {0, 1}};
  CHECK(node_weight(s, twice_a) == doctest::Approx(1.0));
  CHECK(node_weight(s, twice_b) == doctest::Approx(-1.0));
  CHECK(node_weight(s, twice_c) == doctest::Approx(-1.0));
  for (const auto& v : {twice_a, twice_b, twice_c}) CHECK(node_weight(s, v) == doctest::Approx(leibniz_weight(s, v)));
  CHECK(node_weight(s, std::vector<ChannelVisit>{}) == 1.0);
}

TEST_CASE("ring trails") {
  const auto ring = make_ring();
  CHECK(enumerate_trails(ring, 0, TrailKind::closed, 1).empty());
  const auto trails = enumerate_trails(ring, 0, TrailKind::closed, 8);
  REQUIRE(trails.size() == 1);
  CHECK(trails[0].length() == 2);
  CHECK(trails[0].weight == 1.0);
  CHECK(trail_sum(ring, 0, 0.3, 8).value.real() == doctest::Approx(0.09));
  const auto flipped = make_ring(1.0, -1.0);
  CHECK(trail_sum(flipped, 0, 0.3, 8).value.real() == doctest::Approx(-0.09));
  CHECK(open_trail_conductance(ring, 0, 1, 8) == doctest::Approx(2.0));
  CHECK_THROWS_AS(make_ring(1.0, 0.5), ConfigError);
}

TEST_CASE("torus trail sums match brute-force enumeration") {
  const auto m = make_manhattan_torus(4, 4, kPi / 4);
  for (int root : {0, 1, 13}) {
    std::uint64_t count = 0;
    const auto oracle = brute_closed_weights(m, root, 8, count);
    const auto sum = trail_sum(m, root, 1.0, 8);
    std::uint64_t total = 0;
    for (auto c : sum.count_by_length) total += c;
    CHECK(total == count);
    for (int len = 1; len <= 8; ++len) {
      const double want = oracle.count(len) ? oracle.at(len) : 0.0;
      const double got = len < static_cast<int>(sum.weight_by_length.size()) ? sum.weight_by_length[len] : 0.0;
      CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
  }
  // Up to length 4: the plaquette (four turns) and the straight wrap around
  // the torus (four passes), each of magnitude (1/sqrt 2)^4.
  const auto trails = enumerate_trails(m, 0, TrailKind::closed, 4);
  REQUIRE(trails.size() == 2);
  for (const auto& t : trails) CHECK(std::abs(t.weight) == doctest::Approx(0.25));
}

TEST_CASE("trail enumeration does not depend on exploration order") {
  const auto m = make_manhattan_torus(4, 4, 0.6);
  auto key = [](std::vector<Trail> t) {
    std::vector<std::pair<std::vector<int>, double>> out;
    for (auto& x : t) out.emplace_back(x.edges, x.weight);
    std::ranges::sort(out);
    return out;
  };
  const auto a = key(enumerate_trails(m, 5, TrailKind::closed, 10, -1, ExplorationOrder::ascending));
  const auto b = key(enumerate_trails(m, 5, TrailKind::closed, 10, -1, ExplorationOrder::descending));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].first == b[i].first);
    CHECK(a[i].second == doctest::Approx(b[i].second));
  }
  CHECK_THROWS_AS(enumerate_trails(m, 0, TrailKind::closed, 25), ConfigError);
}

TEST_CASE("ring green function at small z") {
  // E Tr (1 - z^2 V)^-1 with V Haar in SU(2) is 2 - z^4 exactly.
  for (double z : {0.3, 0.6}) {
    const auto g = averaged_green(make_ring(), 0, z, 20000, 7, 2);
    CHECK(std::abs(g.value.real() - (2.0 - std::pow(z, 4))) < 4.0 * g.std_error + 1e-12);
    CHECK(std::abs(g.value.imag()) < 4.0 * g.std_error + 1e-12);
  }
  CHECK_THROWS_AS(averaged_green(make_ring(), 0, 0.95, 1000, 1), ConfigError);
  CHECK_THROWS_AS(averaged_green(make_ring(), 0, 0.5, 999, 1), ConfigError);
}

TEST_CASE("green estimates do not depend on the worker count") {
  const auto m = make_manhattan_torus(2, 2, 0.4);
  const auto a = averaged_green(m, 1, 0.5, 3000, 11, 1);
  const auto b = averaged_green(m, 1, 0.5, 3000, 11, 4);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("calibration recovers the exponent on the ring") {
  const std::vector<double> zs{0.3, 0.45, 0.6, 0.75};
  for (double sb : {1.0, -1.0}) {
    CalibrationOptions opt;
    opt.samples = 20000;
    opt.seed = 3;
    opt.workers = 1;
    const auto cal = calibrate_identity(make_ring(1.0, sb), 0, zs, opt);
    CHECK(cal.accepted);
    CHECK(cal.best.s == 2);
    CHECK(cal.best.a == doctest::Approx(2.0).epsilon(0.01));
    CHECK(cal.best.b == doctest::Approx(-sb).epsilon(0.1));
  }
}

TEST_CASE("classical walk limits on the lattice") {
  RandomStream s(5, 0);
  const auto turn = classical_walk_lattice(kPi / 2, Geometry::plane(), {{0, 0}, Direction::E}, s, 100);
  CHECK(turn.status == TraceStatus::closed);
  CHECK(turn.period == 4);
  const auto straight = classical_walk_lattice(0.0, Geometry::plane(), {{0, 0}, Direction::E}, s, 100);
  CHECK(straight.status == TraceStatus::step_capped);
  CHECK(straight.max_abs_x == 100);
}

TEST_CASE("network walk on the theta pi/2 torus closes on a plaquette") {
  const auto m = make_manhattan_torus(4, 4, kPi / 2);
  RandomStream s(1, 2);
  const auto w = classical_walk(m, 0, s, 1000);
  CHECK(w.status == TraceStatus::closed);
  CHECK(w.length == 4);
}

TEST_CASE("exact occupancy agrees with sampled walks") {
  const auto m = make_manhattan_torus(4, 4, kPi / 4);
  const int t_max = 10;
  const auto exact = exact_walk_occupancy(m, 0, t_max);
  for (int t = 0; t <= t_max; ++t) CHECK(exact.row(t).sum() == doctest::Approx(1.0));
  CHECK(exact(0, 0) == doctest::Approx(1.0));

  const int n = 40000;
  Eigen::MatrixXd hits = Eigen::MatrixXd::Zero(t_max + 1, m.graph.edge_count());
  for (int i = 0; i < n; ++i) {
    RandomStream s(17, static_cast<std::uint64_t>(i));
    const auto w = classical_walk(m, 0, s, 10000);
    REQUIRE(w.status == TraceStatus::closed);
    for (int t = 0; t <= t_max; ++t) hits(t, w.edges[t % w.edges.size()]) += 1.0;
  }
  for (int t = 0; t <= t_max; ++t) {
    for (int e = 0; e < m.graph.edge_count(); ++e) {
      const double p = std::clamp(exact(t, e), 0.0, 1.0);
      const double f = hits(t, e) / n;
      CHECK(std::abs(f - p) <= 5.0 * std::sqrt(p * (1 - p) / n) + 1e-12);
    }
  }
}

TEST_CASE("dynamic correlator starts on the start edge") {
  const auto m = make_manhattan_torus(4, 4, kPi / 4);
  const auto d = dynamic_correlator(m, 3, 2, 2000, 9, 1);
  for (int e = 0; e < m.graph.edge_count(); ++e) CHECK(d.mean(0, e) == doctest::Approx(e == 3 ? 1.0 : 0.0));
  for (int t = 0; t <= 2; ++t) CHECK(d.mean.row(t).sum() == doctest::Approx(1.0));
  // one step scatters with probability |S_ij|^2 regardless of the disorder
  const auto exact = exact_walk_occupancy(m, 3, 2);
  for (int e = 0; e < m.graph.edge_count(); ++e) CHECK(d.mean(1, e) == doctest::Approx(exact(1, e)).epsilon(1e-9));
}

TEST_CASE("network text format") {
  const auto torus = make_manhattan_torus(2, 2, 0.3);
  const auto back = parse_network(to_text(torus));
  CHECK(back.graph.edge_count() == torus.graph.edge_count());
  for (int v = 0; v < torus.graph.vertex_count(); ++v) CHECK(back.nodes[v].isApprox(torus.nodes[v]));
  CHECK(to_text(back) == to_text(torus));

  const auto ring = parse_network("# ring\nedge 0 0 1 1 1\nedge 1 1 1 0 1\nnode 1 theta 3.141592653589793\n");
  CHECK(ring.nodes[0](0, 0) == 1.0);
  CHECK(ring.nodes[1](0, 0) == doctest::Approx(-1.0));

  CHECK_THROWS_AS(parse_network("edge 0 0 1 1 1\n"), ConfigError);                      // unbalanced
  CHECK_THROWS_AS(parse_network("edge 0 0 1 1 1\nedge 1 1 1 0 2\n"), ConfigError);       // channel out of range
  CHECK_THROWS_AS(parse_network("edge 0 0 0 1 1\nedge 1 1 1 0 1\n"), ConfigError);       // zero channel
  CHECK_THROWS_AS(parse_network("edge 0 0 1 1 1\nedge 1 1 1 0 1\nnode 0 theta 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_network("vertex 3\n"), ConfigError);
  CHECK(load_network("ring:1,-1", 0.0).nodes[1](0, 0) == -1.0);
  CHECK(load_network("manhattan-torus:4x4", 0.1).graph.edge_count() == 32);
}
