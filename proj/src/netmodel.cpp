#include "manhattan_lab/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "manhattan_lab/errors.hpp"
#include "manhattan_lab/format.hpp"
#include "manhattan_lab/parallel.hpp"
#include "manhattan_lab/su2.hpp"

namespace mlab {

// ---------------------------------------------------------------------------
// Graph and builders

NetworkGraph::NetworkGraph(int vertex_count, std::vector<NetworkEdge> edges) : edges_(std::move(edges)) {
  if (vertex_count < 1) throw ConfigError("network needs at least one vertex");
  std::vector<int> out_deg(static_cast<std::size_t>(vertex_count), 0);
  std::vector<int> in_deg(static_cast<std::size_t>(vertex_count), 0);
  for (const auto& e : edges_) {
    if (e.tail < 0 || e.tail >= vertex_count || e.head < 0 || e.head >= vertex_count) {
      throw ConfigError("edge endpoint outside the vertex range");
    }
    ++out_deg[e.tail];
    ++in_deg[e.head];
  }
  degree_.resize(static_cast<std::size_t>(vertex_count));
  offset_.resize(static_cast<std::size_t>(vertex_count) + 1, 0);
  for (int v = 0; v < vertex_count; ++v) {
    if (out_deg[v] != in_deg[v]) {
      throw ConfigError("unbalanced vertex " + std::to_string(v) + ": in-degree " + std::to_string(in_deg[v]) +
                        ", out-degree " + std::to_string(out_deg[v]));
    }
    degree_[v] = out_deg[v];
    offset_[v + 1] = offset_[v] + out_deg[v];
  }
  out_.assign(static_cast<std::size_t>(offset_.back()), -1);
  in_.assign(static_cast<std::size_t>(offset_.back()), -1);
  for (int id = 0; id < edge_count(); ++id) {
    const auto& e = edges_[id];
    if (e.tail_channel < 0 || e.tail_channel >= degree_[e.tail] || e.head_channel < 0 ||
        e.head_channel >= degree_[e.head]) {
      throw ConfigError("edge " + std::to_string(id) + " uses a channel outside its vertex degree");
    }
    int& out_slot = out_[offset_[e.tail] + e.tail_channel];
    int& in_slot = in_[offset_[e.head] + e.head_channel];
    if (out_slot != -1 || in_slot != -1) throw ConfigError("edge " + std::to_string(id) + " reuses a channel");
    out_slot = id;
    in_slot = id;
  }
}

void NetworkModel::validate() const {
  if (static_cast<int>(nodes.size()) != graph.vertex_count()) throw ConfigError("one node matrix per vertex required");
  for (int v = 0; v < graph.vertex_count(); ++v) {
    const auto& s = nodes[v];
    const int n = graph.degree(v);
    if (s.rows() != n || s.cols() != n) throw ConfigError("node matrix size must match vertex degree");
    const double residual = (s.transpose() * s - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (residual > 1e-12) throw ConfigError("node matrix at vertex " + std::to_string(v) + " is not orthogonal");
  }
}

int NetworkModel::edge_of(const DirectedEdge& e) const {
  const auto it = std::ranges::find(lattice_edges, e);
  if (it == lattice_edges.end()) throw ConfigError("edge " + to_string(e) + " is not part of this network");
  return static_cast<int>(it - lattice_edges.begin());
}

Eigen::Matrix2d rotation_node(double theta) {
  Eigen::Matrix2d s;
  s << std::cos(theta), std::sin(theta),
      -std::sin(theta), std::cos(theta);
  return s;
}

NetworkModel make_ring(double s_a, double s_b) {
  if (std::abs(std::abs(s_a) - 1.0) > 1e-12 || std::abs(std::abs(s_b) - 1.0) > 1e-12) {
    throw ConfigError("ring node entries must be +1 or -1");
  }
  NetworkModel m;
  m.graph = NetworkGraph(2, {{0, 0, 1, 0}, {1, 0, 0, 0}});
  m.nodes = {Eigen::MatrixXd::Constant(1, 1, s_a), Eigen::MatrixXd::Constant(1, 1, s_b)};
  m.theta = {s_a > 0 ? 0.0 : std::numbers::pi, s_b > 0 ? 0.0 : std::numbers::pi};
  return m;
}

NetworkModel make_manhattan_torus(int wx, int wy, double theta) {
  const Geometry g = Geometry::torus(wx, wy);
  if (!g.supports_manhattan()) throw ConfigError("manhattan requires even width");
  auto vertex = [wy](Point p) { return static_cast<int>(p.x) * wy + static_cast<int>(p.y); };

  NetworkModel m;
  std::vector<NetworkEdge> edges;
  edges.reserve(static_cast<std::size_t>(2 * wx * wy));
  for (int x = 0; x < wx; ++x) {
    for (int y = 0; y < wy; ++y) {
      const auto out = manhattan_outgoing({x, y}, g);
      for (int c = 0; c < 2; ++c) {
        const DirectedEdge e = c == 0 ? out.horizontal : out.vertical;
        edges.push_back({vertex(e.tail), c, vertex(advance(e, g)), c});
        m.lattice_edges.push_back(e);
      }
    }
  }
  m.graph = NetworkGraph(wx * wy, std::move(edges));
  m.nodes.assign(static_cast<std::size_t>(wx * wy), rotation_node(theta));
  m.theta.assign(static_cast<std::size_t>(wx * wy), theta);
  return m;
}

NetworkModel parse_network(std::string_view text) {
  struct RawEdge {
    int id;
    NetworkEdge edge;
  };
  std::vector<RawEdge> raw;
  std::vector<std::pair<int, double>> thetas;
  int max_vertex = -1;

  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string keyword;
    if (!(fields >> keyword)) continue;
    auto fail = [&](const std::string& why) {
      return ConfigError("network line " + std::to_string(line_no) + ": " + why);
    };
    if (keyword == "edge") {
      int id, tail, tail_ch, head, head_ch;
      if (!(fields >> id >> tail >> tail_ch >> head >> head_ch)) throw fail("expected edge <id> <tail> <out-ch> <head> <in-ch>");
      if (tail_ch < 1 || head_ch < 1) throw fail("channels are 1-based");
      raw.push_back({id, {tail, tail_ch - 1, head, head_ch - 1}});
      max_vertex = std::max({max_vertex, tail, head});
    } else if (keyword == "node") {
      int v;
      std::string word;
      double theta;
      if (!(fields >> v >> word >> theta) || word != "theta") throw fail("expected node <vertex> theta <radians>");
      thetas.emplace_back(v, theta);
      max_vertex = std::max(max_vertex, v);
    } else {
      throw fail("unknown keyword '" + keyword + "'");
    }
    std::string extra;
    if (fields >> extra) throw fail("trailing text '" + extra + "'");
  }

  std::ranges::sort(raw, {}, &RawEdge::id);
  std::vector<NetworkEdge> edges;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (raw[k].id != static_cast<int>(k)) throw ConfigError("edge ids must be 0..M-1 without gaps");
    edges.push_back(raw[k].edge);
  }

  NetworkModel m;
  m.graph = NetworkGraph(max_vertex + 1, std::move(edges));
  m.nodes.resize(static_cast<std::size_t>(m.graph.vertex_count()));
  m.theta.assign(static_cast<std::size_t>(m.graph.vertex_count()), 0.0);
  for (int v = 0; v < m.graph.vertex_count(); ++v) {
    const int n = m.graph.degree(v);
    m.nodes[v] = Eigen::MatrixXd::Identity(n, n);
  }
  for (const auto& [v, theta] : thetas) {
    const int n = m.graph.degree(v);
    m.theta[v] = theta;
    if (n == 2) {
      m.nodes[v] = rotation_node(theta);
    } else if (n == 1) {
      const double c = std::cos(theta);
      if (std::abs(std::abs(c) - 1.0) > 1e-12) throw ConfigError("degree-1 node needs theta 0 or pi");
      m.nodes[v] = Eigen::MatrixXd::Constant(1, 1, c > 0 ? 1.0 : -1.0);
    } else {
      throw ConfigError("theta is only defined for degree-1 and degree-2 nodes");
    }
  }
  m.validate();
  return m;
}

std::string to_text(const NetworkModel& model) {
  std::string out;
  for (int id = 0; id < model.graph.edge_count(); ++id) {
    const auto& e = model.graph.edge(id);
    out += "edge " + std::to_string(id) + " " + std::to_string(e.tail) + " " + std::to_string(e.tail_channel + 1) +
           " " + std::to_string(e.head) + " " + std::to_string(e.head_channel + 1) + "\n";
  }
  for (int v = 0; v < model.graph.vertex_count(); ++v) {
    out += "node " + std::to_string(v) + " theta " + format_double(model.theta[v]) + "\n";
  }
  return out;
}

NetworkModel load_network(std::string_view source, double theta) {
  if (source == "ring") return make_ring();
  if (source.starts_with("ring:")) {
    const std::string rest(source.substr(5));
    const auto comma = rest.find(',');
    if (comma == std::string::npos) throw ConfigError("expected ring:<s_a>,<s_b>");
    try {
      return make_ring(std::stod(rest.substr(0, comma)), std::stod(rest.substr(comma + 1)));
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const ConfigError*>(&e)) throw;
      throw ConfigError("expected ring:<s_a>,<s_b>");
    }
  }
  if (source.starts_with("manhattan-torus:")) {
    const Geometry g = Geometry::parse("torus:" + std::string(source.substr(16)));
    return make_manhattan_torus(static_cast<int>(g.torus_x()), static_cast<int>(g.torus_y()), theta);
  }
  std::ifstream file{std::string(source)};
  if (!file) throw ConfigError("cannot open network file '" + std::string(source) + "'");
  std::ostringstream text;
  text << file.rdbuf();
  return parse_network(text.str());
}

// ---------------------------------------------------------------------------
// Unitary evolution

Eigen::MatrixXcd build_step_unitary(const NetworkModel& model, std::span<const Eigen::Matrix2cd> disorder) {
  const auto& g = model.graph;
  const int m = g.edge_count();
  if (static_cast<int>(disorder.size()) != m) throw ConfigError("one disorder matrix per edge required");
  for (const auto& u : disorder) {
    if ((u.adjoint() * u - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 1e-10) {
      throw ConfigError("edge disorder matrix is not unitary");
    }
  }
  // Column block of incoming edge e: S_ij U_e placed in the row block of
  // the outgoing edge on channel i.
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
  for (int e = 0; e < m; ++e) {
    const auto& edge = g.edge(e);
    const auto& s = model.nodes[edge.head];
    for (int i = 0; i < g.degree(edge.head); ++i) {
      const double sij = s(i, edge.head_channel);
      if (sij == 0.0) continue;
      u.block<2, 2>(2 * g.out_edge(edge.head, i), 2 * e) = sij * disorder[e];
    }
  }
  return u;
}

double unitarity_residual(const Eigen::MatrixXcd& u) {
  return (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

std::vector<Eigen::Matrix2cd> draw_disorder(const NetworkModel& model, RandomStream& stream) {
  std::vector<Eigen::Matrix2cd> out(static_cast<std::size_t>(model.graph.edge_count()));
  for (auto& u : out) u = haar_su2(stream);
  return out;
}

namespace {

constexpr std::uint64_t kBlock = 512;

// Running mean and sum of squared deviations; merged in a fixed order so
// estimates are bit-identical for every worker count.
template <class Array>
struct Moments {
  double n = 0.0;
  Array mean;
  Eigen::ArrayXd m2;

  void add(const Array& x) {
    if (n == 0.0) {
      mean = Array::Zero(x.size());
      m2 = Eigen::ArrayXd::Zero(x.size());
    }
    n += 1.0;
    const Array delta = x - mean;
    mean += delta / n;
    m2 += (delta.conjugate() * (x - mean)).real();
  }

  void merge(const Moments& other) {
    if (other.n == 0.0) return;
    if (n == 0.0) {
      *this = other;
      return;
    }
    const double total = n + other.n;
    const Array delta = other.mean - mean;
    mean += delta * (other.n / total);
    m2 += other.m2 + delta.abs2() * (n * other.n / total);
    n = total;
  }

  Eigen::ArrayXd std_error() const {
    if (n < 2.0) return Eigen::ArrayXd::Zero(mean.size());
    return (m2 / (n * (n - 1.0))).sqrt();
  }
};

template <class Array, class SampleFn>
Moments<Array> block_moments(std::uint64_t samples, unsigned workers, SampleFn&& sample) {
  const std::uint64_t blocks = (samples + kBlock - 1) / kBlock;
  auto partial = parallel_map<Moments<Array>>(blocks, workers, [&](std::size_t b) {
    Moments<Array> acc;
    const std::uint64_t end = std::min<std::uint64_t>(samples, (b + 1) * kBlock);
    for (std::uint64_t i = b * kBlock; i < end; ++i) acc.add(sample(i));
    return acc;
  });
  Moments<Array> total;
  for (const auto& p : partial) total.merge(p);
  return total;
}

}  // namespace

GreenEstimate averaged_green(const NetworkModel& model, int edge, std::complex<double> z, std::uint64_t samples,
                             std::uint64_t seed, unsigned workers) {
  model.validate();
  const int m = model.graph.edge_count();
  if (m > 512) throw ConfigError("dense green solves are limited to 512 edges");
  if (edge < 0 || edge >= m) throw ConfigError("edge index out of range");
  if (std::abs(z) > 0.9) throw ConfigError("averaged_green requires |z| <= 0.9");
  if (samples < 1000) throw ConfigError("averaged_green requires at least 1000 samples");

  std::vector<std::uint64_t> rejected_by_block((samples + kBlock - 1) / kBlock, 0);
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(2 * m, 2);
  rhs(2 * edge, 0) = 1.0;
  rhs(2 * edge + 1, 1) = 1.0;

  const auto moments = block_moments<Eigen::ArrayXcd>(samples, workers, [&](std::uint64_t i) {
    RandomStream stream(seed, i);
    for (int attempt = 0;; ++attempt) {
      const auto disorder = draw_disorder(model, stream);
      const Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(2 * m, 2 * m) - z * build_step_unitary(model, disorder);
      const Eigen::MatrixXcd x = a.partialPivLu().solve(rhs);
      if ((a * x - rhs).cwiseAbs().maxCoeff() <= 1e-8) {
        Eigen::ArrayXcd value(1);
        value(0) = x(2 * edge, 0) + x(2 * edge + 1, 1);
        return value;
      }
      ++rejected_by_block[i / kBlock];
      if (attempt > 100) throw ContractViolation("resolvent solve keeps failing the residual check");
    }
  });

  GreenEstimate est;
  est.value = moments.mean(0);
  est.std_error = moments.std_error()(0);
  est.samples = samples;
  est.z = z;
  for (auto r : rejected_by_block) est.rejected += r;
  return est;
}

// ---------------------------------------------------------------------------
// Trails

double node_weight(const Eigen::MatrixXd& s, std::span<const ChannelVisit> visits) {
  const int k = static_cast<int>(visits.size());
  if (k == 0) return 1.0;
  std::vector<int> in_set, out_set;
  for (const auto& v : visits) {
    in_set.push_back(v.in_channel);
    out_set.push_back(v.out_channel);
  }
  std::ranges::sort(in_set);
  std::ranges::sort(out_set);

  // perm[r] = position in O of the exit used on the visit entering via I[r].
  std::vector<int> perm(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) {
    const auto visit = std::ranges::find(visits, in_set[r], &ChannelVisit::in_channel);
    perm[r] = static_cast<int>(std::ranges::lower_bound(out_set, visit->out_channel) - out_set.begin());
  }
  int sign = 1;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      if (perm[a] > perm[b]) sign = -sign;
    }
  }
  Eigen::MatrixXd sub(k, k);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) sub(r, c) = s(out_set[r], in_set[c]);
  }
  return sign * sub.determinant();
}

namespace {

void weigh_trail(const NetworkModel& model, Trail& trail) {
  const auto& g = model.graph;
  std::vector<std::vector<ChannelVisit>> visits(static_cast<std::size_t>(g.vertex_count()));
  const std::size_t len = trail.edges.size();
  const std::size_t transitions = trail.kind == TrailKind::closed ? len : len - 1;
  for (std::size_t k = 0; k < transitions; ++k) {
    const auto& from = g.edge(trail.edges[k]);
    const auto& to = g.edge(trail.edges[(k + 1) % len]);
    visits[from.head].push_back({from.head_channel, to.tail_channel});
  }
  trail.weight = 1.0;
  trail.node_weights.clear();
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (visits[v].empty()) continue;
    const double w = node_weight(model.nodes[v], visits[v]);
    trail.node_weights.push_back({v, static_cast<int>(visits[v].size()), w});
    trail.weight *= w;
  }
}

}  // namespace

std::vector<Trail> enumerate_trails(const NetworkModel& model, int root, TrailKind kind, int max_len, int target,
                                    ExplorationOrder order) {
  model.validate();
  const auto& g = model.graph;
  if (max_len > kMaxTrailLength) {
    throw ConfigError("max_len " + std::to_string(max_len) + " exceeds the guard " + std::to_string(kMaxTrailLength));
  }
  if (root < 0 || root >= g.edge_count()) throw ConfigError("root edge out of range");
  if (kind == TrailKind::open && (target < 0 || target >= g.edge_count())) throw ConfigError("target edge out of range");

  std::vector<Trail> out;
  if (max_len < 1) return out;

  std::vector<int> path{root};
  std::vector<std::uint8_t> used(static_cast<std::size_t>(g.edge_count()), 0);
  used[root] = 1;

  auto emit = [&] {
    Trail t;
    t.edges = path;
    t.kind = kind;
    weigh_trail(model, t);
    out.push_back(std::move(t));
  };

  auto dfs = [&](auto&& self) -> void {
    if (kind == TrailKind::open && path.back() == target) {
      emit();
      return;
    }
    const int v = g.edge(path.back()).head;
    const int n = g.degree(v);
    for (int c = 0; c < n; ++c) {
      const int channel = order == ExplorationOrder::ascending ? c : n - 1 - c;
      const int next = g.out_edge(v, channel);
      if (kind == TrailKind::closed && next == root) {
        emit();
        continue;
      }
      if (used[next] || static_cast<int>(path.size()) >= max_len) continue;
      used[next] = 1;
      path.push_back(next);
      self(self);
      path.pop_back();
      used[next] = 0;
    }
  };
  dfs(dfs);
  return out;
}

TrailSum trail_sum(const NetworkModel& model, int root, std::complex<double> z, int max_len) {
  TrailSum sum;
  sum.count_by_length.assign(static_cast<std::size_t>(std::max(max_len, 0)) + 1, 0);
  sum.weight_by_length.assign(sum.count_by_length.size(), 0.0);
  for (const auto& t : enumerate_trails(model, root, TrailKind::closed, max_len)) {
    ++sum.count_by_length[t.length()];
    sum.weight_by_length[t.length()] += t.weight;
    sum.value += t.weight * std::pow(z, t.length());
  }
  return sum;
}

double open_trail_conductance(const NetworkModel& model, int from, int to, int max_len) {
  double total = 0.0;
  for (const auto& t : enumerate_trails(model, from, TrailKind::open, max_len, to)) total += t.weight;
  return 2.0 * total;
}

// ---------------------------------------------------------------------------
// Calibration

namespace {

double trail_series(const std::vector<double>& weight_by_length, double z, int s) {
  double total = 0.0;
  for (std::size_t len = 1; len < weight_by_length.size(); ++len) {
    total += weight_by_length[len] * std::pow(z, static_cast<double>(s) * static_cast<double>(len));
  }
  return total;
}

}  // namespace

double Calibration::predict(const NetworkModel& model, int root, double z, int max_len) const {
  const auto sum = trail_sum(model, root, 0.0, max_len);
  return best.a + best.b * trail_series(sum.weight_by_length, z, best.s);
}

Calibration calibrate_identity(const NetworkModel& model, int root, std::span<const double> zs,
                               const CalibrationOptions& options) {
  if (zs.size() < 4) throw ConfigError("calibration needs at least four z values");
  for (double z : zs) {
    if (!(z > 0.0 && z < 0.9)) throw ConfigError("calibration z values must lie in (0, 0.9)");
  }
  Calibration cal;
  cal.tolerance = options.tolerance;
  for (std::size_t k = 0; k < zs.size(); ++k) {
    cal.points.push_back({zs[k], averaged_green(model, root, zs[k], options.samples, options.seed + k, options.workers)});
  }
  const auto sum = trail_sum(model, root, 0.0, options.max_len);

  const int n = static_cast<int>(zs.size());
  Eigen::VectorXd y(n), w(n);
  for (int k = 0; k < n; ++k) {
    y(k) = cal.points[k].measured.value.real();
    const double se = std::max(cal.points[k].measured.std_error, 1e-15);
    w(k) = 1.0 / (se * se);
  }
  double best_chi2 = std::numeric_limits<double>::infinity();
  for (int s : {1, 2}) {
    Eigen::MatrixXd x(n, 2);
    for (int k = 0; k < n; ++k) {
      x(k, 0) = 1.0;
      x(k, 1) = trail_series(sum.weight_by_length, zs[k], s);
    }
    const Eigen::Matrix2d normal = x.transpose() * w.asDiagonal() * x;
    CalibrationFit fit;
    fit.s = s;
    if (std::abs(normal.determinant()) < 1e-300) {
      fit.chi2 = std::numeric_limits<double>::infinity();
      fit.max_std_residual = std::numeric_limits<double>::infinity();
      cal.fits.push_back(fit);
      continue;
    }
    const Eigen::Matrix2d cov = normal.inverse();
    const Eigen::Vector2d beta = cov * (x.transpose() * w.asDiagonal() * y);
    fit.a = beta(0);
    fit.b = beta(1);
    fit.a_se = std::sqrt(cov(0, 0));
    fit.b_se = std::sqrt(cov(1, 1));
    const Eigen::ArrayXd standardized = ((y - x * beta).array() * w.array().sqrt());
    fit.chi2 = standardized.square().sum();
    fit.max_std_residual = standardized.abs().maxCoeff();
    cal.fits.push_back(fit);
    if (fit.chi2 < best_chi2) {
      best_chi2 = fit.chi2;
      cal.best = fit;
    }
  }
  cal.accepted = cal.best.s != 0 && cal.best.max_std_residual <= options.tolerance;
  return cal;
}

// ---------------------------------------------------------------------------
// Classical walks

WalkResult classical_walk(const NetworkModel& model, int start, RandomStream& stream, std::uint64_t max_steps) {
  const auto& g = model.graph;
  if (start < 0 || start >= g.edge_count()) throw ConfigError("start edge out of range");
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.degree(v) > 2) throw ConfigError("classical walk needs vertex degrees of at most 2");
  }
  std::vector<std::uint8_t> arrived(static_cast<std::size_t>(g.vertex_count()), 0);
  std::vector<std::uint8_t> used(static_cast<std::size_t>(g.edge_count()), 0);

  WalkResult result;
  result.edges.push_back(start);
  int cur = start;
  while (result.length < max_steps) {
    const auto& e = g.edge(cur);
    const int v = e.head;
    int next = -1;
    if (!arrived[v]) {
      arrived[v] = 1;
      const double u = stream.uniform01();
      double acc = 0.0;
      const int n = g.degree(v);
      for (int i = 0; i < n; ++i) {
        const double sij = model.nodes[v](i, e.head_channel);
        acc += sij * sij;
        if (u < acc || i == n - 1) {
          next = g.out_edge(v, i);
          break;
        }
      }
    } else {
      for (int i = 0; i < g.degree(v); ++i) {
        const int cand = g.out_edge(v, i);
        if (!used[cand]) {
          if (next != -1) throw ContractViolation("revisit left more than one unused exit");
          next = cand;
        }
      }
      if (next == -1) throw ContractViolation("revisit found no unused exit");
    }
    ++result.length;
    if (next == start) {
      result.status = TraceStatus::closed;
      return result;
    }
    if (used[next]) throw ContractViolation("walk re-entered a used edge");
    used[next] = 1;
    result.edges.push_back(next);
    cur = next;
  }
  result.status = TraceStatus::step_capped;
  return result;
}

TrajectoryRecord classical_walk_lattice(double theta, const Geometry& g, const DirectedEdge& start_edge,
                                        RandomStream& stream, std::uint64_t max_steps) {
  if (!g.supports_manhattan()) throw ConfigError("manhattan requires even width");
  const DirectedEdge start{g.reduce(start_edge.tail), start_edge.dir};
  if (!is_manhattan_valid(start)) throw ConfigError("start edge violates the Manhattan orientation");
  const double turn = std::sin(theta) * std::sin(theta);

  // Per vertex: bit 0 arrived, bit 1 horizontal exit used, bit 2 vertical exit used.
  std::unordered_map<Point, std::uint8_t> marks;
  marks.reserve(256);
  TrajectoryRecord record;
  record.start = start;
  record.max_abs_x = std::llabs(start.tail.x);

  DirectedEdge cur = start;
  while (record.steps_taken < max_steps) {
    const Point v = advance(cur, g);
    const auto out = manhattan_outgoing(v, g);
    std::uint8_t& mark = marks[v];
    bool horizontal;
    if ((mark & 1) == 0) {
      mark |= 1;
      const bool turn_here = stream.uniform01() < turn;
      horizontal = is_horizontal(cur.dir) != turn_here;
    } else {
      const bool h_used = (mark & 2) != 0;
      const bool v_used = (mark & 4) != 0;
      if (h_used == v_used) throw ContractViolation("revisit without exactly one unused exit");
      horizontal = v_used;
    }
    const DirectedEdge next = horizontal ? out.horizontal : out.vertical;
    ++record.steps_taken;
    if (next == start) {
      record.status = TraceStatus::closed;
      record.period = record.steps_taken;
      return record;
    }
    mark |= horizontal ? 2 : 4;
    record.max_abs_x = std::max<std::int64_t>(record.max_abs_x, std::llabs(next.tail.x));
    cur = next;
  }
  record.status = TraceStatus::step_capped;
  return record;
}

Eigen::MatrixXd exact_walk_occupancy(const NetworkModel& model, int start, int t_max) {
  const auto& g = model.graph;
  if (start < 0 || start >= g.edge_count()) throw ConfigError("start edge out of range");
  if (t_max < 0 || t_max > 64) throw ConfigError("t_max must lie in [0, 64]");
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.degree(v) > 2) throw ConfigError("classical walk needs vertex degrees of at most 2");
  }
  Eigen::MatrixXd occ = Eigen::MatrixXd::Zero(t_max + 1, g.edge_count());

  // first_out[v] = exit channel chosen at the first arrival, -1 if none yet.
  auto fill = [&](const std::vector<int>& path, std::size_t period, double prob) {
    for (int t = 0; t <= t_max; ++t) {
      const std::size_t idx = period == 0 ? static_cast<std::size_t>(t) : static_cast<std::size_t>(t) % period;
      occ(t, path[idx]) += prob;
    }
  };
  auto explore = [&](auto&& self, std::vector<int> path, std::vector<int> first_out, double prob) -> void {
    while (path.size() <= static_cast<std::size_t>(t_max)) {
      const auto& e = g.edge(path.back());
      const int v = e.head;
      if (first_out[v] < 0) {
        for (int i = 0; i < g.degree(v); ++i) {
          const double sij = model.nodes[v](i, e.head_channel);
          if (sij == 0.0) continue;
          auto fo = first_out;
          fo[v] = i;
          const int next = g.out_edge(v, i);
          if (next == start) {
            fill(path, path.size(), prob * sij * sij);
          } else {
            auto extended = path;
            extended.push_back(next);
            self(self, std::move(extended), std::move(fo), prob * sij * sij);
          }
        }
        return;
      }
      const int channel = g.degree(v) == 2 ? 1 - first_out[v] : first_out[v];
      const int next = g.out_edge(v, channel);
      if (next == start) {
        fill(path, path.size(), prob);
        return;
      }
      path.push_back(next);
    }
    fill(path, 0, prob);
  };
  explore(explore, std::vector<int>{start}, std::vector<int>(static_cast<std::size_t>(g.vertex_count()), -1), 1.0);
  return occ;
}

DynamicCorrelation dynamic_correlator(const NetworkModel& model, int start, int t_max, std::uint64_t samples,
                                      std::uint64_t seed, unsigned workers) {
  model.validate();
  const auto& g = model.graph;
  const int m = g.edge_count();
  if (start < 0 || start >= m) throw ConfigError("start edge out of range");
  if (t_max < 0 || t_max > 64) throw ConfigError("t must lie in [0, 64]");
  if (samples < 1000) throw ConfigError("dynamic_correlator requires at least 1000 samples");

  const auto moments = block_moments<Eigen::ArrayXd>(samples, workers, [&](std::uint64_t i) {
    RandomStream stream(seed, i);
    const auto disorder = draw_disorder(model, stream);
    Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(2 * m, 2);
    psi(2 * start, 0) = 1.0;
    psi(2 * start + 1, 1) = 1.0;
    Eigen::MatrixXcd next(2 * m, 2);
    Eigen::ArrayXd occupancy(static_cast<Eigen::Index>(t_max + 1) * m);
    for (int t = 0;; ++t) {
      for (int e = 0; e < m; ++e) occupancy(t * m + e) = 0.5 * psi.block<2, 2>(2 * e, 0).squaredNorm();
      if (t == t_max) break;
      next.setZero();
      for (int e = 0; e < m; ++e) {
        const auto& edge = g.edge(e);
        const Eigen::Matrix2cd moved = disorder[e] * psi.block<2, 2>(2 * e, 0);
        const auto& s = model.nodes[edge.head];
        for (int ch = 0; ch < g.degree(edge.head); ++ch) {
          const double sij = s(ch, edge.head_channel);
          if (sij != 0.0) next.block<2, 2>(2 * g.out_edge(edge.head, ch), 0) += sij * moved;
        }
      }
      psi.swap(next);
    }
    return occupancy;
  });

  DynamicCorrelation out;
  out.start = start;
  out.t_max = t_max;
  out.samples = samples;
  const Eigen::ArrayXd se = moments.std_error();
  out.mean.resize(t_max + 1, m);
  out.std_error.resize(t_max + 1, m);
  for (int t = 0; t <= t_max; ++t) {
    for (int e = 0; e < m; ++e) {
      out.mean(t, e) = moments.mean(t * m + e);
      out.std_error(t, e) = se(t * m + e);
    }
  }
  return out;
}

}  // namespace mlab
