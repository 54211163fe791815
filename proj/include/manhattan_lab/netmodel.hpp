#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "manhattan_lab/dynamics.hpp"
#include "manhattan_lab/geometry.hpp"
#include "manhattan_lab/rng.hpp"

namespace mlab {

/// Directed edge of a network graph. Channels are 0-based here; the text
/// format uses 1-based labels.
struct NetworkEdge {
  int tail = 0;
  int tail_channel = 0;  // outgoing channel at the tail vertex
  int head = 0;
  int head_channel = 0;  // incoming channel at the head vertex
};

/// Finite directed graph with in-degree = out-degree at every vertex and
/// every channel used by exactly one edge.
class NetworkGraph {
 public:
  NetworkGraph() = default;
  NetworkGraph(int vertex_count, std::vector<NetworkEdge> edges);

  int vertex_count() const { return static_cast<int>(degree_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int degree(int v) const { return degree_[v]; }
  const NetworkEdge& edge(int e) const { return edges_[e]; }
  int out_edge(int v, int channel) const { return out_[offset_[v] + channel]; }
  int in_edge(int v, int channel) const { return in_[offset_[v] + channel]; }

 private:
  std::vector<NetworkEdge> edges_;
  std::vector<int> degree_;
  std::vector<int> offset_;
  std::vector<int> out_;
  std::vector<int> in_;
};

/// Graph plus one real orthogonal scattering matrix per vertex (rows are
/// outgoing channels, columns incoming).
struct NetworkModel {
  NetworkGraph graph;
  std::vector<Eigen::MatrixXd> nodes;
  std::vector<double> theta;                 // angle each node was built from
  std::vector<DirectedEdge> lattice_edges;   // filled by lattice builders only

  void validate() const;

  /// Edge index of a lattice edge; throws ConfigError when absent.
  int edge_of(const DirectedEdge& e) const;
};

/// [[cos, sin], [-sin, cos]].
Eigen::Matrix2d rotation_node(double theta);

/// Two vertices joined by e_1: 0 -> 1 and e_2: 1 -> 0, with 1x1 nodes
/// S = s_a at vertex 0 and s_b at vertex 1 (each +1 or -1).
NetworkModel make_ring(double s_a = 1.0, double s_b = 1.0);

/// Manhattan torus as a network. Vertex x * wy + y; edge 2v is the
/// horizontal outgoing edge of v, 2v + 1 the vertical. Channel 0 is
/// horizontal and 1 vertical on both sides, so S_00 = S_11 = cos(theta) is
/// straight passage and the off-diagonal entries are turns.
NetworkModel make_manhattan_torus(int wx, int wy, double theta);

/// Plain-text edge list:
///   edge <id> <tail-vertex> <tail-out-channel> <head-vertex> <head-in-channel>
///   node <vertex> theta <radians>
/// Ids and vertices are 0-based and dense; channels are 1-based. Degree-2
/// nodes take rotation_node(theta); degree-1 nodes take cos(theta), which
/// must be +1 or -1. Nodes without a line get the identity.
NetworkModel parse_network(std::string_view text);
std::string to_text(const NetworkModel& model);

/// "ring", "ring:<s_a>,<s_b>", "manhattan-torus:<wx>x<wy>" (theta passed
/// separately), or a path to a network file.
NetworkModel load_network(std::string_view source, double theta);

/// Dense 2M x 2M one-step evolution U_node * U_edge; index 2e + alpha.
Eigen::MatrixXcd build_step_unitary(const NetworkModel& model, std::span<const Eigen::Matrix2cd> disorder);

/// max |U^dagger U - I|.
double unitarity_residual(const Eigen::MatrixXcd& u);

/// Haar SU(2) disorder for every edge, drawn in edge order from `stream`.
std::vector<Eigen::Matrix2cd> draw_disorder(const NetworkModel& model, RandomStream& stream);

struct GreenEstimate {
  std::complex<double> value;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::complex<double> z;
  std::uint64_t rejected = 0;  // ill-conditioned solves that were redrawn
};

/// Monte Carlo estimate of E[Tr_spin G_{e,e}(z)], G = (1 - zU)^{-1}. Sample i
/// draws its disorder from lane i of `seed`.
GreenEstimate averaged_green(const NetworkModel& model, int edge, std::complex<double> z, std::uint64_t samples,
                             std::uint64_t seed, unsigned workers = 0);

enum class TrailKind { closed, open };

struct NodeWeight {
  int vertex = 0;
  int visits = 0;  // k_v
  double weight = 1.0;
};

struct Trail {
  std::vector<int> edges;
  TrailKind kind = TrailKind::closed;
  double weight = 1.0;  // W(gamma)
  std::vector<NodeWeight> node_weights;

  int length() const { return static_cast<int>(edges.size()); }
};

inline constexpr int kMaxTrailLength = 24;

enum class ExplorationOrder { ascending, descending };

/// Per-visit channel pair at a vertex, in visit order.
struct ChannelVisit {
  int in_channel;
  int out_channel;
};

/// sgn(pi_v) * det S[O_v, I_v] for the visits of one trail at one vertex.
double node_weight(const Eigen::MatrixXd& s, std::span<const ChannelVisit> visits);

/// Depth-first enumeration of edge-distinct trails. Closed trails list the
/// root once and include the closing transition back into it; open trails
/// run from root to target. Lengths count edges and are capped by max_len.
std::vector<Trail> enumerate_trails(const NetworkModel& model, int root, TrailKind kind, int max_len,
                                    int target = -1, ExplorationOrder order = ExplorationOrder::ascending);

struct TrailSum {
  std::complex<double> value;
  std::vector<std::uint64_t> count_by_length;  // index = |gamma|
  std::vector<double> weight_by_length;
};

/// Sum over closed trails rooted at `root` of W(gamma) z^|gamma|; the empty
/// trail is excluded.
TrailSum trail_sum(const NetworkModel& model, int root, std::complex<double> z, int max_len);

/// 2 * sum of W over open trails from `from` to `to`.
double open_trail_conductance(const NetworkModel& model, int from, int to, int max_len);

/// Least-squares fit of E[Tr G(z)] ~ a + b * sum W(gamma) z^(s|gamma|).
struct CalibrationFit {
  int s = 0;
  double a = 0.0;
  double b = 0.0;
  double a_se = 0.0;
  double b_se = 0.0;
  double chi2 = 0.0;
  double max_std_residual = 0.0;
};

struct CalibrationPoint {
  double z = 0.0;
  GreenEstimate measured;
};

struct Calibration {
  std::vector<CalibrationPoint> points;
  std::vector<CalibrationFit> fits;  // one per candidate s
  CalibrationFit best;
  bool accepted = false;
  double tolerance = 0.0;

  /// a + b * trail series of `model` at `z` with the fitted exponent.
  double predict(const NetworkModel& model, int root, double z, int max_len) const;
};

struct CalibrationOptions {
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  int max_len = 8;
  double tolerance = 4.0;  // max |standardized residual| for acceptance
};

/// Fit (a, b, s) for s in {1, 2} against measurements at `zs` (at least four
/// points in (0, 0.9)). `accepted` is false when no candidate fits.
Calibration calibrate_identity(const NetworkModel& model, int root, std::span<const double> zs,
                               const CalibrationOptions& options);

/// Classical history-dependent walk on a degree-2 network: the first arrival
/// at a vertex picks the exit with probability |S_ij|^2, later arrivals take
/// the unused exit. Stops when the start edge would be re-entered.
struct WalkResult {
  TraceStatus status = TraceStatus::step_capped;
  std::uint64_t length = 0;  // closure length when closed
  std::vector<int> edges;
};

WalkResult classical_walk(const NetworkModel& model, int start, RandomStream& stream, std::uint64_t max_steps);

/// Same walk on an infinite or periodic Manhattan lattice, where every vertex
/// shares the angle theta.
TrajectoryRecord classical_walk_lattice(double theta, const Geometry& g, const DirectedEdge& start,
                                        RandomStream& stream, std::uint64_t max_steps);

/// Exact probability that the walk occupies each edge at times 0..t_max,
/// by enumeration of first-visit choices. After closure the walk repeats its
/// loop. Rows are times, columns edges.
Eigen::MatrixXd exact_walk_occupancy(const NetworkModel& model, int start, int t_max);

struct DynamicCorrelation {
  int start = 0;
  int t_max = 0;
  std::uint64_t samples = 0;
  Eigen::MatrixXd mean;       // (t_max + 1) x M
  Eigen::MatrixXd std_error;  // same shape
};

/// (1/2) E[sum_{alpha,beta} |<e', beta| U^t |e, alpha>|^2] for every edge e'
/// and t = 0..t_max.
DynamicCorrelation dynamic_correlator(const NetworkModel& model, int start, int t_max, std::uint64_t samples,
                                      std::uint64_t seed, unsigned workers = 0);

}  // namespace mlab
