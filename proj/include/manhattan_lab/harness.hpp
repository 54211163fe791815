#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "manhattan_lab/cutpat.hpp"
#include "manhattan_lab/dynamics.hpp"
#include "manhattan_lab/environment.hpp"
#include "manhattan_lab/netmodel.hpp"
#include "manhattan_lab/parallel.hpp"
#include "manhattan_lab/rng.hpp"

namespace mlab {

inline constexpr const char* kVersion = MANHATTAN_LAB_VERSION;

enum class ExperimentKind {
  closure_sweep,
  escape_profile,
  transmission,
  parity_scan,
  cardy_green,
  cardy_dynamic,
  walk_vs_pinball,
};

std::string to_string(ExperimentKind k);

/// Everything an experiment needs. Fields that a kind does not use are left
/// at their defaults and omitted from canonical().
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::closure_sweep;
  Model model = Model::manhattan;
  Geometry geometry = Geometry::plane();
  std::vector<double> densities{0.5};
  double ne_fraction = 0.5;
  std::uint64_t replicas = 1000;
  std::uint64_t seed = 1;
  std::uint64_t max_steps = 1'000'000;

  // closure-sweep: fixed start, or random starts on column 0 when empty.
  std::optional<DirectedEdge> start = DirectedEdge{{0, 0}, Direction::E};

  std::vector<std::int64_t> lengths;  // escape-profile L grid, transmission row grid
  std::vector<int> half_widths;       // transmission n grid (width 2n)
  std::int64_t max_length = 64;       // transmission composition depth

  int scan_width = 3;  // parity-scan
  int scan_length = 4;

  std::string network = "ring";  // cardy-*
  double theta = 0.0;
  int edge = 0;
  std::vector<double> zs{0.3, 0.5};
  int max_len = 8;
  int t_max = 12;

  void validate() const;

  /// ';'-separated key=value list of the fields used by `kind`; excludes the
  /// seed, which the provenance line reports separately.
  std::string canonical() const;
};

/// Column-oriented result: header plus rows of already formatted cells.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Header row, provenance comment, then the data rows.
void write_csv(std::ostream& out, const ResultTable& table, const ExperimentSpec& spec);
std::string provenance_line(const ExperimentSpec& spec);

/// Lane of replica j at grid point k.
constexpr std::uint64_t replica_lane(std::uint64_t point, std::uint64_t replica) { return mix64(point) ^ replica; }

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t count = 0;
};

/// Mean and standard error of per-replica values, summed in index order.
Estimate summarize(const std::vector<double>& values);

/// Evaluate fn(stream) for replicas 0..n-1 of grid point `point` in parallel
/// and summarize. The estimate does not depend on `workers`.
template <class Fn>
Estimate replica_mean(std::uint64_t point, std::uint64_t replicas, std::uint64_t seed, unsigned workers, Fn&& fn) {
  const auto values = parallel_map<double>(replicas, workers, [&](std::size_t j) {
    RandomStream stream(seed, replica_lane(point, j));
    return static_cast<double>(fn(stream));
  });
  return summarize(values);
}

// ---------------------------------------------------------------------------

struct ClosureRow {
  double density = 0.0;
  std::uint64_t replicas = 0;
  std::uint64_t max_steps = 0;
  Estimate closed;        // fraction Closed
  double capped_fraction = 0.0;
  double escaped_fraction = 0.0;
  Estimate period;        // among Closed
  std::int64_t max_abs_x_q50 = 0;
  std::int64_t max_abs_x_q90 = 0;
  std::int64_t max_abs_x_max = 0;
  std::uint64_t wrong_period = 0;  // closed with period != expected_period, when set
};

/// A replica that did not close: its environment seed and start edge.
struct OpenReplica {
  double density = 0.0;
  std::uint64_t replica = 0;
  std::uint64_t env_seed = 0;
  DirectedEdge start;
  TraceStatus status = TraceStatus::step_capped;
};

struct ClosureSweep {
  std::vector<ClosureRow> rows;
  std::vector<OpenReplica> open;  // every replica that was not Closed
};

ClosureSweep closure_sweep(const ExperimentSpec& spec, unsigned workers = 0);
ResultTable to_table(const ClosureSweep& sweep, const ExperimentSpec& spec);

struct EscapeRow {
  std::int64_t length = 0;
  Estimate reach;  // P(reach |x| >= L)
  double scaled = 0.0;  // L * P(L)
  double capped_fraction = 0.0;
};

std::vector<EscapeRow> escape_profile(const ExperimentSpec& spec, unsigned workers = 0);
ResultTable to_table(const std::vector<EscapeRow>& rows, const ExperimentSpec& spec);
double min_scaled_escape(const std::vector<EscapeRow>& rows);

struct TransmissionCurve {
  int n = 0;
  std::uint64_t replicas = 0;
  std::int64_t max_length = 0;
  std::vector<std::uint64_t> reach_count;  // index L: configurations with l* >= L
  std::uint64_t censored = 0;              // still crossing at max_length
  std::uint64_t nesting_violations = 0;
  std::optional<std::int64_t> xi;          // least L with P(L) < 1/2

  double probability(std::int64_t length) const;
};

std::vector<TransmissionCurve> transmission(const ExperimentSpec& spec, unsigned workers = 0);
ResultTable to_table(const std::vector<TransmissionCurve>& curves, const ExperimentSpec& spec);

ResultTable to_table(const ParityScanResult& scan);

struct GreenRow {
  double z = 0.0;
  GreenEstimate measured;
  double trail_prediction = 0.0;  // 2 - sum W z^(2|gamma|)
};

std::vector<GreenRow> cardy_green(const ExperimentSpec& spec, unsigned workers = 0);
ResultTable to_table(const std::vector<GreenRow>& rows, const ExperimentSpec& spec);

struct DynamicRow {
  int t = 0;
  int edge = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double exact = 0.0;
};

struct DynamicComparison {
  std::vector<DynamicRow> rows;
  std::uint64_t samples = 0;
};

DynamicComparison cardy_dynamic(const ExperimentSpec& spec, unsigned workers = 0);
ResultTable to_table(const DynamicComparison& cmp, const ExperimentSpec& spec);

struct WalkPinballRow {
  double density = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t max_steps = 0;
  double walk_closed = 0.0;
  double pinball_closed = 0.0;
  Estimate walk_length;     // closed samples only
  Estimate pinball_length;
  double ks_statistic = 0.0;
  double ks_critical = 0.0;  // 0.01 level
};

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sample critical value at significance alpha.
double ks_critical_value(double alpha, std::size_t n, std::size_t m);

std::vector<WalkPinballRow> walk_vs_pinball(const ExperimentSpec& spec, unsigned workers = 0);
ResultTable to_table(const std::vector<WalkPinballRow>& rows, const ExperimentSpec& spec);

/// theta with sin^2 theta = r.
inline double theta_for_density(double r) { return std::asin(std::sqrt(r)); }

/// Run the experiment named by spec.kind and tabulate it.
ResultTable run_experiment(const ExperimentSpec& spec, unsigned workers = 0);

}  // namespace mlab
