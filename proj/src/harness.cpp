#include "manhattan_lab/harness.hpp"

#include <algorithm>
#include <numeric>

#include "manhattan_lab/errors.hpp"
#include "manhattan_lab/format.hpp"

namespace mlab {

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::closure_sweep: return "closure-sweep";
    case ExperimentKind::escape_profile: return "escape-profile";
    case ExperimentKind::transmission: return "transmission";
    case ExperimentKind::parity_scan: return "parity-scan";
    case ExperimentKind::cardy_green: return "cardy-green";
    case ExperimentKind::cardy_dynamic: return "cardy-dynamic";
    case ExperimentKind::walk_vs_pinball: return "walk-vs-pinball";
  }
  return {};
}

namespace {

template <class T, class Fmt>
std::string join(const std::vector<T>& values, Fmt&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt(values[i]);
  }
  return out;
}

std::string cell(double v) { return format_double(v); }
std::string cell(std::uint64_t v) { return std::to_string(v); }
std::string cell(std::int64_t v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }

void require_densities(const ExperimentSpec& spec) {
  if (spec.densities.empty()) throw ConfigError("density grid must not be empty");
  for (double r : spec.densities) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("densities must lie in [0, 1]");
  }
}

EnvironmentSpec environment_for(const ExperimentSpec& spec, Geometry g, double density, std::uint64_t env_seed) {
  EnvironmentSpec env;
  env.model = spec.model;
  env.geometry = g;
  env.density = density;
  env.ne_fraction = spec.ne_fraction;
  env.seed = env_seed;
  return env;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (replicas < 1) throw ConfigError("replicas must be at least 1");
  if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
  if (!(ne_fraction >= 0.0 && ne_fraction <= 1.0)) throw ConfigError("ne_fraction must lie in [0, 1]");
  switch (kind) {
    case ExperimentKind::closure_sweep:
      require_densities(*this);
      if (model == Model::manhattan && !geometry.supports_manhattan()) throw ConfigError("manhattan requires even width");
      break;
    case ExperimentKind::escape_profile:
      require_densities(*this);
      if (model != Model::mirror) throw ConfigError("escape-profile needs the mirror model");
      if (geometry.kind() != GeometryKind::cylinder || geometry.width() % 2 == 0) {
        throw ConfigError("escape-profile needs a cylinder of odd width");
      }
      if (lengths.empty()) throw ConfigError("length grid must not be empty");
      for (auto l : lengths) {
        if (l < 0) throw ConfigError("lengths must be non-negative");
      }
      break;
    case ExperimentKind::transmission:
      require_densities(*this);
      if (densities.size() != 1) throw ConfigError("transmission takes a single density");
      if (half_widths.empty()) throw ConfigError("half-width grid must not be empty");
      for (int n : half_widths) {
        if (n < 1) throw ConfigError("half widths must be positive");
      }
      if (max_length < 1) throw ConfigError("max_length must be positive");
      for (auto l : lengths) {
        if (l < 1 || l > max_length) throw ConfigError("transmission lengths must lie in [1, max_length]");
      }
      break;
    case ExperimentKind::parity_scan:
      if (scan_width < 1 || scan_length < 1) throw ConfigError("scan dimensions must be positive");
      break;
    case ExperimentKind::cardy_green:
      if (zs.empty()) throw ConfigError("z grid must not be empty");
      if (max_len < 1 || max_len > kMaxTrailLength) throw ConfigError("max_len out of range");
      break;
    case ExperimentKind::cardy_dynamic:
      if (t_max < 0 || t_max > 64) throw ConfigError("t_max must lie in [0, 64]");
      break;
    case ExperimentKind::walk_vs_pinball:
      require_densities(*this);
      break;
  }
}

std::string ExperimentSpec::canonical() const {
  auto dens = [&] { return join(densities, [](double v) { return format_double(v); }); };
  auto lens = [&] { return join(lengths, [](std::int64_t v) { return std::to_string(v); }); };
  std::string out = "kind=" + to_string(kind);
  auto add = [&](const std::string& key, const std::string& value) { out += ";" + key + "=" + value; };
  switch (kind) {
    case ExperimentKind::closure_sweep:
      add("model", to_string(model));
      add("geometry", geometry.to_string());
      add("densities", dens());
      if (model == Model::mirror) add("ne_fraction", format_double(ne_fraction));
      add("replicas", cell(replicas));
      add("max_steps", cell(max_steps));
      add("start", start ? to_string(*start) : "random");
      break;
    case ExperimentKind::escape_profile:
      add("model", to_string(model));
      add("geometry", geometry.to_string());
      add("densities", dens());
      add("ne_fraction", format_double(ne_fraction));
      add("replicas", cell(replicas));
      add("max_steps", cell(max_steps));
      add("start", start ? to_string(*start) : "random");
      add("lengths", lens());
      break;
    case ExperimentKind::transmission:
      add("model", to_string(model));
      add("densities", dens());
      if (model == Model::mirror) add("ne_fraction", format_double(ne_fraction));
      add("replicas", cell(replicas));
      add("half_widths", join(half_widths, [](int v) { return std::to_string(v); }));
      add("max_length", cell(max_length));
      if (!lengths.empty()) add("lengths", lens());
      break;
    case ExperimentKind::parity_scan:
      add("model", to_string(model));
      add("width", cell(scan_width));
      add("length", cell(scan_length));
      break;
    case ExperimentKind::cardy_green:
      add("network", network);
      add("theta", format_double(theta));
      add("edge", cell(edge));
      add("zs", join(zs, [](double v) { return format_double(v); }));
      add("samples", cell(replicas));
      add("max_len", cell(max_len));
      break;
    case ExperimentKind::cardy_dynamic:
      add("network", network);
      add("theta", format_double(theta));
      add("edge", cell(edge));
      add("t_max", cell(t_max));
      add("samples", cell(replicas));
      break;
    case ExperimentKind::walk_vs_pinball:
      add("densities", dens());
      add("samples", cell(replicas));
      add("max_steps", cell(max_steps));
      break;
  }
  return out;
}

std::string provenance_line(const ExperimentSpec& spec) {
  return "# spec=" + spec.canonical() + " seed=" + std::to_string(spec.seed) + " version=" + kVersion;
}

void write_csv(std::ostream& out, const ResultTable& table, const ExperimentSpec& spec) {
  out << join(table.columns, [](const std::string& s) { return s; }) << '\n';
  out << provenance_line(spec) << '\n';
  for (const auto& row : table.rows) out << join(row, [](const std::string& s) { return s; }) << '\n';
}

Estimate summarize(const std::vector<double>& values) {
  Estimate e;
  e.count = values.size();
  if (values.empty()) return e;
  double sum = 0.0;
  for (double v : values) sum += v;
  e.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  }
  return e;
}

// ---------------------------------------------------------------------------
// closure-sweep

namespace {

DirectedEdge random_start(Model model, RandomStream& stream) {
  const auto y = static_cast<std::int64_t>(stream.next_u64() % 2'000'001) - 1'000'000;
  const auto bits = stream.next_u64();
  if (model == Model::manhattan) {
    return (bits & 1) == 0 ? DirectedEdge{{0, y}, manhattan_row_direction(y)}
                           : DirectedEdge{{0, y}, manhattan_column_direction(0)};
  }
  return {{0, y}, static_cast<Direction>(bits & 3)};
}

struct ReplicaTrace {
  std::uint64_t env_seed = 0;
  DirectedEdge start;
  TrajectoryRecord record;
};

std::int64_t quantile(std::vector<std::int64_t> v, double q) {
  if (v.empty()) return 0;
  std::ranges::sort(v);
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) ;
  return v[std::min(v.size() - 1, idx == 0 ? 0 : idx - 1)];
}

}  // namespace

ClosureSweep closure_sweep(const ExperimentSpec& spec, unsigned workers) {
  spec.validate();
  ClosureSweep sweep;
  for (std::size_t k = 0; k < spec.densities.size(); ++k) {
    const double r = spec.densities[k];
    const auto traces = parallel_map<ReplicaTrace>(spec.replicas, workers, [&](std::size_t j) {
      RandomStream stream(spec.seed, replica_lane(k, j));
      ReplicaTrace t;
      t.env_seed = stream.next_u64();
      t.start = spec.start ? *spec.start : random_start(spec.model, stream);
      TraceOptions opt;
      opt.max_steps = spec.max_steps;
      t.record = trace(environment_for(spec, spec.geometry, r, t.env_seed), t.start, opt);
      return t;
    });

    ClosureRow row;
    row.density = r;
    row.replicas = spec.replicas;
    row.max_steps = spec.max_steps;
    std::vector<double> closed, periods;
    std::vector<std::int64_t> reach;
    std::uint64_t capped = 0, escaped = 0;
    for (std::size_t j = 0; j < traces.size(); ++j) {
      const auto& rec = traces[j].record;
      closed.push_back(rec.status == TraceStatus::closed ? 1.0 : 0.0);
      reach.push_back(rec.max_abs_x);
      if (rec.status == TraceStatus::closed) {
        periods.push_back(static_cast<double>(rec.period));
      } else {
        if (rec.status == TraceStatus::step_capped) ++capped;
        else ++escaped;
        sweep.open.push_back({r, j, traces[j].env_seed, rec.start, rec.status});
      }
    }
    row.closed = summarize(closed);
    row.period = summarize(periods);
    row.capped_fraction = static_cast<double>(capped) / static_cast<double>(spec.replicas);
    row.escaped_fraction = static_cast<double>(escaped) / static_cast<double>(spec.replicas);
    row.max_abs_x_q50 = quantile(reach, 0.5);
    row.max_abs_x_q90 = quantile(reach, 0.9);
    row.max_abs_x_max = reach.empty() ? 0 : *std::ranges::max_element(reach);
    sweep.rows.push_back(row);
  }
  return sweep;
}

ResultTable to_table(const ClosureSweep& sweep, const ExperimentSpec& spec) {
  ResultTable t;
  t.columns = {"model", "geometry", "density", "replicas", "max_steps", "closed_fraction", "closed_std_error",
               "capped_fraction", "escaped_fraction", "closed_count", "mean_period", "period_std_error",
               "max_abs_x_q50", "max_abs_x_q90", "max_abs_x_max"};
  for (const auto& r : sweep.rows) {
    t.rows.push_back({to_string(spec.model), spec.geometry.to_string(), cell(r.density), cell(r.replicas),
                      cell(r.max_steps), cell(r.closed.mean), cell(r.closed.std_error), cell(r.capped_fraction),
                      cell(r.escaped_fraction), cell(r.period.count), cell(r.period.mean), cell(r.period.std_error),
                      cell(r.max_abs_x_q50), cell(r.max_abs_x_q90), cell(r.max_abs_x_max)});
  }
  return t;
}

// ---------------------------------------------------------------------------
// escape-profile

std::vector<EscapeRow> escape_profile(const ExperimentSpec& spec, unsigned workers) {
  spec.validate();
  const double r = spec.densities.front();
  std::vector<EscapeRow> rows;
  for (std::size_t k = 0; k < spec.lengths.size(); ++k) {
    const std::int64_t length = spec.lengths[k];
    EscapeRow row;
    row.length = length;
    if (length == 0) {
      row.reach = {1.0, 0.0, spec.replicas};
      rows.push_back(row);
      continue;
    }
    const auto status = parallel_map<int>(spec.replicas, workers, [&](std::size_t j) {
      RandomStream stream(spec.seed, replica_lane(k, j));
      const std::uint64_t env_seed = stream.next_u64();
      const DirectedEdge start = spec.start ? *spec.start : random_start(spec.model, stream);
      TraceOptions opt;
      opt.max_steps = spec.max_steps;
      opt.window = length - 1;
      return static_cast<int>(trace(environment_for(spec, spec.geometry, r, env_seed), start, opt).status);
    });
    std::vector<double> hit;
    std::uint64_t capped = 0;
    for (int s : status) {
      hit.push_back(s == static_cast<int>(TraceStatus::window_escape) ? 1.0 : 0.0);
      if (s == static_cast<int>(TraceStatus::step_capped)) ++capped;
    }
    row.reach = summarize(hit);
    row.scaled = static_cast<double>(length) * row.reach.mean;
    row.capped_fraction = static_cast<double>(capped) / static_cast<double>(spec.replicas);
    rows.push_back(row);
  }
  return rows;
}

double min_scaled_escape(const std::vector<EscapeRow>& rows) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (r.length > 0) best = std::min(best, r.scaled);
  }
  return best;
}

ResultTable to_table(const std::vector<EscapeRow>& rows, const ExperimentSpec& spec) {
  ResultTable t;
  t.columns = {"geometry", "density", "replicas", "max_steps", "length", "reach_probability", "std_error",
               "length_times_probability", "capped_fraction"};
  for (const auto& r : rows) {
    t.rows.push_back({spec.geometry.to_string(), cell(spec.densities.front()), cell(spec.replicas),
                      cell(spec.max_steps), cell(r.length), cell(r.reach.mean), cell(r.reach.std_error),
                      cell(r.scaled), cell(r.capped_fraction)});
  }
  return t;
}

// ---------------------------------------------------------------------------
// transmission

double TransmissionCurve::probability(std::int64_t length) const {
  if (length <= 0) return 1.0;
  if (length > max_length) throw ConfigError("length beyond the composed range");
  return static_cast<double>(reach_count[static_cast<std::size_t>(length)]) / static_cast<double>(replicas);
}

std::vector<TransmissionCurve> transmission(const ExperimentSpec& spec, unsigned workers) {
  spec.validate();
  const double r = spec.densities.front();
  std::vector<TransmissionCurve> curves;
  for (std::size_t k = 0; k < spec.half_widths.size(); ++k) {
    const int n = spec.half_widths[k];
    const int width = 2 * n;
    if (spec.model == Model::manhattan && width % 2 != 0) throw ConfigError("manhattan requires even width");

    struct Outcome {
      std::int64_t last_crossing = 0;  // l*: largest L whose slab still has a crossing
      bool nesting_ok = true;
    };
    const auto outcomes = parallel_map<Outcome>(spec.replicas, workers, [&](std::size_t j) {
      RandomStream stream(spec.seed, replica_lane(k, j));
      const auto env = environment_for(spec, Geometry::cylinder(width), r, stream.next_u64());
      auto state = [&](Point v) { return vertex_state(env, v); };
      Outcome o;
      ConnectionPattern acc = identity_pattern(width);
      bool crossed_before = true;
      for (std::int64_t x = 0; x < spec.max_length; ++x) {
        acc = compose(acc, slab_pattern_with(spec.model, width, x, x, state));
        const bool crosses = crossing_count(acc) > 0;
        if (crosses && !crossed_before) o.nesting_ok = false;
        if (crosses) o.last_crossing = x + 1;
        crossed_before = crosses;
      }
      return o;
    });

    TransmissionCurve c;
    c.n = n;
    c.replicas = spec.replicas;
    c.max_length = spec.max_length;
    c.reach_count.assign(static_cast<std::size_t>(spec.max_length) + 1, 0);
    std::vector<std::uint64_t> at(static_cast<std::size_t>(spec.max_length) + 1, 0);
    for (const auto& o : outcomes) {
      ++at[static_cast<std::size_t>(o.last_crossing)];
      if (!o.nesting_ok) ++c.nesting_violations;
      if (o.last_crossing == spec.max_length) ++c.censored;
    }
    std::uint64_t running = 0;
    for (std::int64_t l = spec.max_length; l >= 0; --l) {
      running += at[static_cast<std::size_t>(l)];
      c.reach_count[static_cast<std::size_t>(l)] = running;
    }
    // Binary search for the least L with P(L) < 1/2; P is non-increasing.
    if (2 * c.reach_count[static_cast<std::size_t>(spec.max_length)] < spec.replicas) {
      std::int64_t lo = 0, hi = spec.max_length;  // P(lo) >= 1/2 > P(hi)
      while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (2 * c.reach_count[static_cast<std::size_t>(mid)] < spec.replicas) hi = mid;
        else lo = mid;
      }
      c.xi = hi;
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

ResultTable to_table(const std::vector<TransmissionCurve>& curves, const ExperimentSpec& spec) {
  ResultTable t;
  t.columns = {"n", "width", "density", "replicas", "length", "crossing_probability", "std_error", "xi",
               "xi_lower", "xi_upper", "censored", "nesting_violations"};
  for (const auto& c : curves) {
    std::vector<std::int64_t> grid = spec.lengths;
    if (grid.empty()) {
      grid.resize(static_cast<std::size_t>(c.max_length));
      std::iota(grid.begin(), grid.end(), 1);
    }
    const std::string xi = c.xi ? cell(*c.xi) : "NA";
    const std::string lo = c.xi ? cell(*c.xi - 1) : cell(c.max_length);
    const std::string hi = c.xi ? cell(*c.xi) : "NA";
    for (auto l : grid) {
      const double p = c.probability(l);
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(std::max<std::uint64_t>(c.replicas - 1, 1)));
      t.rows.push_back({cell(c.n), cell(2 * c.n), cell(spec.densities.front()), cell(c.replicas), cell(l), cell(p),
                        cell(se), xi, lo, hi, cell(c.censored), cell(c.nesting_violations)});
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// parity-scan

ResultTable to_table(const ParityScanResult& scan) {
  ResultTable t;
  t.columns = {"model", "width", "length", "configurations", "min_crossings", "min_count", "parity_violations",
               "distinct_patterns", "witnesses"};
  t.rows.push_back({to_string(scan.model), cell(scan.width), cell(scan.length), cell(scan.configurations),
                    cell(scan.min_crossings), cell(scan.min_count), cell(scan.parity_violations),
                    cell(scan.distinct_patterns),
                    join(scan.witnesses, [](std::uint64_t w) { return std::to_string(w); })});
  return t;
}

// ---------------------------------------------------------------------------
// cardy-green and cardy-dynamic

std::vector<GreenRow> cardy_green(const ExperimentSpec& spec, unsigned workers) {
  spec.validate();
  const NetworkModel model = load_network(spec.network, spec.theta);
  const auto trails = trail_sum(model, spec.edge, 0.0, spec.max_len);
  std::vector<GreenRow> rows;
  for (std::size_t k = 0; k < spec.zs.size(); ++k) {
    GreenRow row;
    row.z = spec.zs[k];
    row.measured = averaged_green(model, spec.edge, row.z, spec.replicas, spec.seed + k, workers);
    double series = 0.0;
    for (std::size_t len = 1; len < trails.weight_by_length.size(); ++len) {
      series += trails.weight_by_length[len] * std::pow(row.z, 2.0 * static_cast<double>(len));
    }
    row.trail_prediction = 2.0 - series;
    rows.push_back(row);
  }
  return rows;
}

ResultTable to_table(const std::vector<GreenRow>& rows, const ExperimentSpec& spec) {
  ResultTable t;
  t.columns = {"network", "theta", "edge", "z", "samples", "green_re", "green_im", "std_error", "rejected",
               "trail_prediction"};
  for (const auto& r : rows) {
    t.rows.push_back({spec.network, cell(spec.theta), cell(spec.edge), cell(r.z), cell(r.measured.samples),
                      cell(r.measured.value.real()), cell(r.measured.value.imag()), cell(r.measured.std_error),
                      cell(r.measured.rejected), cell(r.trail_prediction)});
  }
  return t;
}

DynamicComparison cardy_dynamic(const ExperimentSpec& spec, unsigned workers) {
  spec.validate();
  const NetworkModel model = load_network(spec.network, spec.theta);
  const auto quantum = dynamic_correlator(model, spec.edge, spec.t_max, spec.replicas, spec.seed, workers);
  const auto exact = exact_walk_occupancy(model, spec.edge, spec.t_max);
  DynamicComparison cmp;
  cmp.samples = spec.replicas;
  for (int t = 0; t <= spec.t_max; ++t) {
    for (int e = 0; e < model.graph.edge_count(); ++e) {
      cmp.rows.push_back({t, e, quantum.mean(t, e), quantum.std_error(t, e), exact(t, e)});
    }
  }
  return cmp;
}

ResultTable to_table(const DynamicComparison& cmp, const ExperimentSpec& spec) {
  ResultTable t;
  t.columns = {"network", "theta", "start", "t", "edge", "samples", "quantum", "std_error", "classical"};
  for (const auto& r : cmp.rows) {
    t.rows.push_back({spec.network, cell(spec.theta), cell(spec.edge), cell(r.t), cell(r.edge), cell(cmp.samples),
                      cell(r.mean), cell(r.std_error), cell(r.exact)});
  }
  return t;
}

// ---------------------------------------------------------------------------
// walk-vs-pinball

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("KS statistic needs two non-empty samples");
  std::ranges::sort(a);
  std::ranges::sort(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(double alpha, std::size_t n, std::size_t m) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * static_cast<double>(m)));
}

std::vector<WalkPinballRow> walk_vs_pinball(const ExperimentSpec& spec, unsigned workers) {
  spec.validate();
  const DirectedEdge start{{0, 0}, Direction::E};
  std::vector<WalkPinballRow> rows;
  for (std::size_t k = 0; k < spec.densities.size(); ++k) {
    const double r = spec.densities[k];
    const double theta = theta_for_density(r);
    struct Pair {
      double walk = 0.0;
      double pinball = 0.0;
    };
    const double censored = static_cast<double>(spec.max_steps) + 1.0;
    const auto samples = parallel_map<Pair>(spec.replicas, workers, [&](std::size_t j) {
      RandomStream stream(spec.seed, replica_lane(k, j));
      EnvironmentSpec env;
      env.model = Model::manhattan;
      env.geometry = Geometry::plane();
      env.density = r;
      env.seed = stream.next_u64();
      TraceOptions opt;
      opt.max_steps = spec.max_steps;
      const auto pin = trace(env, start, opt);
      const auto walk = classical_walk_lattice(theta, Geometry::plane(), start, stream, spec.max_steps);
      auto length = [&](const TrajectoryRecord& rec) {
        return rec.status == TraceStatus::closed ? static_cast<double>(rec.period) : censored;
      };
      return Pair{length(walk), length(pin)};
    });
    std::vector<double> walk, pin, walk_closed, pin_closed;
    for (const auto& s : samples) {
      walk.push_back(s.walk);
      pin.push_back(s.pinball);
      if (s.walk != censored) walk_closed.push_back(s.walk);
      if (s.pinball != censored) pin_closed.push_back(s.pinball);
    }
    WalkPinballRow row;
    row.density = r;
    row.samples = spec.replicas;
    row.max_steps = spec.max_steps;
    row.walk_closed = static_cast<double>(walk_closed.size()) / static_cast<double>(spec.replicas);
    row.pinball_closed = static_cast<double>(pin_closed.size()) / static_cast<double>(spec.replicas);
    row.walk_length = summarize(walk_closed);
    row.pinball_length = summarize(pin_closed);
    row.ks_statistic = ks_statistic(walk, pin);
    row.ks_critical = ks_critical_value(0.01, walk.size(), pin.size());
    rows.push_back(row);
  }
  return rows;
}

ResultTable to_table(const std::vector<WalkPinballRow>& rows, const ExperimentSpec& spec) {
  ResultTable t;
  t.columns = {"density", "samples", "max_steps", "walk_closed_fraction", "pinball_closed_fraction",
               "walk_mean_length", "walk_length_std_error", "pinball_mean_length", "pinball_length_std_error",
               "ks_statistic", "ks_critical_0.01"};
  (void)spec;
  for (const auto& r : rows) {
    t.rows.push_back({cell(r.density), cell(r.samples), cell(r.max_steps), cell(r.walk_closed),
                      cell(r.pinball_closed), cell(r.walk_length.mean), cell(r.walk_length.std_error),
                      cell(r.pinball_length.mean), cell(r.pinball_length.std_error), cell(r.ks_statistic),
                      cell(r.ks_critical)});
  }
  return t;
}

ResultTable run_experiment(const ExperimentSpec& spec, unsigned workers) {
  switch (spec.kind) {
    case ExperimentKind::closure_sweep: return to_table(closure_sweep(spec, workers), spec);
    case ExperimentKind::escape_profile: return to_table(escape_profile(spec, workers), spec);
    case ExperimentKind::transmission: return to_table(transmission(spec, workers), spec);
    case ExperimentKind::parity_scan:
      spec.validate();
      return to_table(exhaustive_parity_scan(spec.scan_width, spec.scan_length, workers, spec.model));
    case ExperimentKind::cardy_green: return to_table(cardy_green(spec, workers), spec);
    case ExperimentKind::cardy_dynamic: return to_table(cardy_dynamic(spec, workers), spec);
    case ExperimentKind::walk_vs_pinball: return to_table(walk_vs_pinball(spec, workers), spec);
  }
  throw ConfigError("unknown experiment kind");
}

}  // namespace mlab
