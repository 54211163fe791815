// manhattan_lab command-line front end.

#include <bit>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "manhattan_lab/cutpat.hpp"
#include "manhattan_lab/dynamics.hpp"
#include "manhattan_lab/environment.hpp"
#include "manhattan_lab/errors.hpp"
#include "manhattan_lab/format.hpp"
#include "manhattan_lab/harness.hpp"
#include "manhattan_lab/netmodel.hpp"
#include "manhattan_lab/rng.hpp"

namespace {

using namespace mlab;
using Values = std::map<std::string, std::string>;

struct Key {
  std::string name;
  std::string fallback;
  std::string help;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<Key> keys;
  void (*run)(const Values&, unsigned workers, std::ostream& out);
};

// ---------------------------------------------------------------------------
// value parsing

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

ConfigError bad_value(const std::string& key, const std::string& value) {
  return ConfigError("invalid value for " + key + ": '" + value + "'");
}

const std::string& raw(const Values& v, const std::string& key) { return v.at(key); }

double parse_real(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(text, &used);
  } catch (const std::exception&) {
    throw bad_value(key, text);
  }
  if (used != text.size()) throw bad_value(key, text);
  return out;
}

std::uint64_t parse_count(const std::string& key, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) throw bad_value(key, text);
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw bad_value(key, text);
  }
}

std::int64_t parse_int(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw bad_value(key, text);
  }
  if (used != text.size()) throw bad_value(key, text);
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double get_real(const Values& v, const std::string& key) { return parse_real(key, raw(v, key)); }
std::uint64_t get_count(const Values& v, const std::string& key) { return parse_count(key, raw(v, key)); }
std::int64_t get_int(const Values& v, const std::string& key) { return parse_int(key, raw(v, key)); }

std::vector<double> get_reals(const Values& v, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(raw(v, key))) out.push_back(parse_real(key, item));
  if (out.empty()) throw bad_value(key, raw(v, key));
  return out;
}

std::vector<std::int64_t> get_ints(const Values& v, const std::string& key) {
  std::vector<std::int64_t> out;
  if (raw(v, key) == "all") return out;
  for (const auto& item : split_list(raw(v, key))) out.push_back(parse_int(key, item));
  return out;
}

bool get_bool(const Values& v, const std::string& key) {
  const auto& s = raw(v, key);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw bad_value(key, s);
}

/// Plain number, or a multiple of pi such as "pi/4", "3*pi/8", "pi".
double get_angle(const Values& v, const std::string& key) {
  const std::string s = raw(v, key);
  const auto pi_at = s.find("pi");
  if (pi_at == std::string::npos) return parse_real(key, s);
  double factor = 1.0;
  if (pi_at > 0) {
    if (s[pi_at - 1] != '*') throw bad_value(key, s);
    factor = parse_real(key, s.substr(0, pi_at - 1));
  }
  double divisor = 1.0;
  const std::string rest = s.substr(pi_at + 2);
  if (!rest.empty()) {
    if (rest[0] != '/') throw bad_value(key, s);
    divisor = parse_real(key, rest.substr(1));
    if (divisor == 0.0) throw bad_value(key, s);
  }
  return factor * std::numbers::pi / divisor;
}

Model get_model(const Values& v) { return parse_model(raw(v, "model")); }
Geometry get_geometry(const Values& v) { return Geometry::parse(raw(v, "geometry")); }
DirectedEdge get_edge(const Values& v, const std::string& key) { return parse_directed_edge(raw(v, key)); }

/// Edge index, or a lattice edge "x,y,D" on networks built from a lattice.
int get_network_edge(const Values& v, const std::string& key, const NetworkModel& model) {
  const auto& s = raw(v, key);
  if (s.find(',') != std::string::npos) return model.edge_of(parse_directed_edge(s));
  const auto idx = parse_int(key, s);
  if (idx < 0 || idx >= model.graph.edge_count()) throw ConfigError(key + " out of range: " + s);
  return static_cast<int>(idx);
}

EnvironmentSpec get_environment(const Values& v) {
  EnvironmentSpec spec;
  spec.model = get_model(v);
  spec.geometry = get_geometry(v);
  spec.density = get_real(v, "density");
  spec.ne_fraction = get_real(v, "ne-fraction");
  spec.seed = get_count(v, "seed");
  spec.validate();
  return spec;
}

void emit_table(std::ostream& out, const ExperimentSpec& spec, unsigned workers) {
  write_csv(out, run_experiment(spec, workers), spec);
}

// ---------------------------------------------------------------------------
// subcommands

void run_trace(const Values& v, unsigned, std::ostream& out) {
  const auto env = get_environment(v);
  TraceOptions opt;
  opt.max_steps = get_count(v, "max-steps");
  if (raw(v, "window") != "none") opt.window = get_int(v, "window");
  opt.count_distinct = get_bool(v, "distinct");
  out << to_json(trace(env, get_edge(v, "start"), opt)) << '\n';
}

void run_closure_sweep(const Values& v, unsigned workers, std::ostream& out) {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::closure_sweep;
  spec.model = get_model(v);
  spec.geometry = get_geometry(v);
  spec.densities = get_reals(v, "density");
  spec.ne_fraction = get_real(v, "ne-fraction");
  spec.seed = get_count(v, "seed");
  spec.replicas = get_count(v, "replicas");
  spec.max_steps = get_count(v, "max-steps");
  if (raw(v, "start") == "random") spec.start.reset();
  else spec.start = get_edge(v, "start");
  emit_table(out, spec, workers);
}

void run_escape_profile(const Values& v, unsigned workers, std::ostream& out) {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::escape_profile;
  spec.model = get_model(v);
  spec.geometry = get_geometry(v);
  spec.densities = {get_real(v, "density")};
  spec.ne_fraction = get_real(v, "ne-fraction");
  spec.seed = get_count(v, "seed");
  spec.replicas = get_count(v, "replicas");
  spec.max_steps = get_count(v, "max-steps");
  spec.start = get_edge(v, "start");
  spec.lengths = get_ints(v, "lengths");
  emit_table(out, spec, workers);
}

void run_transmission(const Values& v, unsigned workers, std::ostream& out) {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::transmission;
  spec.model = get_model(v);
  spec.densities = {get_real(v, "density")};
  spec.ne_fraction = get_real(v, "ne-fraction");
  spec.seed = get_count(v, "seed");
  spec.replicas = get_count(v, "replicas");
  for (auto n : get_ints(v, "half-widths")) spec.half_widths.push_back(static_cast<int>(n));
  spec.max_length = get_int(v, "max-length");
  spec.lengths = get_ints(v, "lengths");
  emit_table(out, spec, workers);
}

void run_parity_scan(const Values& v, unsigned workers, std::ostream& out) {
  const Model model = get_model(v);
  const int width = static_cast<int>(get_int(v, "width"));
  const int length = static_cast<int>(get_int(v, "length"));
  const auto scan = exhaustive_parity_scan(width, length, workers, model, get_count(v, "witnesses"));
  out << "model=" << to_string(model) << '\n'
      << "width=" << width << '\n'
      << "length=" << length << '\n'
      << "configurations=" << scan.configurations << '\n'
      << "min_crossings=" << scan.min_crossings << '\n'
      << "min_count=" << scan.min_count << '\n'
      << "parity_violations=" << scan.parity_violations << '\n'
      << "distinct_patterns=" << scan.distinct_patterns << '\n';
  for (auto index : scan.witnesses) {
    const auto states = decode_configuration(model, width, length, index);
    std::string grid;
    for (int y = 0; y < width; ++y) {
      if (y) grid += '/';
      for (int x = 0; x < length; ++x) {
        const VertexState s = states[static_cast<std::size_t>(x * width + y)];
        grid += s == VertexState::empty ? '.' : s == VertexState::ne ? 'N' : s == VertexState::nw ? 'W' : 'M';
      }
    }
    out << "witness=" << index << " rows=" << grid << " pattern="
        << to_string(configuration_pattern(model, width, length, states)) << '\n';
  }
}

void run_cut_pattern(const Values& v, unsigned, std::ostream& out) {
  const auto env = get_environment(v);
  const Slab slab = make_slab(env.geometry, get_int(v, "x-min"), get_int(v, "x-max"));
  const auto p = slab_pattern(env, slab);
  out << to_string(p) << '\n' << "crossings=" << crossing_count(p) << '\n';
}

NetworkModel get_network(const Values& v) { return load_network(raw(v, "network"), get_angle(v, "theta")); }

ExperimentSpec network_spec(const Values& v, ExperimentKind kind, const NetworkModel& model) {
  ExperimentSpec spec;
  spec.kind = kind;
  spec.network = raw(v, "network");
  spec.theta = get_angle(v, "theta");
  spec.edge = get_network_edge(v, "edge", model);
  spec.replicas = get_count(v, "samples");
  spec.seed = get_count(v, "seed");
  return spec;
}

void run_cardy_green(const Values& v, unsigned workers, std::ostream& out) {
  const auto model = get_network(v);
  auto spec = network_spec(v, ExperimentKind::cardy_green, model);
  spec.zs = get_reals(v, "z");
  spec.max_len = static_cast<int>(get_int(v, "max-len"));
  emit_table(out, spec, workers);
}

void run_cardy_trails(const Values& v, unsigned, std::ostream& out) {
  const auto model = get_network(v);
  const int root = get_network_edge(v, "edge", model);
  const int max_len = static_cast<int>(get_int(v, "max-len"));
  const std::string kind_text = raw(v, "kind");
  if (kind_text != "closed" && kind_text != "open") throw bad_value("kind", kind_text);
  const TrailKind kind = kind_text == "closed" ? TrailKind::closed : TrailKind::open;
  const int target = kind == TrailKind::open ? get_network_edge(v, "target", model) : -1;
  const double z = get_real(v, "z");

  const auto trails = enumerate_trails(model, root, kind, max_len, target);
  nlohmann::ordered_json j;
  j["root"] = root;
  j["kind"] = kind_text;
  if (kind == TrailKind::open) j["target"] = target;
  j["max_len"] = max_len;
  j["trails"] = nlohmann::ordered_json::array();
  double total = 0.0;
  double series = 0.0;
  for (const auto& t : trails) {
    nlohmann::ordered_json tj;
    tj["edges"] = t.edges;
    if (!model.lattice_edges.empty()) {
      std::vector<std::string> names;
      for (int e : t.edges) names.push_back(to_string(model.lattice_edges[e]));
      tj["lattice_edges"] = names;
    }
    tj["length"] = t.length();
    tj["weight"] = t.weight;
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& nw : t.node_weights) nodes.push_back({{"vertex", nw.vertex}, {"visits", nw.visits}, {"weight", nw.weight}});
    tj["node_weights"] = nodes;
    j["trails"].push_back(tj);
    total += t.weight;
    series += t.weight * std::pow(z, t.length());
  }
  j["count"] = trails.size();
  if (kind == TrailKind::closed) {
    j["z"] = z;
    j["trail_sum"] = series;
  } else {
    j["conductance"] = 2.0 * total;
  }
  out << j.dump() << '\n';
}

void run_cardy_calibrate(const Values& v, unsigned workers, std::ostream& out) {
  const auto model = get_network(v);
  const int root = get_network_edge(v, "edge", model);
  CalibrationOptions opt;
  opt.samples = get_count(v, "samples");
  opt.seed = get_count(v, "seed");
  opt.workers = workers;
  opt.max_len = static_cast<int>(get_int(v, "max-len"));
  opt.tolerance = get_real(v, "tolerance");
  const auto zs = get_reals(v, "z");
  const auto cal = calibrate_identity(model, root, zs, opt);

  out << "s,a,a_std_error,b,b_std_error,chi2,max_std_residual,selected,accepted\n";
  for (const auto& f : cal.fits) {
    const bool selected = f.s == cal.best.s;
    out << f.s << ',' << format_double(f.a) << ',' << format_double(f.a_se) << ',' << format_double(f.b) << ','
        << format_double(f.b_se) << ',' << format_double(f.chi2) << ',' << format_double(f.max_std_residual) << ','
        << (selected ? "true" : "false") << ',' << (selected && cal.accepted ? "true" : "false") << '\n';
  }
  if (!cal.accepted) {
    throw ContractViolation("calibration failed: no exponent fits within " + format_double(cal.tolerance) +
                            " standard errors");
  }
}

void run_cardy_dynamic(const Values& v, unsigned workers, std::ostream& out) {
  const auto model = get_network(v);
  auto spec = network_spec(v, ExperimentKind::cardy_dynamic, model);
  spec.t_max = static_cast<int>(get_int(v, "t-max"));
  emit_table(out, spec, workers);
}

void run_walk_sample(const Values& v, unsigned workers, std::ostream& out) {
  const std::string mode = raw(v, "mode");
  if (mode == "compare") {
    ExperimentSpec spec;
    spec.kind = ExperimentKind::walk_vs_pinball;
    spec.densities = get_reals(v, "density");
    spec.replicas = get_count(v, "samples");
    spec.seed = get_count(v, "seed");
    spec.max_steps = get_count(v, "max-steps");
    emit_table(out, spec, workers);
    return;
  }
  if (mode != "walk") throw bad_value("mode", mode);
  const double theta = raw(v, "theta") == "auto" ? theta_for_density(get_real(v, "density")) : get_angle(v, "theta");
  const Geometry g = get_geometry(v);
  const DirectedEdge start = get_edge(v, "start");
  const auto seed = get_count(v, "seed");
  const auto max_steps = get_count(v, "max-steps");
  const auto samples = get_count(v, "samples");
  for (std::uint64_t j = 0; j < samples; ++j) {
    RandomStream stream(seed, j);
    out << to_json(classical_walk_lattice(theta, g, start, stream, max_steps)) << '\n';
  }
}

void run_rng_vectors(const Values& v, unsigned, std::ostream& out) {
  const auto seed = get_count(v, "seed");
  auto hex = [&](std::uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    out << buf << '\n';
  };
  for (std::uint64_t x : {0ull, 1ull, 0xffffffffffffffffull, 0x123456789abcdef0ull}) hex(mix64(x));
  for (std::uint64_t lane : {0ull, 3ull}) {
    RandomStream s(seed, lane);
    for (int k = 0; k < 8; ++k) hex(s.next_u64());
  }
  for (std::int64_t x : {0, 3, -1, -1000000}) hex(vertex_lane({x, 2}));
  EnvironmentSpec env;
  env.model = Model::mirror;
  env.density = 0.5;
  env.seed = seed;
  for (std::int64_t x = -2; x <= 2; ++x) {
    for (std::int64_t y = -2; y <= 2; ++y) hex(static_cast<std::uint64_t>(vertex_state(env, {x, y})));
  }
  env.model = Model::manhattan;
  env.density = 0.3;
  for (std::int64_t x = -2; x <= 2; ++x) {
    for (std::int64_t y = -2; y <= 2; ++y) hex(static_cast<std::uint64_t>(vertex_state(env, {x, y})));
  }
  env.model = Model::mirror;
  env.density = 0.5;
  hex(static_cast<std::uint64_t>(vertex_state(env, {3, 2})));
  RandomStream first(seed, 0);
  hex(std::bit_cast<std::uint64_t>(first.uniform01()));
}

std::vector<Key> environment_keys(const std::string& model, const std::string& geometry, const std::string& density) {
  return {{"model", model, "manhattan or mirror"},
          {"geometry", geometry, "plane, cylinder:<w> or torus:<wx>x<wy>"},
          {"density", density, "mirror density r"},
          {"ne-fraction", "0.5", "fraction of NE mirrors (mirror model)"},
          {"seed", "1", "environment seed"}};
}

std::vector<Command> commands() {
  std::vector<Command> out;
  auto with = [](std::vector<Key> keys, std::vector<Key> more) {
    keys.insert(keys.end(), more.begin(), more.end());
    return keys;
  };
  out.push_back({"trace", "trace one trajectory (JSON)",
                 with(environment_keys("manhattan", "plane", "0.5"),
                      {{"start", "0,0,E", "start edge x,y,D"},
                       {"max-steps", "1000000", "step cap"},
                       {"window", "none", "stop once |x| exceeds this"},
                       {"distinct", "false", "count distinct vertices"}}),
                 run_trace});
  out.push_back({"closure-sweep", "closure statistics over densities (CSV)",
                 with(environment_keys("manhattan", "plane", "0.5"),
                      {{"replicas", "1000", "replicas per density"},
                       {"max-steps", "1000000", "step cap"},
                       {"start", "0,0,E", "start edge, or 'random'"}}),
                 run_closure_sweep});
  out.push_back({"escape-profile", "reach probabilities on an odd cylinder (CSV)",
                 with(environment_keys("mirror", "cylinder:3", "0.5"),
                      {{"replicas", "10000", "replicas per length"},
                       {"max-steps", "1000000", "step cap"},
                       {"start", "0,0,E", "start edge"},
                       {"lengths", "10,20,40", "length grid"}}),
                 run_escape_profile});
  out.push_back({"transmission", "slab crossing probabilities on even cylinders (CSV)",
                 {{"model", "mirror", "manhattan or mirror"},
                  {"density", "0.5", "mirror density r"},
                  {"ne-fraction", "0.5", "fraction of NE mirrors"},
                  {"seed", "1", "seed"},
                  {"replicas", "10000", "configurations per width"},
                  {"half-widths", "1,2,3", "n grid (width 2n)"},
                  {"max-length", "64", "longest slab composed"},
                  {"lengths", "all", "rows to print"}},
                 run_transmission});
  out.push_back({"parity-scan", "exhaustive crossing scan of a small slab",
                 {{"model", "mirror", "manhattan or mirror"},
                  {"width", "3", "slab width"},
                  {"length", "4", "slab length"},
                  {"witnesses", "4", "minimal configurations to print"}},
                 run_parity_scan});
  out.push_back({"cut-pattern", "connection pattern of a cylinder slab",
                 with(environment_keys("mirror", "cylinder:3", "0.5"),
                      {{"x-min", "0", "first column"}, {"x-max", "3", "last column"}}),
                 run_cut_pattern});
  auto network_keys = [](std::string network, std::string theta, std::string edge) {
    return std::vector<Key>{{"network", network, "ring, ring:<sa>,<sb>, manhattan-torus:<wx>x<wy> or a file"},
                            {"theta", theta, "node angle for lattice networks"},
                            {"edge", edge, "edge index or lattice edge x,y,D"}};
  };
  out.push_back({"cardy-green", "disorder-averaged Green function (CSV)",
                 with(network_keys("ring", "0", "0"),
                      {{"z", "0.3,0.5", "z grid"},
                       {"samples", "100000", "disorder samples"},
                       {"seed", "1", "seed"},
                       {"max-len", "8", "trail length cap for the prediction"}}),
                 run_cardy_green});
  out.push_back({"cardy-trails", "enumerate weighted trails (JSON)",
                 with(network_keys("ring", "0", "0"),
                      {{"kind", "closed", "closed or open"},
                       {"target", "0", "target edge for open trails"},
                       {"max-len", "8", "length cap"},
                       {"z", "0.5", "z for the closed-trail sum"}}),
                 run_cardy_trails});
  out.push_back({"cardy-calibrate", "fit the Green/trail identity constants (CSV)",
                 with(network_keys("ring", "0", "0"),
                      {{"z", "0.2,0.3,0.4,0.5", "z grid"},
                       {"samples", "100000", "disorder samples per z"},
                       {"seed", "1", "seed"},
                       {"max-len", "8", "trail length cap"},
                       {"tolerance", "4", "max standardized residual"}}),
                 run_cardy_calibrate});
  out.push_back({"cardy-dynamic", "quantum return amplitudes against the classical walk (CSV)",
                 with(network_keys("manhattan-torus:4x4", "pi/4", "0,0,E"),
                      {{"t-max", "12", "largest time"},
                       {"samples", "100000", "disorder samples"},
                       {"seed", "1", "seed"}}),
                 run_cardy_dynamic});
  out.push_back({"walk-sample", "history-dependent walk samples (JSON) or walk/pinball comparison (CSV)",
                 {{"mode", "walk", "walk or compare"},
                  {"density", "0.5", "r = sin^2 theta; a list in compare mode"},
                  {"theta", "auto", "walk angle; auto derives it from density"},
                  {"geometry", "plane", "plane, cylinder:<w> or torus:<wx>x<wy>"},
                  {"start", "0,0,E", "start edge"},
                  {"seed", "1", "seed"},
                  {"samples", "1", "number of samples"},
                  {"max-steps", "1000000", "step cap"}},
                 run_walk_sample});
  out.push_back({"rng-vectors", "reference random words (hex, one per line)", {{"seed", "7", "seed"}}, run_rng_vectors});
  return out;
}

// key = value lines, '#' comments; ';' also separates entries.
Values read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Values out;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::stringstream entries(line);
    std::string entry;
    while (std::getline(entries, entry, ';')) {
      entry = trim(entry);
      if (entry.empty()) continue;
      const auto eq = entry.find('=');
      if (eq == std::string::npos) throw ConfigError("config entry without '=': '" + entry + "'");
      out[trim(entry.substr(0, eq))] = trim(entry.substr(eq + 1));
    }
  }
  return out;
}

unsigned workers_from(const std::string& flag) {
  std::string text = flag;
  if (text.empty()) {
    const char* env = std::getenv("MANHATTAN_LAB_WORKERS");
    if (env == nullptr) return 0;
    text = env;
  }
  const auto n = parse_count("workers", trim(text));
  if (n > 1024) throw bad_value("workers", text);
  return static_cast<unsigned>(n);
}

}  // namespace

int main(int argc, char** argv) {
  const auto table = commands();
  CLI::App app{"Ray dynamics in random mirror environments and class-C network models"};
  app.require_subcommand(1);

  std::map<std::string, Values> flags;
  std::map<std::string, std::string> config_path;
  std::map<std::string, std::string> workers_flag;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : table) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    for (const auto& key : cmd.keys) {
      sub->add_option("--" + key.name, flags[cmd.name][key.name], key.help + " (default " + key.fallback + ")");
    }
    sub->add_option("--config", config_path[cmd.name], "key = value file; flags override it");
    sub->add_option("--workers", workers_flag[cmd.name], "worker threads (0: all cores)");
    subs[cmd.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  for (const auto& cmd : table) {
    CLI::App* sub = subs[cmd.name];
    if (!sub->parsed()) continue;
    std::ostringstream out;
    try {
      Values resolved;
      for (const auto& key : cmd.keys) resolved[key.name] = key.fallback;
      if (!config_path[cmd.name].empty()) {
        for (const auto& [k, value] : read_config(config_path[cmd.name])) {
          if (!resolved.contains(k)) throw ConfigError("unknown config key '" + k + "' for " + cmd.name);
          resolved[k] = value;
        }
      }
      for (const auto& key : cmd.keys) {
        if (sub->count("--" + key.name) > 0) resolved[key.name] = trim(flags[cmd.name][key.name]);
      }
      const unsigned workers = workers_from(workers_flag[cmd.name]);

      cmd.run(resolved, workers, out);
      std::cout << out.str();
      std::string line;
      for (const auto& key : cmd.keys) line += (line.empty() ? "" : ";") + key.name + "=" + resolved[key.name];
      std::cerr << line << '\n';
      return 0;
    } catch (const ConfigError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    } catch (const ContractViolation& e) {
      std::cout << out.str();
      std::cerr << "internal error: " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "internal error: " << e.what() << '\n';
      return 1;
    }
  }
  return 2;
}
