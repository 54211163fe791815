// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "manhattan_lab/cutpat.hpp"
#include "manhattan_lab/dynamics.hpp"
#include "manhattan_lab/harness.hpp"
#include "manhattan_lab/netmodel.hpp"
#include "test_support.hpp"

using namespace mlab;

namespace {

constexpr std::uint64_t kSeed = 1;  // the pilot goldens used 2024

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string csv(const ExperimentSpec& spec, unsigned workers) {
  std::ostringstream out;
  write_csv(out, run_experiment(spec, workers), spec);
  return out.str();
}

ExperimentSpec plane_sweep(std::vector<double> densities, std::uint64_t replicas, std::uint64_t cap) {
  ExperimentSpec s;
  s.kind = ExperimentKind::closure_sweep;
  s.model = Model::manhattan;
  s.geometry = Geometry::plane();
  s.densities = std::move(densities);
  s.replicas = replicas;
  s.max_steps = cap;
  s.start.reset();
  s.seed = kSeed;
  return s;
}

ExperimentSpec escape_spec() {
  ExperimentSpec s;
  s.kind = ExperimentKind::escape_profile;
  s.model = Model::mirror;
  s.geometry = Geometry::cylinder(3);
  s.densities = {0.5};
  s.lengths = {10, 20, 40};
  s.replicas = 10000;
  s.seed = kSeed;
  return s;
}

ExperimentSpec ring_green_spec() {
  ExperimentSpec s;
  s.kind = ExperimentKind::cardy_green;
  s.network = "ring";
  s.zs = {0.3, 0.5};
  s.replicas = 100000;
  s.seed = kSeed;
  return s;
}

ExperimentSpec dynamic_spec() {
  ExperimentSpec s;
  s.kind = ExperimentKind::cardy_dynamic;
  s.network = "manhattan-torus:4x4";
  s.theta = std::numbers::pi / 4;
  s.edge = 0;
  s.t_max = 12;
  s.replicas = 100000;
  s.seed = kSeed;
  return s;
}

ExperimentSpec transmission_spec() {
  ExperimentSpec s;
  s.kind = ExperimentKind::transmission;
  s.model = Model::mirror;
  s.densities = {0.5};
  s.half_widths = {1, 2, 3};
  s.replicas = 10000;
  s.max_length = 64;
  s.seed = kSeed;
  return s;
}

Outcome plaquette_limit() {
  const auto sweep = closure_sweep(plane_sweep({1.0}, 1000, 1'000'000), 0);
  const auto& r = sweep.rows[0];
  const bool ok = r.closed.mean == 1.0 && r.period.mean == 4.0 && r.period.std_error == 0.0;
  return {ok, fmt("closed=%.4f mean_period=%.4f", r.closed.mean, r.period.mean)};
}

Outcome ballistic_limit() {
  const std::uint64_t cap = 10000;
  const auto spec = plane_sweep({0.0}, 1000, cap);
  const auto sweep = closure_sweep(spec, 0);
  std::uint64_t horizontal = 0, at_cap = 0;
  for (const auto& o : sweep.open) {
    if (!is_horizontal(o.start.dir)) continue;
    ++horizontal;
    EnvironmentSpec env;
    env.model = Model::manhattan;
    env.density = 0.0;
    env.seed = o.env_seed;
    TraceOptions opt;
    opt.max_steps = cap;
    const auto rec = trace(env, o.start, opt);
    if (rec.max_abs_x == static_cast<std::int64_t>(cap)) ++at_cap;
  }
  const bool ok = sweep.rows[0].closed.mean == 0.0 && horizontal > 0 && at_cap == horizontal;
  return {ok, fmt("closed=%.4f horizontal_starts=%llu at_cap=%llu", sweep.rows[0].closed.mean,
                  static_cast<unsigned long long>(horizontal), static_cast<unsigned long long>(at_cap))};
}

Outcome bijection_suite() {
  const Geometry g = Geometry::torus(6, 6);
  std::uint64_t failures = 0, orbits = 0;
  for (Model m : {Model::manhattan, Model::mirror}) {
    std::vector<DirectedEdge> edges;
    for (std::int64_t x = 0; x < 6; ++x)
      for (std::int64_t y = 0; y < 6; ++y)
        for (Direction d : {Direction::E, Direction::N, Direction::W, Direction::S})
          if (m == Model::mirror || is_manhattan_valid({{x, y}, d})) edges.push_back({{x, y}, d});
    const std::set<DirectedEdge> all(edges.begin(), edges.end());
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      EnvironmentSpec env;
      env.model = m;
      env.geometry = g;
      env.density = 0.5;
      env.seed = seed;
      std::set<DirectedEdge> image;
      for (const auto& e : edges) image.insert(step(env, e));
      if (image != all) ++failures;
      for (const auto& start : edges) {
        TraceOptions opt;
        opt.max_steps = edges.size();
        const auto rec = trace(env, start, opt);
        ++orbits;
        if (rec.status != TraceStatus::closed) ++failures;
      }
    }
  }
  return {failures == 0, fmt("orbits=%llu failures=%llu", static_cast<unsigned long long>(orbits),
                             static_cast<unsigned long long>(failures))};
}

Outcome odd_cylinder_parity() {
  const auto a = exhaustive_parity_scan(3, 4, 0);
  const auto b = exhaustive_parity_scan(1, 6, 0);
  const auto c = exhaustive_parity_scan(2, 2, 0);
  const bool ok = a.configurations == 531441 && a.min_crossings >= 1 && b.min_crossings >= 1 && c.min_crossings == 0 &&
                  !c.witnesses.empty();
  return {ok, fmt("3x4: configs=%llu min=%d; 1x6: min=%d; 2x2: min=%d witness=%llu",
                  static_cast<unsigned long long>(a.configurations), a.min_crossings, b.min_crossings,
                  c.min_crossings, static_cast<unsigned long long>(c.witnesses.empty() ? 0 : c.witnesses[0]))};
}

Outcome escape_profile_check() {
  const auto rows = escape_profile(escape_spec(), 0);
  const double golden = std::stod(fixture::read_keys("escape_profile.txt").at("min_length_times_probability"));
  bool positive = true;
  for (const auto& r : rows) positive = positive && r.reach.mean > 0.0;
  const double m = min_scaled_escape(rows);
  const bool ok = positive && m >= golden / 2 && m <= golden * 2;
  return {ok, fmt("P(10)=%.4f P(20)=%.4f P(40)=%.4f min L*P=%.3f golden=%.3f", rows[0].reach.mean,
                  rows[1].reach.mean, rows[2].reach.mean, m, golden)};
}

Outcome ring_green() {
  const auto rows = cardy_green(ring_green_spec(), 0);
  bool ok = true;
  std::string detail;
  for (const auto& r : rows) {
    const double want = 2.0 - std::pow(r.z, 4);
    const double dev = std::abs(r.measured.value.real() - want) / r.measured.std_error;
    ok = ok && dev <= 3.0;
    detail += fmt("z=%.1f: %.6f +- %.6f vs %.6f (%.2f se); ", r.z, r.measured.value.real(), r.measured.std_error,
                  want, dev);
  }
  return {ok, detail};
}

Outcome calibration_transfer() {
  const std::vector<double> zs{0.2, 0.3, 0.4, 0.5};
  CalibrationOptions opt;
  opt.samples = 100000;
  opt.seed = kSeed;
  const auto cal = calibrate_identity(make_ring(), 0, zs, opt);
  const auto torus = make_manhattan_torus(4, 4, 0.0);
  const double z = 0.5;
  const double predicted = cal.predict(torus, 0, z, 8);
  const auto measured = averaged_green(torus, 0, z, 100000, kSeed + 100);
  const double dev = std::abs(measured.value.real() - predicted) / measured.std_error;
  const bool ok = cal.accepted && cal.best.s == 2 && dev <= 3.0;
  return {ok, fmt("fit a=%.4f b=%.4f s=%d; torus %.6f +- %.6f vs prediction %.6f (2-z^8=%.6f), %.2f se", cal.best.a,
                  cal.best.b, cal.best.s, measured.value.real(), measured.std_error, predicted,
                  2.0 - std::pow(z, 8), dev)};
}

Outcome dynamical_identity() {
  const auto cmp = cardy_dynamic(dynamic_spec(), 0);
  std::uint64_t bad = 0;
  int first_bad_t = -1;
  double worst = 0.0;
  for (const auto& r : cmp.rows) {
    const double diff = std::abs(r.mean - r.exact);
    // some amplitudes are deterministic, so the standard error can vanish
    if (diff > 3.0 * r.std_error + 1e-9) {
      ++bad;
      if (first_bad_t < 0 || r.t < first_bad_t) first_bad_t = r.t;
    }
    worst = std::max(worst, diff);
  }
  return {bad == 0, fmt("cells=%zu mismatched=%llu first_mismatch_t=%d max_abs_diff=%.4f", cmp.rows.size(),
                        static_cast<unsigned long long>(bad), first_bad_t, worst)};
}

Outcome walk_pinball() {
  ExperimentSpec s;
  s.kind = ExperimentKind::walk_vs_pinball;
  s.model = Model::manhattan;
  s.densities = {0.2, 0.5, 0.8};
  s.replicas = 100000;
  s.max_steps = 10000;
  s.seed = kSeed;
  const auto rows = walk_vs_pinball(s, 0);
  bool ok = true;
  std::string detail;
  for (const auto& r : rows) {
    ok = ok && r.ks_statistic < r.ks_critical;
    detail += fmt("r=%.1f: D=%.5f crit=%.5f; ", r.density, r.ks_statistic, r.ks_critical);
  }
  return {ok, detail};
}

Outcome localized_regime() {
  const auto sweep = closure_sweep(plane_sweep({0.55, 0.6, 0.7}, 10000, 1'000'000), 0);
  std::string detail;
  for (const auto& r : sweep.rows) detail += fmt("r=%.2f closed=%.4f max|x|=%lld; ", r.density, r.closed.mean,
                                                 static_cast<long long>(r.max_abs_x_max));
  for (const auto& o : sweep.open) {
    detail += fmt("[open r=%.2f replica=%llu env_seed=%llu start=%s] ", o.density,
                  static_cast<unsigned long long>(o.replica), static_cast<unsigned long long>(o.env_seed),
                  to_string(o.start).c_str());
  }
  return {sweep.open.empty(), detail};
}

Outcome transmission_check() {
  const auto curves = transmission(transmission_spec(), 0);
  const auto golden = fixture::read_keys("transmission_xi.txt");
  bool ok = true;
  std::string detail;
  std::int64_t prev = 0;
  for (const auto& c : curves) {
    const std::int64_t want = std::stoll(golden.at("xi_" + std::to_string(c.n)));
    const bool has = c.xi.has_value();
    const std::int64_t xi = has ? *c.xi : -1;
    ok = ok && c.nesting_violations == 0 && has && std::llabs(xi - want) <= 1 && xi >= prev;
    prev = xi;
    detail += fmt("n=%d xi=%lld golden=%lld nesting_violations=%llu; ", c.n, static_cast<long long>(xi),
                  static_cast<long long>(want), static_cast<unsigned long long>(c.nesting_violations));
  }
  return {ok, detail};
}

Outcome determinism() {
  bool ok = true;
  std::string detail;
  const std::pair<const char*, ExperimentSpec> cases[] = {{"escape", escape_spec()},
                                                          {"ring-green", ring_green_spec()},
                                                          {"dynamic", dynamic_spec()},
                                                          {"transmission", transmission_spec()}};
  for (const auto& [name, spec] : cases) {
    const bool same = csv(spec, 1) == csv(spec, 8);
    ok = ok && same;
    detail += fmt("%s=%s ", name, same ? "identical" : "DIFFERENT");
  }
  return {ok, detail};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"plaquette limit", plaquette_limit},
      {"ballistic limit", ballistic_limit},
      {"torus bijection", bijection_suite},
      {"odd-cylinder parity", odd_cylinder_parity},
      {"escape profile", escape_profile_check},
      {"ring Green closed form", ring_green},
      {"identity calibration transfer", calibration_transfer},
      {"dynamical identity", dynamical_identity},
      {"walk/pinball equality in law", walk_pinball},
      {"localized regime", localized_regime},
      {"transmission monotonicity", transmission_check},
      {"determinism across workers", determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    while (!o.detail.empty() && (o.detail.back() == ' ' || o.detail.back() == ';')) o.detail.pop_back();
    std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of 12 criteria passed\n", 12 - failed);
  return failed == 0 ? 0 : 1;
}
