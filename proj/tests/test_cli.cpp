#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct ScratchDir {
  fs::path dir = fs::temp_directory_path() / ("mlab_cli_" + std::to_string(::getpid()));
  ScratchDir() { fs::create_directories(dir); }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

fs::path scratch() {
  static ScratchDir scratch_dir;
  static int counter = 0;
  return scratch_dir.dir / std::to_string(counter++);
}

Run run(const std::string& args, const std::string& env = "") {
  const fs::path base = scratch();
  const std::string out = base.string() + ".out", err = base.string() + ".err";
  const std::string cmd = env + " '" MLAB_CLI_PATH "' " + args + " >'" + out + "' 2>'" + err + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string write_file(const std::string& text) {
  const fs::path p = scratch();
  std::ofstream(p) << text;
  return p.string();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("trace prints the record and the resolved spec") {
  const auto r = run("trace --model manhattan --density 1 --start 0,0,E");
  CHECK(r.code == 0);
  CHECK(r.out.find("\"status\":\"Closed\"") != std::string::npos);
  CHECK(r.out.find("\"period\":4") != std::string::npos);
  CHECK(r.err.find("model=manhattan;") == 0);
  CHECK(r.err.find("workers") == std::string::npos);
}

TEST_CASE("trace matches the reference record") {
  const auto r = run("trace --model mirror --density 0.5 --seed 42 --start 0,0,E --distinct true");
  CHECK(r.code == 0);
  CHECK(r.out == fixture::read_text("trace_mirror_r0.5_seed42.json"));
}

TEST_CASE("configuration errors exit with 2") {
  const auto odd = run("trace --model manhattan --geometry cylinder:3");
  CHECK(odd.code == 2);
  CHECK(odd.err == "error: manhattan requires even width\n");
  CHECK(odd.out.empty());

  CHECK(run("trace --no-such-flag 1").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("trace --density 1.5").code == 2);
  CHECK(run("closure-sweep --replicas zero").code == 2);

  const auto bad_key = run("trace --config " + write_file("model = mirror\ncolour = red\n"));
  CHECK(bad_key.code == 2);
  CHECK(bad_key.err.find("colour") != std::string::npos);
  CHECK(run("trace --config /nonexistent/file").code == 2);
}

TEST_CASE("a failed calibration exits with 1 after printing its fits") {
  const auto r = run("cardy-calibrate --network manhattan-torus:2x2 --theta 0.3 --samples 2000 --z 0.3,0.5,0.7,0.85 "
                     "--max-len 12");
  CHECK(r.code == 1);
  CHECK(first_line(r.out).starts_with("s,a,"));
  CHECK(r.err.find("calibration failed") != std::string::npos);
}

TEST_CASE("resolved spec round trips through a config file") {
  const std::string args = "closure-sweep --model mirror --density 0.6,0.7 --replicas 50 --seed 5 --max-steps 20000";
  const auto first = run(args);
  REQUIRE(first.code == 0);
  const auto again = run("closure-sweep --config " + write_file(first.err));
  CHECK(again.code == 0);
  CHECK(again.out == first.out);
  CHECK(again.err == first.err);
}

TEST_CASE("flags override the config file") {
  const std::string cfg = write_file("# comment\nreplicas = 20 ; seed = 3\ndensity=0.5\n");
  const auto r = run("closure-sweep --config " + cfg + " --seed 4");
  REQUIRE(r.code == 0);
  CHECK(r.err.find("replicas=20") != std::string::npos);
  CHECK(r.err.find("seed=4") != std::string::npos);
  CHECK(r.out.find(" seed=4 ") != std::string::npos);
}

TEST_CASE("worker count from flag or environment does not change output") {
  const std::string args = "escape-profile --replicas 300 --lengths 0,5,10";
  const auto one = run(args + " --workers 1");
  const auto many = run(args + " --workers 8");
  const auto env = run(args, "MANHATTAN_LAB_WORKERS=3");
  REQUIRE(one.code == 0);
  CHECK(many.out == one.out);
  CHECK(env.out == one.out);
  CHECK(run(args, "MANHATTAN_LAB_WORKERS=lots").code == 2);
}

TEST_CASE("csv provenance line") {
  const auto r = run("escape-profile --replicas 100 --lengths 4 --seed 12");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string header, prov;
  std::getline(in, header);
  std::getline(in, prov);
  CHECK(header.starts_with("geometry,"));
  CHECK(prov.starts_with("# spec=kind=escape-profile;"));
  CHECK(prov.ends_with(" seed=12 version=0.1.0"));
}

TEST_CASE("rng vectors match the reference file") {
  const auto r = run("rng-vectors --seed 7");
  CHECK(r.code == 0);
  CHECK(r.out == fixture::read_text("rng_vectors.txt"));
}

TEST_CASE("parity scan and cut pattern") {
  const auto scan = run("parity-scan --width 3 --length 4");
  CHECK(scan.code == 0);
  CHECK(scan.out.find("min_crossings=1\n") != std::string::npos);
  CHECK(scan.out.find("witness=") != std::string::npos);

  const auto blocked = run("parity-scan --width 2 --length 2 --witnesses 1");
  CHECK(blocked.out.find("min_crossings=0\n") != std::string::npos);
  CHECK(blocked.out.find("witness=5 ") != std::string::npos);

  CHECK(run("parity-scan --width 4 --length 4").code == 2);

  const auto cut = run("cut-pattern --model mirror --geometry cylinder:3 --density 0 --x-min 0 --x-max 2");
  CHECK(cut.code == 0);
  CHECK(cut.out.find("pairs=(L0,R0),(L1,R1),(L2,R2)") != std::string::npos);
  CHECK(cut.out.find("crossings=3") != std::string::npos);
}

TEST_CASE("trail and green subcommands") {
  const auto trails = run("cardy-trails --network ring --max-len 4");
  CHECK(trails.code == 0);
  CHECK(trails.out.find('{') != std::string::npos);

  const auto green = run("cardy-green --network ring --z 0.3 --samples 2000");
  CHECK(green.code == 0);
  CHECK(first_line(green.out).find("z") != std::string::npos);
}

TEST_CASE("walk samples") {
  const auto w = run("walk-sample --theta auto --density 1 --samples 3");
  CHECK(w.code == 0);
  CHECK(w.out.find("\"period\":4") != std::string::npos);
}
