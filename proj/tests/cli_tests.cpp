#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const char* kCli = HAPSISAC_CLI_PATH;
const std::string kDesk = std::string(HAPSISAC_TEST_DATA_DIR) + "/desk.json";

int run(const std::string& args) {
  const int rc = std::system((std::string(kCli) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  fs::path path;
  TempDir(const char* tag) : path(fs::temp_directory_path() / tag) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("validate: good file accepted, bad flag rejected") {
  CHECK(run("validate --scenario " + kDesk) == 0);
  CHECK(run("validate --scenario " + kDesk + " --no-such-flag") == 64);
  CHECK(run("frobnicate") == 64);
  CHECK(run("") == 64);
}

TEST_CASE("validate: schema and invariant failures are non-zero") {
  TempDir tmp("hapsisac_cli_bad");
  fs::create_directories(tmp.path);
  const fs::path bad = tmp.path / "bad.json";
  std::ofstream(bad) << R"({"users": [], "targets": [{"x": 1, "y": 0}]})";
  CHECK(run("validate --scenario " + bad.string()) != 0);
  const fs::path nojson = tmp.path / "nope.json";
  std::ofstream(nojson) << "{not json";
  CHECK(run("validate --scenario " + nojson.string()) != 0);
}

TEST_CASE("sweep without a value list is a usage error") {
  CHECK(run("sweep --scenario " + kDesk) == 64);
  CHECK(run("sweep --scenario " + kDesk + " --pmax 5 --gamma 1e-8") == 64);
}

TEST_CASE("static solve artifacts are byte-stable across runs") {
  TempDir a("hapsisac_cli_det_a");
  TempDir b("hapsisac_cli_det_b");
  const std::string grid = " --nx 3 --ny 1 --z-step 10000";
  REQUIRE(run("solve-static --scenario " + kDesk + grid + " --out " +
              a.path.string()) == 0);
  REQUIRE(run("solve-static --scenario " + kDesk + grid + " --out " +
              b.path.string()) == 0);
  const std::string ra = slurp(a.path / "solve-static.result.json");
  const std::string rb = slurp(b.path / "solve-static.result.json");
  REQUIRE(!ra.empty());
  CHECK(ra == rb);
  // Traces carry wall-clock columns, so only the result JSON is pinned.
  CHECK(fs::exists(a.path / "grid.csv"));
  CHECK(fs::exists(a.path / "trace.csv"));
}

TEST_CASE("report replays stored artifacts offline") {
  TempDir dir("hapsisac_cli_report");
  const std::string grid = " --nx 3 --ny 1 --z-step 10000";
  REQUIRE(run("solve-static --scenario " + kDesk + grid + " --out " +
              dir.path.string()) == 0);
  CHECK(run("report --out " + dir.path.string()) == 0);
  const std::string table = slurp(dir.path / "report.csv");
  CHECK(table.find("solve-static") != std::string::npos);
  CHECK(run("report --out /no/such/dir") == 64);
}
