// End-to-end tests of the gridcast binary: every subcommand against small
// generated fixtures, exit codes, and byte-level determinism of artifacts.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gridcast/data.hpp"
#include "test_util.hpp"

using namespace gridcast;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// The CLI binary sits next to this test tree: build/tests/ -> build/tools/.
std::string cli_path() {
  if (const char* env = std::getenv("GRIDCAST_BIN")) return env;
  const fs::path self = fs::canonical("/proc/self/exe");
  return (self.parent_path().parent_path() / "tools" / "gridcast").string();
}

int run(const std::string& args, const std::string& log = "/dev/null") {
  const std::string cmd = "'" + cli_path() + "' " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_all(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("gridcast_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Sandbox() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string file(const std::string& name) const { return (dir / name).string(); }
};

// One shared hourly fixture spanning the three-year split plus a test year
// tail; built once because tests reuse it heavily.
const std::string& hourly_fixture() {
  static std::string path = [] {
    const fs::path p =
        fs::temp_directory_path() / ("gridcast_fix_" + std::to_string(::getpid()) + ".csv");
    const LoadSeries s = testutil::make_sine_series(3 * 365 * 24 + 40 * 24, {.seed = 42});
    write_series_csv(s, p.string());
    return p.string();
  }();
  return path;
}

void write_config(const std::string& path, const std::string& extra) {
  std::ofstream out(path);
  out << "resolution = hour\n"
      << "dataset = " << hourly_fixture() << "\n"
      << extra;
}

}  // namespace

TEST_CASE("resample: counts, determinism, and exit codes") {
  Sandbox sb;
  LoadSeries minutes = testutil::make_sine_minutes(60 * 5, 3);
  testutil::write_raw_fixture(sb.file("raw.txt"), minutes, {30}, {}, false);

  REQUIRE(run("resample --data " + sb.file("raw.txt") + " --out " + sb.file("r1")) == 0);
  const std::string csv1 = read_all(sb.file("r1") + "/hourly.csv");
  CHECK(count_lines(csv1) == 5 + 1);  // 5 hours + header

  const json report = json::parse(read_all(sb.file("r1") + "/resample_report.json"));
  CHECK(report["rows_read"] == 300);
  CHECK(report["missing_power"] == 1);
  CHECK(report["hours_emitted"] == 5);

  // Rerun: byte-identical output.
  REQUIRE(run("resample --data " + sb.file("raw.txt") + " --out " + sb.file("r2")) == 0);
  CHECK(read_all(sb.file("r2") + "/hourly.csv") == csv1);

  // Missing input: data error.
  CHECK(run("resample --data " + sb.file("nope.txt") + " --out " + sb.file("r3")) == 2);
}

TEST_CASE("train standard: artifacts, determinism, smoke-test budget") {
  Sandbox sb;
  write_config(sb.file("run.cfg"),
               "architecture = standard\nlayers = 1\nunits = 4\nunroll_steps = 24\n"
               "epochs = 2\nlearning_rate = 0.003\ndropout = 0\nseed = 7\nwindow = 24\n"
               "horizon = 12\n");

  const auto t0 = std::chrono::steady_clock::now();
  REQUIRE(run("--quiet train --config " + sb.file("run.cfg") + " --out " + sb.file("m1")) == 0);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(seconds < 10.0);  // smoke budget

  CHECK(fs::exists(sb.file("m1") + "/model.ckpt"));
  CHECK(fs::exists(sb.file("m1") + "/train_log.csv"));
  const json metrics = json::parse(read_all(sb.file("m1") + "/metrics.json"));
  CHECK(metrics.contains("rmse_train_final"));
  CHECK(metrics.contains("rmse_test_best"));

  // The log embeds the resolved config and one line per epoch.
  const std::string log = read_all(sb.file("m1") + "/train_log.csv");
  CHECK(log.find("# architecture = standard") != std::string::npos);
  CHECK(log.find("epoch,sse,rmse_train,seconds") != std::string::npos);

  // Same config + seed: identical checkpoint bytes.
  REQUIRE(run("--quiet train --config " + sb.file("run.cfg") + " --out " + sb.file("m2")) == 0);
  CHECK(read_all(sb.file("m1") + "/model.ckpt") == read_all(sb.file("m2") + "/model.ckpt"));

  // Invalid config is a usage error with exhaustive diagnostics.
  std::ofstream bad(sb.file("bad.cfg"));
  bad << "architecture = nope\nlayers = 0\nmystery = 1\n";
  bad.close();
  CHECK(run("train --config " + sb.file("bad.cfg"), sb.file("bad.log")) == 1);
  const std::string diag = read_all(sb.file("bad.log"));
  CHECK(diag.find("mystery") != std::string::npos);
  CHECK(diag.find("layers") != std::string::npos);
}

TEST_CASE("train s2s with pre-training phase, then forecast and eval") {
  Sandbox sb;
  write_config(sb.file("run.cfg"),
               "architecture = s2s\nlayers = 1\nunits = 4\nepochs = 5\n"
               "pretrain_fraction = 0.2\nunroll_steps = 24\nwindow = 24\nhorizon = 12\n"
               "learning_rate = 0.003\ndropout = 0.1\nseed = 11\n");
  REQUIRE(run("--quiet train --config " + sb.file("run.cfg") + " --out " + sb.file("m")) == 0);
  const std::string log = read_all(sb.file("m") + "/train_log.csv");
  CHECK(log.find("pre-train the encoder") != std::string::npos);
  CHECK(count_lines(log.substr(log.find("epoch,sse"))) == 5 + 1);

  // Forecast: horizon rows, header, deterministic bytes, SVG on request.
  const std::string fc_args = "forecast --ckpt " + sb.file("m") + "/model.ckpt --data " +
                              hourly_fixture() +
                              " --from 2010-01-20T00:00:00 --window 24 --horizon 12";
  REQUIRE(run(fc_args + " --out " + sb.file("f1") + " --svg") == 0);
  const std::string csv = read_all(sb.file("f1") + "/forecast.csv");
  CHECK(count_lines(csv) == 12 + 1);
  CHECK(csv.rfind("timestamp,actual,predicted\n", 0) == 0);
  const std::string svg = read_all(sb.file("f1") + "/forecast.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);

  REQUIRE(run(fc_args + " --out " + sb.file("f2")) == 0);
  CHECK(read_all(sb.file("f2") + "/forecast.csv") == csv);

  // Window extending past the series start is a data error.
  CHECK(run("forecast --ckpt " + sb.file("m") + "/model.ckpt --data " + hourly_fixture() +
            " --from 2007-01-01T10:00:00 --window 24 --horizon 4 --out " + sb.file("f3")) ==
        2);

  // Eval emits the flat metrics object with the persistence baseline.
  REQUIRE(run("eval --ckpt " + sb.file("m") + "/model.ckpt --data " + hourly_fixture() +
              " --partition test --out " + sb.file("e1")) == 0);
  const json m = json::parse(read_all(sb.file("e1") + "/metrics.json"));
  for (const char* key : {"rmse_norm", "rmse_kw", "rmse_persistence", "n_blocks",
                          "wall_seconds"}) {
    CHECK(m.contains(key));
  }
  CHECK(m["n_blocks"].get<int>() > 0);
  CHECK(m["rmse_norm"].get<double>() > 0.0);
}

TEST_CASE("eval one-step protocol on a standard checkpoint") {
  Sandbox sb;
  write_config(sb.file("run.cfg"),
               "architecture = standard\nlayers = 1\nunits = 4\nunroll_steps = 24\n"
               "epochs = 1\nlearning_rate = 0.003\ndropout = 0\nseed = 3\nwindow = 24\n"
               "horizon = 12\n");
  REQUIRE(run("--quiet train --config " + sb.file("run.cfg") + " --out " + sb.file("m")) == 0);
  REQUIRE(run("eval --ckpt " + sb.file("m") + "/model.ckpt --data " + hourly_fixture() +
              " --partition test --protocol one_step --out " + sb.file("e")) == 0);
  const json m = json::parse(read_all(sb.file("e") + "/metrics.json"));
  CHECK(m["rmse_norm"].get<double>() > 0.0);
  CHECK(m["rmse_persistence"].get<double>() > 0.0);
}

TEST_CASE("gradcheck through the CLI: pass, corrupted backward, oversize refusal") {
  Sandbox sb;
  CHECK(run("gradcheck --layers 2 --units 4 --steps 5 --variant both --s2s",
            sb.file("gc.log")) == 0);
  const std::string out = read_all(sb.file("gc.log"));
  CHECK(out.find("PASS") != std::string::npos);
  CHECK(out.find("max_rel_err") != std::string::npos);

  CHECK(run("gradcheck --corrupt-backward") == 3);
  CHECK(run("gradcheck --units 50") == 1);
}

TEST_CASE("non-finite training loss aborts with exit 3 and keeps a checkpoint") {
  Sandbox sb;
  write_config(sb.file("run.cfg"),
               "architecture = standard\nlayers = 1\nunits = 4\nunroll_steps = 24\n"
               "epochs = 3\nlearning_rate = 1e50\nclip_threshold = 1e300\ndropout = 0\n"
               "seed = 3\nwindow = 24\nhorizon = 12\n");
  CHECK(run("--quiet train --config " + sb.file("run.cfg") + " --out " + sb.file("m"),
            sb.file("t.log")) == 3);
  CHECK(fs::exists(sb.file("m") + "/model.ckpt"));  // last good state kept
  const std::string err = read_all(sb.file("t.log"));
  CHECK(err.find("non-finite") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run("") == 1);
  CHECK(run("unknown-subcommand") == 1);
  CHECK(run("train") == 1);  // missing --config
}
