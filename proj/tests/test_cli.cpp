#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "doctest.h"
#include "heartradar/io.hpp"
#include "heartradar/radar.hpp"

using namespace heartradar;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = HEARTRADAR_TEST_TMP;

int run(const std::string& args, const fs::path& stderr_file = {}) {
  std::string cmd = std::string("\"") + HEARTRADAR_CLI + "\" " + args + " > /dev/null";
  cmd += stderr_file.empty() ? " 2>/dev/null" : " 2>\"" + stderr_file.string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// One chirp per frame keeps the raw capture small; everything downstream
// reads chirp 0 only.
fs::path small_config() {
  fs::create_directories(kRoot);
  const auto path = kRoot / "small.json";
  io::write_json(path, io::Json{{"radar", {{"chirps_per_frame", 1}}}, {"synth", {{"duration", 20.0}}}});
  return path;
}

fs::path fresh(const std::string& name) {
  const auto dir = kRoot / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string common(const fs::path& dir, int seed = 3) {
  return "--seed " + std::to_string(seed) + " --out-dir \"" + dir.string() + "\" --config \"" +
         small_config().string() + "\"";
}

bool chain(const fs::path& dir, const std::string& synth_args) {
  const auto c = common(dir);
  return run("synth " + c + " " + synth_args) == 0 && run("radar " + c) == 0 && run("ecg " + c) == 0 &&
         run("sync " + c) == 0;
}

}  // namespace

TEST_CASE("cli: synth, radar, ecg and sync recover the offset") {
  const auto dir = fresh("offset");
  REQUIRE(chain(dir, "--offset -1"));
  for (const char* f : {"capture.iq", "capture.iq.json", "ecg.csv", "truth.json", "velocity.csv",
                        "radar_events.json", "annotations.json", "sync.json", "distance_curve.svg",
                        "provenance.json"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  const auto sync = io::read_json(dir / "sync.json");
  CHECK(sync.at("method") == "comb");
  CHECK(std::abs(sync.at("best_offset_s").get<double>() + 1.0) <= 0.004 + 1e-9);
}

TEST_CASE("cli: impulse method") {
  const auto dir = fresh("impulse");
  REQUIRE(chain(dir, "--impulse-at 3"));
  const auto sync = io::read_json(dir / "sync.json");
  CHECK(sync.at("method") == "impulse");
  CHECK(sync.at("impulse_time_s").get<double>() == doctest::Approx(3.0).epsilon(0.001 / 3));
  CHECK(std::abs(sync.at("best_offset_s").get<double>()) <= 0.004 + 1e-9);
}

TEST_CASE("cli: empty capture fails with no-target") {
  const auto dir = fresh("empty");
  radar::IqCube cube;
  cube.config.chirps_per_frame = 1;
  cube.n_frames = 2000;
  cube.data.assign(cube.config.n_rx * cube.n_frames * cube.config.samples_per_chirp, {});
  io::write_iq_cube(dir / "capture.iq", cube);
  const auto err = dir / "stderr.txt";
  CHECK(run("radar " + common(dir), err) == 1);
  const auto text = io::read_text(err);
  CHECK(text.rfind("error: no-target:", 0) == 0);
  CHECK(text.find('\n') == text.size() - 1);
}

TEST_CASE("cli: argument errors exit with 2") {
  CHECK(run("synth --duration abc") == 2);
  CHECK(run("nosuchcommand") == 2);
  const auto dir = fresh("missing");
  CHECK(run("radar " + common(dir)) == 1);
}

TEST_CASE("cli: bench at 1% loss") {
  const auto dir = fresh("bench");
  const auto c = common(dir);
  REQUIRE(run("synth " + c) == 0);
  REQUIRE(run("bench " + c + " --loss 0.01 --sweep 0,0.05") == 0);
  const auto b = io::read_json(dir / "bench.json");
  CHECK(b.at("snr_gap_db").get<double>() >= 30.0);
  CHECK(b.at("loss_rate").get<double>() == 0.01);
  CHECK(fs::exists(dir / "loss_sweep.csv"));
}

TEST_CASE("cli: reruns are byte identical") {
  const auto a = fresh("det_a");
  const auto b = fresh("det_b");
  REQUIRE(chain(a, "--offset 0.7"));
  REQUIRE(chain(b, "--offset 0.7"));
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    REQUIRE(fs::exists(b / name));
    CHECK_MESSAGE(io::sha256_file(entry.path()) == io::sha256_file(b / name), name.string());
    ++compared;
  }
  CHECK(compared >= 10);
}
