#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "heartradar/errors.hpp"
#include "heartradar/io.hpp"
#include "heartradar/synth.hpp"

using namespace heartradar;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "heartradar_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

radar::IqCube small_cube(std::uint64_t seed) {
  synth::RadarSynthParams p;
  p.config.chirps_per_frame = 2;
  p.config.n_rx = 3;
  const auto t = synth::synth_displacement({}, 0.2, p.config.frame_rate, seed);
  return synth::synth_radar_iq(t, p, seed);
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("IQ cube round trip is bit identical") {
  const auto cube = small_cube(1);
  const auto path = scratch("cube.bin");
  io::write_iq_cube(path, cube);
  CHECK(fs::file_size(path) == cube.data.size() * 8);
  CHECK_FALSE(fs::exists(path.string() + ".mask.json"));

  const auto back = io::load_capture(path);
  CHECK(back.n_frames == cube.n_frames);
  CHECK(back.config.n_rx == 3);
  CHECK(back.config.chirps_per_frame == 2);
  REQUIRE(back.data.size() == cube.data.size());
  CHECK(std::memcmp(back.data.data(), cube.data.data(), cube.data.size() * sizeof(cube.data[0])) == 0);

  const auto reduced = io::load_reduced_capture(path);
  const auto expected = radar::reduce_chirps(cube);
  REQUIRE(reduced.data.size() == expected.data.size());
  CHECK(std::memcmp(reduced.data.data(), expected.data.data(), expected.data.size() * sizeof(expected.data[0])) == 0);
}

TEST_CASE("truncated capture names the shortfall") {
  const auto cube = small_cube(2);
  const auto path = scratch("short.bin");
  io::write_iq_cube(path, cube);
  const auto full = fs::file_size(path);
  fs::resize_file(path, full - 8);
  try {
    io::load_capture(path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(std::to_string(full)) != std::string::npos);
    CHECK(msg.find(std::to_string(full - 8)) != std::string::npos);
  }
  CHECK_THROWS_AS(io::load_reduced_capture(path), FormatError);
}

TEST_CASE("mask zeroes the listed packets on read") {
  auto cube = small_cube(3);
  const auto path = scratch("masked.bin");
  io::write_iq_cube(path, cube);
  io::write_json(path.string() + ".mask.json", io::Json{{"lost_packets", {{2, 10}}}});

  const auto back = io::load_capture(path);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t s = 0; s < 64; ++s) CHECK(back.at(2, 10, c, s) == std::complex<float>{});
  }
  CHECK(back.at(2, 11, 0, 0) == cube.at(2, 11, 0, 0));
  CHECK(back.at(1, 10, 0, 0) == cube.at(1, 10, 0, 0));
  CHECK(back.loss_mask[2 * back.n_frames + 10] == 1);
  const auto reduced = io::load_reduced_capture(path);
  CHECK(reduced.at(2, 10, 5) == std::complex<float>{});

  io::write_json(path.string() + ".mask.json", io::Json{{"lost_packets", {{7, 0}}}});
  CHECK_THROWS_AS(io::load_capture(path), FormatError);

  // Writing a cube with a mask produces the same sidecar.
  cube = radar::inject_packet_loss(cube, 0.1, 5);
  io::write_iq_cube(path, cube);
  const auto again = io::load_capture(path);
  CHECK(again.loss_mask == cube.loss_mask);
}

TEST_CASE("ECG CSV round trip") {
  synth::SubjectParams s;
  const auto t = synth::synth_displacement(s, 3, 625, 4);
  const auto rec = synth::synth_ecg(t, 0.5, 2.0, {}, 4);
  const auto path = scratch("ecg.csv");
  io::write_ecg_csv(path, rec);
  const auto back = io::read_ecg_csv(path);
  CHECK(back.sample_rate == rec.sample_rate);
  CHECK(back.t0 == doctest::Approx(0.5).epsilon(1e-9));
  REQUIRE(back.leads.size() == rec.leads.size());
  for (const auto& [lead, v] : rec.leads) {
    const auto& w = back.lead(lead);
    REQUIRE(w.size() == v.size());
    for (std::size_t i = 0; i < v.size(); ++i) REQUIRE(std::abs(w[i] - v[i]) <= 1e-9 * std::max(1.0, std::abs(v[i])));
  }

  io::write_text(path, "t,I\n0,1\n0.001,x\n");
  CHECK_THROWS_AS(io::read_ecg_csv(path), FormatError);
  io::write_text(path, "t,I,I\n0,1,1\n0.001,1,1\n");
  CHECK_THROWS_AS(io::read_ecg_csv(path), FormatError);
}

TEST_CASE("velocity CSV round trip") {
  VelocitySeries v{0.0256, 1.0 / 625.0, {}};
  for (int i = 0; i < 2000; ++i) v.values.push_back(1e-3 * std::sin(0.01 * i));
  const auto path = scratch("v.csv");
  io::write_series_csv(path, v, "velocity");
  const auto back = io::read_velocity_csv(path);
  CHECK(back.t0 == doctest::Approx(v.t0).epsilon(1e-9));
  CHECK(back.dt == doctest::Approx(v.dt).epsilon(1e-9));
  REQUIRE(back.size() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i) REQUIRE(std::abs(back.values[i] - v.values[i]) <= 1e-12);

  io::write_text(path, "t,v\n0,1\n1,2\n5,3\n");
  CHECK_THROWS_AS(io::read_velocity_csv(path), FormatError);
}

TEST_CASE("number format") {
  CHECK(io::format_number(1.0) == "1.000000000e+00");
  CHECK(io::format_number(-0.00125) == "-1.250000000e-03");
}

TEST_CASE("JSON converters round trip") {
  ecg::WaveAnnotations a;
  a.p_times = {0.8, 1.8};
  a.r_times = {1.0, 2.0};
  a.t_times = {1.3, 2.3};
  a.impulse_time = 0.5;
  a.outliers.push_back({2.7, 0.01, 0.02, 5400});
  const auto b = io::annotations_from_json(io::annotations_to_json(a));
  CHECK(b.p_times == a.p_times);
  CHECK(b.r_times == a.r_times);
  CHECK(b.t_times == a.t_times);
  CHECK(b.impulse_time == a.impulse_time);
  REQUIRE(b.outliers.size() == 1);
  CHECK(b.outliers[0].time == 2.7);

  const auto t = synth::synth_displacement({}, 5, 625, 6);
  const auto u = io::truth_from_json(io::truth_to_json(t, true));
  CHECK(u.heartbeat_times == t.heartbeat_times);
  CHECK(u.systole_times == t.systole_times);
  CHECK(u.displacement.values == t.displacement.values);
  CHECK(u.seed == t.seed);
  CHECK_FALSE(u.impulse_time.has_value());

  const auto path = scratch("truth.json");
  io::write_json(path, io::truth_to_json(t));
  CHECK(io::truth_from_json(io::read_json(path)).heartbeat_times == t.heartbeat_times);
  io::write_text(path, "{not json");
  CHECK_THROWS_AS(io::read_json(path), FormatError);
}

TEST_CASE("radar config JSON") {
  radar::RadarConfig c;
  c.n_rx = 2;
  c.range_fft_size = 128;
  const auto back = io::radar_config_from_json(io::radar_config_to_json(c));
  CHECK(back.n_rx == 2);
  CHECK(back.range_fft_size == 128);
  CHECK(back.f_center == c.f_center);
  CHECK_THROWS_AS(io::radar_config_from_json(io::Json{{"n_antennas", 3}}), InvalidArgument);
  CHECK_THROWS_AS(io::radar_config_from_json(io::Json{{"frame_rate", -1.0}}), InvalidArgument);
}

TEST_CASE("sha256 of known vectors") {
  CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("provenance is deterministic") {
  const auto dir = scratch("prov");
  fs::create_directories(dir);
  const auto input = dir / "input.txt";
  io::write_text(input, "abc");
  io::write_provenance(dir, "radar", 7, io::Json{{"a", 1}}, {input});
  const auto first = io::read_text(dir / "provenance.json");
  io::write_provenance(dir, "radar", 7, io::Json{{"a", 1}}, {input});
  CHECK(io::read_text(dir / "provenance.json") == first);
  const auto j = io::read_json(dir / "provenance.json");
  CHECK(j.at("inputs")[0].at("sha256") == io::sha256_hex("abc"));
  CHECK(j.at("seed") == 7);
  CHECK_FALSE(j.contains("timestamp"));
}

}  // TEST_SUITE
