#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "heartradar/errors.hpp"
#include "heartradar/radar.hpp"
#include "heartradar/synth.hpp"

using namespace heartradar;
constexpr double kPi = std::numbers::pi;

namespace {

synth::CaptureTruth truth_from(std::function<double(double)> d, double duration, double fs = 625.0) {
  synth::CaptureTruth t;
  t.duration = duration;
  t.displacement.dt = 1.0 / fs;
  const auto n = static_cast<std::size_t>(std::llround(duration * fs));
  for (std::size_t i = 0; i < n; ++i) t.displacement.values.push_back(d(static_cast<double>(i) / fs));
  return t;
}

radar::ReducedCube capture(const synth::CaptureTruth& t, double noise_db = -INFINITY, std::size_t n_rx = 4) {
  synth::RadarSynthParams p;
  p.noise_db = noise_db;
  p.config.n_rx = n_rx;
  return synth::synth_reduced_iq(t, p, 3);
}

}  // namespace

TEST_SUITE("radar") {

TEST_CASE("configuration constants") {
  const radar::RadarConfig c;
  CHECK(c.ramp_time() == doctest::Approx(40e-6));
  CHECK(c.range_resolution() == doctest::Approx(3.75e-2).epsilon(1e-3));
  CHECK(c.wavelength() == doctest::Approx(3.8e-3).epsilon(1e-2));
  CHECK(c.adc_rate() == doctest::Approx(1.6e6));
  // (3e8 * 40e-6) / (2 * 4e9) with the exact speed of light.
  CHECK(c.distance_per_hz() == doctest::Approx(1.5e-6).epsilon(1e-3));
  CHECK(c.range_bin_distance(51) == doctest::Approx(0.48).epsilon(5e-3));
  CHECK(c.velocity_resolution(8192) == doctest::Approx(1.45e-4).epsilon(5e-3));
  CHECK(c.temporal_resolution() == doctest::Approx(1.6e-3));
  CHECK(c.max_unambiguous_velocity() == doctest::Approx(625.0 / 2 * c.wavelength() / 2));

  auto bad = c;
  bad.frame_rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.n_rx = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("reduce_chirps keeps chirp 0") {
  radar::IqCube cube;
  cube.config.chirps_per_frame = 3;
  cube.config.samples_per_chirp = 4;
  cube.config.n_rx = 2;
  cube.n_frames = 5;
  cube.data.resize(2 * 5 * 3 * 4);
  for (std::size_t i = 0; i < cube.data.size(); ++i) cube.data[i] = {static_cast<float>(i), -static_cast<float>(i)};
  const auto r = radar::reduce_chirps(cube);
  REQUIRE(r.data.size() == 2 * 5 * 4);
  for (std::size_t rx = 0; rx < 2; ++rx)
    for (std::size_t f = 0; f < 5; ++f)
      for (std::size_t s = 0; s < 4; ++s) REQUIRE(r.at(rx, f, s) == cube.at(rx, f, 0, s));

  cube.config.chirps_per_frame = 1;
  cube.data.resize(2 * 5 * 4);
  const auto same = radar::reduce_chirps(cube);
  CHECK(same.data == cube.data);
}

TEST_CASE("range FFT places a static target at its bin") {
  const auto cube = capture(truth_from([](double) { return 0.0; }, 1.0), -20.0);
  const auto prof = radar::range_fft(cube, 256);
  CHECK(prof.fft_size == 256);
  CHECK(radar::select_brightest_range(prof) == 51);
  CHECK(prof.bin_distance(51) == doctest::Approx(0.48).epsilon(5e-3));
  CHECK_THROWS_AS(radar::range_fft(cube, 32), InvalidArgument);

  synth::RadarSynthParams p;
  p.distance = 0.5;
  const auto at_half = radar::range_fft(synth::synth_reduced_iq(truth_from([](double) { return 0.0; }, 0.5), p, 1), 256);
  const auto bin = radar::select_brightest_range(at_half);
  CHECK(std::abs(at_half.bin_distance(bin) - 0.5) <= at_half.bin_distance(1) / 2);
}

TEST_CASE("brightest range: scaling invariance and lowest-index tie-break") {
  const auto cube = capture(truth_from([](double t) { return 1e-3 * std::sin(t); }, 1.0), -10.0);
  auto prof = radar::range_fft(cube, 256);
  const auto bin = radar::select_brightest_range(prof);
  for (auto& v : prof.data) v *= std::complex<double>(-3.0, 1.5);
  CHECK(radar::select_brightest_range(prof) == bin);

  radar::RangeProfileSeries two;
  two.config.n_rx = 1;
  two.n_frames = 2;
  two.fft_size = 8;
  two.data.assign(16, {});
  for (std::size_t f = 0; f < 2; ++f) {
    two.data[f * 8 + 5] = {0.0, 2.0};
    two.data[f * 8 + 2] = {2.0, 0.0};
  }
  CHECK(radar::select_brightest_range(two) == 2);
}

TEST_CASE("static scene gives zero velocity") {
  const auto cube = capture(truth_from([](double) { return 0.0; }, 4.0), -20.0);
  const auto prof = radar::range_fft(cube, 256);
  const auto v = radar::extract_velocity_argmax(prof, 51);
  const double bin = cube.config.velocity_resolution(8192);
  for (double x : v.values) REQUIRE(std::abs(x) < bin);
}

TEST_CASE("argmax velocity recovers a sinusoidal displacement") {
  // d = 0.1 mm sin(2 pi 1.2 t): v = 2 pi 1.2 * 1e-4 cos(...) ~ 7.5e-4 m/s.
  const double f = 1.2, amp = 1e-4, fs = 625.0;
  const auto cube = capture(truth_from([&](double t) { return amp * std::sin(2 * kPi * f * t); }, 10.0));
  const auto prof = radar::range_fft(cube, 256);
  const radar::ArgmaxParams params;
  const auto v = radar::extract_velocity_argmax(prof, 51, params);
  const double bin = cube.config.velocity_resolution(8192);

  // Expected output: the analytic velocity scaled by the two moving-average
  // gains, G(N) = sin(pi f N / fs) / (N sin(pi f / fs)).
  auto gain = [&](double n) { return std::sin(kPi * f * n / fs) / (n * std::sin(kPi * f / fs)); };
  const double g = gain(31) * (1.0 - gain(1251));
  std::size_t checked = 0;
  for (std::size_t i = 700; i + 700 < v.size(); ++i) {
    const double truth = 2 * kPi * f * amp * std::cos(2 * kPi * f * v.time(i)) * g;
    REQUIRE(std::abs(v.values[i] - truth) <= 2 * bin);
    ++checked;
  }
  CHECK(checked > 4000);
  for (double x : v.values) CHECK(std::abs(x) < cube.config.max_unambiguous_velocity());
}

TEST_CASE("summing antennas keeps the per-step argmax on a boresight target") {
  const auto t = truth_from([](double x) { return 2e-4 * std::sin(2 * kPi * 1.1 * x) + 1e-3 * std::sin(2 * kPi * 0.2 * x); }, 2.0);
  const auto one = radar::argmax_velocity_raw(radar::range_fft(capture(t, -INFINITY, 1), 256), 51, {});
  const auto two = radar::argmax_velocity_raw(radar::range_fft(capture(t, -INFINITY, 2), 256), 51, {});
  const auto four = radar::argmax_velocity_raw(radar::range_fft(capture(t, -INFINITY, 4), 256), 51, {});
  CHECK(one.values == two.values);
  CHECK(one.values == four.values);
}

TEST_CASE("phase method follows a half-wavelength ramp") {
  const double lambda = radar::RadarConfig{}.wavelength();
  const double duration = 2.0;
  const auto cube = capture(truth_from([&](double t) { return lambda / 2 * t / duration; }, duration));
  const auto d = radar::phase_displacement(radar::range_fft(cube, 256), 51);
  CHECK(d.values.front() == 0.0);
  const double expected = lambda / 2 * d.end_time() / duration;
  CHECK(d.values.back() == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("a phase step of pi makes a velocity spike of lambda/8 * frame_rate") {
  // The pi step is a lambda/4 displacement jump; the central difference
  // spreads it over two samples, so the spike is (lambda/4) * fs / 2.
  radar::RangeProfileSeries prof;
  prof.config.n_rx = 1;
  prof.n_frames = 3000;
  prof.fft_size = 1;
  for (std::size_t f = 0; f < prof.n_frames; ++f) prof.data.push_back(std::polar(1.0, f < 1500 ? 0.0 : kPi));
  const auto v = radar::extract_velocity_phase(prof, 0);
  double peak = 0.0;
  for (double x : v.values) peak = std::max(peak, std::abs(x));
  CHECK(peak == doctest::Approx(prof.config.wavelength() / 8 * prof.config.frame_rate).epsilon(0.01));
}

TEST_CASE("antenna phase difference") {
  const double lambda = radar::RadarConfig{}.wavelength();
  CHECK(radar::antenna_phase_difference(0.5, lambda / 2, {0.0}, lambda) == doctest::Approx(0.0));
  const double theta = 0.3, r = 1000.0;
  CHECK(radar::antenna_phase_difference(r * std::cos(theta), lambda / 2, {r * std::sin(theta)}, lambda) ==
        doctest::Approx(kPi * std::sin(theta)).epsilon(1e-4));
  const radar::PairGeometry g{0.1};
  CHECK(radar::antenna_phase_difference(0.5, lambda / 2, g, lambda) <
        radar::antenna_phase_difference(0.1, lambda / 2, g, lambda));
  double prev = INFINITY;
  for (double d = 0.05; d < 1.0; d += 0.05) {
    const double x = radar::antenna_phase_difference(d, lambda / 2, g, lambda);
    CHECK(x < prev);
    prev = x;
  }
  CHECK_THROWS_AS(radar::antenna_phase_difference(0.0, lambda / 2, g, lambda), InvalidArgument);
}

TEST_CASE("packet loss injection") {
  radar::IqCube cube;
  cube.config.chirps_per_frame = 2;
  cube.config.samples_per_chirp = 4;
  cube.n_frames = 250;
  cube.data.assign(cube.n_packets() * 8, {1.0f, 1.0f});

  const auto none = radar::inject_packet_loss(cube, 0.0, 9);
  CHECK(none.data == cube.data);
  CHECK(std::count(none.loss_mask.begin(), none.loss_mask.end(), 1) == 0);

  const auto all = radar::inject_packet_loss(cube, 1.0, 9);
  CHECK(std::all_of(all.data.begin(), all.data.end(), [](auto v) { return v == std::complex<float>{}; }));

  const auto some = radar::inject_packet_loss(cube, 0.01, 9);
  CHECK(std::count(some.loss_mask.begin(), some.loss_mask.end(), 1) == 10);
  std::size_t zeros = 0;
  for (std::size_t p = 0; p < cube.n_packets(); ++p) {
    const bool lost = some.loss_mask[p] == 1;
    for (std::size_t k = 0; k < 8; ++k) REQUIRE((some.data[p * 8 + k] == std::complex<float>{}) == lost);
    zeros += lost;
  }
  CHECK(zeros == 10);
  CHECK(radar::inject_packet_loss(cube, 0.01, 9).data == some.data);
  CHECK(radar::choose_lost_packets(1000, 0.01, 9) != radar::choose_lost_packets(1000, 0.01, 10));
  CHECK_THROWS_AS(radar::inject_packet_loss(cube, 1.5, 9), InvalidArgument);
}

TEST_CASE("an all-zero capture has no target") {
  radar::ReducedCube cube;
  cube.n_frames = 2000;
  cube.data.assign(cube.n_packets() * cube.config.samples_per_chirp, {});
  CHECK_THROWS_AS(radar::process_capture(cube), NoTarget);
}

TEST_CASE("processing is deterministic") {
  const auto t = synth::synth_displacement({}, 4.0, 625.0, 5);
  synth::RadarSynthParams p;
  const auto cube = synth::synth_reduced_iq(t, p, 5);
  const auto a = radar::process_capture(cube);
  const auto b = radar::process_capture(cube);
  CHECK(a.velocity.values == b.velocity.values);
  CHECK(a.velocity_phase.values == b.velocity_phase.values);
  CHECK(a.range_bin == 51);
  CHECK(a.velocity.dt == doctest::Approx(1.0 / 625.0));
}

}  // TEST_SUITE
