#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "heartradar/errors.hpp"
#include "heartradar/metrics.hpp"
#include "heartradar/radar.hpp"
#include "heartradar/synth.hpp"
#include "oracles.hpp"

using namespace heartradar;
constexpr double kPi = std::numbers::pi;

namespace {

VelocitySeries series(std::vector<double> v, double t0 = 0.0, double dt = 1.0 / 625.0) {
  return VelocitySeries{t0, dt, std::move(v)};
}

// Downward spikes every `period` seconds on a slow swell plus faint noise.
// A pure sinusoid's minima have prominence 2A, below the 3 MAD = 2.12A cut.
VelocitySeries spikes(double period, double duration, std::uint64_t seed) {
  const double fs = 625.0;
  auto v = oracle::random_real(static_cast<std::size_t>(duration * fs), seed);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = 1e-7 * v[i] + 1e-3 * std::sin(2 * kPi * 0.23 * static_cast<double>(i) / fs);
  }
  for (double t = period / 2; t < duration; t += period) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double z = (static_cast<double>(i) / fs - t) / 0.02;
      v[i] -= 5e-3 * std::exp(-0.5 * z * z);
    }
  }
  return series(std::move(v));
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("downward peaks on a spike train") {
  const auto v = spikes(1.0, 30.0, 1);
  const auto p = metrics::detect_downward_peaks(v);
  REQUIRE(p.size() == 30);
  for (std::size_t k = 0; k < p.size(); ++k) CHECK(p[k] == doctest::Approx(0.5 + static_cast<double>(k)).epsilon(0.01 / (0.5 + k)));
  for (std::size_t k = 1; k < p.size(); ++k) CHECK(p[k] > p[k - 1]);

  auto scaled = v;
  for (auto& x : scaled.values) x *= 37.0;
  const auto q = metrics::detect_downward_peaks(scaled);
  REQUIRE(q.size() == p.size());
  for (std::size_t k = 0; k < p.size(); ++k) CHECK(std::abs(q[k] - p[k]) <= 1e-12);

  CHECK(metrics::detect_downward_peaks(series(std::vector<double>(1000, 0.0))).empty());
}

TEST_CASE("downward peaks on a 60 bpm synthetic capture") {
  synth::SubjectParams s;
  s.heart_rate_bpm = 60.0;
  const auto t = synth::synth_displacement(s, 30, 625, 2);
  synth::RadarSynthParams p;
  const auto res = radar::process_capture(synth::synth_reduced_iq(t, p, 2));
  const auto peaks = metrics::detect_downward_peaks(res.velocity);
  CHECK(peaks.size() == 30);
  for (std::size_t k = 0; k < std::min(peaks.size(), t.systole_times.size()); ++k) {
    CHECK(std::abs(peaks[k] - t.systole_times[k]) <= 0.010);
  }
}

TEST_CASE("point distance") {
  const auto a = series(oracle::random_real(500, 1));
  const auto b = series(oracle::random_real(500, 2));
  const auto c = series(oracle::random_real(500, 3));
  CHECK(metrics::point_distance(a, a) == 0.0);
  CHECK(metrics::point_distance(a, b) == metrics::point_distance(b, a));
  CHECK(metrics::point_distance(a, b) > 0.0);
  CHECK(metrics::point_distance(a, c) <= metrics::point_distance(a, b) + metrics::point_distance(b, c) + 1e-15);

  auto shifted = a;
  for (auto& x : shifted.values) x += 0.25;
  CHECK(metrics::point_distance(a, shifted) == doctest::Approx(0.25));

  // Overlap only: b starts 100 samples later on the same grid.
  auto late = series(std::vector<double>(a.values.begin() + 100, a.values.end()), 100.0 / 625.0);
  CHECK(metrics::point_distance(a, late) == 0.0);

  CHECK_THROWS_AS(metrics::point_distance(a, series(b.values, 0.0, 1.0 / 600.0)), InvalidArgument);
  CHECK_THROWS_AS(metrics::point_distance(a, series(b.values, 100.0)), InvalidArgument);
  CHECK_THROWS_AS(metrics::point_distance(a, series(b.values, 0.5 / 625.0)), InvalidArgument);
}

TEST_CASE("SNR against a clean reference") {
  const auto clean = series(oracle::random_real(20000, 4));
  CHECK(metrics::snr_vs_clean(clean, clean) == INFINITY);

  const auto noise = oracle::random_real(20000, 5);
  auto noisy = clean;
  for (std::size_t i = 0; i < noise.size(); ++i) noisy.values[i] += noise[i];
  const double base = metrics::snr_vs_clean(noisy, clean);
  CHECK(std::abs(base) <= 0.5);

  for (double a : {0.1, 3.0, 10.0}) {
    auto scaled = clean;
    for (std::size_t i = 0; i < noise.size(); ++i) scaled.values[i] += a * noise[i];
    CHECK(metrics::snr_vs_clean(scaled, clean) == doctest::Approx(base - 20.0 * std::log10(a)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(metrics::snr_vs_clean(clean, series(std::vector<double>(20000, 0.0))), UndefinedSnr);
}

TEST_CASE("interval RMSE") {
  const std::vector<double> r{1.0, 1.9, 2.85, 3.9, 4.8, 5.75};
  auto rep = metrics::rmse_intervals(r, r);
  CHECK(rep.rmse_ms == 0.0);
  CHECK(rep.matches.size() == 6);
  CHECK(rep.rows.size() == 5);
  CHECK(rep.rows[0].rr_interval == doctest::Approx(0.9));

  std::vector<double> delayed(r);
  for (auto& x : delayed) x += 0.048;
  CHECK(metrics::rmse_intervals(r, delayed).rmse_ms == doctest::Approx(0.0).epsilon(1e-9));
  // With a delay larger than the window the offset brings the lists together.
  for (auto& x : delayed) x += 1.0;
  CHECK(metrics::rmse_intervals(r, delayed, 1.0).rmse_ms == doctest::Approx(0.0).epsilon(1e-9));

  // Hand computed: one radar time 3 ms late changes two intervals by +-3 ms.
  auto jitter = r;
  jitter[2] += 0.003;
  const auto j = metrics::rmse_intervals(r, jitter);
  CHECK(j.rmse_ms == doctest::Approx(std::sqrt(2.0 * 9.0 / 5.0)));

  // A missing and a spurious radar peak are reported, not matched.
  std::vector<double> holes{1.0, 1.9, 3.9, 4.8, 5.75, 8.0};
  const auto h = metrics::rmse_intervals(r, holes);
  CHECK(h.unmatched_r == std::vector<double>{2.85});
  CHECK(h.unmatched_radar == std::vector<double>{8.0});

  CHECK_THROWS_AS(metrics::rmse_intervals(r, std::vector<double>{1.0}), InsufficientData);
  CHECK_THROWS_AS(metrics::rmse_intervals(r, std::vector<double>{}), InsufficientData);
}

TEST_CASE("bench on a short capture") {
  const auto t = synth::synth_displacement({}, 10, 625, 3);
  synth::RadarSynthParams p;
  const auto cube = synth::synth_reduced_iq(t, p, 3);
  metrics::BenchParams bp;
  bp.loss_seed = 4;
  const auto rep = metrics::run_bench(cube, bp, std::span<const double>(t.heartbeat_times));
  CHECK(rep.range_bin == 51);
  CHECK(rep.lost_packets == 250);
  CHECK(std::isfinite(rep.snr_argmax_db));
  CHECK(std::isfinite(rep.snr_phase_db));
  CHECK(rep.snr_gap_db == doctest::Approx(rep.snr_argmax_db - rep.snr_phase_db));
  CHECK(rep.point_distance_mean >= 0.0);
  CHECK(rep.phase_spike_ratio > 1.0);
  REQUIRE(rep.intervals.has_value());
  CHECK(rep.intervals->rmse_ms >= 0.0);

  const auto again = metrics::run_bench(cube, bp);
  CHECK(again.snr_argmax_db == rep.snr_argmax_db);
  CHECK(again.snr_phase_db == rep.snr_phase_db);
}

}  // TEST_SUITE
