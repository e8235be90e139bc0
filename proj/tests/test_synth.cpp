#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "heartradar/dsp.hpp"
#include "heartradar/ecg.hpp"
#include "heartradar/errors.hpp"
#include "heartradar/metrics.hpp"
#include "heartradar/radar.hpp"
#include "heartradar/synth.hpp"
#include "oracles.hpp"

using namespace heartradar;
constexpr double kPi = std::numbers::pi;

namespace {

std::vector<double> intervals(const std::vector<double>& t) {
  std::vector<double> out;
  for (std::size_t k = 1; k < t.size(); ++k) out.push_back(t[k] - t[k - 1]);
  return out;
}

// Least-squares amplitude of a tone at `freq` fitted on irregular samples.
double irregular_tone(const std::vector<double>& t, const std::vector<double>& y, double freq) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss = 0, sc = 0, cc = 0, ys = 0, yc = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double s = std::sin(2 * kPi * freq * t[i]), c = std::cos(2 * kPi * freq * t[i]);
    ss += s * s;
    sc += s * c;
    cc += c * c;
    ys += (y[i] - mean) * s;
    yc += (y[i] - mean) * c;
  }
  const double det = ss * cc - sc * sc;
  return std::hypot((ys * cc - yc * sc) / det, (yc * ss - ys * sc) / det);
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("derived seeds") {
  CHECK(synth::derive_seed(1, 2, 3) == synth::derive_seed(1, 2, 3));
  CHECK(synth::derive_seed(1, 2, 3) != synth::derive_seed(1, 2, 4));
  CHECK(synth::derive_seed(1, 2, 3) != synth::derive_seed(1, 3, 3));
  CHECK(synth::derive_seed(1, 2, 3) != synth::derive_seed(2, 2, 3));
}

TEST_CASE("respiration only is a pure sinusoid") {
  synth::SubjectParams p;
  p.beat_amplitude = 0.0;
  const auto t = synth::synth_displacement(p, 20, 625, 3);
  const double fr = p.resp_rate_bpm / 60.0;
  for (std::size_t i = 0; i < t.displacement.size(); ++i) {
    const double want = p.resp_amplitude * std::sin(2 * kPi * fr * t.displacement.time(i) + t.resp_phase);
    REQUIRE(t.displacement.values[i] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("constant rate gives uniform beats") {
  synth::SubjectParams p;
  p.heart_rate_bpm = 60.0;
  p.hrv_fraction = 0.0;
  const auto t = synth::synth_displacement(p, 60, 625, 1);
  CHECK(t.heartbeat_times.size() == 60);
  for (double iv : intervals(t.heartbeat_times)) CHECK(iv == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("respiratory modulation shows in the intervals") {
  synth::SubjectParams p;
  p.hrv_fraction = 0.05;
  p.resp_rate_bpm = 15.0;
  const auto t = synth::synth_displacement(p, 120, 625, 2);
  const auto iv = intervals(t.heartbeat_times);
  const std::vector<double> at(t.heartbeat_times.begin() + 1, t.heartbeat_times.end());
  double best_f = 0.0, best_a = 0.0;
  for (double f = 0.05; f <= 0.45; f += 0.005) {
    const double a = irregular_tone(at, iv, f);
    if (a > best_a) {
      best_a = a;
      best_f = f;
    }
  }
  CHECK(best_f == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("apnea slows the heart by 10 percent per 30 s") {
  synth::SubjectParams p;
  p.hrv_fraction = 0.0;
  p.apnea = true;
  const auto t = synth::synth_displacement(p, 60, 625, 2);
  const auto iv = intervals(t.heartbeat_times);
  // Rate at t: r0 (1 - 0.1 t / 30). First interval spans ~[0.43, 1.29] s,
  // the ratio of late to early intervals follows the rates at their midpoints.
  const double early = iv.front(), late = iv.back();
  const double t_early = 0.5 * (t.heartbeat_times[0] + t.heartbeat_times[1]);
  const double t_late = 0.5 * (t.heartbeat_times[t.heartbeat_times.size() - 2] + t.heartbeat_times.back());
  CHECK(late / early == doctest::Approx((1 - 0.1 * t_early / 30) / (1 - 0.1 * t_late / 30)).epsilon(0.01));
}

TEST_CASE("truth invariants") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    synth::SubjectParams p;
    p.apnea = seed == 2;
    const auto t = synth::synth_displacement(p, 30, 625, seed);
    for (const auto* list : {&t.heartbeat_times, &t.systole_times, &t.p_wave_times, &t.t_wave_times}) {
      for (std::size_t k = 1; k < list->size(); ++k) REQUIRE((*list)[k] > (*list)[k - 1]);
    }
    for (double d : t.displacement.values) REQUIRE(std::abs(d) < 5e-3);
    CHECK(t.displacement.size() == 30 * 625);
  }
  synth::SubjectParams bad;
  bad.heart_rate_bpm = 0.0;
  CHECK_THROWS_AS(synth::synth_displacement(bad, 10, 625, 1), InvalidArgument);
  CHECK_THROWS_AS(synth::synth_displacement({}, 0.0, 625, 1), InvalidArgument);
}

TEST_CASE("reduced synthesis equals chirp reduction of the full cube") {
  const auto t = synth::synth_displacement({}, 0.5, 625, 4);
  synth::RadarSynthParams p;
  p.config.chirps_per_frame = 4;
  const auto full = synth::synth_radar_iq(t, p, 9);
  const auto reduced = synth::synth_reduced_iq(t, p, 9);
  CHECK(radar::reduce_chirps(full).data == reduced.data);
  CHECK(synth::synth_radar_iq(t, p, 9).data == full.data);
  CHECK(synth::synth_radar_iq(t, p, 10).data != full.data);
  CHECK(full.data.size() == 4 * t.displacement.size() * 4 * 64);
}

TEST_CASE("noise level relative to the echo") {
  const auto t = synth::synth_displacement({}, 1.0, 625, 4);
  synth::RadarSynthParams p;
  p.amplitude = 2.0;
  p.noise_db = -20.0;
  const auto noisy = synth::synth_reduced_iq(t, p, 1);
  p.noise_db = -INFINITY;
  const auto clean = synth::synth_reduced_iq(t, p, 1);
  double power = 0.0;
  for (std::size_t i = 0; i < clean.data.size(); ++i) {
    power += std::norm(std::complex<double>(noisy.data[i]) - std::complex<double>(clean.data[i]));
  }
  power /= static_cast<double>(clean.data.size());
  CHECK(power == doctest::Approx(4.0 * 0.01).epsilon(0.03));
}

TEST_CASE("radar round trip finds every systole within 10 ms") {
  synth::SubjectParams s;
  const auto t = synth::synth_displacement(s, 30, 625, 8);
  synth::RadarSynthParams p;
  p.noise_db = -20.0;
  const auto res = radar::process_capture(synth::synth_reduced_iq(t, p, 8));
  const auto peaks = metrics::detect_downward_peaks(res.velocity);
  std::size_t inside = 0;
  for (double sys : t.systole_times) {
    if (sys < res.velocity.t0 + 0.3 || sys > res.velocity.end_time() - 0.3) continue;
    ++inside;
    double gap = INFINITY;
    for (double x : peaks) gap = std::min(gap, std::abs(x - sys));
    CHECK(gap <= 0.010);
  }
  CHECK(peaks.size() == inside);
}

TEST_CASE("a single beat shows one P, one R and one T peak") {
  synth::CaptureTruth t;
  t.heartbeat_times = {1.0};
  synth::EcgSynthParams p;
  p.noise_mv = 0.0;
  const auto rec = synth::synth_ecg(t, 0.0, 2.0, p, 1);
  const auto peaks = ecg::detect_peaks(rec.lead(ecg::Lead::II), rec.sample_rate);
  REQUIRE(peaks.size() == 3);
  CHECK(peaks[0].time == doctest::Approx(1.0 - 0.16).epsilon(1e-3));
  CHECK(peaks[1].time == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(peaks[2].time == doctest::Approx(1.0 + 0.30).epsilon(1e-3));
}

TEST_CASE("ECG R apexes sit on the truth beats") {
  synth::SubjectParams s;
  const auto t = synth::synth_displacement(s, 20, 625, 5);
  synth::EcgSynthParams p;
  p.noise_mv = 0.0;
  const auto rec = synth::synth_ecg(t, 0.0, 20, p, 5);
  const auto& ii = rec.lead(ecg::Lead::II);
  std::vector<double> apex;
  for (double b : t.heartbeat_times) {
    const auto c = static_cast<std::size_t>(std::llround(b * 2000));
    if (c < 100 || c + 100 >= ii.size()) continue;
    apex.push_back(static_cast<double>(oracle::argmax(ii, c - 100, c + 100)) / 2000.0);
    CHECK(std::abs(apex.back() - b) <= 0.5 / 2000.0 + 1e-12);
  }
}

TEST_CASE("impulse injection") {
  const auto t = synth::synth_displacement({}, 5, 625, 1);
  const auto rec = synth::synth_ecg(t, 0.0, 5.0, {}, 1);
  const auto with = synth::inject_impulse(rec, 2.0);
  CHECK(with.lead(ecg::Lead::I)[4000] - rec.lead(ecg::Lead::I)[4000] == doctest::Approx(3300.0));
  CHECK(with.lead(ecg::Lead::II)[4199] - rec.lead(ecg::Lead::II)[4199] == doctest::Approx(3300.0));
  CHECK(with.lead(ecg::Lead::II)[4200] == rec.lead(ecg::Lead::II)[4200]);
  CHECK(with.lead(ecg::Lead::III) == rec.lead(ecg::Lead::III));
  double ecg_peak = 0.0;
  for (double v : rec.lead(ecg::Lead::II)) ecg_peak = std::max(ecg_peak, std::abs(v));
  CHECK(3300.0 / ecg_peak >= 1000.0);
  for (std::size_t k = 0; k < with.size(); ++k) {
    REQUIRE(std::abs(with.lead(ecg::Lead::AVR)[k] + with.lead(ecg::Lead::AVL)[k] + with.lead(ecg::Lead::AVF)[k]) <= 1e-9);
  }
  CHECK_THROWS_AS(synth::inject_impulse(rec, 4.95), InvalidArgument);
  CHECK_THROWS_AS(synth::inject_impulse(rec, -0.1), InvalidArgument);
}

TEST_CASE("operator offset") {
  auto t = synth::synth_displacement({}, 5, 625, 1);
  const auto rec = synth::synth_ecg(t, 0.0, 5.0, {}, 1);
  const auto same = synth::apply_operator_offset(rec, 0.0, t);
  CHECK(same.t0 == rec.t0);
  CHECK(same.leads == rec.leads);
  const auto moved = synth::apply_operator_offset(rec, -1.0, t);
  CHECK(moved.t0 == doctest::Approx(1.0));
  CHECK(t.operator_offset == -1.0);
}

TEST_CASE("bundle clocks") {
  synth::BundleSpec spec;
  spec.duration = 20;
  spec.offset = -1.0;
  const auto b = synth::synth_bundle(spec);
  CHECK(b.truth.operator_offset == -1.0);
  CHECK(b.ecg.t0 == 0.0);
  CHECK(b.ecg.duration() == doctest::Approx(21.0));
  // Beats before the radar started are still in the truth.
  CHECK(b.truth.heartbeat_times.front() < 0.0);

  spec.impulse_at = 3.0;
  const auto i = synth::synth_bundle(spec);
  CHECK(i.truth.operator_offset == -3.0);
  CHECK(i.truth.impulse_time == 3.0);
  const auto found = ecg::detect_sync_impulse(i.ecg.lead(ecg::Lead::II), i.ecg.sample_rate, i.ecg.t0);
  REQUIRE(found.has_value());
  CHECK(std::abs(*found - 3.0) <= 1.0 / 2000.0 + 1e-9);

  const auto again = synth::synth_bundle(spec);
  CHECK(again.ecg.leads == i.ecg.leads);
  CHECK(again.truth.heartbeat_times == i.truth.heartbeat_times);
  CHECK(again.truth.displacement.values == i.truth.displacement.values);
}

}  // TEST_SUITE
