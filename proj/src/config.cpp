#include "heartradar/config.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <variant>

#include "heartradar/errors.hpp"

namespace heartradar {

namespace {

using Ref = std::variant<double*, std::size_t*, int*, bool*, sync::CombShape*>;
using Fields = std::map<std::string, std::map<std::string, Ref>>;

Fields fields(AppConfig& c) {
  Fields f;
  auto& r = f["radar"];
  r["f_center"] = &c.radar.f_center;
  r["bandwidth"] = &c.radar.bandwidth;
  r["slope"] = &c.radar.slope;
  r["frame_rate"] = &c.radar.frame_rate;
  r["chirps_per_frame"] = &c.radar.chirps_per_frame;
  r["samples_per_chirp"] = &c.radar.samples_per_chirp;
  r["n_rx"] = &c.radar.n_rx;
  r["rx_spacing"] = &c.radar.rx_spacing;
  r["range_fft_size"] = &c.radar.range_fft_size;

  auto& p = f["processing"];
  p["stft_window"] = &c.processing.argmax.stft.window_size;
  p["stft_bins"] = &c.processing.argmax.stft.n_bins;
  p["stft_step"] = &c.processing.argmax.stft.step;
  p["smooth_window"] = &c.processing.argmax.smooth_window;
  p["trend_window"] = &c.processing.argmax.trend_window;
  p["phase_rx"] = &c.processing.phase.rx;
  p["phase_trend_window"] = &c.processing.phase.trend_window;

  auto& e = f["ecg"];
  e["highpass_hz"] = &c.ecg.filter.highpass_hz;
  e["lowpass_hz"] = &c.ecg.filter.lowpass_hz;
  e["stop_low_hz"] = &c.ecg.filter.stop_low_hz;
  e["stop_high_hz"] = &c.ecg.filter.stop_high_hz;
  e["filter_order"] = &c.ecg.filter.order;
  e["baseline_window"] = &c.ecg.filter.baseline_window;
  e["baseline_order"] = &c.ecg.filter.baseline_order;
  e["prominence_fraction"] = &c.ecg.peaks.prominence_fraction;
  e["max_width_s"] = &c.ecg.peaks.max_width_s;
  e["dbscan_eps"] = &c.ecg.dbscan.eps;
  e["dbscan_min_pts"] = &c.ecg.dbscan.min_pts;
  e["p_window_s"] = &c.ecg.beats.p_window_s;
  e["t_window_s"] = &c.ecg.beats.t_window_s;
  e["impulse_threshold_mv_per_s"] = &c.ecg.impulse_threshold_mv_per_s;
  e["impulse_settle_s"] = &c.ecg.impulse_settle_s;

  auto& s = f["sync"];
  s["half_range"] = &c.sync.half_range;
  s["step"] = &c.sync.step;
  s["a"] = &c.sync.a;
  s["grid_pad"] = &c.sync.grid_pad;
  s["shape"] = &c.sync.shape;
  s["min_events"] = &c.sync.min_events;

  auto& m = f["metrics"];
  m["mad_factor"] = &c.peaks.mad_factor;
  m["min_separation_s"] = &c.peaks.min_separation_s;
  m["match_window_s"] = &c.match_window_s;
  m["loss_rate"] = &c.loss_rate;

  auto& y = f["synth"];
  y["duration"] = &c.bundle.duration;
  y["heart_rate_bpm"] = &c.bundle.subject.heart_rate_bpm;
  y["hrv_fraction"] = &c.bundle.subject.hrv_fraction;
  y["resp_rate_bpm"] = &c.bundle.subject.resp_rate_bpm;
  y["resp_amplitude"] = &c.bundle.subject.resp_amplitude;
  y["beat_amplitude"] = &c.bundle.subject.beat_amplitude;
  y["apnea"] = &c.bundle.subject.apnea;
  y["electromechanical_delay"] = &c.bundle.subject.electromechanical_delay;
  y["fall_s"] = &c.bundle.shape.fall_s;
  y["rise1"] = &c.bundle.shape.rise1;
  y["rise2"] = &c.bundle.shape.rise2;
  y["rise_tau"] = &c.bundle.shape.rise_tau;
  y["ecg_sample_rate"] = &c.bundle.ecg.sample_rate;
  y["ecg_noise_mv"] = &c.bundle.ecg.noise_mv;
  y["p_amplitude"] = &c.bundle.ecg.p_amplitude;
  y["wander_mv"] = &c.bundle.ecg.wander_mv;
  y["mains_mv"] = &c.bundle.ecg.mains_mv;
  y["distance"] = &c.radar_synth.distance;
  y["lateral_offset"] = &c.radar_synth.lateral_offset;
  y["amplitude"] = &c.radar_synth.amplitude;
  y["noise_db"] = &c.radar_synth.noise_db;
  return f;
}

void assign(const Ref& ref, const io::Json& v, const std::string& where) {
  try {
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, sync::CombShape>) {
            const auto s = v.get<std::string>();
            if (s == "literal") *p = sync::CombShape::literal;
            else if (s == "gaussian") *p = sync::CombShape::gaussian;
            else throw InvalidArgument(where + ": expected \"literal\" or \"gaussian\"");
          } else if constexpr (std::is_same_v<T, double>) {
            // null stands for -inf, the only non-finite value a config needs.
            *p = v.is_null() ? -std::numeric_limits<double>::infinity() : v.get<double>();
          } else {
            *p = v.get<T>();
          }
        },
        ref);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(where + ": " + e.what());
  }
}

io::Json value_of(const Ref& ref) {
  return std::visit(
      [](auto* p) -> io::Json {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, sync::CombShape>) {
          return *p == sync::CombShape::literal ? "literal" : "gaussian";
        } else if constexpr (std::is_same_v<T, double>) {
          return std::isfinite(*p) ? io::Json(*p) : io::Json(nullptr);
        } else {
          return *p;
        }
      },
      ref);
}

}  // namespace

AppConfig config_from_json(const io::Json& j) {
  AppConfig c;
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  auto f = fields(c);
  for (const auto& [section, body] : j.items()) {
    const auto sec = f.find(section);
    if (sec == f.end()) throw InvalidArgument("config: unknown section '" + section + "'");
    if (!body.is_object()) throw InvalidArgument("config: section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      const auto field = sec->second.find(key);
      if (field == sec->second.end()) throw InvalidArgument("config: unknown key '" + section + "." + key + "'");
      assign(field->second, value, "config: " + section + "." + key);
    }
  }
  c.radar.validate();
  c.processing.range_fft_size = c.radar.range_fft_size;
  c.radar_synth.config = c.radar;
  c.bundle.frame_rate = c.radar.frame_rate;
  return c;
}

io::Json config_to_json(const AppConfig& c) {
  AppConfig copy = c;
  io::Json j = io::Json::object();
  for (const auto& [section, body] : fields(copy)) {
    for (const auto& [key, ref] : body) j[section][key] = value_of(ref);
  }
  return j;
}

AppConfig load_config(const std::filesystem::path& path) { return config_from_json(io::read_json(path)); }

}  // namespace heartradar
