#pragma once

#include <filesystem>

#include "heartradar/ecg.hpp"
#include "heartradar/io.hpp"
#include "heartradar/metrics.hpp"
#include "heartradar/radar.hpp"
#include "heartradar/sync.hpp"
#include "heartradar/synth.hpp"

namespace heartradar {

// Everything a CLI run can tune. Sections mirror the JSON layout:
// radar, processing, ecg, sync, metrics, synth.
struct AppConfig {
  radar::RadarConfig radar{};
  radar::RadarProcessing processing{};
  ecg::EcgProcessing ecg{};
  sync::SyncParams sync{};
  metrics::DownPeakParams peaks{};
  double match_window_s = 0.2;
  double loss_rate = 0.01;
  synth::BundleSpec bundle{};
  synth::RadarSynthParams radar_synth{};
};

/// Overlays the keys present in `j` on the defaults. Unknown sections or
/// keys raise InvalidArgument so typos do not pass silently.
AppConfig config_from_json(const io::Json& j);
io::Json config_to_json(const AppConfig& c);
AppConfig load_config(const std::filesystem::path& path);

}  // namespace heartradar
