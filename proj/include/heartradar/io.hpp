#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "heartradar/ecg.hpp"
#include "heartradar/metrics.hpp"
#include "heartradar/radar.hpp"
#include "heartradar/series.hpp"
#include "heartradar/sync.hpp"
#include "heartradar/synth.hpp"
#include "json.hpp"

namespace heartradar::io {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Binary IQ capture: little-endian float32 pairs (I, Q) in [rx][frame][chirp]
// [sample] order with no header. "<file>.json" describes the dimensions and
// "<file>.mask.json" (optional) lists the zero-filled packets as [rx, frame].

/// Raw payload, sidecar and, when the cube has lost packets, the mask.
void write_iq_cube(const fs::path& path, const radar::IqCube& cube);
/// Throws FormatError naming expected and actual byte counts on a size mismatch.
radar::IqCube read_iq_cube(const fs::path& path, const radar::RadarConfig& config, std::size_t n_frames);
/// Reads only chirp 0 of every frame, without loading the full cube.
radar::ReducedCube read_reduced_iq(const fs::path& path, const radar::RadarConfig& config, std::size_t n_frames);

struct IqHeader {
  radar::RadarConfig config;
  std::size_t n_frames = 0;
};
IqHeader read_iq_header(const fs::path& path);
/// Header, payload and mask together; packets listed in the mask are forced to zero.
radar::ReducedCube load_reduced_capture(const fs::path& path);
radar::IqCube load_capture(const fs::path& path);

Json radar_config_to_json(const radar::RadarConfig& c);
radar::RadarConfig radar_config_from_json(const Json& j, radar::RadarConfig base = {});

/// Header "t,<lead>,..." then one row per sample, every number as %.9e.
void write_ecg_csv(const fs::path& path, const ecg::EcgRecord& record);
ecg::EcgRecord read_ecg_csv(const fs::path& path);

/// Header "t,<value_name>" then %.9e rows.
void write_series_csv(const fs::path& path, const std::vector<double>& t, const std::vector<double>& values,
                      const std::string& value_name);
template <class Tag>
void write_series_csv(const fs::path& path, const UniformSeries<Tag>& s, const std::string& value_name) {
  std::vector<double> t(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) t[i] = s.time(i);
  write_series_csv(path, t, s.values, value_name);
}
/// Two-column CSV back into a uniform series; throws FormatError when the
/// time column is not uniform.
VelocitySeries read_velocity_csv(const fs::path& path);

/// "%.9e" formatting used by every text output.
std::string format_number(double x);

Json annotations_to_json(const ecg::WaveAnnotations& a);
ecg::WaveAnnotations annotations_from_json(const Json& j);
Json sync_to_json(const sync::SyncResult& r);
Json truth_to_json(const synth::CaptureTruth& t, bool include_displacement = false);
synth::CaptureTruth truth_from_json(const Json& j);
Json interval_report_to_json(const metrics::IntervalReport& r);
Json bench_to_json(const metrics::BenchReport& r);
Json times_to_json(const std::vector<double>& times);
std::vector<double> times_from_json(const Json& j);

Json read_json(const fs::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const fs::path& path, const Json& j);
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const fs::path& path);

/// provenance.json in out_dir: command, seed, config hash, input hashes and
/// library versions. Carries no clock time so reruns stay byte-identical.
void write_provenance(const fs::path& out_dir, const std::string& command, std::uint64_t seed, const Json& config,
                      const std::vector<fs::path>& inputs);

}  // namespace heartradar::io
