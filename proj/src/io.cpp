#include "heartradar/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fftw3.h>
#include <fstream>
#include <sstream>

#include "heartradar/errors.hpp"
#include "heartradar/version.hpp"

namespace heartradar::io {

static_assert(std::endian::native == std::endian::little, "the IQ format is read and written as host floats");

namespace {

fs::path sidecar(const fs::path& p) { return fs::path(p.string() + ".json"); }
fs::path mask_path(const fs::path& p) { return fs::path(p.string() + ".mask.json"); }

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string() + ": " + std::strerror(errno));
  return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot read " + path.string() + ": " + std::strerror(errno));
  return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const fs::path& path, std::size_t line) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw FormatError(path.string() + ":" + std::to_string(line) + ": '" + s + "' is not a number");
  }
  return v;
}

// Snaps a rate estimated from printed times onto the nearest integer when
// it is within printing noise of it.
double snap_rate(double rate) {
  const double r = std::round(rate);
  return std::abs(rate - r) <= 1e-6 * rate ? r : rate;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
};

Table read_table(const fs::path& path) {
  auto in = open_in(path);
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line, ',');
  t.columns.resize(t.header.size());
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != t.header.size()) {
      throw FormatError(path.string() + ":" + std::to_string(n) + ": expected " + std::to_string(t.header.size()) +
                        " columns, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) t.columns[c].push_back(parse_number(cells[c], path, n));
  }
  return t;
}

std::size_t expected_bytes(const radar::RadarConfig& c, std::size_t n_frames) {
  return c.n_rx * n_frames * c.chirps_per_frame * c.samples_per_chirp * 2 * sizeof(float);
}

void check_size(const fs::path& path, const radar::RadarConfig& config, std::size_t n_frames) {
  std::error_code ec;
  const auto actual = fs::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string() + ": " + ec.message());
  const auto expected = expected_bytes(config, n_frames);
  if (actual != expected) {
    throw FormatError(path.string() + ": expected " + std::to_string(expected) + " bytes, found " +
                      std::to_string(actual) + (actual < expected ? " (file is short by " : " (file has ") +
                      std::to_string(actual < expected ? expected - actual : actual - expected) +
                      (actual < expected ? " bytes)" : " extra bytes)"));
  }
}

std::vector<std::uint8_t> read_mask(const fs::path& path, const radar::RadarConfig& config, std::size_t n_frames) {
  std::vector<std::uint8_t> mask;
  const auto mp = mask_path(path);
  if (!fs::exists(mp)) return mask;
  mask.assign(config.n_rx * n_frames, 0);
  const auto j = read_json(mp);
  for (const auto& entry : j.at("lost_packets")) {
    const auto rx = entry.at(0).get<std::size_t>();
    const auto frame = entry.at(1).get<std::size_t>();
    if (rx >= config.n_rx || frame >= n_frames) {
      throw FormatError(mp.string() + ": packet [" + std::to_string(rx) + ", " + std::to_string(frame) +
                        "] is outside the capture");
    }
    mask[rx * n_frames + frame] = 1;
  }
  return mask;
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9e", x);
  return buf;
}

Json radar_config_to_json(const radar::RadarConfig& c) {
  return Json{{"f_center", c.f_center},
              {"bandwidth", c.bandwidth},
              {"slope", c.slope},
              {"frame_rate", c.frame_rate},
              {"chirps_per_frame", c.chirps_per_frame},
              {"samples_per_chirp", c.samples_per_chirp},
              {"n_rx", c.n_rx},
              {"rx_spacing", c.rx_spacing},
              {"range_fft_size", c.range_fft_size}};
}

radar::RadarConfig radar_config_from_json(const Json& j, radar::RadarConfig c) {
  for (const auto& [key, value] : j.items()) {
    if (key == "f_center") c.f_center = value.get<double>();
    else if (key == "bandwidth") c.bandwidth = value.get<double>();
    else if (key == "slope") c.slope = value.get<double>();
    else if (key == "frame_rate") c.frame_rate = value.get<double>();
    else if (key == "chirps_per_frame") c.chirps_per_frame = value.get<std::size_t>();
    else if (key == "samples_per_chirp") c.samples_per_chirp = value.get<std::size_t>();
    else if (key == "n_rx") c.n_rx = value.get<std::size_t>();
    else if (key == "rx_spacing") c.rx_spacing = value.get<double>();
    else if (key == "range_fft_size") c.range_fft_size = value.get<std::size_t>();
    else throw InvalidArgument("radar config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

void write_iq_cube(const fs::path& path, const radar::IqCube& cube) {
  {
    auto out = open_out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(cube.data.data()),
              static_cast<std::streamsize>(cube.data.size() * sizeof(std::complex<float>)));
    if (!out) throw IoError("write failed for " + path.string());
  }
  Json header{{"format", "iq-f32le"},
              {"dims", {"rx", "frame", "chirp", "sample"}},
              {"n_frames", cube.n_frames},
              {"radar", radar_config_to_json(cube.config)}};
  write_json(sidecar(path), header);
  Json lost = Json::array();
  for (std::size_t p = 0; p < cube.loss_mask.size(); ++p) {
    if (cube.loss_mask[p]) lost.push_back({p / cube.n_frames, p % cube.n_frames});
  }
  if (!lost.empty()) {
    write_json(mask_path(path), Json{{"lost_packets", lost}});
  } else {
    std::error_code ec;
    fs::remove(mask_path(path), ec);
  }
}

radar::IqCube read_iq_cube(const fs::path& path, const radar::RadarConfig& config, std::size_t n_frames) {
  config.validate();
  check_size(path, config, n_frames);
  radar::IqCube cube;
  cube.config = config;
  cube.n_frames = n_frames;
  cube.data.resize(config.n_rx * n_frames * config.chirps_per_frame * config.samples_per_chirp);
  auto in = open_in(path, std::ios::binary);
  in.read(reinterpret_cast<char*>(cube.data.data()),
          static_cast<std::streamsize>(cube.data.size() * sizeof(std::complex<float>)));
  if (!in) throw IoError("read failed for " + path.string());
  cube.loss_mask = read_mask(path, config, n_frames);
  const std::size_t packet = config.chirps_per_frame * config.samples_per_chirp;
  for (std::size_t p = 0; p < cube.loss_mask.size(); ++p) {
    if (!cube.loss_mask[p]) continue;
    std::fill_n(cube.data.begin() + static_cast<std::ptrdiff_t>(p * packet), packet, std::complex<float>{});
  }
  return cube;
}

radar::ReducedCube read_reduced_iq(const fs::path& path, const radar::RadarConfig& config, std::size_t n_frames) {
  config.validate();
  check_size(path, config, n_frames);
  radar::ReducedCube cube;
  cube.config = config;
  cube.n_frames = n_frames;
  const std::size_t ns = config.samples_per_chirp;
  cube.data.resize(config.n_rx * n_frames * ns);
  const std::size_t packet_bytes = config.chirps_per_frame * ns * sizeof(std::complex<float>);
  auto in = open_in(path, std::ios::binary);
  for (std::size_t p = 0; p < config.n_rx * n_frames; ++p) {
    in.seekg(static_cast<std::streamoff>(p * packet_bytes));
    in.read(reinterpret_cast<char*>(cube.data.data() + p * ns),
            static_cast<std::streamsize>(ns * sizeof(std::complex<float>)));
    if (!in) throw IoError("read failed for " + path.string());
  }
  cube.loss_mask = read_mask(path, config, n_frames);
  for (std::size_t p = 0; p < cube.loss_mask.size(); ++p) {
    if (cube.loss_mask[p]) std::fill_n(cube.data.begin() + static_cast<std::ptrdiff_t>(p * ns), ns, std::complex<float>{});
  }
  return cube;
}

IqHeader read_iq_header(const fs::path& path) {
  const auto j = read_json(sidecar(path));
  if (j.value("format", std::string()) != "iq-f32le") {
    throw FormatError(sidecar(path).string() + ": unsupported format");
  }
  IqHeader h;
  h.n_frames = j.at("n_frames").get<std::size_t>();
  h.config = radar_config_from_json(j.at("radar"));
  return h;
}

radar::ReducedCube load_reduced_capture(const fs::path& path) {
  const auto h = read_iq_header(path);
  return read_reduced_iq(path, h.config, h.n_frames);
}

radar::IqCube load_capture(const fs::path& path) {
  const auto h = read_iq_header(path);
  return read_iq_cube(path, h.config, h.n_frames);
}

void write_ecg_csv(const fs::path& path, const ecg::EcgRecord& record) {
  record.validate();
  auto out = open_out(path);
  out << "t";
  for (const auto& [lead, v] : record.leads) out << ',' << ecg::lead_name(lead);
  out << '\n';
  std::string row;
  for (std::size_t i = 0; i < record.size(); ++i) {
    row = format_number(record.time(i));
    for (const auto& [lead, v] : record.leads) {
      row += ',';
      row += format_number(v[i]);
    }
    row += '\n';
    out << row;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

ecg::EcgRecord read_ecg_csv(const fs::path& path) {
  const auto table = read_table(path);
  if (table.header.empty() || table.header[0] != "t") throw FormatError(path.string() + ": first column must be 't'");
  const auto& t = table.columns[0];
  if (t.size() < 2) throw FormatError(path.string() + ": need at least two samples");
  ecg::EcgRecord rec;
  rec.t0 = t.front();
  rec.sample_rate = snap_rate(static_cast<double>(t.size() - 1) / (t.back() - t.front()));
  if (!(rec.sample_rate > 0.0) || !std::isfinite(rec.sample_rate)) {
    throw FormatError(path.string() + ": time column must increase");
  }
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    const auto lead = ecg::parse_lead(table.header[c]);
    if (rec.leads.count(lead)) throw FormatError(path.string() + ": lead " + table.header[c] + " appears twice");
    rec.leads[lead] = table.columns[c];
  }
  return rec;
}

void write_series_csv(const fs::path& path, const std::vector<double>& t, const std::vector<double>& values,
                      const std::string& value_name) {
  if (t.size() != values.size()) throw InvalidArgument("series CSV: time and value lengths differ");
  auto out = open_out(path);
  out << "t," << value_name << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) out << format_number(t[i]) << ',' << format_number(values[i]) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

VelocitySeries read_velocity_csv(const fs::path& path) {
  const auto table = read_table(path);
  if (table.header.size() != 2 || table.header[0] != "t") {
    throw FormatError(path.string() + ": expected header 't,<value>'");
  }
  const auto& t = table.columns[0];
  if (t.size() < 2) throw FormatError(path.string() + ": need at least two samples");
  VelocitySeries s;
  s.t0 = t.front();
  s.dt = 1.0 / snap_rate(static_cast<double>(t.size() - 1) / (t.back() - t.front()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::abs(t[i] - s.time(i)) > 1e-3 * s.dt) {
      throw FormatError(path.string() + ": time column is not uniform at row " + std::to_string(i + 2));
    }
  }
  s.values = table.columns[1];
  return s;
}

Json times_to_json(const std::vector<double>& times) {
  Json a = Json::array();
  for (double t : times) a.push_back(t);
  return a;
}

std::vector<double> times_from_json(const Json& j) { return j.get<std::vector<double>>(); }

Json annotations_to_json(const ecg::WaveAnnotations& a) {
  Json outliers = Json::array();
  for (const auto& p : a.outliers) {
    outliers.push_back({{"time", p.time}, {"prominence", p.prominence}, {"width", p.width}});
  }
  return Json{{"p", times_to_json(a.p_times)},
              {"r", times_to_json(a.r_times)},
              {"t", times_to_json(a.t_times)},
              {"impulse", a.impulse_time ? Json(*a.impulse_time) : Json(nullptr)},
              {"outliers", outliers}};
}

ecg::WaveAnnotations annotations_from_json(const Json& j) {
  ecg::WaveAnnotations a;
  a.p_times = times_from_json(j.at("p"));
  a.r_times = times_from_json(j.at("r"));
  a.t_times = times_from_json(j.at("t"));
  if (j.contains("impulse") && !j.at("impulse").is_null()) a.impulse_time = j.at("impulse").get<double>();
  if (j.contains("outliers")) {
    for (const auto& o : j.at("outliers")) {
      ecg::PeakFeature f;
      f.time = o.at("time").get<double>();
      f.prominence = o.at("prominence").get<double>();
      f.width = o.at("width").get<double>();
      a.outliers.push_back(f);
    }
  }
  return a;
}

Json sync_to_json(const sync::SyncResult& r) {
  Json curve = Json::array();
  for (const auto& [s, d] : r.curve) curve.push_back({s, d});
  Json warnings = Json::array();
  for (const auto& w : r.warnings) warnings.push_back(w);
  return Json{{"method", sync::method_name(r.method)},
              {"best_offset_s", r.best_offset},
              {"warnings", warnings},
              {"curve", curve}};
}

Json truth_to_json(const synth::CaptureTruth& t, bool include_displacement) {
  Json j{{"seed", t.seed},
         {"duration_s", t.duration},
         {"operator_offset_s", t.operator_offset},
         {"impulse_time_s", t.impulse_time ? Json(*t.impulse_time) : Json(nullptr)},
         {"resp_phase", t.resp_phase},
         {"heartbeat_times", times_to_json(t.heartbeat_times)},
         {"systole_times", times_to_json(t.systole_times)},
         {"p_wave_times", times_to_json(t.p_wave_times)},
         {"t_wave_times", times_to_json(t.t_wave_times)}};
  if (include_displacement) {
    j["displacement"] = {{"t0", t.displacement.t0}, {"dt", t.displacement.dt},
                         {"values", times_to_json(t.displacement.values)}};
  }
  return j;
}

synth::CaptureTruth truth_from_json(const Json& j) {
  synth::CaptureTruth t;
  t.seed = j.at("seed").get<std::uint64_t>();
  t.duration = j.at("duration_s").get<double>();
  t.operator_offset = j.at("operator_offset_s").get<double>();
  if (!j.at("impulse_time_s").is_null()) t.impulse_time = j.at("impulse_time_s").get<double>();
  t.resp_phase = j.value("resp_phase", 0.0);
  t.heartbeat_times = times_from_json(j.at("heartbeat_times"));
  t.systole_times = times_from_json(j.at("systole_times"));
  t.p_wave_times = times_from_json(j.at("p_wave_times"));
  t.t_wave_times = times_from_json(j.at("t_wave_times"));
  if (j.contains("displacement")) {
    const auto& d = j.at("displacement");
    t.displacement.t0 = d.at("t0").get<double>();
    t.displacement.dt = d.at("dt").get<double>();
    t.displacement.values = times_from_json(d.at("values"));
  }
  return t;
}

Json interval_report_to_json(const metrics::IntervalReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"r_start", row.r_start}, {"rr_interval", row.rr_interval}, {"radar_interval", row.radar_interval}});
  }
  return Json{{"rmse_ms", r.rmse_ms},
              {"matched", r.matches.size()},
              {"unmatched_r", times_to_json(r.unmatched_r)},
              {"unmatched_radar", times_to_json(r.unmatched_radar)},
              {"rows", rows}};
}

Json bench_to_json(const metrics::BenchReport& r) {
  auto finite = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
  Json j{{"range_bin", r.range_bin},
         {"point_distance_mean", r.point_distance_mean},
         {"snr_argmax_db", finite(r.snr_argmax_db)},
         {"snr_phase_db", finite(r.snr_phase_db)},
         {"snr_gap_db", finite(r.snr_gap_db)},
         {"max_phase_spike", r.max_phase_spike},
         {"phase_spike_ratio", r.phase_spike_ratio},
         {"lost_packets", r.lost_packets}};
  if (r.intervals) {
    j["rmse_intervals_ms"] = r.intervals->rmse_ms;
    j["intervals"] = interval_report_to_json(*r.intervals);
  }
  return j;
}

Json read_json(const fs::path& path) {
  const auto text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

void write_provenance(const fs::path& out_dir, const std::string& command, std::uint64_t seed, const Json& config,
                      const std::vector<fs::path>& inputs) {
  Json in = Json::array();
  for (const auto& p : inputs) in.push_back({{"file", p.filename().string()}, {"sha256", sha256_file(p)}});
  Json versions;
  versions["heartradar"] = kVersion;
  versions["fftw"] = std::string(fftw_version);
  versions["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  Json j;
  j["command"] = command;
  j["seed"] = seed;
  j["config_sha256"] = sha256_hex(config.dump());
  j["inputs"] = in;
  j["versions"] = versions;
  write_json(out_dir / "provenance.json", j);
}

}  // namespace heartradar::io
