#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "heartradar/config.hpp"
#include "heartradar/dsp.hpp"
#include "heartradar/ecg.hpp"
#include "heartradar/errors.hpp"
#include "heartradar/io.hpp"
#include "heartradar/metrics.hpp"
#include "heartradar/radar.hpp"
#include "heartradar/svg.hpp"
#include "heartradar/sync.hpp"
#include "heartradar/synth.hpp"

namespace fs = std::filesystem;
using heartradar::AppConfig;
using heartradar::io::Json;
namespace hr = heartradar;

namespace {

struct Common {
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string config;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Seed for every random draw");
  app->add_option("--out-dir", c.out_dir, "Directory for all outputs");
  app->add_option("--config", c.config, "JSON configuration file");
}

AppConfig load(const Common& c) {
  return c.config.empty() ? hr::config_from_json(Json::object()) : hr::load_config(c.config);
}

fs::path prepare(const Common& c) {
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw hr::IoError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

fs::path input_or(const std::string& given, const fs::path& dir, const char* name) {
  return given.empty() ? dir / name : fs::path(given);
}

// synth -------------------------------------------------------------------

struct SynthArgs {
  Common common;
  std::optional<double> duration;
  std::optional<double> hr;
  bool apnea = false;
  double offset = 0.0;
  std::optional<double> impulse_at;
  double loss = 0.0;
  std::optional<double> noise_db;
  bool noiseless = false;
  std::optional<double> emd;
};

void run_synth(const SynthArgs& a) {
  auto cfg = load(a.common);
  const auto dir = prepare(a.common);
  auto spec = cfg.bundle;
  spec.seed = a.common.seed;
  if (a.duration) spec.duration = *a.duration;
  if (a.hr) spec.subject.heart_rate_bpm = *a.hr;
  if (a.apnea) spec.subject.apnea = true;
  if (a.emd) spec.subject.electromechanical_delay = *a.emd;
  spec.offset = a.offset;
  spec.impulse_at = a.impulse_at;
  auto radar_params = cfg.radar_synth;
  if (a.noise_db) radar_params.noise_db = *a.noise_db;
  if (a.noiseless) radar_params.noise_db = -std::numeric_limits<double>::infinity();

  cfg.bundle = spec;
  cfg.radar_synth = radar_params;
  const auto bundle = hr::synth::synth_bundle(spec);
  auto cube = hr::synth::synth_radar_iq(bundle.truth, radar_params, spec.seed);
  if (a.loss > 0.0) {
    cube = hr::radar::inject_packet_loss(std::move(cube), a.loss, hr::synth::derive_seed(spec.seed, 4));
  }
  hr::io::write_iq_cube(dir / "capture.iq", cube);
  hr::io::write_ecg_csv(dir / "ecg.csv", bundle.ecg);
  auto truth = hr::io::truth_to_json(bundle.truth);
  truth["loss_rate"] = a.loss;
  hr::io::write_json(dir / "truth.json", truth);
  const auto config_json = hr::config_to_json(cfg);
  hr::io::write_json(dir / "config.json", config_json);
  hr::io::write_provenance(dir, "synth", spec.seed, config_json, {});
}

// radar -------------------------------------------------------------------

void run_radar(const Common& c, const std::string& iq) {
  const auto cfg = load(c);
  const auto dir = prepare(c);
  const auto iq_path = input_or(iq, dir, "capture.iq");
  const auto cube = hr::io::load_reduced_capture(iq_path);
  auto processing = cfg.processing;
  processing.range_fft_size = cube.config.range_fft_size;
  const auto profiles = hr::radar::range_fft(cube, processing.range_fft_size);
  const auto result = hr::radar::process_profiles(profiles, processing);
  const auto events = hr::metrics::detect_downward_peaks(result.velocity, cfg.peaks);

  hr::io::write_series_csv(dir / "velocity.csv", result.velocity, "v");
  hr::io::write_series_csv(dir / "velocity_phase.csv", result.velocity_phase, "v");
  hr::io::write_series_csv(dir / "displacement.csv", result.displacement, "d");
  Json ev;
  ev["range_bin"] = result.range_bin;
  ev["range_m"] = result.range_m;
  ev["downward_peaks"] = hr::io::times_to_json(events);
  hr::io::write_json(dir / "radar_events.json", ev);
  hr::io::write_text(dir / "range_heatmap.svg", hr::svg::range_heatmap(profiles));
  hr::io::write_text(dir / "displacement.svg", hr::svg::displacement_plot(result.displacement));
  hr::io::write_provenance(dir, "radar", c.seed, hr::config_to_json(cfg),
                           {iq_path, fs::path(iq_path.string() + ".json")});
}

// ecg ---------------------------------------------------------------------

void run_ecg(const Common& c, const std::string& ecg_csv) {
  const auto cfg = load(c);
  const auto dir = prepare(c);
  const auto path = input_or(ecg_csv, dir, "ecg.csv");
  const auto record = hr::io::read_ecg_csv(path);
  const auto analysis = hr::ecg::annotate(record, cfg.ecg);

  // Every lead filtered over the same span the annotation used.
  hr::ecg::EcgRecord filtered;
  filtered.sample_rate = record.sample_rate;
  filtered.t0 = analysis.filtered_t0;
  const auto first = static_cast<std::size_t>(std::llround((analysis.filtered_t0 - record.t0) * record.sample_rate));
  for (const auto& [lead, v] : record.leads) {
    const std::span<const double> seg(v.data() + first, v.size() - first);
    filtered.leads[lead] = hr::ecg::filter_ecg(seg, record.sample_rate, cfg.ecg.filter);
  }
  hr::io::write_ecg_csv(dir / "ecg_filtered.csv", filtered);
  hr::io::write_json(dir / "annotations.json", hr::io::annotations_to_json(analysis.annotations));
  hr::io::write_provenance(dir, "ecg", c.seed, hr::config_to_json(cfg), {path});
}

// sync --------------------------------------------------------------------

struct SyncInputs {
  hr::ecg::WaveAnnotations annotations;
  std::vector<double> radar_events;
  std::vector<fs::path> files;
};

SyncInputs read_sync_inputs(const fs::path& dir, const std::string& ann, const std::string& events) {
  SyncInputs in;
  const auto ann_path = input_or(ann, dir, "annotations.json");
  const auto ev_path = input_or(events, dir, "radar_events.json");
  in.annotations = hr::io::annotations_from_json(hr::io::read_json(ann_path));
  in.radar_events = hr::io::times_from_json(hr::io::read_json(ev_path).at("downward_peaks"));
  in.files = {ann_path, ev_path};
  return in;
}

// Clock shift taking ECG annotation times onto the radar clock before the
// comb residual is applied: -impulse for the impulse method, 0 otherwise.
double clock_shift(const Json& sync_json) {
  if (sync_json.at("method") == "impulse") return -sync_json.at("impulse_time_s").get<double>();
  return 0.0;
}

std::vector<double> trimmed(const std::vector<double>& times, double shift, double from) {
  std::vector<double> out;
  for (double t : times) {
    if (t + shift >= from) out.push_back(t + shift);
  }
  return out;
}

void run_sync(const Common& c, const std::string& ann, const std::string& events, std::string method,
              std::optional<double> manual) {
  const auto cfg = load(c);
  const auto dir = prepare(c);
  const auto in = read_sync_inputs(dir, ann, events);
  if (method.empty()) method = manual ? "manual" : (in.annotations.impulse_time ? "impulse" : "comb");

  hr::sync::SyncResult result;
  Json out;
  if (method == "manual") {
    if (!manual) throw hr::InvalidArgument("sync: --method manual needs --manual-offset");
    result.method = hr::sync::SyncMethod::manual;
    result.best_offset = *manual;
    out = hr::io::sync_to_json(result);
  } else if (method == "impulse") {
    if (!in.annotations.impulse_time) throw hr::AlignmentFailed("no synchronization impulse in the annotations");
    const double impulse = *in.annotations.impulse_time;
    const double trim = cfg.ecg.impulse_settle_s;
    const auto r = trimmed(in.annotations.r_times, -impulse, trim);
    const auto radar = trimmed(in.radar_events, 0.0, trim);
    result = hr::sync::find_offset(r, radar, cfg.sync);
    result.method = hr::sync::SyncMethod::impulse;
    out = hr::io::sync_to_json(result);
    out["impulse_time_s"] = impulse;
  } else if (method == "comb") {
    result = hr::sync::find_offset(in.annotations.r_times, in.radar_events, cfg.sync);
    out = hr::io::sync_to_json(result);
  } else {
    throw hr::InvalidArgument("sync: unknown method '" + method + "'");
  }
  for (const auto& w : result.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  hr::io::write_json(dir / "sync.json", out);
  if (!result.curve.empty()) hr::io::write_text(dir / "distance_curve.svg", hr::svg::distance_curve_plot(result));
  hr::io::write_provenance(dir, "sync", c.seed, hr::config_to_json(cfg), in.files);
}

// bench -------------------------------------------------------------------

std::vector<double> radar_clock_r_times(const fs::path& dir, const std::string& ann, const std::string& sync_file,
                                        double trim, std::vector<fs::path>& files) {
  const auto ann_path = input_or(ann, dir, "annotations.json");
  const auto sync_path = input_or(sync_file, dir, "sync.json");
  const auto annotations = hr::io::annotations_from_json(hr::io::read_json(ann_path));
  const auto sync_json = hr::io::read_json(sync_path);
  files.push_back(ann_path);
  files.push_back(sync_path);
  const double shift = clock_shift(sync_json) + sync_json.at("best_offset_s").get<double>();
  return trimmed(annotations.r_times, shift, sync_json.at("method") == "impulse" ? trim : -INFINITY);
}

void run_bench(const Common& c, const std::string& iq, std::optional<double> loss, const std::vector<double>& sweep,
               bool intervals, const std::string& ann, const std::string& sync_file) {
  const auto cfg = load(c);
  const auto dir = prepare(c);
  const auto iq_path = input_or(iq, dir, "capture.iq");
  const auto cube = hr::io::load_reduced_capture(iq_path);
  std::vector<fs::path> files{iq_path};

  hr::metrics::BenchParams params;
  params.loss_rate = loss.value_or(cfg.loss_rate);
  params.loss_seed = hr::synth::derive_seed(c.seed, 5);
  params.processing = cfg.processing;
  params.processing.range_fft_size = cube.config.range_fft_size;
  params.peaks = cfg.peaks;

  std::optional<std::vector<double>> r_times;
  if (intervals) r_times = radar_clock_r_times(dir, ann, sync_file, cfg.ecg.impulse_settle_s, files);
  std::optional<std::span<const double>> r_span;
  if (r_times) r_span = std::span<const double>(*r_times);
  const auto report = hr::metrics::run_bench(cube, params, r_span);
  auto j = hr::io::bench_to_json(report);
  j["loss_rate"] = params.loss_rate;

  if (!sweep.empty()) {
    std::vector<double> sa;
    std::vector<double> sp;
    Json rows = Json::array();
    for (double rate : sweep) {
      auto p = params;
      p.loss_rate = rate;
      const auto r = hr::metrics::run_bench(cube, p);
      sa.push_back(r.snr_argmax_db);
      sp.push_back(r.snr_phase_db);
    }
    std::string csv = "loss_rate,snr_argmax_db,snr_phase_db\n";
    for (std::size_t k = 0; k < sweep.size(); ++k) {
      csv += hr::io::format_number(sweep[k]) + "," + hr::io::format_number(sa[k]) + "," +
             hr::io::format_number(sp[k]) + "\n";
    }
    hr::io::write_text(dir / "loss_sweep.csv", csv);
  }
  hr::io::write_json(dir / "bench.json", j);
  if (report.intervals) {
    hr::io::write_text(dir / "interval_scatter.svg", hr::svg::interval_scatter_plot(*report.intervals));
    std::string csv = "r_start,rr_interval,radar_interval\n";
    for (const auto& row : report.intervals->rows) {
      csv += hr::io::format_number(row.r_start) + "," + hr::io::format_number(row.rr_interval) + "," +
             hr::io::format_number(row.radar_interval) + "\n";
    }
    hr::io::write_text(dir / "intervals.csv", csv);
  }
  hr::io::write_provenance(dir, "bench", c.seed, hr::config_to_json(cfg), files);
}

// report ------------------------------------------------------------------

void run_report(const Common& c, const std::vector<std::string>& inputs) {
  const auto cfg = load(c);
  const auto dir = prepare(c);
  std::vector<fs::path> bundles;
  for (const auto& s : inputs) bundles.emplace_back(s);
  if (bundles.empty()) bundles.push_back(dir);

  Json entries = Json::array();
  std::vector<fs::path> files;
  for (const auto& b : bundles) {
    Json e;
    e["bundle"] = b.filename().empty() ? b.parent_path().filename().string() : b.filename().string();
    auto take = [&](const char* name, const char* key) {
      const auto p = b / name;
      if (!fs::exists(p)) return std::optional<Json>();
      files.push_back(p);
      auto j = hr::io::read_json(p);
      if (j.contains("curve")) j.erase("curve");
      e[key] = j;
      return std::optional<Json>(j);
    };
    const auto truth = take("truth.json", "truth");
    const auto sync = take("sync.json", "sync");
    take("bench.json", "bench");
    const auto ann = take("annotations.json", "annotations");
    take("radar_events.json", "radar_events");
    if (truth && sync && sync->at("method") == "comb") {
      e["offset_error_s"] = sync->at("best_offset_s").get<double>() - truth->at("operator_offset_s").get<double>();
    }
    if (ann && fs::exists(b / "velocity.csv") && sync) {
      const auto v = hr::io::read_velocity_csv(b / "velocity.csv");
      const double shift = clock_shift(*sync) + sync->at("best_offset_s").get<double>();
      const auto a = hr::io::annotations_from_json(*ann);
      const auto r = trimmed(a.r_times, shift, v.t0);
      const auto t = trimmed(a.t_times, shift, v.t0);
      const std::string name = e["bundle"].get<std::string>() + "_velocity.svg";
      hr::io::write_text(dir / name, hr::svg::velocity_plot(v, r, t));
      e["velocity_plot"] = name;
    }
    entries.push_back(e);
  }
  Json report;
  report["bundles"] = entries;
  hr::io::write_json(dir / "report.json", report);
  hr::io::write_provenance(dir, "report", c.seed, hr::config_to_json(cfg), files);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radar heart-motion extraction, ECG annotation and synchronization"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic capture bundle");
  add_common(s, synth.common);
  s->add_option("--duration", synth.duration, "Radar capture length (s)");
  s->add_option("--hr", synth.hr, "Mean heart rate (bpm)");
  s->add_flag("--apnea", synth.apnea, "Heart rate decays 10% per 30 s");
  s->add_option("--offset", synth.offset, "ECG start minus radar start (s)");
  s->add_option("--impulse-at", synth.impulse_at, "ECG starts this early and carries the impulse here (s)");
  s->add_option("--loss", synth.loss, "Fraction of packets zero-filled");
  s->add_option("--noise-db", synth.noise_db, "IQ noise power relative to the echo (dB)");
  s->add_flag("--noiseless", synth.noiseless, "No IQ noise");
  s->add_option("--emd", synth.emd, "Delay from R apex to the systolic drop (s)");

  Common radar_c;
  std::string radar_iq;
  auto* r = app.add_subcommand("radar", "IQ capture to velocity, displacement and events");
  add_common(r, radar_c);
  r->add_option("--iq", radar_iq, "IQ capture (default <out-dir>/capture.iq)");

  Common ecg_c;
  std::string ecg_csv;
  auto* e = app.add_subcommand("ecg", "ECG CSV to filtered leads and wave annotations");
  add_common(e, ecg_c);
  e->add_option("--ecg", ecg_csv, "ECG CSV (default <out-dir>/ecg.csv)");

  Common sync_c;
  std::string sync_ann, sync_events, sync_method;
  std::optional<double> manual_offset;
  auto* y = app.add_subcommand("sync", "Estimate the ECG/radar offset");
  add_common(y, sync_c);
  y->add_option("--annotations", sync_ann, "Annotations JSON (default <out-dir>/annotations.json)");
  y->add_option("--radar-events", sync_events, "Radar events JSON (default <out-dir>/radar_events.json)");
  y->add_option("--method", sync_method, "comb, impulse or manual (default: impulse when one was found)")
      ->check(CLI::IsMember({"comb", "impulse", "manual"}));
  y->add_option("--manual-offset", manual_offset, "Offset to report with --method manual (s)");

  Common bench_c;
  std::string bench_iq, bench_ann, bench_sync;
  std::optional<double> bench_loss;
  std::vector<double> sweep;
  bool intervals = false;
  auto* b = app.add_subcommand("bench", "Packet-loss SNR, method agreement and interval RMSE");
  add_common(b, bench_c);
  b->add_option("--iq", bench_iq, "Clean IQ capture (default <out-dir>/capture.iq)");
  b->add_option("--loss", bench_loss, "Fraction of packets to zero-fill");
  b->add_option("--sweep", sweep, "Extra loss rates written to loss_sweep.csv")->delimiter(',');
  b->add_flag("--intervals", intervals, "Score R-R against radar intervals (needs annotations and sync)");
  b->add_option("--annotations", bench_ann, "Annotations JSON (default <out-dir>/annotations.json)");
  b->add_option("--sync", bench_sync, "Sync JSON (default <out-dir>/sync.json)");

  Common report_c;
  std::vector<std::string> report_inputs;
  auto* p = app.add_subcommand("report", "Aggregate bundle results");
  add_common(p, report_c);
  p->add_option("--inputs", report_inputs, "Bundle directories (default: --out-dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ok) {
    return app.exit(ok);
  } catch (const CLI::ParseError& err) {
    std::fprintf(stderr, "error: invalid-argument: %s\n", err.what());
    return 2;
  }

  try {
    if (*s) run_synth(synth);
    else if (*r) run_radar(radar_c, radar_iq);
    else if (*e) run_ecg(ecg_c, ecg_csv);
    else if (*y) run_sync(sync_c, sync_ann, sync_events, sync_method, manual_offset);
    else if (*b) run_bench(bench_c, bench_iq, bench_loss, sweep, intervals, bench_ann, bench_sync);
    else if (*p) run_report(report_c, report_inputs);
  } catch (const hr::Error& err) {
    std::fprintf(stderr, "error: %s: %s\n", err.code().c_str(), err.what());
    return 1;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: internal: %s\n", err.what());
    return 3;
  }
  return 0;
}
