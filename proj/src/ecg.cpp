#include "heartradar/ecg.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "heartradar/dsp.hpp"
#include "heartradar/errors.hpp"
#include "heartradar/peaks.hpp"

namespace heartradar::ecg {

std::string lead_name(Lead lead) {
  switch (lead) {
    case Lead::I: return "I";
    case Lead::II: return "II";
    case Lead::III: return "III";
    case Lead::AVR: return "AVR";
    case Lead::AVL: return "AVL";
    case Lead::AVF: return "AVF";
  }
  return "?";
}

Lead parse_lead(const std::string& name) {
  std::string upper = name;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Lead l : kAllLeads) {
    if (lead_name(l) == upper) return l;
  }
  throw InvalidArgument("unknown ECG lead '" + name + "'");
}

const std::vector<double>& EcgRecord::lead(Lead l) const {
  const auto it = leads.find(l);
  if (it == leads.end()) throw InvalidArgument("ECG record has no lead " + lead_name(l));
  return it->second;
}

void EcgRecord::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw InvalidArgument("ECG sample rate must be positive");
  }
  const std::size_t n = size();
  for (const auto& [l, v] : leads) {
    if (v.size() != n) throw InvalidArgument("ECG lead " + lead_name(l) + " length differs from the others");
  }
}

AugmentedLeads compute_augmented_leads(std::span<const double> lead_i, std::span<const double> lead_ii,
                                       std::span<const double> lead_iii) {
  if (lead_i.size() != lead_ii.size() || lead_i.size() != lead_iii.size()) {
    throw InvalidArgument("augmented leads: I, II and III must have equal lengths");
  }
  AugmentedLeads out;
  const std::size_t n = lead_i.size();
  out.avr.resize(n);
  out.avl.resize(n);
  out.avf.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.avl[k] = (lead_i[k] - lead_iii[k]) / 2.0;
    out.avr[k] = -(lead_i[k] + lead_ii[k]) / 2.0;
    out.avf[k] = (lead_ii[k] + lead_iii[k]) / 2.0;
  }
  return out;
}

void refresh_augmented_leads(EcgRecord& record) {
  auto aug = compute_augmented_leads(record.lead(Lead::I), record.lead(Lead::II), record.lead(Lead::III));
  record.leads[Lead::AVR] = std::move(aug.avr);
  record.leads[Lead::AVL] = std::move(aug.avl);
  record.leads[Lead::AVF] = std::move(aug.avf);
}

std::vector<double> filter_ecg(std::span<const double> lead, double sample_rate, const EcgFilterParams& params) {
  if (lead.size() <= params.baseline_window) {
    throw InvalidArgument("filter_ecg: need more than " + std::to_string(params.baseline_window) +
                          " samples, got " + std::to_string(lead.size()));
  }
  using dsp::FilterKind;
  auto y = dsp::zero_phase_filter(lead, {FilterKind::highpass, params.highpass_hz, 0.0, params.order}, sample_rate);
  y = dsp::zero_phase_filter(y, {FilterKind::lowpass, params.lowpass_hz, 0.0, params.order}, sample_rate);
  y = dsp::zero_phase_filter(y, {FilterKind::bandstop, params.stop_low_hz, params.stop_high_hz, params.order},
                             sample_rate);
  const auto baseline = dsp::moving_average(y, params.baseline_window, params.baseline_order);
  for (std::size_t k = 0; k < y.size(); ++k) y[k] -= baseline[k];
  return y;
}

std::vector<PeakFeature> detect_peaks(std::span<const double> filtered, double sample_rate, double t0,
                                      const PeakDetectParams& params) {
  if (!(sample_rate > 0.0)) throw InvalidArgument("detect_peaks: sample rate must be positive");
  std::vector<PeakFeature> out;
  if (filtered.empty()) return out;
  dsp::PeakCriteria criteria;
  criteria.min_prominence = dsp::stddev(filtered) * params.prominence_fraction;
  criteria.max_width = params.max_width_s * sample_rate;
  for (const auto& p : dsp::find_peaks(filtered, criteria)) {
    PeakFeature f;
    f.index = p.index;
    f.time = t0 + static_cast<double>(p.index) / sample_rate;
    f.prominence = p.prominence;
    f.width = p.width / sample_rate;
    out.push_back(f);
  }
  return out;
}

std::vector<std::array<double, 2>> peak_feature_space(std::span<const PeakFeature> peaks) {
  std::vector<double> prom;
  std::vector<double> width;
  for (const auto& p : peaks) {
    prom.push_back(p.prominence);
    width.push_back(p.width);
  }
  auto scale = [](std::span<const double> v) {
    const double s = dsp::stddev(v);
    return (s > 0.0 && std::isfinite(s)) ? s : 1.0;
  };
  const double sp = scale(prom);
  const double sw = scale(width);
  std::vector<std::array<double, 2>> out(peaks.size());
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    out[k] = {std::log(peaks[k].prominence / sp), std::log(peaks[k].width / sw)};
  }
  return out;
}

Clustering cluster_waves(std::span<const PeakFeature> peaks, const DbscanParams& params) {
  if (peaks.size() < params.min_pts) {
    Clustering c;
    c.labels.assign(peaks.size(), -1);
    c.too_few_points = true;
    return c;
  }
  // Canonical visiting order so that a permuted input yields the same
  // memberships and the same cluster numbering.
  std::vector<std::size_t> order(peaks.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = peaks[a];
    const auto& pb = peaks[b];
    if (pa.time != pb.time) return pa.time < pb.time;
    if (pa.prominence != pb.prominence) return pa.prominence < pb.prominence;
    return pa.width < pb.width;
  });
  const auto features = peak_feature_space(peaks);
  return dbscan(features, params, order);
}

namespace {

struct ClusterStats {
  int id = -1;
  std::size_t size = 0;
  double median_prominence = 0.0;
  double median_width = 0.0;
};

}  // namespace

WaveAnnotations label_waves(const Clustering& clusters, std::span<const PeakFeature> peaks,
                            const BeatParams& params) {
  if (clusters.labels.size() != peaks.size()) {
    throw InvalidArgument("label_waves: clustering does not match the peak list");
  }
  if (clusters.n_clusters < 2) {
    throw LabelingFailed("label_waves: need at least 2 clusters, got " + std::to_string(clusters.n_clusters) +
                         " from " + std::to_string(peaks.size()) + " peaks");
  }
  std::vector<ClusterStats> stats(static_cast<std::size_t>(clusters.n_clusters));
  for (int c = 0; c < clusters.n_clusters; ++c) {
    std::vector<double> prom;
    std::vector<double> width;
    for (std::size_t k = 0; k < peaks.size(); ++k) {
      if (clusters.labels[k] != c) continue;
      prom.push_back(peaks[k].prominence);
      width.push_back(peaks[k].width);
    }
    auto& s = stats[static_cast<std::size_t>(c)];
    s.id = c;
    s.size = prom.size();
    s.median_prominence = prom.empty() ? 0.0 : dsp::median(prom);
    s.median_width = width.empty() ? 0.0 : dsp::median(width);
  }

  WaveAnnotations out;
  auto pick = [&](auto better) {
    int best = -1;
    for (const auto& s : stats) {
      if (s.id == out.r_cluster || s.id == out.t_cluster || s.size == 0) continue;
      if (best < 0 || better(s, stats[static_cast<std::size_t>(best)])) best = s.id;
    }
    return best;
  };
  out.r_cluster = pick([](const ClusterStats& a, const ClusterStats& b) {
    return a.median_prominence > b.median_prominence;
  });
  out.t_cluster = pick([](const ClusterStats& a, const ClusterStats& b) { return a.median_width > b.median_width; });
  out.p_cluster = pick([](const ClusterStats& a, const ClusterStats& b) { return a.size > b.size; });

  std::vector<std::size_t> order(peaks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return peaks[a].time < peaks[b].time; });

  std::vector<std::size_t> r_idx;
  std::vector<std::size_t> t_idx;
  std::vector<std::size_t> p_idx;
  for (std::size_t k : order) {
    const int label = clusters.labels[k];
    if (label == out.r_cluster) r_idx.push_back(k);
    else if (label == out.t_cluster) t_idx.push_back(k);
    else if (label >= 0 && label == out.p_cluster) p_idx.push_back(k);
  }

  std::vector<bool> used(peaks.size(), false);
  for (std::size_t j = 0; j < r_idx.size(); ++j) {
    const double r = peaks[r_idx[j]].time;
    const double prev_r = j > 0 ? peaks[r_idx[j - 1]].time : -std::numeric_limits<double>::infinity();
    const double next_r = j + 1 < r_idx.size() ? peaks[r_idx[j + 1]].time : std::numeric_limits<double>::infinity();
    used[r_idx[j]] = true;
    out.r_times.push_back(r);

    std::size_t best_p = peaks.size();
    for (std::size_t k : p_idx) {
      const double t = peaks[k].time;
      if (t < r && t > prev_r && r - t <= params.p_window_s && !used[k]) best_p = k;
    }
    if (best_p < peaks.size()) {
      used[best_p] = true;
      out.p_times.push_back(peaks[best_p].time);
    }
    for (std::size_t k : t_idx) {
      const double t = peaks[k].time;
      if (t > r && t < next_r && t - r <= params.t_window_s && !used[k]) {
        used[k] = true;
        out.t_times.push_back(t);
        break;
      }
    }
  }
  for (std::size_t k : order) {
    if (!used[k]) out.outliers.push_back(peaks[k]);
  }
  return out;
}

std::optional<double> detect_sync_impulse(std::span<const double> lead, double sample_rate, double t0,
                                          double threshold_mv_per_s) {
  if (!(sample_rate > 0.0)) throw InvalidArgument("detect_sync_impulse: sample rate must be positive");
  const std::size_t n = lead.size();
  if (n == 0) return std::nullopt;
  auto value = [&](std::ptrdiff_t i) { return i < 0 ? 0.0 : lead[static_cast<std::size_t>(i)]; };
  for (std::size_t i = 0; i < n; ++i) {
    double slope;
    if (i + 1 < n) {
      slope = (value(static_cast<std::ptrdiff_t>(i) + 1) - value(static_cast<std::ptrdiff_t>(i) - 1)) * sample_rate / 2.0;
    } else {
      slope = (value(static_cast<std::ptrdiff_t>(i)) - value(static_cast<std::ptrdiff_t>(i) - 1)) * sample_rate;
    }
    if (std::abs(slope) > threshold_mv_per_s) return t0 + static_cast<double>(i) / sample_rate;
  }
  return std::nullopt;
}

EcgAnalysis annotate(const EcgRecord& record, const EcgProcessing& processing) {
  record.validate();
  const auto& raw = record.lead(Lead::II);
  EcgAnalysis out;
  const auto impulse =
      detect_sync_impulse(raw, record.sample_rate, record.t0, processing.impulse_threshold_mv_per_s);

  std::size_t first = 0;
  if (impulse) {
    const double start = *impulse + processing.impulse_settle_s;
    first = static_cast<std::size_t>(std::ceil((start - record.t0) * record.sample_rate - 1e-9));
    first = std::min(first, raw.size());
  }
  const std::span<const double> segment(raw.data() + first, raw.size() - first);
  out.filtered_t0 = record.time(first);
  out.filtered_ii = filter_ecg(segment, record.sample_rate, processing.filter);
  out.peaks = detect_peaks(out.filtered_ii, record.sample_rate, out.filtered_t0, processing.peaks);
  for (auto& p : out.peaks) p.index += first;
  out.clusters = cluster_waves(out.peaks, processing.dbscan);
  out.annotations = label_waves(out.clusters, out.peaks, processing.beats);
  out.annotations.impulse_time = impulse;
  return out;
}

}  // namespace heartradar::ecg
