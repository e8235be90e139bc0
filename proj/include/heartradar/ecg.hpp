#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace heartradar::ecg {

enum class Lead { I, II, III, AVR, AVL, AVF };

inline constexpr std::array<Lead, 6> kAllLeads{Lead::I, Lead::II, Lead::III, Lead::AVR, Lead::AVL, Lead::AVF};

std::string lead_name(Lead lead);
/// Accepts "I", "II", "III", "AVR", "AVL", "AVF" in any letter case.
Lead parse_lead(const std::string& name);

// Multi-lead record in mV. Sample i of every lead sits at t0 + i / sample_rate.
struct EcgRecord {
  double sample_rate = 2000.0;
  double t0 = 0.0;
  std::map<Lead, std::vector<double>> leads;

  std::size_t size() const { return leads.empty() ? 0 : leads.begin()->second.size(); }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) / sample_rate; }
  double duration() const { return static_cast<double>(size()) / sample_rate; }
  const std::vector<double>& lead(Lead l) const;
  /// Throws InvalidArgument when leads disagree in length or the rate is not positive.
  void validate() const;
};

struct AugmentedLeads {
  std::vector<double> avr;
  std::vector<double> avl;
  std::vector<double> avf;
};

/// AVL = (I - III)/2, AVR = -(I + II)/2, AVF = (II + III)/2.
AugmentedLeads compute_augmented_leads(std::span<const double> lead_i, std::span<const double> lead_ii,
                                       std::span<const double> lead_iii);

/// Recomputes AVR/AVL/AVF from the bipolar leads already in the record.
void refresh_augmented_leads(EcgRecord& record);

struct EcgFilterParams {
  double highpass_hz = 0.05;
  double lowpass_hz = 75.0;
  double stop_low_hz = 45.0;
  double stop_high_hz = 55.0;
  int order = 4;
  std::size_t baseline_window = 2001;  // samples
  std::size_t baseline_order = 2;
};

/// High-pass, low-pass and band-stop (all zero phase), then subtraction of
/// the cascaded moving-average baseline.
std::vector<double> filter_ecg(std::span<const double> lead, double sample_rate,
                               const EcgFilterParams& params = {});

struct PeakFeature {
  double time = 0.0;        // s, record time
  double prominence = 0.0;  // mV
  double width = 0.0;       // s, at half prominence
  std::size_t index = 0;    // sample index in the lead
};

struct PeakDetectParams {
  double prominence_fraction = 0.2;  // of the signal's standard deviation
  double max_width_s = 0.2;
};

std::vector<PeakFeature> detect_peaks(std::span<const double> filtered, double sample_rate, double t0 = 0.0,
                                      const PeakDetectParams& params = {});

struct DbscanParams {
  double eps = 0.5;
  std::size_t min_pts = 4;
};

struct Clustering {
  std::vector<int> labels;  // per input peak; -1 marks an outlier
  int n_clusters = 0;
  bool too_few_points = false;
};

/// Generic DBSCAN on 2-D points with Euclidean distance. Points are visited
/// in the order given by `visit_order`, which makes the result independent
/// of how the caller arranged the input.
Clustering dbscan(std::span<const std::array<double, 2>> points, const DbscanParams& params,
                  std::span<const std::size_t> visit_order);

/// Log of (prominence, width) each scaled by its sample standard deviation.
std::vector<std::array<double, 2>> peak_feature_space(std::span<const PeakFeature> peaks);

/// DBSCAN on peak_feature_space. Fewer than min_pts peaks makes every peak
/// an outlier and sets too_few_points.
Clustering cluster_waves(std::span<const PeakFeature> peaks, const DbscanParams& params = {});

struct BeatParams {
  double p_window_s = 0.3;  // P searched this far before R
  double t_window_s = 0.5;  // T searched this far after R
};

struct WaveAnnotations {
  std::vector<double> p_times;
  std::vector<double> r_times;
  std::vector<double> t_times;
  std::vector<PeakFeature> outliers;
  std::optional<double> impulse_time;
  int r_cluster = -1;
  int t_cluster = -1;
  int p_cluster = -1;
};

/// R = cluster with the highest median prominence, T = widest remaining
/// cluster, P = the largest of the rest. Throws LabelingFailed on fewer
/// than two clusters.
WaveAnnotations label_waves(const Clustering& clusters, std::span<const PeakFeature> peaks,
                            const BeatParams& params = {});

/// First time |d lead / dt| exceeds threshold (mV/s); the record is taken
/// to start from 0 mV, so a pulse already high on sample 0 is caught there.
std::optional<double> detect_sync_impulse(std::span<const double> lead, double sample_rate, double t0 = 0.0,
                                          double threshold_mv_per_s = 50'000.0);

struct EcgProcessing {
  EcgFilterParams filter{};
  PeakDetectParams peaks{};
  DbscanParams dbscan{};
  BeatParams beats{};
  double impulse_threshold_mv_per_s = 50'000.0;
  double impulse_settle_s = 1.0;  // skipped after a detected impulse
};

struct EcgAnalysis {
  double filtered_t0 = 0.0;  // record time of filtered_ii[0]
  std::vector<double> filtered_ii;
  std::vector<PeakFeature> peaks;
  Clustering clusters;
  WaveAnnotations annotations;
};

/// Lead II end to end: impulse search on the raw trace, filtering, peak
/// detection, clustering and labelling. When an impulse is found, only the
/// samples from impulse_time + impulse_settle_s onward are annotated.
EcgAnalysis annotate(const EcgRecord& record, const EcgProcessing& processing = {});

}  // namespace heartradar::ecg
