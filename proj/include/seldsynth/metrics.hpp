#pragma once

#include <string>
#include <vector>

#include "seldsynth/core.hpp"

namespace seld {

inline constexpr double kDefaultDoaThresholdDeg = 20.0;
inline constexpr double kUnmatchedClassErrorDeg = 180.0;

/// Minimum-cost assignment on a rectangular cost matrix (rows x cols). Returns, for each
/// row, the assigned column or -1; min(rows, cols) rows are assigned.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost);

struct DoaPair {
  int ref = 0;
  int pred = 0;
  double error_deg = 0.0;
};

struct PairingResult {
  std::vector<DoaPair> pairs;
  std::vector<int> unmatched_refs;
  std::vector<int> unmatched_preds;
};

/// Optimal one-to-one pairing minimizing the total angular distance.
PairingResult pair_within_class(const std::vector<Doa>& refs, const std::vector<Doa>& preds);

struct ClassCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long n_ref = 0;
  long n_pairs = 0;
  double error_sum = 0.0;

  bool operator==(const ClassCounts&) const = default;
};

/// Additive counters; merge() makes per-file accumulation parallelizable.
struct MetricCounts {
  std::vector<ClassCounts> per_class;
  long substitutions = 0;
  long deletions = 0;
  long insertions = 0;
  long frames = 0;
  /// (class, angular error) of every ref/pred pair regardless of threshold.
  std::vector<std::pair<int, double>> pairs;

  explicit MetricCounts(int n_classes = 0) : per_class(static_cast<std::size_t>(n_classes)) {}
  int n_classes() const { return static_cast<int>(per_class.size()); }
  void merge(const MetricCounts& other);
};

/// Updates counts with one label frame (or pooled segment) of references and predictions.
void accumulate(MetricCounts& counts, const std::vector<LabelEntry>& ref, const std::vector<LabelEntry>& pred,
                double threshold_deg = kDefaultDoaThresholdDeg);

struct ClassScore {
  int class_index = 0;
  long n_ref = 0;
  double le_deg = 0.0;
  double lr = 0.0;
};

struct MetricsReport {
  double er = 0.0;
  double f = 0.0;
  double le_cd = 0.0;
  double lr_cd = 0.0;
  double threshold_deg = kDefaultDoaThresholdDeg;
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long n_ref = 0;
  long substitutions = 0;
  long deletions = 0;
  long insertions = 0;
  long n_pairs = 0;
  /// True when there were no reference events at all.
  bool undefined = false;
  std::vector<ClassScore> per_class;
  std::vector<std::string> notes;
};

MetricsReport finalize(const MetricCounts& counts, double threshold_deg = kDefaultDoaThresholdDeg);

/// Pools `frames_per_segment` label frames: per (class, track) active if active in any frame,
/// DOA the normalized mean direction. 1 returns the input unchanged.
LabelFrameSet pool_segments(const LabelFrameSet& labels, int frames_per_segment);

/// Accumulates every frame of `ref` (predictions past its end are ignored, missing ones are empty).
void accumulate_file(MetricCounts& counts, const LabelFrameSet& ref, const LabelFrameSet& pred,
                     double threshold_deg = kDefaultDoaThresholdDeg, int frames_per_segment = 1);

MetricsReport evaluate(const LabelFrameSet& ref, const LabelFrameSet& pred, int n_classes,
                       double threshold_deg = kDefaultDoaThresholdDeg, int frames_per_segment = 1);

struct RankedSystem {
  std::string system_id;
  MetricsReport report;
  int rank_er = 0;
  int rank_f = 0;
  int rank_le = 0;
  int rank_lr = 0;
  int rank_sum = 0;
};

/// Ranks each metric independently (ties share the minimum rank) and orders by rank sum,
/// then ER, then system id.
std::vector<RankedSystem> rank_systems(const std::vector<std::pair<std::string, MetricsReport>>& reports);

}  // namespace seld
