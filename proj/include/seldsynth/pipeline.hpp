#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seldsynth/dataio.hpp"
#include "seldsynth/oracle.hpp"

namespace seld {

struct SynthesisOptions {
  bool ambience = true;
  bool interferers = true;
  bool anechoic = false;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

struct RecordingEntry {
  std::string id;
  int fold = 1;
  std::string room_id;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  int n_events = 0;
  int n_interferers = 0;
};

/// Everything needed to render one recording, before any audio is produced.
struct RecordingPlan {
  RecordingEntry entry;
  SceneScript script;
  std::size_t bank_index = 0;
};

/// `fold<f>_mix<NNN>` with a 1-based, zero-padded recording number.
std::string recording_id(int fold, int index);

/// Plans every recording of a run; deterministic in the config seed. Only the trajectories
/// of `layout_banks` (one per room) are consulted.
std::vector<RecordingPlan> plan_dataset(const RunConfig& config, const SampleStore& samples,
                                        const std::vector<IrBank>& layout_banks);

SampleStore load_samples(const RunConfig& config);

/// Writes `<fmt>_<id>.wav` and `meta_<id>.csv` per recording plus `manifest.csv`.
std::vector<RecordingEntry> synthesize_dataset(const RunConfig& config, const fs::path& out,
                                               const SynthesisOptions& options);

/// Feature stacks for every `<fmt>_<id>.wav` in `in`, written as `<fmt>_<id>.skt`.
std::vector<fs::path> extract_features_dir(const fs::path& in, Format format, const fs::path& out);

/// Degraded copies of every `meta_<id>.csv` in `ref`. The spec seed is mixed with the id so
/// each file gets its own stream. Optionally also writes `accdoa_<id>.skt`.
std::vector<fs::path> oracle_dir(const fs::path& ref, const DegradationSpec& spec, const fs::path& out,
                                 bool write_accdoa = false);

/// Pairs `meta_<id>.csv` files by id; throws Missing naming every unmatched file.
MetricsReport evaluate_dirs(const fs::path& ref, const fs::path& pred, int n_classes,
                            double threshold_deg = kDefaultDoaThresholdDeg, int frames_per_segment = 1);

struct BankBuildSpec {
  int rooms = 1;
  std::vector<double> rt60_s{0.3};
  std::vector<double> drr_db{3.0};
  std::vector<Format> formats{Format::Foa, Format::Mic};
  std::vector<TrajectorySpec> trajectories;
  bool ambience = true;
  double ambience_s = 60.0;
  std::uint64_t seed = 0;
};

/// Writes `<out>/room<k>/<fmt>/` banks readable by `read_ir_bank`.
std::vector<fs::path> make_banks(const BankBuildSpec& spec, const fs::path& out);

std::uint64_t fnv1a(const std::string& s);

}  // namespace seld
