#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "seldsynth/array.hpp"
#include "seldsynth/core.hpp"
#include "seldsynth/features.hpp"
#include "seldsynth/metrics.hpp"
#include "seldsynth/spatializer.hpp"

namespace seld {

namespace fs = std::filesystem;

struct AudioFile {
  int sample_rate = kSampleRate;
  MultiSignal channels;
};

/// RIFF/WAVE, 32-bit float, interleaved (WAVE_FORMAT_EXTENSIBLE).
void write_wav(const fs::path& path, const MultiSignal& channels, int sample_rate = kSampleRate);
/// Reads float32 or 16/24/32-bit integer PCM WAV.
AudioFile read_wav(const fs::path& path);

/// Recording I/O: exactly 4 channels at 24 kHz.
void write_audio(const fs::path& path, const MultiSignal& audio);
MultiSignal read_audio(const fs::path& path);

/// CSV rows `frame,class,track,azimuth,elevation` in integers, sorted, no header.
std::string format_metadata(const LabelFrameSet& labels);
void write_metadata(const fs::path& path, const LabelFrameSet& labels);
LabelFrameSet parse_metadata(const std::string& text, int n_frames = 600, const std::string& origin = "<memory>");
LabelFrameSet read_metadata(const fs::path& path, int n_frames = 600);

inline constexpr int kBankManifestVersion = 1;
inline constexpr const char* kBankManifestName = "index.json";

/// Directory with `index.json` plus one (4 x nodes)-channel WAV per trajectory.
void write_ir_bank(const fs::path& dir, const IrBank& bank);
IrBank read_ir_bank(const fs::path& dir);

/// Header: "SKT1", u32 rank, u32 dims[rank], then per axis u32 length + UTF-8 label;
/// payload: little-endian float32, row-major.
void write_tensor_dump(const fs::path& path, const Tensor& t);
Tensor read_tensor_dump(const fs::path& path, const std::optional<std::vector<std::size_t>>& expect_dims = std::nullopt);
void write_feature_dump(const fs::path& path, const Tensor& features);
void write_accdoa_dump(const fs::path& path, const Tensor& accdoa);

enum class SplitRole { Training, Validation, Testing, Evaluation };
std::string to_string(SplitRole r);

struct SplitSpec {
  std::map<SplitRole, std::set<int>> roles;

  static SplitSpec defaults();
  std::optional<SplitRole> role_of(int fold) const;
  /// Throws when role sets overlap or a used fold has no role.
  void validate(const std::set<int>& used_folds) const;
};

struct SampleSource {
  /// Directory with `samples.json` ([{"id", "class", "file"}]) and mono 24 kHz WAVs.
  std::optional<fs::path> dir;
  int synthetic_per_class = 8;
  double synthetic_min_s = 1.0;
  double synthetic_max_s = 8.0;
};

struct BankPaths {
  fs::path foa;
  fs::path mic;
};

struct RunConfig {
  int n_recordings = 10;
  double duration_s = 60.0;
  int n_target_layers = 3;
  int n_interferer_layers = 1;
  std::pair<double, double> target_gap_s{10.0, 30.0};
  std::pair<double, double> interferer_gap_s{20.0, 45.0};
  std::pair<double, double> snr_db{6.0, 30.0};
  double p_moving = 0.5;
  std::vector<double> speeds{10.0, 20.0, 40.0};
  std::uint64_t seed = 0;
  std::vector<Format> formats{Format::Foa, Format::Mic};
  std::vector<int> folds{1};
  /// One entry per room; fold f uses room (f - 1) mod rooms.
  std::vector<BankPaths> banks;
  SampleSource samples;
  ClassSet classes = ClassSet::defaults();
  SplitSpec split = SplitSpec::defaults();

  void validate() const;
};

/// Parses the JSON run configuration; relative paths resolve against the file's directory.
/// Errors name the file and the offending field.
RunConfig read_run_config(const fs::path& path);
RunConfig parse_run_config(const std::string& text, const fs::path& base_dir, const std::string& origin);

SampleStore read_sample_dir(const fs::path& dir);

std::string report_to_text(const MetricsReport& r);
std::string report_to_json(const MetricsReport& r, const std::string& system_id);
std::pair<std::string, MetricsReport> report_from_json(const std::string& text, const std::string& origin);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace seld
