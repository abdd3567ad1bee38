#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace seld {

inline constexpr int kSampleRate = 24000;
inline constexpr double kLabelHopS = 0.1;
inline constexpr double kMinFrameOverlapS = 0.05;
inline constexpr double kSpeedOfSound = 343.0;
inline constexpr std::array<double, 3> kMovingSpeeds{10.0, 20.0, 40.0};

enum class ErrorKind {
  InvalidArgument,
  OutOfRange,
  Format,
  Io,
  Missing,
  Mismatch,
  IllConditioned,
};

/// Single exception type for the library; `kind()` tells callers what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

enum class Format { Foa, Mic };

std::string to_string(Format f);
Format parse_format(const std::string& s);

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b);
double norm(const Vec3& v);
Vec3 normalized(const Vec3& v);

/// Direction of arrival in degrees. Azimuth is kept in [-180, 180), elevation in [-90, 90].
struct Doa {
  double azimuth = 0.0;
  double elevation = 0.0;

  bool operator==(const Doa&) const = default;
};

double wrap_azimuth(double az_deg);
bool is_valid(const Doa& d);
Doa make_doa(double az_deg, double el_deg);

/// x = cos el cos az, y = cos el sin az, z = sin el.
Vec3 doa_to_unit_vector(const Doa& d);
/// Inverse of doa_to_unit_vector; `v` need not be normalized but must be non-zero.
Doa unit_vector_to_doa(const Vec3& v);
/// Great-circle distance in degrees, in [0, 180].
double angular_distance(const Doa& a, const Doa& b);
/// Rotates `d` by exactly `angle_deg` along the great circle heading `heading_rad`
/// (measured in the local tangent plane from the elevation-increasing direction).
Doa rotate_along(const Doa& d, double angle_deg, double heading_rad);

struct ClassSet {
  std::vector<std::string> target_classes;
  std::vector<std::string> interferer_labels;

  static ClassSet defaults();

  int size() const { return static_cast<int>(target_classes.size()); }
  /// Target index or nullopt for interferers / unknown labels.
  std::optional<int> index_of(const std::string& label) const;
  bool is_interferer(const std::string& label) const;
  /// Throws InvalidArgument if labels are duplicated or the sets intersect.
  void validate() const;
};

struct StaticPlacement {
  Doa doa;
  double distance_m = 1.0;
  /// Bank node the IR comes from; -1 when placement is not bank-backed.
  int trajectory_id = -1;
  int node_index = -1;
  bool operator==(const StaticPlacement&) const = default;
};

struct MovingPlacement {
  int trajectory_id = 0;
  int start_index = 0;
  double speed_deg_per_s = 10.0;
  int direction = 1;
  bool operator==(const MovingPlacement&) const = default;
};

using Motion = std::variant<std::monostate, StaticPlacement, MovingPlacement>;

struct SceneEvent {
  int id = 0;
  std::string sample_id;
  std::string class_label;
  /// -1 for interferers.
  int class_index = -1;
  int layer_index = 0;
  bool is_interferer = false;
  double onset = 0.0;
  double offset = 0.0;
  Motion motion;

  double duration() const { return offset - onset; }
  bool is_assigned() const { return !std::holds_alternative<std::monostate>(motion); }
};

struct SceneScript {
  std::string recording_id;
  int fold = 1;
  std::string room_id;
  double snr_db = 30.0;
  double duration_s = 60.0;
  int n_target_layers = 3;
  int n_interferer_layers = 1;
  std::vector<SceneEvent> events;
};

struct Violation {
  std::string rule;
  std::vector<int> event_ids;
};

/// Checks every structural rule of a scene script. Violations are data, never thrown.
std::vector<Violation> validate_script(const SceneScript& s);

/// Maximum number of simultaneously active events among those matching `interferers`.
int max_polyphony(const SceneScript& s, bool interferers);

struct LabelEntry {
  int class_index = 0;
  int track_id = 0;
  Doa doa;
  bool operator==(const LabelEntry&) const = default;
};

/// Annotations at 100 ms resolution. Frames with no entries are absent from the map.
struct LabelFrameSet {
  int n_frames = 600;
  std::map<int, std::vector<LabelEntry>> frames;

  const std::vector<LabelEntry>& at(int frame) const;
  void add(int frame, const LabelEntry& e);
  std::size_t entry_count() const;
  /// Sorts entries within each frame by (class, track) and drops empty frames.
  void normalize();
  /// Throws InvalidArgument on duplicate (class, track) in one frame or out-of-range frames/classes.
  void validate(int n_classes) const;

  bool operator==(const LabelFrameSet&) const = default;
};

int label_frame_count(double duration_s);

/// Whether an event active over [onset, offset) covers label frame `k`: the overlap with
/// [0.1k, 0.1(k+1)) is at least 50 ms, or the event is shorter than 50 ms and starts in k.
bool frame_covered(double onset, double offset, int k);

/// Label frames covered by [onset, offset), in ascending order.
std::vector<int> covered_frames(double onset, double offset, int n_frames);

}  // namespace seld
