#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seldsynth/array.hpp"
#include "seldsynth/core.hpp"
#include "seldsynth/dsp.hpp"

namespace seld {

enum class TrajectoryShape { Circular, Linear };

std::string to_string(TrajectoryShape s);
TrajectoryShape parse_shape(const std::string& s);

struct TrajectoryNode {
  Doa doa;
  double distance_m = 1.0;
  bool operator==(const TrajectoryNode&) const = default;
};

struct Trajectory {
  int id = 0;
  std::string room_id;
  TrajectoryShape shape = TrajectoryShape::Circular;
  std::vector<TrajectoryNode> nodes;

  /// Cumulative great-circle arc (degrees) from node 0.
  std::vector<double> cumulative_arc() const;
  /// Throws InvalidArgument when nodes are > 2 degrees apart or distances are not positive.
  void validate() const;
};

/// A room's IR collection: one 4-channel IR per trajectory node.
struct IrBank {
  std::string room_id;
  Format format = Format::Foa;
  std::vector<Trajectory> trajectories;
  /// irs[trajectory][node]
  std::vector<std::vector<MultiSignal>> irs;
  std::optional<double> rt60_s;
  int sample_rate = kSampleRate;
  /// Optional recorded room ambience (4 channels).
  std::optional<MultiSignal> ambience;

  std::size_t node_count() const;
  const MultiSignal& ir(int trajectory, int node) const;
  void validate() const;
};

struct SampleInfo {
  std::string sample_id;
  std::string class_label;
  double duration_s = 0.0;
};

struct EventSample {
  SampleInfo info;
  Signal audio;
};

using SampleStore = std::map<std::string, EventSample>;

struct LayerPlanRequest {
  std::vector<SampleInfo> target_pool;
  std::vector<SampleInfo> interferer_pool;
  double total_gap_s = 30.0;
  /// Defaults to total_gap_s when unset.
  std::optional<double> interferer_gap_s;
  double duration_s = 60.0;
  int n_target_layers = 3;
  int n_interferer_layers = 1;
  std::uint64_t seed = 0;
  ClassSet classes = ClassSet::defaults();
};

/// Lays out events in layers: per layer the event time plus a Dirichlet-partitioned gap
/// total fills `duration_s` exactly, with the last event truncated. Samples are drawn
/// without replacement per role until the pool runs out, then with replacement.
SceneScript plan_layers(const LayerPlanRequest& req);

/// Gives every event a static bank node or, with probability `p_moving`, a trajectory
/// traversal long enough for its duration (10 re-draws, then static).
SceneScript assign_spatial(const SceneScript& script, const IrBank& bank, double p_moving, std::uint64_t seed);

/// Per-channel linear convolution of a mono signal with a multichannel IR.
MultiSignal render_static(std::span<const double> signal, const MultiSignal& ir, int sample_rate = kSampleRate);

inline constexpr double kMovingHopS = 0.02;

/// Fractional index into `path_arc` after travelling `arc_deg` from node 0.
double path_position(std::span<const double> path_arc, double arc_deg);

/// Time-variant convolution along a path of IRs ordered in traversal direction, with
/// `path_arc` the cumulative arc of each path node from the first. The path position is
/// sampled every hop; between hops the two nearest IRs are linearly cross-faded.
MultiSignal render_moving(std::span<const double> signal, std::span<const MultiSignal> path_irs,
                          std::span<const double> path_arc, double speed_deg_per_s,
                          double hop_s = kMovingHopS);

/// Path of a moving placement: node indices in traversal order and their cumulative arc.
struct MovingPath {
  std::vector<int> nodes;
  std::vector<double> arc;
};
MovingPath moving_path(const Trajectory& traj, const MovingPlacement& m);

/// DOA of a moving event `t_s` seconds after its onset.
Doa moving_doa(const Trajectory& traj, const MovingPlacement& m, double t_s);

/// Reference labels for all target events of a fully assigned script.
LabelFrameSet derive_labels(const SceneScript& script, const std::vector<Trajectory>& trajectories);

struct MixResult {
  MultiSignal audio;
  LabelFrameSet labels;
  /// Energy of the target-only mix over target-active label frames.
  double target_active_energy = 0.0;
  /// Energy of the scaled ambience over the same samples.
  double noise_active_energy = 0.0;
  double ambience_gain = 0.0;
};

/// Renders every event of the script through `bank`, then adds ambience scaled to the
/// script's SNR relative to the target energy of label frames with an active target.
MixResult mix_scene(const SceneScript& script, const SampleStore& samples, const IrBank& bank,
                    const MultiSignal* ambience);

/// Same trajectories as `bank`, with each IR replaced by the anechoic array response.
IrBank make_anechoic_bank(const IrBank& bank, const ArrayModel& array);

struct TrajectorySpec {
  TrajectoryShape shape = TrajectoryShape::Circular;
  double elevation_deg = 0.0;
  double distance_m = 1.5;
  /// Circular: azimuth span start/end. Linear: bearing of closest approach and half-span.
  double az_start_deg = -180.0;
  double az_end_deg = 179.0;
  double spacing_deg = 1.0;
};

struct SynthBankSpec {
  std::string room_id = "room1";
  Format format = Format::Foa;
  double rt60_s = 0.3;
  double drr_db = 3.0;
  std::vector<TrajectorySpec> trajectories;
  std::uint64_t seed = 0;
};

std::vector<TrajectorySpec> default_trajectory_specs();
Trajectory make_trajectory(int id, const std::string& room_id, const TrajectorySpec& spec);
ArrayModel default_array(Format f);
/// Bank of `synth_reverb_ir` responses on synthetic trajectories.
IrBank synth_bank(const SynthBankSpec& spec);

/// Diffuse 4-channel noise in the array's channel-energy balance.
MultiSignal synth_ambience(std::size_t n_samples, const ArrayModel& array, std::uint64_t seed);

/// Synthetic per-class event samples (tonal/noisy bursts) for desk-scale runs.
SampleStore synth_samples(const std::vector<std::string>& labels, int per_label, double min_s, double max_s,
                          std::uint64_t seed);

std::vector<SampleInfo> pool_for(const SampleStore& store, const std::vector<std::string>& labels);

/// Deterministic seed derivation (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace seld
