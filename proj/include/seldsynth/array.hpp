#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "seldsynth/core.hpp"
#include "seldsynth/dsp.hpp"

namespace seld {

/// Multichannel buffer stored channel-major.
using MultiSignal = std::vector<Signal>;

/// Number of real spherical harmonics up to `order`: (order + 1)^2.
inline int sh_count(int order) { return (order + 1) * (order + 1); }

/// Real spherical harmonics in ACN order with SN3D normalization and no
/// Condon-Shortley phase, evaluated at `d`. Order 1 yields (W, Y, Z, X).
std::vector<double> real_sh(const Doa& d, int order);

enum class ArrayKind { FoaIdeal, Tetrahedral };

struct Sensor {
  Doa direction;
  double radius_m = 0.042;
};

/// Array responses sampled on an equirectangular grid. Each response is a
/// 4-channel IR whose tap `latency` corresponds to the wavefront reaching the array centre.
struct MeasuredGrid {
  double az_step_deg = 5.0;
  double el_step_deg = 5.0;
  int latency = 0;
  std::vector<Doa> nodes;
  std::vector<MultiSignal> responses;
};

/// Equirectangular node layout: elevations -90..90, azimuths -180..(180 - step).
std::vector<Doa> equirectangular_nodes(double az_step_deg, double el_step_deg);

struct ShFit;

class ArrayModel {
 public:
  static ArrayModel foa_ideal();
  /// Four capsules at (45,35), (-45,-35), (135,-35), (-135,35) on a sphere of `radius_m`.
  static ArrayModel tetrahedral(double radius_m = 0.042);
  static ArrayModel tetrahedral(std::vector<Sensor> sensors);
  /// Array whose steering comes from a least-squares SH fit of `grid` at `sh_order`.
  /// Throws IllConditioned when the grid cannot support the order.
  static ArrayModel from_grid(ArrayKind kind, std::vector<Sensor> sensors, MeasuredGrid grid, int sh_order);

  ArrayKind kind() const { return kind_; }
  const std::vector<Sensor>& sensors() const { return sensors_; }
  const std::optional<MeasuredGrid>& grid() const { return grid_; }
  int sh_order() const { return sh_order_; }
  const ShFit* fit() const { return fit_.get(); }

  /// Geometric plane-wave delay of sensor `i` relative to the array centre, in samples
  /// (negative when the sensor faces the source).
  double sensor_delay_samples(int i, const Doa& d) const;

 private:
  ArrayKind kind_ = ArrayKind::FoaIdeal;
  std::vector<Sensor> sensors_;
  std::optional<MeasuredGrid> grid_;
  int sh_order_ = 1;
  std::shared_ptr<const ShFit> fit_;
};

/// Least-squares SH coefficients of a grid: coeffs[q][ch * taps + n].
struct ShFit {
  int order = 0;
  int channels = 4;
  int taps = 0;
  int latency = 0;
  double condition_number = 0.0;
  std::vector<std::vector<double>> coeffs;
};

ShFit fit_sh(const MeasuredGrid& grid, int order);

struct SteeringResponse {
  MultiSignal taps;
  /// Tap index of the wavefront arrival at the array centre.
  int latency = 0;
};

/// FOA-ideal: SN3D order-1 gains. Tetrahedral without grid: free-field omni capsules,
/// each a fixed-window sinc at the geometric delay. With a grid: SH interpolation.
SteeringResponse steering_response(const Doa& doa, const ArrayModel& array);

/// Samples the array's free-field model on a grid (stand-in for a measured grid).
MeasuredGrid sample_grid(const ArrayModel& array, double az_step_deg, double el_step_deg);

/// Steering response delayed by distance/c and scaled by 1/distance (1 m reference).
MultiSignal anechoic_ir(const Doa& doa, double distance_m, const ArrayModel& array);

double distance_delay_samples(double distance_m);

/// Amplitude envelope of the reverberant tail: -60 dB after `rt60_s`.
double tail_envelope(double t_s, double rt60_s);

inline constexpr int kTailOnsetSamples = 48;

/// Anechoic direct path plus an exponentially decaying diffuse noise tail whose energy
/// sits `drr_db` below the direct path. `drr_db = +inf` disables the tail.
MultiSignal synth_reverb_ir(double rt60_s, double drr_db, const Doa& direct_doa, double distance_m,
                            const ArrayModel& array, std::uint64_t seed);

/// Relative per-channel energy of a spatially diffuse field in the array's format.
std::vector<double> diffuse_channel_energy(const ArrayModel& array);

}  // namespace seld
