#include "seldsynth/array.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

namespace seld {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr int kSteerHalf = 32;
constexpr double kMaxCondition = 1e10;

bool divides(double whole, double step) {
  if (!(step > 0.0)) return false;
  const double q = whole / step;
  return std::abs(q - std::round(q)) < 1e-9;
}

}  // namespace

std::vector<double> real_sh(const Doa& d, int order) {
  if (order < 0) throw Error(ErrorKind::InvalidArgument, "negative SH order");
  const double x = std::sin(d.elevation * kDeg);
  const double s = std::cos(d.elevation * kDeg);
  const double az = d.azimuth * kDeg;

  // Schmidt semi-normalized associated Legendre functions, P[n][m].
  std::vector<std::vector<double>> p(order + 1, std::vector<double>(order + 1, 0.0));
  p[0][0] = 1.0;
  for (int m = 1; m <= order; ++m) {
    p[m][m] = (m == 1 ? 1.0 : std::sqrt((2.0 * m - 1.0) / (2.0 * m))) * s * p[m - 1][m - 1];
  }
  for (int m = 0; m < order; ++m) p[m + 1][m] = std::sqrt(2.0 * m + 1.0) * x * p[m][m];
  for (int m = 0; m <= order; ++m) {
    for (int n = m + 2; n <= order; ++n) {
      const double a = (2.0 * n - 1.0) * x * p[n - 1][m];
      const double b = std::sqrt(static_cast<double>((n - 1) * (n - 1) - m * m)) * p[n - 2][m];
      p[n][m] = (a - b) / std::sqrt(static_cast<double>(n * n - m * m));
    }
  }

  std::vector<double> y(sh_count(order));
  for (int n = 0; n <= order; ++n) {
    for (int m = -n; m <= n; ++m) {
      const int acn = n * n + n + m;
      if (m > 0) {
        y[acn] = p[n][m] * std::cos(m * az);
      } else if (m < 0) {
        y[acn] = p[n][-m] * std::sin(-m * az);
      } else {
        y[acn] = p[n][0];
      }
    }
  }
  return y;
}

std::vector<Doa> equirectangular_nodes(double az_step_deg, double el_step_deg) {
  if (!divides(360.0, az_step_deg) || !divides(180.0, el_step_deg)) {
    throw Error(ErrorKind::InvalidArgument, "grid spacing must divide 360 (azimuth) and 180 (elevation)");
  }
  const int n_az = static_cast<int>(std::round(360.0 / az_step_deg));
  const int n_el = static_cast<int>(std::round(180.0 / el_step_deg)) + 1;
  std::vector<Doa> nodes;
  nodes.reserve(static_cast<std::size_t>(n_az * n_el));
  for (int e = 0; e < n_el; ++e) {
    for (int a = 0; a < n_az; ++a) nodes.push_back({-180.0 + a * az_step_deg, -90.0 + e * el_step_deg});
  }
  return nodes;
}

ArrayModel ArrayModel::foa_ideal() {
  ArrayModel m;
  m.kind_ = ArrayKind::FoaIdeal;
  m.sh_order_ = 1;
  return m;
}

ArrayModel ArrayModel::tetrahedral(double radius_m) {
  return tetrahedral(std::vector<Sensor>{{{45.0, 35.0}, radius_m},
                                         {{-45.0, -35.0}, radius_m},
                                         {{135.0, -35.0}, radius_m},
                                         {{-135.0, 35.0}, radius_m}});
}

ArrayModel ArrayModel::tetrahedral(std::vector<Sensor> sensors) {
  if (sensors.size() != 4) throw Error(ErrorKind::InvalidArgument, "tetrahedral array needs exactly 4 sensors");
  for (const auto& s : sensors) {
    if (!(s.radius_m > 0.0) || !is_valid(s.direction)) {
      throw Error(ErrorKind::InvalidArgument, "sensor radius must be > 0 with a valid direction");
    }
  }
  ArrayModel m;
  m.kind_ = ArrayKind::Tetrahedral;
  m.sensors_ = std::move(sensors);
  return m;
}

ArrayModel ArrayModel::from_grid(ArrayKind kind, std::vector<Sensor> sensors, MeasuredGrid grid, int sh_order) {
  ArrayModel m = kind == ArrayKind::Tetrahedral ? tetrahedral(std::move(sensors)) : foa_ideal();
  m.fit_ = std::make_shared<const ShFit>(fit_sh(grid, sh_order));
  m.sh_order_ = sh_order;
  m.grid_ = std::move(grid);
  return m;
}

double ArrayModel::sensor_delay_samples(int i, const Doa& d) const {
  const auto& s = sensors_.at(static_cast<std::size_t>(i));
  const double proj = dot(doa_to_unit_vector(s.direction), doa_to_unit_vector(d));
  return -s.radius_m * proj / kSpeedOfSound * kSampleRate;
}

ShFit fit_sh(const MeasuredGrid& grid, int order) {
  if (!divides(360.0, grid.az_step_deg) || !divides(180.0, grid.el_step_deg)) {
    throw Error(ErrorKind::InvalidArgument, "grid spacing must divide 360 (azimuth) and 180 (elevation)");
  }
  if (grid.nodes.empty() || grid.nodes.size() != grid.responses.size()) {
    throw Error(ErrorKind::Mismatch, "grid node count does not match response count");
  }
  const int channels = static_cast<int>(grid.responses[0].size());
  const int taps = static_cast<int>(grid.responses[0].at(0).size());
  for (const auto& r : grid.responses) {
    if (static_cast<int>(r.size()) != channels) throw Error(ErrorKind::Mismatch, "grid response channel count");
    for (const auto& ch : r) {
      if (static_cast<int>(ch.size()) != taps) throw Error(ErrorKind::Mismatch, "grid response length");
    }
  }

  const int q = sh_count(order);
  std::set<std::tuple<long, long, long>> distinct;
  for (const auto& d : grid.nodes) {
    const Vec3 u = doa_to_unit_vector(d);
    distinct.insert({std::lround(u[0] * 1e9), std::lround(u[1] * 1e9), std::lround(u[2] * 1e9)});
  }
  if (static_cast<std::size_t>(q) > distinct.size()) {
    throw Error(ErrorKind::IllConditioned, "grid has " + std::to_string(distinct.size()) +
                                               " distinct directions, too few for SH order " +
                                               std::to_string(order));
  }

  const auto rows = static_cast<Eigen::Index>(grid.nodes.size());
  Eigen::MatrixXd basis(rows, q);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto y = real_sh(grid.nodes[static_cast<std::size_t>(r)], order);
    for (int c = 0; c < q; ++c) basis(r, c) = y[static_cast<std::size_t>(c)];
  }
  Eigen::MatrixXd rhs(rows, channels * taps);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& resp = grid.responses[static_cast<std::size_t>(r)];
    for (int ch = 0; ch < channels; ++ch) {
      for (int n = 0; n < taps; ++n) rhs(r, ch * taps + n) = resp[ch][n];
    }
  }

  // Fitting each time tap is the same linear map as fitting each frequency bin,
  // since the basis is real and the DFT is linear.
  Eigen::BDCSVD<Eigen::MatrixXd> svd(basis, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(cond < kMaxCondition)) {
    throw Error(ErrorKind::IllConditioned, "SH fit of order " + std::to_string(order) +
                                               " is ill-conditioned (condition number " +
                                               std::to_string(cond) + ")");
  }
  const Eigen::MatrixXd coeffs = svd.solve(rhs);

  ShFit fit;
  fit.order = order;
  fit.channels = channels;
  fit.taps = taps;
  fit.latency = grid.latency;
  fit.condition_number = cond;
  fit.coeffs.assign(q, std::vector<double>(static_cast<std::size_t>(channels * taps)));
  for (int c = 0; c < q; ++c) {
    for (int k = 0; k < channels * taps; ++k) fit.coeffs[c][k] = coeffs(c, k);
  }
  return fit;
}

SteeringResponse steering_response(const Doa& doa, const ArrayModel& array) {
  SteeringResponse out;
  if (const ShFit* fit = array.fit()) {
    const auto y = real_sh(doa, fit->order);
    out.latency = fit->latency;
    out.taps.assign(fit->channels, Signal(static_cast<std::size_t>(fit->taps), 0.0));
    for (std::size_t c = 0; c < y.size(); ++c) {
      const auto& row = fit->coeffs[c];
      for (int ch = 0; ch < fit->channels; ++ch) {
        for (int n = 0; n < fit->taps; ++n) out.taps[ch][n] += y[c] * row[ch * fit->taps + n];
      }
    }
    return out;
  }
  if (array.kind() == ArrayKind::FoaIdeal) {
    const auto y = real_sh(doa, 1);
    out.latency = 0;
    for (double g : y) out.taps.push_back({g});
    return out;
  }
  // Free-field omni capsules. The window is anchored to the tap grid (not to the delay),
  // which keeps every tap an analytic function of direction.
  out.latency = kSteerHalf;
  out.taps.assign(4, Signal(2 * kSteerHalf + 1, 0.0));
  for (int i = 0; i < 4; ++i) {
    const double tau = array.sensor_delay_samples(i, doa);
    for (int n = 0; n <= 2 * kSteerHalf; ++n) {
      const double t = n - kSteerHalf - tau;
      const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
      out.taps[i][n] = sinc * kaiser(static_cast<double>(n - kSteerHalf) / kSteerHalf, kFracDelayBeta);
    }
  }
  return out;
}

MeasuredGrid sample_grid(const ArrayModel& array, double az_step_deg, double el_step_deg) {
  MeasuredGrid g;
  g.az_step_deg = az_step_deg;
  g.el_step_deg = el_step_deg;
  g.nodes = equirectangular_nodes(az_step_deg, el_step_deg);
  for (const auto& d : g.nodes) {
    auto r = steering_response(d, array);
    g.latency = r.latency;
    g.responses.push_back(std::move(r.taps));
  }
  return g;
}

double distance_delay_samples(double distance_m) { return distance_m / kSpeedOfSound * kSampleRate; }

MultiSignal anechoic_ir(const Doa& doa, double distance_m, const ArrayModel& array) {
  if (!(distance_m > 0.0)) throw Error(ErrorKind::InvalidArgument, "source distance must be > 0");
  const SteeringResponse steer = steering_response(doa, array);
  const FractionalDelay fd = fractional_delay(distance_delay_samples(distance_m) - steer.latency);
  const double gain = 1.0 / distance_m;
  std::size_t len = 1;
  for (const auto& ch : steer.taps) {
    const long end = fd.first_index + static_cast<long>(fd.taps.size() + ch.size()) - 1;
    len = std::max(len, static_cast<std::size_t>(std::max(1L, end)));
  }
  MultiSignal ir(steer.taps.size(), Signal(len, 0.0));
  for (std::size_t ch = 0; ch < steer.taps.size(); ++ch) {
    const Signal c = convolve(steer.taps[ch], fd.taps);
    accumulate_into(ir[ch], c, fd.first_index, gain);
  }
  return ir;
}

double tail_envelope(double t_s, double rt60_s) { return std::pow(10.0, -3.0 * t_s / rt60_s); }

std::vector<double> diffuse_channel_energy(const ArrayModel& array) {
  if (array.kind() == ArrayKind::FoaIdeal) return {1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  return {1.0, 1.0, 1.0, 1.0};
}

MultiSignal synth_reverb_ir(double rt60_s, double drr_db, const Doa& direct_doa, double distance_m,
                            const ArrayModel& array, std::uint64_t seed) {
  if (!(rt60_s > 0.0)) throw Error(ErrorKind::InvalidArgument, "rt60 must be > 0");
  MultiSignal ir = anechoic_ir(direct_doa, distance_m, array);
  if (std::isinf(drr_db) && drr_db > 0.0) return ir;

  double e_direct = 0.0;
  for (const auto& ch : ir) e_direct += energy(ch);

  const long start = static_cast<long>(std::floor(distance_delay_samples(distance_m))) + kTailOnsetSamples;
  const auto n_tail = static_cast<std::size_t>(std::ceil(rt60_s * kSampleRate));
  const auto weights = diffuse_channel_energy(array);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  MultiSignal tail(ir.size(), Signal(n_tail, 0.0));
  double e_tail = 0.0;
  for (std::size_t ch = 0; ch < ir.size(); ++ch) {
    const double w = std::sqrt(weights[ch % weights.size()]);
    for (std::size_t i = 0; i < n_tail; ++i) {
      tail[ch][i] = w * gauss(rng) * tail_envelope(static_cast<double>(i) / kSampleRate, rt60_s);
    }
    e_tail += energy(tail[ch]);
  }
  const double g = std::sqrt(e_direct / (e_tail * std::pow(10.0, drr_db / 10.0)));
  const std::size_t len = std::max(ir[0].size(), static_cast<std::size_t>(start) + n_tail);
  for (std::size_t ch = 0; ch < ir.size(); ++ch) {
    ir[ch].resize(len, 0.0);
    accumulate_into(ir[ch], tail[ch], start, g);
  }
  return ir;
}

}  // namespace seld
