#include "seldsynth/spatializer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace seld {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kEps = 1e-9;
constexpr double kMaxNodeStepDeg = 2.0;
constexpr int kMovingAttempts = 10;
constexpr double kArcMarginDeg = 0.01;
/// Ambience power used when a recording has no active target frame (-40 dB per channel).
constexpr double kFallbackNoisePower = 1e-4;

std::size_t to_samples(double t_s) { return static_cast<std::size_t>(std::llround(t_s * kSampleRate)); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string to_string(TrajectoryShape s) { return s == TrajectoryShape::Circular ? "circular" : "linear"; }

TrajectoryShape parse_shape(const std::string& s) {
  if (s == "circular") return TrajectoryShape::Circular;
  if (s == "linear") return TrajectoryShape::Linear;
  throw Error(ErrorKind::Format, "unknown trajectory shape '" + s + "'");
}

std::vector<double> Trajectory::cumulative_arc() const {
  std::vector<double> arc(nodes.size(), 0.0);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    arc[i] = arc[i - 1] + angular_distance(nodes[i - 1].doa, nodes[i].doa);
  }
  return arc;
}

void Trajectory::validate() const {
  if (nodes.empty()) throw Error(ErrorKind::InvalidArgument, "trajectory " + std::to_string(id) + " has no nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!is_valid(nodes[i].doa) || !(nodes[i].distance_m > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "trajectory " + std::to_string(id) + " node " +
                                                  std::to_string(i) + " has an invalid DOA or distance");
    }
    if (i > 0 && angular_distance(nodes[i - 1].doa, nodes[i].doa) > kMaxNodeStepDeg + kEps) {
      throw Error(ErrorKind::InvalidArgument, "trajectory " + std::to_string(id) + " nodes " +
                                                  std::to_string(i - 1) + "-" + std::to_string(i) +
                                                  " are more than 2 degrees apart");
    }
  }
}

std::size_t IrBank::node_count() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.nodes.size();
  return n;
}

const MultiSignal& IrBank::ir(int trajectory, int node) const {
  if (trajectory < 0 || trajectory >= static_cast<int>(irs.size()) || node < 0 ||
      node >= static_cast<int>(irs[static_cast<std::size_t>(trajectory)].size())) {
    throw Error(ErrorKind::Missing, "no IR for trajectory " + std::to_string(trajectory) + " node " +
                                        std::to_string(node) + " in room " + room_id);
  }
  return irs[static_cast<std::size_t>(trajectory)][static_cast<std::size_t>(node)];
}

void IrBank::validate() const {
  if (sample_rate != kSampleRate) throw Error(ErrorKind::Mismatch, "IR bank sample rate must be 24000 Hz");
  if (trajectories.empty()) throw Error(ErrorKind::InvalidArgument, "IR bank has no trajectories");
  if (irs.size() != trajectories.size()) throw Error(ErrorKind::Mismatch, "IR bank trajectory/IR count mismatch");
  for (std::size_t t = 0; t < trajectories.size(); ++t) {
    trajectories[t].validate();
    if (trajectories[t].id != static_cast<int>(t)) {
      throw Error(ErrorKind::InvalidArgument, "trajectory ids must equal their index");
    }
    if (irs[t].size() != trajectories[t].nodes.size()) {
      throw Error(ErrorKind::Mismatch, "trajectory " + std::to_string(t) + " has " +
                                           std::to_string(trajectories[t].nodes.size()) + " nodes but " +
                                           std::to_string(irs[t].size()) + " IRs");
    }
    for (const auto& ir : irs[t]) {
      if (ir.size() != 4 || ir[0].empty()) throw Error(ErrorKind::Mismatch, "IRs must have 4 non-empty channels");
    }
  }
  if (ambience && ambience->size() != 4) throw Error(ErrorKind::Mismatch, "ambience must have 4 channels");
}

SceneScript plan_layers(const LayerPlanRequest& req) {
  if (!(req.total_gap_s >= 0.0) || (req.interferer_gap_s && !(*req.interferer_gap_s >= 0.0))) {
    throw Error(ErrorKind::InvalidArgument, "total gap must be >= 0");
  }
  if (!(req.duration_s > 0.0)) throw Error(ErrorKind::InvalidArgument, "duration must be > 0");
  if (req.n_target_layers > 0 && req.target_pool.empty()) {
    throw Error(ErrorKind::Missing, "empty sample pool for target layers");
  }
  if (req.n_interferer_layers > 0 && req.interferer_pool.empty()) {
    throw Error(ErrorKind::Missing, "empty sample pool for interferer layers");
  }
  for (const auto& s : req.target_pool) {
    if (!req.classes.index_of(s.class_label)) {
      throw Error(ErrorKind::InvalidArgument, "sample " + s.sample_id + " has non-target class '" + s.class_label + "'");
    }
  }
  for (const auto& s : req.interferer_pool) {
    if (!req.classes.is_interferer(s.class_label)) {
      throw Error(ErrorKind::InvalidArgument, "sample " + s.sample_id + " is not an interferer");
    }
  }
  for (const auto* pool : {&req.target_pool, &req.interferer_pool}) {
    for (const auto& s : *pool) {
      if (!(s.duration_s > 0.0)) throw Error(ErrorKind::InvalidArgument, "sample " + s.sample_id + " has no duration");
    }
  }

  std::mt19937_64 rng(req.seed);

  struct Deck {
    const std::vector<SampleInfo>* pool;
    std::vector<std::size_t> order;
    std::size_t next = 0;
  };
  auto make_deck = [&](const std::vector<SampleInfo>& pool) {
    Deck d{&pool, {}, 0};
    d.order.resize(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) d.order[i] = i;
    std::shuffle(d.order.begin(), d.order.end(), rng);
    return d;
  };
  auto draw = [&](Deck& d) -> const SampleInfo& {
    if (d.next < d.order.size()) return (*d.pool)[d.order[d.next++]];
    std::uniform_int_distribution<std::size_t> pick(0, d.pool->size() - 1);
    return (*d.pool)[pick(rng)];
  };
  Deck targets = make_deck(req.target_pool);
  Deck interferers = make_deck(req.interferer_pool);

  SceneScript script;
  script.duration_s = req.duration_s;
  script.n_target_layers = req.n_target_layers;
  script.n_interferer_layers = req.n_interferer_layers;

  const int n_layers = req.n_target_layers + req.n_interferer_layers;
  int next_id = 0;
  std::exponential_distribution<double> expo(1.0);
  for (int layer = 0; layer < n_layers; ++layer) {
    const bool interf = layer >= req.n_target_layers;
    const double gap = interf ? req.interferer_gap_s.value_or(req.total_gap_s) : req.total_gap_s;
    const double event_time = req.duration_s - gap;

    std::vector<std::pair<const SampleInfo*, double>> picked;
    double cum = 0.0;
    while (cum < event_time - kEps) {
      const SampleInfo& s = draw(interf ? interferers : targets);
      const double d = std::min(s.duration_s, event_time - cum);
      picked.emplace_back(&s, d);
      cum += d;
    }
    if (picked.empty()) continue;

    // Symmetric Dirichlet(1) partition of the gap over n + 1 slots.
    std::vector<double> w(picked.size() + 1);
    double wsum = 0.0;
    for (double& x : w) {
      x = expo(rng);
      wsum += x;
    }
    double t = 0.0;
    for (std::size_t i = 0; i < picked.size(); ++i) {
      t += gap * w[i] / wsum;
      SceneEvent e;
      e.id = next_id++;
      e.sample_id = picked[i].first->sample_id;
      e.class_label = picked[i].first->class_label;
      e.class_index = interf ? -1 : *req.classes.index_of(e.class_label);
      e.layer_index = layer;
      e.is_interferer = interf;
      e.onset = t;
      e.offset = std::min(t + picked[i].second, req.duration_s);
      t += picked[i].second;
      script.events.push_back(std::move(e));
    }
  }
  return script;
}

namespace {

struct NodeRef {
  int trajectory;
  int node;
};

}  // namespace

SceneScript assign_spatial(const SceneScript& script, const IrBank& bank, double p_moving, std::uint64_t seed) {
  if (bank.trajectories.empty()) throw Error(ErrorKind::InvalidArgument, "IR bank has no trajectories");
  if (!(p_moving >= 0.0 && p_moving <= 1.0)) throw Error(ErrorKind::InvalidArgument, "p_moving must be in [0, 1]");

  std::vector<NodeRef> all_nodes;
  std::vector<std::vector<double>> arcs;
  for (const auto& t : bank.trajectories) {
    for (int i = 0; i < static_cast<int>(t.nodes.size()); ++i) all_nodes.push_back({t.id, i});
    arcs.push_back(t.cumulative_arc());
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_node(0, all_nodes.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_traj(0, bank.trajectories.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_speed(0, kMovingSpeeds.size() - 1);
  std::bernoulli_distribution pick_dir(0.5);

  SceneScript out = script;
  out.room_id = bank.room_id;
  for (auto& e : out.events) {
    std::optional<MovingPlacement> moving;
    if (unit(rng) < p_moving) {
      for (int attempt = 0; attempt < kMovingAttempts && !moving; ++attempt) {
        const std::size_t ti = pick_traj(rng);
        const double speed = kMovingSpeeds[pick_speed(rng)];
        const int dir = pick_dir(rng) ? 1 : -1;
        const auto& arc = arcs[ti];
        const double need = speed * e.duration() + kArcMarginDeg;
        std::vector<int> starts;
        for (int i = 0; i < static_cast<int>(arc.size()); ++i) {
          const double avail = dir > 0 ? arc.back() - arc[static_cast<std::size_t>(i)] : arc[static_cast<std::size_t>(i)];
          if (avail >= need) starts.push_back(i);
        }
        if (starts.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick_start(0, starts.size() - 1);
        moving = MovingPlacement{bank.trajectories[ti].id, starts[pick_start(rng)], speed, dir};
      }
    }
    if (moving) {
      e.motion = *moving;
    } else {
      const NodeRef r = all_nodes[pick_node(rng)];
      const auto& node = bank.trajectories[static_cast<std::size_t>(r.trajectory)].nodes[static_cast<std::size_t>(r.node)];
      e.motion = StaticPlacement{node.doa, node.distance_m, r.trajectory, r.node};
    }
  }
  return out;
}

MultiSignal render_static(std::span<const double> signal, const MultiSignal& ir, int sample_rate) {
  if (sample_rate != kSampleRate) throw Error(ErrorKind::Mismatch, "signal sample rate must be 24000 Hz");
  if (signal.empty()) throw Error(ErrorKind::InvalidArgument, "cannot render an empty signal");
  return convolve_many(signal, ir);
}

double path_position(std::span<const double> path_arc, double arc_deg) {
  if (path_arc.empty()) throw Error(ErrorKind::InvalidArgument, "empty path");
  if (arc_deg > path_arc.back() + kEps) {
    throw Error(ErrorKind::OutOfRange, "trajectory too short: needs " + std::to_string(arc_deg) +
                                           " deg, has " + std::to_string(path_arc.back()));
  }
  if (arc_deg <= 0.0) return 0.0;
  if (arc_deg >= path_arc.back()) return static_cast<double>(path_arc.size() - 1);
  const auto it = std::upper_bound(path_arc.begin(), path_arc.end(), arc_deg);
  const auto i = static_cast<std::size_t>(it - path_arc.begin()) - 1;
  const double span = path_arc[i + 1] - path_arc[i];
  return static_cast<double>(i) + (span > 0.0 ? (arc_deg - path_arc[i]) / span : 0.0);
}

MultiSignal render_moving(std::span<const double> signal, std::span<const MultiSignal> path_irs,
                          std::span<const double> path_arc, double speed_deg_per_s, double hop_s) {
  if (signal.empty()) throw Error(ErrorKind::InvalidArgument, "cannot render an empty signal");
  if (path_irs.empty() || path_irs.size() != path_arc.size()) {
    throw Error(ErrorKind::Mismatch, "path IR count must match path arc count");
  }
  if (!(speed_deg_per_s >= 0.0) || !(hop_s > 0.0)) throw Error(ErrorKind::InvalidArgument, "bad speed or hop");

  const std::size_t n = signal.size();
  const auto hop = std::max<std::size_t>(1, to_samples(hop_s));
  const std::size_t n_blocks = (n + hop - 1) / hop;
  std::vector<double> q(n_blocks + 1);
  for (std::size_t b = 0; b <= n_blocks; ++b) {
    const double t = static_cast<double>(std::min(b * hop, n)) / kSampleRate;
    q[b] = path_position(path_arc, speed_deg_per_s * t);
  }
  auto weight = [&](std::size_t b, std::size_t node) {
    return std::max(0.0, 1.0 - std::abs(q[b] - static_cast<double>(node)));
  };

  std::size_t max_len = 0;
  std::size_t channels = path_irs[0].size();
  for (const auto& ir : path_irs) {
    if (ir.size() != channels) throw Error(ErrorKind::Mismatch, "path IRs differ in channel count");
    for (const auto& ch : ir) max_len = std::max(max_len, ch.size());
  }
  MultiSignal out(channels, Signal(n + max_len - 1, 0.0));

  for (std::size_t node = 0; node < path_irs.size(); ++node) {
    std::size_t b0 = n_blocks;
    std::size_t b1 = 0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
      if (weight(b, node) > 0.0 || weight(b + 1, node) > 0.0) {
        b0 = std::min(b0, b);
        b1 = b;
      }
    }
    if (b0 == n_blocks) continue;
    const std::size_t s0 = b0 * hop;
    const std::size_t s1 = std::min((b1 + 1) * hop, n);
    Signal xw(s1 - s0);
    for (std::size_t b = b0; b <= b1; ++b) {
      const double wa = weight(b, node);
      const double wb = weight(b + 1, node);
      const std::size_t start = b * hop;
      const std::size_t len = std::min(hop, n - start);
      for (std::size_t i = 0; i < len; ++i) {
        const double w = wa + (wb - wa) * (static_cast<double>(i) / static_cast<double>(len));
        xw[start + i - s0] = signal[start + i] * w;
      }
    }
    const auto y = convolve_many(xw, path_irs[node]);
    for (std::size_t ch = 0; ch < channels; ++ch) accumulate_into(out[ch], y[ch], static_cast<long>(s0));
  }
  return out;
}

MovingPath moving_path(const Trajectory& traj, const MovingPlacement& m) {
  const auto cum = traj.cumulative_arc();
  const int n = static_cast<int>(traj.nodes.size());
  if (m.start_index < 0 || m.start_index >= n) {
    throw Error(ErrorKind::OutOfRange, "moving start index outside trajectory " + std::to_string(traj.id));
  }
  MovingPath p;
  for (int i = m.start_index; i >= 0 && i < n; i += m.direction) {
    p.nodes.push_back(i);
    p.arc.push_back(std::abs(cum[static_cast<std::size_t>(i)] - cum[static_cast<std::size_t>(m.start_index)]));
  }
  return p;
}

Doa moving_doa(const Trajectory& traj, const MovingPlacement& m, double t_s) {
  const MovingPath p = moving_path(traj, m);
  const double pos = path_position(p.arc, m.speed_deg_per_s * std::max(0.0, t_s));
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double f = pos - static_cast<double>(i);
  const Vec3 a = doa_to_unit_vector(traj.nodes[static_cast<std::size_t>(p.nodes[i])].doa);
  if (f == 0.0 || i + 1 >= p.nodes.size()) return traj.nodes[static_cast<std::size_t>(p.nodes[i])].doa;
  const Vec3 b = doa_to_unit_vector(traj.nodes[static_cast<std::size_t>(p.nodes[i + 1])].doa);
  return unit_vector_to_doa({(1 - f) * a[0] + f * b[0], (1 - f) * a[1] + f * b[1], (1 - f) * a[2] + f * b[2]});
}

LabelFrameSet derive_labels(const SceneScript& script, const std::vector<Trajectory>& trajectories) {
  LabelFrameSet labels;
  labels.n_frames = label_frame_count(script.duration_s);

  std::vector<const SceneEvent*> targets;
  for (const auto& e : script.events) {
    if (!e.is_interferer) targets.push_back(&e);
  }
  std::stable_sort(targets.begin(), targets.end(), [](auto* a, auto* b) {
    return std::tie(a->onset, a->id) < std::tie(b->onset, b->id);
  });
  std::map<int, int> next_track;
  for (const auto* e : targets) {
    if (!e->is_assigned()) throw Error(ErrorKind::Missing, "event " + std::to_string(e->id) + " has no spatial assignment");
    const int track = next_track[e->class_index]++;
    for (int k : covered_frames(e->onset, e->offset, labels.n_frames)) {
      Doa d;
      if (const auto* st = std::get_if<StaticPlacement>(&e->motion)) {
        d = st->doa;
      } else {
        const auto& m = std::get<MovingPlacement>(e->motion);
        if (m.trajectory_id < 0 || m.trajectory_id >= static_cast<int>(trajectories.size())) {
          throw Error(ErrorKind::Missing, "unknown trajectory " + std::to_string(m.trajectory_id));
        }
        const double tc = std::clamp((k + 0.5) * kLabelHopS, e->onset, e->offset) - e->onset;
        d = moving_doa(trajectories[static_cast<std::size_t>(m.trajectory_id)], m, tc);
      }
      labels.add(k, {e->class_index, track, d});
    }
  }
  labels.normalize();
  return labels;
}

namespace {

MultiSignal render_event(const SceneEvent& e, std::span<const double> x, const IrBank& bank) {
  if (const auto* st = std::get_if<StaticPlacement>(&e.motion)) {
    return render_static(x, bank.ir(st->trajectory_id, st->node_index));
  }
  const auto& m = std::get<MovingPlacement>(e.motion);
  if (m.trajectory_id < 0 || m.trajectory_id >= static_cast<int>(bank.trajectories.size())) {
    throw Error(ErrorKind::Missing, "no trajectory " + std::to_string(m.trajectory_id) + " in room " + bank.room_id);
  }
  const MovingPath path = moving_path(bank.trajectories[static_cast<std::size_t>(m.trajectory_id)], m);
  std::vector<MultiSignal> irs;
  irs.reserve(path.nodes.size());
  // Only the nodes the event can reach are copied.
  const double reach = m.speed_deg_per_s * static_cast<double>(x.size()) / kSampleRate;
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    irs.push_back(bank.ir(m.trajectory_id, path.nodes[i]));
    if (path.arc[i] > reach + kEps) break;
  }
  const std::span<const double> arc(path.arc.data(), irs.size());
  return render_moving(x, irs, arc, m.speed_deg_per_s);
}

}  // namespace

MixResult mix_scene(const SceneScript& script, const SampleStore& samples, const IrBank& bank,
                    const MultiSignal* ambience) {
  const std::size_t n = to_samples(script.duration_s);
  MixResult res;
  res.audio.assign(4, Signal(n, 0.0));
  MultiSignal target_mix(4, Signal(n, 0.0));

  for (const auto& e : script.events) {
    if (!e.is_assigned()) throw Error(ErrorKind::Missing, "event " + std::to_string(e.id) + " has no spatial assignment");
    const auto it = samples.find(e.sample_id);
    if (it == samples.end()) throw Error(ErrorKind::Missing, "missing sample audio '" + e.sample_id + "'");
    const std::size_t len = std::min(it->second.audio.size(), to_samples(e.duration()));
    if (len == 0) continue;
    const MultiSignal r = render_event(e, std::span<const double>(it->second.audio.data(), len), bank);
    const auto onset = static_cast<long>(to_samples(e.onset));
    for (std::size_t ch = 0; ch < 4; ++ch) {
      accumulate_into(res.audio[ch], r[ch], onset);
      if (!e.is_interferer) accumulate_into(target_mix[ch], r[ch], onset);
    }
  }

  res.labels = derive_labels(script, bank.trajectories);
  if (ambience == nullptr) return res;

  if (ambience->size() != 4) throw Error(ErrorKind::Mismatch, "ambience must have 4 channels");
  for (const auto& ch : *ambience) {
    if (ch.size() < n) throw Error(ErrorKind::Mismatch, "ambience shorter than the recording");
  }
  const std::size_t frame_len = to_samples(kLabelHopS);
  double e_target = 0.0;
  double e_noise = 0.0;
  for (const auto& [k, entries] : res.labels.frames) {
    const std::size_t a = static_cast<std::size_t>(k) * frame_len;
    const std::size_t b = std::min(n, a + frame_len);
    for (std::size_t ch = 0; ch < 4; ++ch) {
      for (std::size_t i = a; i < b; ++i) {
        e_target += target_mix[ch][i] * target_mix[ch][i];
        e_noise += (*ambience)[ch][i] * (*ambience)[ch][i];
      }
    }
  }
  double g = 0.0;
  if (e_target > 0.0 && e_noise > 0.0) {
    g = std::sqrt(e_target / (e_noise * std::pow(10.0, script.snr_db / 10.0)));
  } else {
    double e_all = 0.0;
    for (const auto& ch : *ambience) e_all += energy(std::span<const double>(ch.data(), n));
    if (e_all > 0.0) g = std::sqrt(kFallbackNoisePower * 4.0 * static_cast<double>(n) / e_all);
  }
  for (std::size_t ch = 0; ch < 4; ++ch) {
    for (std::size_t i = 0; i < n; ++i) res.audio[ch][i] += g * (*ambience)[ch][i];
  }
  res.target_active_energy = e_target;
  res.noise_active_energy = g * g * e_noise;
  res.ambience_gain = g;
  return res;
}

IrBank make_anechoic_bank(const IrBank& bank, const ArrayModel& array) {
  IrBank out;
  out.room_id = bank.room_id;
  out.format = bank.format;
  out.trajectories = bank.trajectories;
  out.sample_rate = bank.sample_rate;
  out.ambience = bank.ambience;
  for (const auto& t : bank.trajectories) {
    auto& row = out.irs.emplace_back();
    for (const auto& node : t.nodes) row.push_back(anechoic_ir(node.doa, node.distance_m, array));
  }
  return out;
}

std::vector<TrajectorySpec> default_trajectory_specs() {
  return {
      {TrajectoryShape::Circular, -10.0, 1.5, -180.0, 179.0, 1.0},
      {TrajectoryShape::Linear, 20.0, 1.2, 90.0, 45.0, 1.0},
  };
}

Trajectory make_trajectory(int id, const std::string& room_id, const TrajectorySpec& spec) {
  if (!(spec.spacing_deg > 0.0) || !(spec.distance_m > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "trajectory spacing and distance must be > 0");
  }
  Trajectory t;
  t.id = id;
  t.room_id = room_id;
  t.shape = spec.shape;
  if (spec.shape == TrajectoryShape::Circular) {
    for (double az = spec.az_start_deg; az <= spec.az_end_deg + kEps; az += spec.spacing_deg) {
      t.nodes.push_back({make_doa(az, spec.elevation_deg), spec.distance_m});
    }
  } else {
    // Horizontal line whose closest approach lies at (az_start, elevation, distance);
    // az_end is the half-span of horizontal bearing either side of it.
    const double rho = spec.distance_m * std::cos(spec.elevation_deg * kDeg);
    const double h = spec.distance_m * std::sin(spec.elevation_deg * kDeg);
    for (double phi = -spec.az_end_deg; phi <= spec.az_end_deg + kEps; phi += spec.spacing_deg) {
      const double s = rho * std::tan(phi * kDeg);
      const double horiz = std::hypot(rho, s);
      const double el = std::atan2(h, horiz) / kDeg;
      t.nodes.push_back({make_doa(spec.az_start_deg + phi, el), std::hypot(horiz, h)});
    }
  }
  t.validate();
  return t;
}

ArrayModel default_array(Format f) { return f == Format::Foa ? ArrayModel::foa_ideal() : ArrayModel::tetrahedral(); }

IrBank synth_bank(const SynthBankSpec& spec) {
  IrBank bank;
  bank.room_id = spec.room_id;
  bank.format = spec.format;
  bank.rt60_s = spec.rt60_s;
  const ArrayModel array = default_array(spec.format);
  const auto specs = spec.trajectories.empty() ? default_trajectory_specs() : spec.trajectories;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    bank.trajectories.push_back(make_trajectory(static_cast<int>(i), spec.room_id, specs[i]));
    auto& row = bank.irs.emplace_back();
    const auto& traj = bank.trajectories.back();
    for (std::size_t k = 0; k < traj.nodes.size(); ++k) {
      row.push_back(synth_reverb_ir(spec.rt60_s, spec.drr_db, traj.nodes[k].doa, traj.nodes[k].distance_m, array,
                                    derive_seed(spec.seed, i * 100000 + k)));
    }
  }
  return bank;
}

MultiSignal synth_ambience(std::size_t n_samples, const ArrayModel& array, std::uint64_t seed) {
  const auto weights = diffuse_channel_energy(array);
  MultiSignal out(4, Signal(n_samples, 0.0));
  for (std::size_t ch = 0; ch < 4; ++ch) {
    std::mt19937_64 rng(derive_seed(seed, ch));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double w = std::sqrt(weights[ch]);
    double state = 0.0;
    // One-pole low-pass: a room-noise-like spectral tilt.
    for (std::size_t i = 0; i < n_samples; ++i) {
      state = 0.8 * state + 0.6 * gauss(rng);
      out[ch][i] = w * state;
    }
  }
  return out;
}

SampleStore synth_samples(const std::vector<std::string>& labels, int per_label, double min_s, double max_s,
                          std::uint64_t seed) {
  if (per_label <= 0 || !(min_s > 0.0) || !(max_s >= min_s)) {
    throw Error(ErrorKind::InvalidArgument, "bad synthetic sample parameters");
  }
  SampleStore store;
  for (std::size_t li = 0; li < labels.size(); ++li) {
    for (int j = 0; j < per_label; ++j) {
      std::mt19937_64 rng(derive_seed(seed, li * 1000 + static_cast<std::size_t>(j)));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::normal_distribution<double> gauss(0.0, 1.0);
      const double dur = min_s + (max_s - min_s) * unit(rng);
      const auto n = std::max<std::size_t>(1, to_samples(dur));
      const double f0 = 140.0 * std::pow(1.27, static_cast<double>(li % 14)) * (1.0 + 0.04 * j);
      const double am = 2.0 + 6.0 * unit(rng);
      const double noise_mix = 0.2 + 0.6 * unit(rng);
      Signal x(n);
      double lp = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / kSampleRate;
        double v = 0.0;
        for (int h = 1; h <= 4; ++h) v += std::sin(2.0 * std::numbers::pi * f0 * h * t) / h;
        lp = 0.5 * lp + 0.5 * gauss(rng);
        v = (1.0 - noise_mix) * v * (0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * am * t)) + noise_mix * lp;
        const double attack = std::min(1.0, t / 0.01);
        const double release = std::min(1.0, (static_cast<double>(n - i) / kSampleRate) / 0.05);
        x[i] = v * attack * release;
      }
      const double rms = std::sqrt(energy(x) / static_cast<double>(n));
      if (rms > 0.0) {
        for (double& v : x) v *= 0.1 / rms;
      }
      std::string id = labels[li];
      std::replace(id.begin(), id.end(), ' ', '_');
      id += "_" + std::to_string(j);
      store[id] = EventSample{{id, labels[li], static_cast<double>(n) / kSampleRate}, std::move(x)};
    }
  }
  return store;
}

std::vector<SampleInfo> pool_for(const SampleStore& store, const std::vector<std::string>& labels) {
  std::vector<SampleInfo> out;
  for (const auto& [id, s] : store) {
    if (std::find(labels.begin(), labels.end(), s.info.class_label) != labels.end()) out.push_back(s.info);
  }
  return out;
}

}  // namespace seld
