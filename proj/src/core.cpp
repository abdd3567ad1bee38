#include "seldsynth/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace seld {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kTimeEps = 1e-9;

}  // namespace

std::string to_string(Format f) { return f == Format::Foa ? "foa" : "mic"; }

Format parse_format(const std::string& s) {
  if (s == "foa" || s == "FOA") return Format::Foa;
  if (s == "mic" || s == "MIC") return Format::Mic;
  throw Error(ErrorKind::InvalidArgument, "unknown format '" + s + "' (expected foa or mic)");
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  return {v[0] / n, v[1] / n, v[2] / n};
}

double wrap_azimuth(double az_deg) {
  double a = std::fmod(az_deg + 180.0, 360.0);
  if (a < 0.0) a += 360.0;
  a -= 180.0;
  // fmod can round up to exactly 180 for inputs a hair below -180.
  if (a >= 180.0) a -= 360.0;
  return a;
}

bool is_valid(const Doa& d) {
  return std::isfinite(d.azimuth) && std::isfinite(d.elevation) && d.azimuth >= -180.0 &&
         d.azimuth < 180.0 && d.elevation >= -90.0 && d.elevation <= 90.0;
}

Doa make_doa(double az_deg, double el_deg) {
  if (!std::isfinite(az_deg) || !std::isfinite(el_deg) || el_deg < -90.0 || el_deg > 90.0) {
    throw Error(ErrorKind::OutOfRange, "invalid DOA (" + std::to_string(az_deg) + ", " +
                                           std::to_string(el_deg) + ")");
  }
  return {wrap_azimuth(az_deg), el_deg};
}

Vec3 doa_to_unit_vector(const Doa& d) {
  const double az = d.azimuth * kDeg;
  const double el = d.elevation * kDeg;
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

Doa unit_vector_to_doa(const Vec3& v) {
  const double horiz = std::hypot(v[0], v[1]);
  const double el = std::atan2(v[2], horiz) / kDeg;
  const double az = horiz > 0.0 ? std::atan2(v[1], v[0]) / kDeg : 0.0;
  return {wrap_azimuth(az), std::clamp(el, -90.0, 90.0)};
}

double angular_distance(const Doa& a, const Doa& b) {
  const Vec3 u = doa_to_unit_vector(a);
  const Vec3 w = doa_to_unit_vector(b);
  // atan2 form keeps full precision near 0 and 180 degrees, unlike acos(dot).
  return std::atan2(norm(cross(u, w)), dot(u, w)) / kDeg;
}

Doa rotate_along(const Doa& d, double angle_deg, double heading_rad) {
  const double az = d.azimuth * kDeg;
  const double el = d.elevation * kDeg;
  const Vec3 u = doa_to_unit_vector(d);
  const Vec3 e_el{-std::sin(el) * std::cos(az), -std::sin(el) * std::sin(az), std::cos(el)};
  const Vec3 e_az{-std::sin(az), std::cos(az), 0.0};
  const double c = std::cos(heading_rad);
  const double s = std::sin(heading_rad);
  const Vec3 t{c * e_el[0] + s * e_az[0], c * e_el[1] + s * e_az[1], c * e_el[2] + s * e_az[2]};
  const double th = angle_deg * kDeg;
  const Vec3 r{std::cos(th) * u[0] + std::sin(th) * t[0], std::cos(th) * u[1] + std::sin(th) * t[1],
               std::cos(th) * u[2] + std::sin(th) * t[2]};
  return unit_vector_to_doa(r);
}

ClassSet ClassSet::defaults() {
  return {{"alarm", "crying baby", "crash", "barking dog", "female scream", "female speech",
           "footsteps", "knocking on door", "male scream", "male speech", "ringing phone", "piano"},
          {"running engine", "burning fire", "general"}};
}

std::optional<int> ClassSet::index_of(const std::string& label) const {
  const auto it = std::find(target_classes.begin(), target_classes.end(), label);
  if (it == target_classes.end()) return std::nullopt;
  return static_cast<int>(it - target_classes.begin());
}

bool ClassSet::is_interferer(const std::string& label) const {
  return std::find(interferer_labels.begin(), interferer_labels.end(), label) !=
         interferer_labels.end();
}

void ClassSet::validate() const {
  if (target_classes.empty()) throw Error(ErrorKind::InvalidArgument, "class set has no targets");
  std::set<std::string> seen;
  for (const auto& c : target_classes) {
    if (!seen.insert(c).second) throw Error(ErrorKind::InvalidArgument, "duplicate target class '" + c + "'");
  }
  std::set<std::string> seen_int;
  for (const auto& c : interferer_labels) {
    if (seen.count(c)) {
      throw Error(ErrorKind::InvalidArgument, "label '" + c + "' is both target and interferer");
    }
    if (!seen_int.insert(c).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate interferer label '" + c + "'");
    }
  }
}

namespace {

struct Edge {
  double t;
  int delta;
  int id;
};

// Sweep over onsets/offsets; offsets sort before onsets at equal times so that
// back-to-back events do not count as overlapping.
std::pair<int, std::vector<int>> sweep_polyphony(const std::vector<const SceneEvent*>& evs) {
  std::vector<Edge> edges;
  for (const auto* e : evs) {
    edges.push_back({e->onset, +1, e->id});
    edges.push_back({e->offset, -1, e->id});
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    if (std::abs(a.t - b.t) > kTimeEps) return a.t < b.t;
    return a.delta < b.delta;
  });
  int cur = 0;
  int best = 0;
  std::set<int> active;
  std::vector<int> worst;
  for (const auto& e : edges) {
    cur += e.delta;
    if (e.delta > 0) {
      active.insert(e.id);
    } else {
      active.erase(e.id);
    }
    if (cur > best) {
      best = cur;
      worst.assign(active.begin(), active.end());
    }
  }
  return {best, worst};
}

}  // namespace

int max_polyphony(const SceneScript& s, bool interferers) {
  std::vector<const SceneEvent*> evs;
  for (const auto& e : s.events) {
    if (e.is_interferer == interferers) evs.push_back(&e);
  }
  return sweep_polyphony(evs).first;
}

std::vector<Violation> validate_script(const SceneScript& s) {
  std::vector<Violation> out;
  if (s.fold < 1 || s.fold > 8) out.push_back({"fold outside 1..8", {}});
  if (!(s.snr_db >= 6.0 && s.snr_db <= 30.0)) out.push_back({"snr_db outside [6, 30]", {}});
  if (s.n_target_layers != 3) out.push_back({"n_target_layers != 3", {}});
  if (s.n_interferer_layers != 1) out.push_back({"n_interferer_layers != 1", {}});

  const int n_layers = s.n_target_layers + s.n_interferer_layers;
  std::set<int> ids;
  for (const auto& e : s.events) {
    if (!ids.insert(e.id).second) out.push_back({"duplicate event id", {e.id}});
    if (!(e.onset >= 0.0 && e.onset < e.offset && e.offset <= s.duration_s + kTimeEps)) {
      out.push_back({"event time outside 0 <= onset < offset <= duration", {e.id}});
    }
    if (e.layer_index < 0 || e.layer_index >= n_layers) {
      out.push_back({"layer index out of range", {e.id}});
    } else if ((e.layer_index >= s.n_target_layers) != e.is_interferer) {
      out.push_back({"event role does not match its layer", {e.id}});
    }
    if (!e.is_interferer && e.class_index < 0) out.push_back({"target event without class index", {e.id}});
    if (e.is_interferer && e.class_index >= 0) out.push_back({"interferer carries a target class", {e.id}});
    if (const auto* m = std::get_if<MovingPlacement>(&e.motion)) {
      if (std::find(kMovingSpeeds.begin(), kMovingSpeeds.end(), m->speed_deg_per_s) == kMovingSpeeds.end()) {
        out.push_back({"moving speed not in {10, 20, 40} deg/s", {e.id}});
      }
      if (m->direction != 1 && m->direction != -1) out.push_back({"moving direction not +-1", {e.id}});
    }
    if (const auto* st = std::get_if<StaticPlacement>(&e.motion)) {
      if (!is_valid(st->doa) || !(st->distance_m > 0.0)) out.push_back({"invalid static placement", {e.id}});
    }
  }

  std::map<int, std::vector<const SceneEvent*>> by_layer;
  for (const auto& e : s.events) by_layer[e.layer_index].push_back(&e);
  for (auto& [layer, evs] : by_layer) {
    std::sort(evs.begin(), evs.end(), [](auto* a, auto* b) { return a->onset < b->onset; });
    for (std::size_t i = 1; i < evs.size(); ++i) {
      if (evs[i]->onset < evs[i - 1]->offset - kTimeEps) {
        out.push_back({"intra-layer overlap", {evs[i - 1]->id, evs[i]->id}});
      }
    }
  }

  for (bool interf : {false, true}) {
    std::vector<const SceneEvent*> evs;
    for (const auto& e : s.events) {
      if (e.is_interferer == interf) evs.push_back(&e);
    }
    const auto [poly, who] = sweep_polyphony(evs);
    const int limit = interf ? 1 : 3;
    if (poly > limit) {
      out.push_back({interf ? "interferer polyphony > 1" : "target polyphony > 3", who});
    }
  }
  return out;
}

const std::vector<LabelEntry>& LabelFrameSet::at(int frame) const {
  static const std::vector<LabelEntry> empty;
  const auto it = frames.find(frame);
  return it == frames.end() ? empty : it->second;
}

void LabelFrameSet::add(int frame, const LabelEntry& e) { frames[frame].push_back(e); }

std::size_t LabelFrameSet::entry_count() const {
  std::size_t n = 0;
  for (const auto& [k, v] : frames) n += v.size();
  return n;
}

void LabelFrameSet::normalize() {
  for (auto it = frames.begin(); it != frames.end();) {
    if (it->second.empty()) {
      it = frames.erase(it);
      continue;
    }
    std::stable_sort(it->second.begin(), it->second.end(), [](const LabelEntry& a, const LabelEntry& b) {
      return std::tie(a.class_index, a.track_id) < std::tie(b.class_index, b.track_id);
    });
    ++it;
  }
}

void LabelFrameSet::validate(int n_classes) const {
  for (const auto& [k, entries] : frames) {
    if (k < 0 || k >= n_frames) {
      throw Error(ErrorKind::OutOfRange, "label frame " + std::to_string(k) + " outside 0.." +
                                             std::to_string(n_frames - 1));
    }
    std::set<std::pair<int, int>> seen;
    for (const auto& e : entries) {
      if (e.class_index < 0 || e.class_index >= n_classes) {
        throw Error(ErrorKind::OutOfRange, "class index " + std::to_string(e.class_index) +
                                               " out of range in frame " + std::to_string(k));
      }
      if (!seen.insert({e.class_index, e.track_id}).second) {
        throw Error(ErrorKind::InvalidArgument, "duplicate (class, track) in frame " + std::to_string(k));
      }
    }
  }
}

int label_frame_count(double duration_s) {
  return static_cast<int>(std::floor(duration_s / kLabelHopS + 1e-9));
}

bool frame_covered(double onset, double offset, int k) {
  const double lo = k * kLabelHopS;
  const double hi = (k + 1) * kLabelHopS;
  if (offset - onset < kMinFrameOverlapS) {
    return onset >= lo - kTimeEps && onset < hi - kTimeEps;
  }
  const double overlap = std::min(offset, hi) - std::max(onset, lo);
  return overlap >= kMinFrameOverlapS - kTimeEps;
}

std::vector<int> covered_frames(double onset, double offset, int n_frames) {
  std::vector<int> out;
  const int first = std::max(0, static_cast<int>(std::floor(onset / kLabelHopS)) - 1);
  const int last = std::min(n_frames - 1, static_cast<int>(std::ceil(offset / kLabelHopS)) + 1);
  for (int k = first; k <= last; ++k) {
    if (frame_covered(onset, offset, k)) out.push_back(k);
  }
  return out;
}

}  // namespace seld
