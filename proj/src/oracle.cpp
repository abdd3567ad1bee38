#include "seldsynth/oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

namespace seld {

bool DegradationSpec::is_identity() const {
  return doa_jitter_deg == 0.0 && p_miss == 0.0 && p_false == 0.0 && class_confusion == 0.0;
}

void DegradationSpec::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be in [0, 1]");
  };
  prob(p_miss, "p_miss");
  prob(p_false, "p_false");
  prob(class_confusion, "class_confusion");
  if (!(doa_jitter_deg >= 0.0 && doa_jitter_deg <= 180.0)) {
    throw Error(ErrorKind::InvalidArgument, "doa_jitter_deg must be in [0, 180]");
  }
  if (n_classes < 1) throw Error(ErrorKind::InvalidArgument, "n_classes must be >= 1");
  if (class_confusion > 0.0 && n_classes < 2) {
    throw Error(ErrorKind::InvalidArgument, "class confusion needs at least two classes");
  }
}

DegradationSpec parse_degradation_spec(const std::string& text, const std::string& origin) {
  DegradationSpec s;
  try {
    const auto j = nlohmann::json::parse(text);
    s.doa_jitter_deg = j.value("doa_jitter_deg", s.doa_jitter_deg);
    s.p_miss = j.value("p_miss", s.p_miss);
    s.p_false = j.value("p_false", s.p_false);
    s.class_confusion = j.value("class_confusion", s.class_confusion);
    s.n_classes = j.value("n_classes", s.n_classes);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, origin + ": " + e.what());
  }
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(e.kind(), origin + ": " + e.what());
  }
  return s;
}

LabelFrameSet degrade(const LabelFrameSet& ref, const DegradationSpec& spec) {
  spec.validate();
  if (spec.is_identity()) return ref;

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;

  LabelFrameSet out;
  out.n_frames = ref.n_frames;
  for (int k = 0; k < ref.n_frames; ++k) {
    const auto& entries = ref.at(k);
    std::vector<LabelEntry> kept;
    for (const auto& e : entries) {
      // Every draw happens regardless of outcome so one knob never shifts another's stream.
      const bool miss = uni(rng) < spec.p_miss;
      const bool confuse = uni(rng) < spec.class_confusion;
      const double shift = uni(rng);
      const double heading = uni(rng) * two_pi;
      if (miss) continue;
      LabelEntry p = e;
      if (confuse && spec.n_classes > 1) {
        int other = static_cast<int>(shift * (spec.n_classes - 1));
        other = std::min(other, spec.n_classes - 2);
        p.class_index = other >= e.class_index ? other + 1 : other;
      }
      if (spec.doa_jitter_deg > 0.0) p.doa = rotate_along(e.doa, spec.doa_jitter_deg, heading);
      kept.push_back(p);
    }
    for (const auto& p : kept) out.add(k, p);
    if (uni(rng) < spec.p_false) {
      const int cls = std::min(static_cast<int>(uni(rng) * spec.n_classes), spec.n_classes - 1);
      const double z = 2.0 * uni(rng) - 1.0;
      const double phi = uni(rng) * two_pi;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const Doa d = unit_vector_to_doa({r * std::cos(phi), r * std::sin(phi), z});
      out.add(k, {cls, 0, d});
    }
    // Relabelled or injected entries can collide on (class, track); renumber per class.
    auto it = out.frames.find(k);
    if (it != out.frames.end()) {
      std::map<int, std::set<int>> used;
      for (auto& p : it->second) {
        auto& ids = used[p.class_index];
        while (ids.count(p.track_id)) ++p.track_id;
        ids.insert(p.track_id);
      }
    }
  }
  out.normalize();
  return out;
}

}  // namespace seld
