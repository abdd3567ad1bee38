#pragma once

#include <cstdint>

#include "seldsynth/core.hpp"

namespace seld {

struct DegradationSpec {
  /// Great-circle rotation applied to every surviving DOA (exact magnitude, random heading).
  double doa_jitter_deg = 0.0;
  double p_miss = 0.0;
  /// Per frame probability of one spurious entry.
  double p_false = 0.0;
  double class_confusion = 0.0;
  int n_classes = 12;
  std::uint64_t seed = 0;

  bool is_identity() const;
  void validate() const;
};

/// Loads a spec from JSON text; missing keys keep their defaults.
DegradationSpec parse_degradation_spec(const std::string& text, const std::string& origin = "<memory>");

/// Turns reference labels into predictions with controlled errors. Deterministic per seed.
LabelFrameSet degrade(const LabelFrameSet& ref, const DegradationSpec& spec);

}  // namespace seld
