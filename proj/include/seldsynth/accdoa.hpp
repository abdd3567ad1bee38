#pragma once

#include "seldsynth/core.hpp"
#include "seldsynth/features.hpp"

namespace seld {

inline constexpr double kDefaultActivityThreshold = 0.5;

/// Label frames x classes x 3 Cartesian components.
/// Stored in double precision; dumps narrow to float32.
struct AccdoaTensor {
  std::size_t n_frames = 0;
  std::size_t n_classes = 0;
  std::vector<double> data;

  std::size_t frames() const { return n_frames; }
  std::size_t classes() const { return n_classes; }
  Vec3 vec(std::size_t frame, std::size_t cls) const;
  void set(std::size_t frame, std::size_t cls, const Vec3& v);
  void scale(double s);

  Tensor to_tensor() const;
  static AccdoaTensor from_tensor(const Tensor& t);
};

AccdoaTensor make_accdoa(std::size_t frames, std::size_t classes);

struct AccdoaEncoding {
  AccdoaTensor tensor;
  /// (frame, class) cells where more than one track was active; only the lowest track was kept.
  int collisions = 0;
};

AccdoaEncoding encode(const LabelFrameSet& labels, int n_classes, int n_frames);

/// Active iff vector norm > threshold; DOA from the normalized vector; track ids are 0.
LabelFrameSet decode(const AccdoaTensor& t, double threshold = kDefaultActivityThreshold);

/// Feature frames to label frames (five 20 ms frames per 100 ms label).
int frames_to_label_frames(int feature_frames);

}  // namespace seld
