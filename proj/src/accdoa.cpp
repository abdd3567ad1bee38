#include "seldsynth/accdoa.hpp"

#include <map>

namespace seld {

Vec3 AccdoaTensor::vec(std::size_t frame, std::size_t cls) const {
  const double* p = &data[(frame * n_classes + cls) * 3];
  return {p[0], p[1], p[2]};
}

void AccdoaTensor::set(std::size_t frame, std::size_t cls, const Vec3& v) {
  double* p = &data[(frame * n_classes + cls) * 3];
  p[0] = v[0];
  p[1] = v[1];
  p[2] = v[2];
}

void AccdoaTensor::scale(double s) {
  for (double& v : data) v *= s;
}

Tensor AccdoaTensor::to_tensor() const {
  Tensor t({n_frames, n_classes, 3}, {"frame", "class", "xyz"});
  for (std::size_t i = 0; i < data.size(); ++i) t.data[i] = static_cast<float>(data[i]);
  return t;
}

AccdoaTensor AccdoaTensor::from_tensor(const Tensor& t) {
  if (t.dims.size() != 3 || t.dims[2] != 3) throw Error(ErrorKind::Mismatch, "ACCDOA tensor must be frames x classes x 3");
  AccdoaTensor a = make_accdoa(t.dims[0], t.dims[1]);
  for (std::size_t i = 0; i < t.data.size(); ++i) a.data[i] = t.data[i];
  return a;
}

AccdoaTensor make_accdoa(std::size_t frames, std::size_t classes) {
  return {frames, classes, std::vector<double>(frames * classes * 3, 0.0)};
}

AccdoaEncoding encode(const LabelFrameSet& labels, int n_classes, int n_frames) {
  if (n_classes <= 0 || n_frames < 0) throw Error(ErrorKind::InvalidArgument, "bad ACCDOA dimensions");
  AccdoaEncoding out{make_accdoa(static_cast<std::size_t>(n_frames), static_cast<std::size_t>(n_classes)), 0};
  for (const auto& [k, entries] : labels.frames) {
    if (k < 0 || k >= n_frames) continue;
    std::map<int, const LabelEntry*> chosen;
    std::map<int, int> count;
    for (const auto& e : entries) {
      if (e.class_index < 0 || e.class_index >= n_classes) {
        throw Error(ErrorKind::OutOfRange, "label class " + std::to_string(e.class_index) + " >= " +
                                               std::to_string(n_classes));
      }
      ++count[e.class_index];
      auto& slot = chosen[e.class_index];
      if (slot == nullptr || e.track_id < slot->track_id) slot = &e;
    }
    for (const auto& [cls, e] : chosen) {
      if (count[cls] > 1) ++out.collisions;
      out.tensor.set(static_cast<std::size_t>(k), static_cast<std::size_t>(cls), doa_to_unit_vector(e->doa));
    }
  }
  return out;
}

LabelFrameSet decode(const AccdoaTensor& t, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorKind::InvalidArgument, "threshold must be in (0, 1)");
  LabelFrameSet out;
  out.n_frames = static_cast<int>(t.frames());
  for (std::size_t k = 0; k < t.frames(); ++k) {
    for (std::size_t c = 0; c < t.classes(); ++c) {
      const Vec3 v = t.vec(k, c);
      if (norm(v) > threshold) out.add(static_cast<int>(k), {static_cast<int>(c), 0, unit_vector_to_doa(v)});
    }
  }
  out.normalize();
  return out;
}

int frames_to_label_frames(int feature_frames) { return feature_frames < 0 ? 0 : feature_frames / 5; }

}  // namespace seld
