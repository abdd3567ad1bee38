#include "seldsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace seld {

std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int rows = static_cast<int>(cost.size());
  if (rows == 0) return {};
  const int cols = static_cast<int>(cost[0].size());
  for (const auto& r : cost) {
    if (static_cast<int>(r.size()) != cols) throw Error(ErrorKind::InvalidArgument, "ragged cost matrix");
  }
  if (cols == 0) return std::vector<int>(static_cast<std::size_t>(rows), -1);

  // Potentials-based O(n^2 m) solver; requires n <= m, so work on the transpose if needed.
  const bool transposed = rows > cols;
  const int n = transposed ? cols : rows;
  const int m = transposed ? rows : cols;
  auto a = [&](int i, int j) { return transposed ? cost[j - 1][i - 1] : cost[i - 1][j - 1]; };

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> assign(static_cast<std::size_t>(rows), -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    if (transposed) {
      assign[static_cast<std::size_t>(j - 1)] = p[j] - 1;
    } else {
      assign[static_cast<std::size_t>(p[j] - 1)] = j - 1;
    }
  }
  return assign;
}

PairingResult pair_within_class(const std::vector<Doa>& refs, const std::vector<Doa>& preds) {
  PairingResult out;
  std::vector<std::vector<double>> cost(refs.size(), std::vector<double>(preds.size()));
  for (std::size_t i = 0; i < refs.size(); ++i) {
    for (std::size_t j = 0; j < preds.size(); ++j) cost[i][j] = angular_distance(refs[i], preds[j]);
  }
  const auto assign = hungarian(cost);
  std::vector<char> pred_used(preds.size(), 0);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const int j = assign.empty() ? -1 : assign[i];
    if (j < 0) {
      out.unmatched_refs.push_back(static_cast<int>(i));
    } else {
      pred_used[static_cast<std::size_t>(j)] = 1;
      out.pairs.push_back({static_cast<int>(i), j, cost[i][static_cast<std::size_t>(j)]});
    }
  }
  for (std::size_t j = 0; j < preds.size(); ++j) {
    if (!pred_used[j]) out.unmatched_preds.push_back(static_cast<int>(j));
  }
  return out;
}

void MetricCounts::merge(const MetricCounts& other) {
  if (other.per_class.size() > per_class.size()) per_class.resize(other.per_class.size());
  for (std::size_t c = 0; c < other.per_class.size(); ++c) {
    auto& a = per_class[c];
    const auto& b = other.per_class[c];
    a.tp += b.tp;
    a.fp += b.fp;
    a.fn += b.fn;
    a.n_ref += b.n_ref;
    a.n_pairs += b.n_pairs;
    a.error_sum += b.error_sum;
  }
  substitutions += other.substitutions;
  deletions += other.deletions;
  insertions += other.insertions;
  frames += other.frames;
  pairs.insert(pairs.end(), other.pairs.begin(), other.pairs.end());
}

void accumulate(MetricCounts& counts, const std::vector<LabelEntry>& ref, const std::vector<LabelEntry>& pred,
                double threshold_deg) {
  std::map<int, std::pair<std::vector<Doa>, std::vector<Doa>>> by_class;
  for (const auto& e : ref) by_class[e.class_index].first.push_back(e.doa);
  for (const auto& e : pred) by_class[e.class_index].second.push_back(e.doa);

  long fn_frame = 0;
  long fp_frame = 0;
  for (const auto& [cls, rp] : by_class) {
    if (cls < 0 || cls >= counts.n_classes()) {
      throw Error(ErrorKind::OutOfRange, "class " + std::to_string(cls) + " outside the evaluated class set");
    }
    auto& cc = counts.per_class[static_cast<std::size_t>(cls)];
    cc.n_ref += static_cast<long>(rp.first.size());
    const PairingResult pr = pair_within_class(rp.first, rp.second);
    long fp = static_cast<long>(pr.unmatched_preds.size());
    long fn = static_cast<long>(pr.unmatched_refs.size());
    for (const auto& p : pr.pairs) {
      counts.pairs.emplace_back(cls, p.error_deg);
      ++cc.n_pairs;
      cc.error_sum += p.error_deg;
      if (p.error_deg <= threshold_deg) {
        ++cc.tp;
      } else {
        ++fp;
        ++fn;
      }
    }
    cc.fp += fp;
    cc.fn += fn;
    fp_frame += fp;
    fn_frame += fn;
  }
  counts.substitutions += std::min(fn_frame, fp_frame);
  counts.deletions += std::max(0L, fn_frame - fp_frame);
  counts.insertions += std::max(0L, fp_frame - fn_frame);
  ++counts.frames;
}

MetricsReport finalize(const MetricCounts& counts, double threshold_deg) {
  MetricsReport r;
  r.threshold_deg = threshold_deg;
  r.substitutions = counts.substitutions;
  r.deletions = counts.deletions;
  r.insertions = counts.insertions;
  for (const auto& c : counts.per_class) {
    r.tp += c.tp;
    r.fp += c.fp;
    r.fn += c.fn;
    r.n_ref += c.n_ref;
    r.n_pairs += c.n_pairs;
  }
  const long errors = r.substitutions + r.deletions + r.insertions;
  if (r.n_ref == 0) {
    r.undefined = true;
    r.er = static_cast<double>(errors);
    r.f = r.fp == 0 ? 1.0 : 0.0;
    r.le_cd = 0.0;
    r.lr_cd = 1.0;
    r.notes.push_back("undefined: no reference events; ER counts insertions only");
    return r;
  }
  r.er = static_cast<double>(errors) / static_cast<double>(r.n_ref);
  r.f = 2.0 * static_cast<double>(r.tp) / static_cast<double>(2 * r.tp + r.fp + r.fn);

  double le_sum = 0.0;
  double lr_sum = 0.0;
  int n_cls = 0;
  for (int c = 0; c < counts.n_classes(); ++c) {
    const auto& cc = counts.per_class[static_cast<std::size_t>(c)];
    if (cc.n_ref == 0) continue;
    ClassScore s;
    s.class_index = c;
    s.n_ref = cc.n_ref;
    if (cc.n_pairs > 0) {
      s.le_deg = cc.error_sum / static_cast<double>(cc.n_pairs);
    } else {
      s.le_deg = kUnmatchedClassErrorDeg;
      r.notes.push_back("class " + std::to_string(c) + " has references but no predictions; LE set to 180");
    }
    s.lr = static_cast<double>(cc.n_pairs) / static_cast<double>(cc.n_ref);
    le_sum += s.le_deg;
    lr_sum += s.lr;
    ++n_cls;
    r.per_class.push_back(s);
  }
  r.le_cd = le_sum / n_cls;
  r.lr_cd = lr_sum / n_cls;
  return r;
}

LabelFrameSet pool_segments(const LabelFrameSet& labels, int frames_per_segment) {
  if (frames_per_segment < 1) throw Error(ErrorKind::InvalidArgument, "segment length must be >= 1 frame");
  if (frames_per_segment == 1) return labels;
  LabelFrameSet out;
  out.n_frames = (labels.n_frames + frames_per_segment - 1) / frames_per_segment;
  std::map<int, std::map<std::pair<int, int>, Vec3>> acc;
  std::map<int, std::map<std::pair<int, int>, Doa>> first;
  for (const auto& [k, entries] : labels.frames) {
    const int seg = k / frames_per_segment;
    for (const auto& e : entries) {
      const auto key = std::make_pair(e.class_index, e.track_id);
      auto& sum = acc[seg][key];
      const Vec3 u = doa_to_unit_vector(e.doa);
      for (int i = 0; i < 3; ++i) sum[static_cast<std::size_t>(i)] += u[static_cast<std::size_t>(i)];
      first[seg].try_emplace(key, e.doa);
    }
  }
  for (const auto& [seg, m] : acc) {
    for (const auto& [key, sum] : m) {
      const Doa d = norm(sum) > 1e-12 ? unit_vector_to_doa(sum) : first[seg][key];
      out.add(seg, {key.first, key.second, d});
    }
  }
  out.normalize();
  return out;
}

void accumulate_file(MetricCounts& counts, const LabelFrameSet& ref, const LabelFrameSet& pred, double threshold_deg,
                     int frames_per_segment) {
  LabelFrameSet p = pred;
  p.n_frames = ref.n_frames;
  for (auto it = p.frames.begin(); it != p.frames.end();) {
    it = it->first >= ref.n_frames || it->first < 0 ? p.frames.erase(it) : std::next(it);
  }
  const LabelFrameSet r2 = pool_segments(ref, frames_per_segment);
  const LabelFrameSet p2 = pool_segments(p, frames_per_segment);
  for (int k = 0; k < r2.n_frames; ++k) accumulate(counts, r2.at(k), p2.at(k), threshold_deg);
}

MetricsReport evaluate(const LabelFrameSet& ref, const LabelFrameSet& pred, int n_classes, double threshold_deg,
                       int frames_per_segment) {
  MetricCounts counts(n_classes);
  accumulate_file(counts, ref, pred, threshold_deg, frames_per_segment);
  return finalize(counts, threshold_deg);
}

std::vector<RankedSystem> rank_systems(const std::vector<std::pair<std::string, MetricsReport>>& reports) {
  if (reports.empty()) throw Error(ErrorKind::InvalidArgument, "nothing to rank");
  std::vector<RankedSystem> out;
  for (const auto& [id, r] : reports) out.push_back({id, r});

  auto rank_by = [&](auto value, bool lower_better, int RankedSystem::*field) {
    for (auto& a : out) {
      int better = 0;
      for (const auto& b : out) {
        const double va = value(a.report);
        const double vb = value(b.report);
        if (lower_better ? vb < va : vb > va) ++better;
      }
      a.*field = better + 1;
    }
  };
  rank_by([](const MetricsReport& r) { return r.er; }, true, &RankedSystem::rank_er);
  rank_by([](const MetricsReport& r) { return r.f; }, false, &RankedSystem::rank_f);
  rank_by([](const MetricsReport& r) { return r.le_cd; }, true, &RankedSystem::rank_le);
  rank_by([](const MetricsReport& r) { return r.lr_cd; }, false, &RankedSystem::rank_lr);
  for (auto& s : out) s.rank_sum = s.rank_er + s.rank_f + s.rank_le + s.rank_lr;
  std::stable_sort(out.begin(), out.end(), [](const RankedSystem& a, const RankedSystem& b) {
    if (a.rank_sum != b.rank_sum) return a.rank_sum < b.rank_sum;
    if (a.report.er != b.report.er) return a.report.er < b.report.er;
    return a.system_id < b.system_id;
  });
  return out;
}

}  // namespace seld
