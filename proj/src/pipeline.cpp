#include "seldsynth/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "seldsynth/accdoa.hpp"
#include "seldsynth/features.hpp"

namespace seld {

namespace {

constexpr int kMaxLabelFrames = 36000;

std::vector<fs::path> files_with(const fs::path& dir, const std::string& prefix, const std::string& ext) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Missing, "no such directory " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind(prefix, 0) == 0 && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string id_of(const fs::path& p, const std::string& prefix) {
  return p.stem().string().substr(prefix.size());
}

LabelFrameSet load_labels(const fs::path& path) {
  LabelFrameSet l = read_metadata(path, kMaxLabelFrames);
  int n = label_frame_count(60.0);
  if (!l.frames.empty()) n = std::max(n, l.frames.rbegin()->first + 1);
  l.n_frames = n;
  return l;
}

void run_parallel(std::size_t n, int jobs, const std::function<void(std::size_t)>& work) {
  const auto n_threads = static_cast<std::size_t>(std::clamp(jobs, 1, 64));
  if (n_threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(n_threads, n); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

void check_same_layout(const IrBank& a, const IrBank& b) {
  bool same = a.trajectories.size() == b.trajectories.size();
  for (std::size_t t = 0; same && t < a.trajectories.size(); ++t) {
    same = a.trajectories[t].nodes == b.trajectories[t].nodes;
  }
  if (!same) {
    throw Error(ErrorKind::Mismatch, "banks of room " + a.room_id + " differ in trajectory layout between " +
                                         to_string(a.format) + " and " + to_string(b.format));
  }
}

MultiSignal fit_ambience(const MultiSignal& src, std::size_t n) {
  MultiSignal out(4, Signal(n, 0.0));
  for (std::size_t ch = 0; ch < 4; ++ch) {
    const auto& s = src[ch];
    if (s.empty()) continue;
    for (std::size_t i = 0; i < n; ++i) out[ch][i] = s[i % s.size()];
  }
  return out;
}

}  // namespace

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string recording_id(int fold, int index) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "fold%d_mix%03d", fold, index + 1);
  return buf;
}

SampleStore load_samples(const RunConfig& config) {
  if (config.samples.dir) return read_sample_dir(*config.samples.dir);
  std::vector<std::string> labels = config.classes.target_classes;
  labels.insert(labels.end(), config.classes.interferer_labels.begin(), config.classes.interferer_labels.end());
  return synth_samples(labels, config.samples.synthetic_per_class, config.samples.synthetic_min_s,
                       config.samples.synthetic_max_s, derive_seed(config.seed, 0x5A3D1E));
}

std::vector<RecordingPlan> plan_dataset(const RunConfig& config, const SampleStore& samples,
                                        const std::vector<IrBank>& layout_banks) {
  config.validate();
  if (layout_banks.empty()) throw Error(ErrorKind::InvalidArgument, "no IR banks to place events in");
  const auto target_pool = pool_for(samples, config.classes.target_classes);
  const auto interferer_pool = pool_for(samples, config.classes.interferer_labels);

  std::vector<RecordingPlan> plans;
  for (int i = 0; i < config.n_recordings; ++i) {
    RecordingPlan p;
    const int fold = config.folds[static_cast<std::size_t>(i) % config.folds.size()];
    p.bank_index = static_cast<std::size_t>(fold - 1) % layout_banks.size();
    const IrBank& bank = layout_banks[p.bank_index];
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));

    std::mt19937_64 rng(seed);
    auto draw = [&](const std::pair<double, double>& r) {
      return std::uniform_real_distribution<double>(r.first, r.second)(rng);
    };
    const double snr = draw(config.snr_db);
    LayerPlanRequest req;
    req.target_pool = target_pool;
    req.interferer_pool = interferer_pool;
    req.total_gap_s = draw(config.target_gap_s);
    req.interferer_gap_s = draw(config.interferer_gap_s);
    req.duration_s = config.duration_s;
    req.n_target_layers = config.n_target_layers;
    req.n_interferer_layers = config.n_interferer_layers;
    req.seed = derive_seed(seed, 1);
    req.classes = config.classes;

    SceneScript s = plan_layers(req);
    s.recording_id = recording_id(fold, i);
    s.fold = fold;
    s.room_id = bank.room_id;
    s.snr_db = snr;
    s = assign_spatial(s, bank, config.p_moving, derive_seed(seed, 2));

    p.entry = {s.recording_id, fold, bank.room_id, snr, seed, 0, 0};
    for (const auto& e : s.events) ++(e.is_interferer ? p.entry.n_interferers : p.entry.n_events);
    p.script = std::move(s);
    plans.push_back(std::move(p));
  }
  return plans;
}

std::vector<RecordingEntry> synthesize_dataset(const RunConfig& config_in, const fs::path& out,
                                               const SynthesisOptions& options) {
  RunConfig config = config_in;
  if (options.seed) config.seed = *options.seed;
  config.validate();

  // banks[room][format index]
  std::vector<std::vector<IrBank>> banks;
  for (const auto& paths : config.banks) {
    auto& row = banks.emplace_back();
    for (Format f : config.formats) {
      IrBank b = read_ir_bank(f == Format::Foa ? paths.foa : paths.mic);
      if (b.format != f) {
        throw Error(ErrorKind::Mismatch, "bank at " + (f == Format::Foa ? paths.foa : paths.mic).string() +
                                             " holds " + to_string(b.format) + " responses");
      }
      if (options.anechoic) b = make_anechoic_bank(b, default_array(f));
      if (!row.empty()) check_same_layout(row.front(), b);
      row.push_back(std::move(b));
    }
  }
  std::vector<IrBank> layout;
  for (const auto& row : banks) {
    IrBank l;
    l.room_id = row.front().room_id;
    l.format = row.front().format;
    l.trajectories = row.front().trajectories;
    layout.push_back(std::move(l));
  }

  const SampleStore samples = load_samples(config);
  std::vector<RecordingPlan> plans = plan_dataset(config, samples, layout);
  layout.clear();
  if (!options.interferers) {
    for (auto& p : plans) p.entry.n_interferers = 0;
  }
  fs::create_directories(out);

  const auto n_samples = static_cast<std::size_t>(std::llround(config.duration_s * kSampleRate));
  run_parallel(plans.size(), options.jobs, [&](std::size_t i) {
    RecordingPlan& p = plans[i];
    SceneScript script = p.script;
    if (!options.interferers) {
      std::erase_if(script.events, [](const SceneEvent& e) { return e.is_interferer; });
    }
    std::optional<LabelFrameSet> labels;
    for (std::size_t fi = 0; fi < config.formats.size(); ++fi) {
      const Format f = config.formats[fi];
      const IrBank& bank = banks[p.bank_index][fi];
      std::optional<MultiSignal> amb;
      if (options.ambience) {
        amb = bank.ambience ? fit_ambience(*bank.ambience, n_samples)
                            : synth_ambience(n_samples, default_array(f), derive_seed(p.entry.seed, 3 + fi));
      }
      MixResult mix = mix_scene(script, samples, bank, amb ? &*amb : nullptr);
      write_audio(out / (to_string(f) + "_" + p.entry.id + ".wav"), mix.audio);
      if (!labels) labels = std::move(mix.labels);
    }
    if (!labels) labels = derive_labels(script, banks[p.bank_index].front().trajectories);
    write_metadata(out / ("meta_" + p.entry.id + ".csv"), *labels);
  });

  std::vector<RecordingEntry> entries;
  for (const auto& p : plans) entries.push_back(p.entry);
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::string manifest = "id,fold,split,room,snr_db,seed,n_targets,n_interferers\n";
  for (const auto& e : entries) {
    const auto role = config.split.role_of(e.fold);
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%d,%s,%s,%.6f,%llu,%d,%d\n", e.id.c_str(), e.fold,
                  role ? to_string(*role).c_str() : "none", e.room_id.c_str(), e.snr_db,
                  static_cast<unsigned long long>(e.seed), e.n_events, e.n_interferers);
    manifest += buf;
  }
  write_text(out / "manifest.csv", manifest);
  return entries;
}

std::vector<fs::path> extract_features_dir(const fs::path& in, Format format, const fs::path& out) {
  const std::string prefix = to_string(format) + "_";
  const auto inputs = files_with(in, prefix, ".wav");
  if (inputs.empty()) throw Error(ErrorKind::Missing, "no " + prefix + "*.wav files in " + in.string());
  fs::create_directories(out);
  std::vector<fs::path> written;
  for (const auto& path : inputs) {
    const MultiSignal audio = read_audio(path);
    const fs::path dst = out / (path.stem().string() + ".skt");
    write_feature_dump(dst, extract(audio, format));
    written.push_back(dst);
  }
  return written;
}

std::vector<fs::path> oracle_dir(const fs::path& ref, const DegradationSpec& spec, const fs::path& out,
                                 bool write_accdoa) {
  spec.validate();
  const auto inputs = files_with(ref, "meta_", ".csv");
  if (inputs.empty()) throw Error(ErrorKind::Missing, "no meta_*.csv files in " + ref.string());
  fs::create_directories(out);
  std::vector<fs::path> written;
  for (const auto& path : inputs) {
    const std::string id = id_of(path, "meta_");
    const LabelFrameSet labels = load_labels(path);
    DegradationSpec s = spec;
    s.seed = derive_seed(spec.seed, fnv1a(id));
    const LabelFrameSet pred = degrade(labels, s);
    const fs::path dst = out / path.filename();
    write_metadata(dst, pred);
    written.push_back(dst);
    if (write_accdoa) {
      const fs::path adst = out / ("accdoa_" + id + ".skt");
      write_accdoa_dump(adst, encode(pred, spec.n_classes, pred.n_frames).tensor.to_tensor());
      written.push_back(adst);
    }
  }
  return written;
}

MetricsReport evaluate_dirs(const fs::path& ref, const fs::path& pred, int n_classes, double threshold_deg,
                            int frames_per_segment) {
  const auto refs = files_with(ref, "meta_", ".csv");
  const auto preds = files_with(pred, "meta_", ".csv");
  if (refs.empty()) throw Error(ErrorKind::Missing, "no meta_*.csv files in " + ref.string());
  std::set<std::string> ref_ids, pred_ids;
  for (const auto& p : refs) ref_ids.insert(id_of(p, "meta_"));
  for (const auto& p : preds) pred_ids.insert(id_of(p, "meta_"));
  std::vector<std::string> missing;
  for (const auto& id : ref_ids) {
    if (!pred_ids.count(id)) missing.push_back((pred / ("meta_" + id + ".csv")).string());
  }
  for (const auto& id : pred_ids) {
    if (!ref_ids.count(id)) missing.push_back((ref / ("meta_" + id + ".csv")).string());
  }
  if (!missing.empty()) {
    std::string msg = "unmatched files:";
    for (const auto& m : missing) msg += "\n  missing " + m;
    throw Error(ErrorKind::Missing, msg);
  }
  MetricCounts counts(n_classes);
  for (const auto& id : ref_ids) {
    const auto r = load_labels(ref / ("meta_" + id + ".csv"));
    const auto p = load_labels(pred / ("meta_" + id + ".csv"));
    MetricCounts file_counts(n_classes);
    accumulate_file(file_counts, r, p, threshold_deg, frames_per_segment);
    counts.merge(file_counts);
  }
  return finalize(counts, threshold_deg);
}

std::vector<fs::path> make_banks(const BankBuildSpec& spec, const fs::path& out) {
  if (spec.rooms < 1) throw Error(ErrorKind::InvalidArgument, "rooms must be >= 1");
  if (spec.rt60_s.empty() || spec.drr_db.empty()) throw Error(ErrorKind::InvalidArgument, "rt60 and drr lists must not be empty");
  if (spec.formats.empty()) throw Error(ErrorKind::InvalidArgument, "no formats requested");
  std::vector<fs::path> written;
  for (int k = 0; k < spec.rooms; ++k) {
    const std::string room = "room" + std::to_string(k + 1);
    const auto ks = static_cast<std::size_t>(k);
    for (std::size_t fi = 0; fi < spec.formats.size(); ++fi) {
      const Format f = spec.formats[fi];
      SynthBankSpec s;
      s.room_id = room;
      s.format = f;
      s.rt60_s = spec.rt60_s[ks % spec.rt60_s.size()];
      s.drr_db = spec.drr_db[ks % spec.drr_db.size()];
      s.trajectories = spec.trajectories;
      s.seed = derive_seed(spec.seed, ks);
      IrBank bank = synth_bank(s);
      if (spec.ambience) {
        const auto n = static_cast<std::size_t>(std::llround(spec.ambience_s * kSampleRate));
        bank.ambience = synth_ambience(n, default_array(f), derive_seed(spec.seed, 1000 + 10 * ks + fi));
      }
      const fs::path dir = out / room / to_string(f);
      write_ir_bank(dir, bank);
      written.push_back(dir);
    }
  }
  return written;
}

}  // namespace seld
