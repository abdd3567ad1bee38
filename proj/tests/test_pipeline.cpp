#include <doctest.h>

#include "seldsynth/pipeline.hpp"

using namespace seld;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("seld_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

RunConfig small_config(const fs::path& banks) {
  RunConfig c;
  c.seed = 21;
  c.n_recordings = 2;
  c.duration_s = 8.0;
  c.target_gap_s = {2.0, 4.0};
  c.interferer_gap_s = {3.0, 5.0};
  c.folds = {1, 2};
  c.banks = {{banks / "room1" / "foa", banks / "room1" / "mic"}};
  c.samples.synthetic_per_class = 1;
  c.samples.synthetic_min_s = 0.5;
  c.samples.synthetic_max_s = 2.0;
  return c;
}

void build_banks(const fs::path& out) {
  BankBuildSpec b;
  b.rt60_s = {0.05};
  b.trajectories = {TrajectorySpec{TrajectoryShape::Circular, 0.0, 1.5, -180.0, 178.0, 2.0}};
  b.ambience_s = 3.0;
  b.seed = 2;
  make_banks(b, out);
}

}  // namespace

TEST_CASE("ids and hashing") {
  CHECK(recording_id(3, 7) == "fold3_mix008");
  // Published FNV-1a 64-bit test vectors.
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("planning is deterministic and valid") {
  TempDir dir("plan");
  build_banks(dir.path);
  const RunConfig c = small_config(dir.path);
  const std::vector<IrBank> layout{read_ir_bank(c.banks[0].foa)};
  const SampleStore samples = load_samples(c);
  const auto a = plan_dataset(c, samples, layout);
  const auto b = plan_dataset(c, samples, layout);
  REQUIRE(a.size() == 2);
  CHECK(a[0].entry.id == "fold1_mix001");
  CHECK(a[1].entry.fold == 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].entry.seed == b[i].entry.seed);
    CHECK(a[i].script.events.size() == b[i].script.events.size());
    CHECK(validate_script(a[i].script).empty());
    CHECK(a[i].entry.snr_db >= 6.0);
    CHECK(a[i].entry.snr_db <= 30.0);
  }
}

TEST_CASE("synthesize, oracle and evaluate end to end") {
  TempDir dir("e2e");
  build_banks(dir.path / "banks");
  const RunConfig c = small_config(dir.path / "banks");
  const auto entries = synthesize_dataset(c, dir.path / "run", {});
  REQUIRE(entries.size() == 2);
  for (const auto& e : entries) {
    for (const char* prefix : {"foa_", "mic_"}) {
      const MultiSignal a = read_audio(dir.path / "run" / (prefix + e.id + ".wav"));
      CHECK(a[0].size() == 8u * 24000u);
    }
    CHECK(fs::exists(dir.path / "run" / ("meta_" + e.id + ".csv")));
  }
  const std::string manifest = read_text(dir.path / "run" / "manifest.csv");
  CHECK(manifest.rfind("id,fold,split,room,snr_db,seed,n_targets,n_interferers\n", 0) == 0);

  oracle_dir(dir.path / "run", DegradationSpec{}, dir.path / "pred", true);
  CHECK(fs::exists(dir.path / "pred" / ("accdoa_" + entries[0].id + ".skt")));
  const MetricsReport r = evaluate_dirs(dir.path / "run", dir.path / "pred", 12);
  CHECK(r.er == 0.0);
  CHECK(r.f == 1.0);
  CHECK(r.lr_cd == 1.0);

  fs::remove(dir.path / "pred" / ("meta_" + entries[1].id + ".csv"));
  try {
    evaluate_dirs(dir.path / "run", dir.path / "pred", 12);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Missing);
    CHECK(std::string(e.what()).find(entries[1].id) != std::string::npos);
  }

  const auto feats = extract_features_dir(dir.path / "run", Format::Mic, dir.path / "feat");
  REQUIRE(feats.size() == 2);
  const Tensor t = read_tensor_dump(feats[0]);
  CHECK(t.dims == std::vector<std::size_t>{399, 64, 10});
}

TEST_CASE("synthesis is byte-identical across runs and seed sensitive") {
  TempDir dir("det");
  build_banks(dir.path / "banks");
  RunConfig c = small_config(dir.path / "banks");
  c.n_recordings = 1;
  c.formats = {Format::Foa};
  SynthesisOptions o;
  synthesize_dataset(c, dir.path / "a", o);
  o.jobs = 2;
  synthesize_dataset(c, dir.path / "b", o);
  o.seed = 99;
  synthesize_dataset(c, dir.path / "c", o);
  int files = 0;
  for (const auto& f : fs::directory_iterator(dir.path / "a")) {
    const auto name = f.path().filename();
    CHECK(read_text(f.path()) == read_text(dir.path / "b" / name));
    ++files;
  }
  CHECK(files == 3);
  CHECK(read_text(dir.path / "a" / "foa_fold1_mix001.wav") != read_text(dir.path / "c" / "foa_fold1_mix001.wav"));
}

TEST_CASE("interferer and ambience switches") {
  TempDir dir("opts");
  build_banks(dir.path / "banks");
  RunConfig c = small_config(dir.path / "banks");
  c.n_recordings = 1;
  c.formats = {Format::Foa};
  SynthesisOptions quiet;
  quiet.ambience = false;
  quiet.interferers = false;
  const auto e = synthesize_dataset(c, dir.path / "q", quiet);
  CHECK(e[0].n_interferers == 0);
  const MultiSignal a = read_audio(dir.path / "q" / "foa_fold1_mix001.wav");
  // Without ambience the leading gap before the first onset is digital silence unless an event starts at 0.
  const LabelFrameSet l = read_metadata(dir.path / "q" / "meta_fold1_mix001.csv", 80);
  if (!l.frames.empty() && l.frames.begin()->first > 0) CHECK(a[0][0] == 0.0);
  SynthesisOptions dry;
  dry.anechoic = true;
  CHECK_NOTHROW(synthesize_dataset(c, dir.path / "d", dry));
  CHECK(read_text(dir.path / "d" / "meta_fold1_mix001.csv") == read_text(dir.path / "q" / "meta_fold1_mix001.csv"));
}
