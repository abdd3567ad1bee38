#include <doctest.h>

#include <cmath>
#include <random>

#include "seldsynth/metrics.hpp"
#include "seldsynth/oracle.hpp"

using namespace seld;

namespace {

LabelFrameSet random_ref(std::uint64_t seed, int n_frames = 600) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> az(-180.0, 180.0), el(-60.0, 60.0), u(0.0, 1.0);
  LabelFrameSet l;
  l.n_frames = n_frames;
  for (int k = 0; k < n_frames; ++k) {
    for (int c = 0; c < 12; ++c) {
      if (u(rng) < 0.15) l.add(k, {c, 0, {az(rng), el(rng)}});
    }
  }
  l.normalize();
  return l;
}

}  // namespace

TEST_CASE("identity spec returns the reference") {
  const LabelFrameSet ref = random_ref(1);
  DegradationSpec s;
  CHECK(s.is_identity());
  CHECK(degrade(ref, s) == ref);
  const MetricsReport r = evaluate(ref, degrade(ref, s), 12);
  CHECK(r.er == 0.0);
  CHECK(r.f == 1.0);
}

TEST_CASE("jitter rotates every DOA by exactly the requested angle") {
  const LabelFrameSet ref = random_ref(2);
  for (double j : {10.0, 25.0}) {
    DegradationSpec s;
    s.doa_jitter_deg = j;
    s.seed = 3;
    const LabelFrameSet p = degrade(ref, s);
    REQUIRE(p.entry_count() == ref.entry_count());
    for (const auto& [k, entries] : ref.frames) {
      const auto& got = p.at(k);
      REQUIRE(got.size() == entries.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].class_index == entries[i].class_index);
        CHECK(angular_distance(got[i].doa, entries[i].doa) == doctest::Approx(j).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("miss probability thins entries binomially") {
  const LabelFrameSet ref = random_ref(4, 3000);
  DegradationSpec s;
  s.p_miss = 0.3;
  s.seed = 5;
  const auto n = static_cast<double>(ref.entry_count());
  REQUIRE(n > 5000);
  const auto kept = static_cast<double>(degrade(ref, s).entry_count());
  const double sigma = std::sqrt(n * 0.3 * 0.7);
  CHECK(std::abs(kept - 0.7 * n) < 4.0 * sigma);
}

TEST_CASE("false positives and confusion") {
  const LabelFrameSet ref = random_ref(6, 2000);
  DegradationSpec s;
  s.p_false = 0.5;
  s.seed = 7;
  const LabelFrameSet p = degrade(ref, s);
  const double extra = static_cast<double>(p.entry_count() - ref.entry_count());
  const double sigma = std::sqrt(2000 * 0.25);
  CHECK(std::abs(extra - 1000.0) < 4.0 * sigma);
  CHECK_NOTHROW(p.validate(12));

  DegradationSpec c;
  c.class_confusion = 1.0;
  c.seed = 8;
  const LabelFrameSet q = degrade(ref, c);
  CHECK(q.entry_count() == ref.entry_count());
  CHECK_NOTHROW(q.validate(12));
  // Every entry moved class, so no reference entry keeps its (class, DOA).
  int same = 0;
  for (const auto& [k, entries] : ref.frames) {
    for (const auto& e : entries) {
      for (const auto& g : q.at(k)) same += g.class_index == e.class_index && angular_distance(g.doa, e.doa) < 1e-9;
    }
  }
  CHECK(same == 0);
}

TEST_CASE("degradation is deterministic per seed") {
  const LabelFrameSet ref = random_ref(9);
  DegradationSpec s;
  s.doa_jitter_deg = 5.0;
  s.p_miss = 0.1;
  s.p_false = 0.1;
  s.class_confusion = 0.1;
  s.seed = 11;
  CHECK(degrade(ref, s) == degrade(ref, s));
  DegradationSpec t = s;
  t.seed = 12;
  CHECK_FALSE(degrade(ref, s) == degrade(ref, t));
}

TEST_CASE("spec parsing and validation") {
  const DegradationSpec s = parse_degradation_spec(R"({"doa_jitter_deg": 10, "p_miss": 0.3, "seed": 4})");
  CHECK(s.doa_jitter_deg == 10.0);
  CHECK(s.p_miss == 0.3);
  CHECK(s.seed == 4);
  CHECK(s.p_false == 0.0);
  CHECK_THROWS_AS(parse_degradation_spec(R"({"p_miss": 1.5})"), Error);
  CHECK_THROWS_AS(parse_degradation_spec(R"({"doa_jitter_deg": -1})"), Error);
  CHECK_THROWS_AS(parse_degradation_spec("[1, 2"), Error);
}
