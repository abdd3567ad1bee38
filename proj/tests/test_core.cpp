#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "seldsynth/core.hpp"
#include "seldsynth/spatializer.hpp"

using namespace seld;

namespace {

constexpr double kRad = std::numbers::pi / 180.0;

SceneEvent target(int id, int layer, double on, double off, int cls = 0) {
  SceneEvent e;
  e.id = id;
  e.sample_id = "s" + std::to_string(id);
  e.class_label = ClassSet::defaults().target_classes[static_cast<std::size_t>(cls)];
  e.class_index = cls;
  e.layer_index = layer;
  e.onset = on;
  e.offset = off;
  e.motion = StaticPlacement{{0.0, 0.0}, 1.0, 0, 0};
  return e;
}

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
  for (const auto& x : v) {
    if (x.rule == rule) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("unit vector axis cases") {
  const Vec3 a = doa_to_unit_vector({0.0, 0.0});
  CHECK(a[0] == doctest::Approx(1.0));
  CHECK(a[1] == doctest::Approx(0.0));
  CHECK(a[2] == doctest::Approx(0.0));
  const Vec3 b = doa_to_unit_vector({90.0, 0.0});
  CHECK(b[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(b[1] == doctest::Approx(1.0));
  const Vec3 c = doa_to_unit_vector({0.0, 90.0});
  CHECK(c[2] == doctest::Approx(1.0));
}

TEST_CASE("unit vector at (45, 35) matches hand trig") {
  // cos 35 = 0.819152044288992, sin 35 = 0.573576436351046, cos 45 = sin 45 = 0.707106781186548
  const Vec3 v = doa_to_unit_vector({45.0, 35.0});
  CHECK(v[0] == doctest::Approx(0.819152044288992 * 0.707106781186548).epsilon(1e-14));
  CHECK(v[1] == doctest::Approx(0.819152044288992 * 0.707106781186548).epsilon(1e-14));
  CHECK(v[2] == doctest::Approx(0.573576436351046).epsilon(1e-14));
}

TEST_CASE("unit vector round trip and norm over random directions") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> az(-180.0, 180.0), el(-89.9, 89.9);
  for (int i = 0; i < 2000; ++i) {
    const Doa d{az(rng), el(rng)};
    const Vec3 u = doa_to_unit_vector(d);
    CHECK(std::abs(norm(u) - 1.0) < 1e-12);
    const Doa back = unit_vector_to_doa(u);
    CHECK(angular_distance(d, back) < 1e-9);
    CHECK(angular_distance(d, d) == 0.0);
  }
}

TEST_CASE("angular distance examples") {
  CHECK(angular_distance({0, 0}, {180, 0}) == doctest::Approx(180.0));
  CHECK(angular_distance({0, 0}, {30, 0}) == doctest::Approx(30.0));
  CHECK(angular_distance({-180, 0}, {179.5, 0}) == doctest::Approx(0.5));
  CHECK(angular_distance({10, 90}, {-120, 90}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("angular distance is symmetric and bounded") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> az(-180.0, 180.0), el(-90.0, 90.0);
  for (int i = 0; i < 1000; ++i) {
    const Doa a{az(rng), el(rng)}, b{az(rng), el(rng)};
    const double d = angular_distance(a, b);
    CHECK(d >= 0.0);
    CHECK(d <= 180.0);
    CHECK(d == doctest::Approx(angular_distance(b, a)).epsilon(1e-12));
    // Independent oracle: arccos of the dot product from explicit trig.
    const double dot = std::cos(a.elevation * kRad) * std::cos(b.elevation * kRad) *
                           std::cos((a.azimuth - b.azimuth) * kRad) +
                       std::sin(a.elevation * kRad) * std::sin(b.elevation * kRad);
    CHECK(d == doctest::Approx(std::acos(std::clamp(dot, -1.0, 1.0)) / kRad).epsilon(1e-6));
  }
}

TEST_CASE("rotate_along moves by exactly the requested angle") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> az(-180.0, 180.0), el(-89.0, 89.0), h(0.0, 6.28);
  for (int i = 0; i < 500; ++i) {
    const Doa d{az(rng), el(rng)};
    for (double ang : {0.5, 10.0, 25.0, 170.0}) {
      CHECK(angular_distance(d, rotate_along(d, ang, h(rng))) == doctest::Approx(ang).epsilon(1e-9));
    }
  }
}

TEST_CASE("wrap_azimuth keeps [-180, 180)") {
  CHECK(wrap_azimuth(180.0) == -180.0);
  CHECK(wrap_azimuth(-180.0) == -180.0);
  CHECK(wrap_azimuth(540.0) == -180.0);
  CHECK(wrap_azimuth(190.0) == doctest::Approx(-170.0));
  CHECK(is_valid({179.9, 90.0}));
  CHECK_FALSE(is_valid({180.0, 0.0}));
  CHECK_FALSE(is_valid({0.0, 90.5}));
}

TEST_CASE("class set defaults") {
  const ClassSet c = ClassSet::defaults();
  CHECK(c.size() == 12);
  CHECK(c.index_of(c.target_classes[5]) == 5);
  CHECK_FALSE(c.index_of("no such class").has_value());
  for (const auto& i : c.interferer_labels) {
    CHECK(c.is_interferer(i));
    CHECK_FALSE(c.index_of(i).has_value());
  }
  ClassSet bad = c;
  bad.interferer_labels.push_back(c.target_classes[0]);
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("validate_script flags four concurrent targets") {
  SceneScript s;
  s.duration_s = 60.0;
  s.events = {target(0, 0, 1, 5), target(1, 1, 2, 6), target(2, 2, 3, 7), target(3, 0, 4, 8)};
  const auto v = validate_script(s);
  CHECK(has_rule(v, "target polyphony > 3"));
  CHECK(has_rule(v, "intra-layer overlap"));
  for (const auto& x : v) {
    if (x.rule == "intra-layer overlap") CHECK(x.event_ids == std::vector<int>{0, 3});
  }
}

TEST_CASE("validate_script flags intra-layer overlap only") {
  SceneScript s;
  s.events = {target(0, 1, 1, 5), target(1, 1, 4, 6)};
  const auto v = validate_script(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == "intra-layer overlap");
}

TEST_CASE("validate_script flags interferer polyphony and bad fields") {
  SceneScript s;
  s.snr_db = 40.0;
  SceneEvent a = target(0, 3, 1, 5);
  a.is_interferer = true;
  a.class_index = -1;
  SceneEvent b = a;
  b.id = 1;
  b.onset = 2;
  SceneEvent c = target(2, 0, 1, 2);
  c.motion = MovingPlacement{0, 0, 15.0, 1};
  s.events = {a, b, c};
  const auto v = validate_script(s);
  CHECK(has_rule(v, "interferer polyphony > 1"));
  CHECK(has_rule(v, "snr_db outside [6, 30]"));
  CHECK(has_rule(v, "moving speed not in {10, 20, 40} deg/s"));
}

TEST_CASE("back-to-back events are not overlaps") {
  SceneScript s;
  s.events = {target(0, 0, 1, 5), target(1, 0, 5, 9)};
  CHECK(validate_script(s).empty());
}

TEST_CASE("plan_layers scripts validate for 1000 seeds") {
  const SampleStore store = synth_samples({"alarm", "footsteps", "running engine"}, 3, 0.5, 9.0, 3);
  ClassSet classes;
  classes.target_classes = {"alarm", "footsteps"};
  classes.interferer_labels = {"running engine"};
  int total_events = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    LayerPlanRequest req;
    req.target_pool = pool_for(store, classes.target_classes);
    req.interferer_pool = pool_for(store, classes.interferer_labels);
    req.total_gap_s = 5.0 + static_cast<double>(seed % 25);
    req.seed = seed;
    req.classes = classes;
    const SceneScript s = plan_layers(req);
    const auto v = validate_script(s);
    CHECK_MESSAGE(v.empty(), "seed " << seed << ": " << (v.empty() ? "" : v[0].rule));
    CHECK(max_polyphony(s, false) <= 3);
    CHECK(max_polyphony(s, true) <= 1);
    total_events += static_cast<int>(s.events.size());
  }
  CHECK(total_events > 1000);
}

TEST_CASE("frame coverage rule") {
  CHECK(frame_covered(0.0, 0.1, 0));
  CHECK_FALSE(frame_covered(0.0, 0.1, 1));
  CHECK(frame_covered(0.05, 0.2, 0));   // exactly 50 ms in frame 0
  CHECK_FALSE(frame_covered(0.06, 0.2, 0));
  CHECK(frame_covered(0.06, 0.2, 1));
  CHECK(frame_covered(0.07, 0.1, 0));   // 30 ms event covers its onset frame
  CHECK_FALSE(frame_covered(0.07, 0.1, 1));
  CHECK(frame_covered(0.09, 0.12, 0));  // short event straddling a boundary
  CHECK_FALSE(frame_covered(0.09, 0.12, 1));
  CHECK(covered_frames(1.0, 1.5, 600) == std::vector<int>{10, 11, 12, 13, 14});
  CHECK(covered_frames(59.97, 60.0, 600) == std::vector<int>{599});
  CHECK(label_frame_count(60.0) == 600);
}

TEST_CASE("coverage agrees with brute-force overlap measurement") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(0.0, 10.0), len(0.001, 2.0);
  for (int i = 0; i < 3000; ++i) {
    const double on = t(rng);
    const double off = on + len(rng);
    for (int k = 0; k < 130; ++k) {
      // Overlap measured on a 0.1 ms grid.
      int hits = 0;
      for (int s = 0; s < 1000; ++s) {
        const double x = 0.1 * k + (s + 0.5) * 1e-4;
        if (x >= on && x < off) ++hits;
      }
      const double overlap = hits * 1e-4;
      bool expect;
      if (off - on < 0.05) {
        expect = std::floor(on / 0.1 + 1e-9) == k;
      } else {
        expect = overlap >= 0.05;
      }
      if (std::abs(overlap - 0.05) < 2e-4) continue;
      CHECK_MESSAGE(frame_covered(on, off, k) == expect, "on " << on << " off " << off << " k " << k);
    }
  }
}

TEST_CASE("label frame set normalization and validation") {
  LabelFrameSet l;
  l.add(3, {2, 1, {10, 0}});
  l.add(3, {1, 0, {0, 0}});
  l.add(3, {2, 0, {20, 0}});
  l.frames[7];
  l.normalize();
  CHECK(l.frames.size() == 1);
  CHECK(l.at(3)[0].class_index == 1);
  CHECK(l.at(3)[1].track_id == 0);
  CHECK(l.at(3)[2].track_id == 1);
  CHECK(l.at(99).empty());
  CHECK(l.entry_count() == 3);
  CHECK_NOTHROW(l.validate(12));
  CHECK_THROWS_AS(l.validate(2), Error);
  l.add(3, {1, 0, {5, 0}});
  CHECK_THROWS_AS(l.validate(12), Error);
}
