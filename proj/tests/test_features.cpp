#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "seldsynth/array.hpp"
#include "seldsynth/features.hpp"

using namespace seld;

namespace {

Signal noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Signal x(n);
  for (double& v : x) v = g(rng);
  return x;
}

}  // namespace

TEST_CASE("frame counts") {
  CHECK(stft_frame_count(959) == 0);
  CHECK(stft_frame_count(960) == 1);
  CHECK(stft_frame_count(1439) == 1);
  CHECK(stft_frame_count(1440) == 2);
  CHECK(stft_frame_count(60 * 24000) == 2999);
}

TEST_CASE("periodic Hann window") {
  const auto& w = analysis_window();
  REQUIRE(w.size() == 960);
  CHECK(w[0] == 0.0);
  CHECK(w[480] == doctest::Approx(1.0));
  CHECK(w[240] == doctest::Approx(0.5));
  for (int i = 1; i < 480; ++i) CHECK(w[i] == doctest::Approx(w[960 - i]).epsilon(1e-12));
}

TEST_CASE("stft matches a direct windowed DFT") {
  MultiSignal a(2, noise(3000, 1));
  a[1] = noise(3000, 2);
  const StftTensor s = stft(a);
  REQUIRE(s.frames == 5);
  const auto& w = analysis_window();
  for (std::size_t t : {0u, 3u}) {
    for (int k : {0, 1, 17, 256, 512}) {
      Complex acc = 0.0;
      for (int i = 0; i < 960; ++i) {
        acc += a[1][t * 480 + i] * w[i] * std::polar(1.0, -2.0 * std::numbers::pi * k * i / 1024.0);
      }
      CHECK(std::abs(s.at(t, k, 1) - acc) < 1e-9);
    }
  }
  CHECK_THROWS_AS(stft(MultiSignal{Signal(500)}), Error);
  CHECK_THROWS_AS(stft(MultiSignal{Signal(1000), Signal(999)}), Error);
}

TEST_CASE("HTK mel scale") {
  CHECK(hz_to_mel(0.0) == 0.0);
  CHECK(hz_to_mel(700.0) == doctest::Approx(2595.0 * std::log10(2.0)));
  CHECK(mel_to_hz(hz_to_mel(4321.0)) == doctest::Approx(4321.0));
}

TEST_CASE("mel filterbank shape") {
  const auto& fb = mel_filterbank();
  REQUIRE(fb.size() == 64);
  int prev_peak = -1;
  for (const auto& band : fb) {
    const auto it = std::max_element(band.begin(), band.end());
    CHECK(*it > 0.3);
    CHECK(*it <= 1.0 + 1e-12);
    const int peak = static_cast<int>(it - band.begin());
    CHECK(peak >= prev_peak);
    prev_peak = peak;
    for (double v : band) CHECK(v >= 0.0);
  }
  // Triangles overlap so that adjacent bands sum to 1 between their peaks.
  const auto peak_of = [](const std::array<double, kBins>& b) {
    return static_cast<int>(std::max_element(b.begin(), b.end()) - b.begin());
  };
  for (int k = peak_of(fb.front()) + 1; k < peak_of(fb.back()); ++k) {
    double sum = 0.0;
    for (const auto& band : fb) sum += band[static_cast<std::size_t>(k)];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  for (const auto& band : fb) CHECK(band[512] < 1e-9);
}

TEST_CASE("log-mel of silence hits the floor and of a tone peaks in its band") {
  MultiSignal silent(4, Signal(2400, 0.0));
  const Tensor z = log_mel(stft(silent));
  for (float v : z.data) CHECK(v == doctest::Approx(-100.0));

  const double f0 = 2000.0;
  Signal tone(4800);
  for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = std::sin(2.0 * std::numbers::pi * f0 * i / 24000.0);
  const Tensor m = log_mel(stft(MultiSignal(4, tone)));
  // Oracle: the band whose triangle weights the 2000 Hz bin most.
  const auto& fb = mel_filterbank();
  const int bin = static_cast<int>(std::lround(f0 * 1024.0 / 24000.0));
  int expect = 0;
  for (int b = 1; b < 64; ++b) {
    if (fb[b][bin] > fb[expect][bin]) expect = b;
  }
  int best = 0;
  for (int b = 1; b < 64; ++b) {
    if (m.at3(2, b, 0) > m.at3(2, best, 0)) best = b;
  }
  CHECK(best == expect);
  // Brute-force power for that band.
  const StftTensor s = stft(MultiSignal(4, tone));
  double acc = 0.0;
  for (int k = 0; k < kBins; ++k) acc += fb[expect][k] * std::norm(s.at(2, k, 0));
  CHECK(m.at3(2, expect, 0) == doctest::Approx(10.0 * std::log10(acc + 1e-10)).epsilon(1e-6));
}

TEST_CASE("intensity vectors of a plane wave point at the source") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> az(-180.0, 180.0), el(-80.0, 80.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Doa d{az(rng), el(rng)};
    const Vec3 u = doa_to_unit_vector(d);
    const Signal s = noise(4800, 10 + trial);
    // ACN/SN3D: W, Y, Z, X.
    MultiSignal foa{s, s, s, s};
    for (std::size_t i = 0; i < s.size(); ++i) {
      foa[1][i] *= u[1];
      foa[2][i] *= u[2];
      foa[3][i] *= u[0];
    }
    const Tensor iv = intensity_vectors(stft(foa));
    // |W|^2 u over |W|^2 (1 + 1/3): the normalized vector is 3/4 u in every band.
    for (std::size_t t = 0; t < iv.dims[0]; ++t) {
      for (std::size_t m = 0; m < 64; m += 7) {
        for (std::size_t c = 0; c < 3; ++c) CHECK(iv.at3(t, m, c) == doctest::Approx(0.75 * u[c]).epsilon(1e-4));
      }
    }
  }
  CHECK_THROWS_AS(intensity_vectors(stft(MultiSignal(2, Signal(960)))), Error);
}

TEST_CASE("GCC-PHAT peaks at the inter-channel delay with j lagging i") {
  const Signal s = noise(6000, 4);
  const int delays[4] = {0, 5, -3, 12};
  MultiSignal mic(4, Signal(4800, 0.0));
  for (int c = 0; c < 4; ++c) {
    for (std::size_t i = 0; i < 4800; ++i) mic[c][i] = s[static_cast<std::size_t>(100 + static_cast<long>(i) - delays[c])];
  }
  const Tensor g = gcc_phat(stft(mic));
  REQUIRE(g.dims == std::vector<std::size_t>{9, 64, 6});
  for (std::size_t p = 0; p < 6; ++p) {
    const auto [i, j] = gcc_pairs()[p];
    const int expect = delays[j] - delays[i];
    for (std::size_t t = 0; t < g.dims[0]; ++t) {
      std::size_t best = 0;
      for (std::size_t l = 1; l < 64; ++l) {
        if (g.at3(t, l, p) > g.at3(t, best, p)) best = l;
      }
      CHECK(static_cast<int>(best) - 32 == expect);
    }
  }
}

TEST_CASE("extract stacks mel and spatial channels") {
  MultiSignal a;
  for (std::uint64_t c = 0; c < 4; ++c) a.push_back(noise(24000, 20 + c));
  const Tensor foa = extract(a, Format::Foa);
  CHECK(foa.dims == std::vector<std::size_t>{49, 64, 7});
  const Tensor mic = extract(a, Format::Mic);
  CHECK(mic.dims == std::vector<std::size_t>{49, 64, 10});
  const StftTensor s = stft(a);
  const Tensor mel = log_mel(s);
  const Tensor gcc = gcc_phat(s);
  for (std::size_t t = 0; t < 49; t += 12) {
    for (std::size_t m = 0; m < 64; m += 9) {
      for (std::size_t c = 0; c < 4; ++c) CHECK(mic.at3(t, m, c) == mel.at3(t, m, c));
      for (std::size_t c = 0; c < 6; ++c) CHECK(mic.at3(t, m, 4 + c) == gcc.at3(t, m, c));
    }
  }
  CHECK(extract(a, Format::Foa) == foa);
  CHECK_THROWS_AS(extract(MultiSignal(3, Signal(24000)), Format::Foa), Error);
}
