#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "seldsynth/array.hpp"

using namespace seld;

namespace {

constexpr double kRad = std::numbers::pi / 180.0;

// Both renderings are compared over the same span, so total energy stands in for RMS.
double rms(const Signal& x) { return std::sqrt(energy(x)); }

double total_energy(const MultiSignal& m) {
  double e = 0.0;
  for (const auto& ch : m) e += energy(ch);
  return e;
}

}  // namespace

TEST_CASE("real SH order 1 is the SN3D first-order pattern") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> az(-180.0, 180.0), el(-90.0, 90.0);
  for (int i = 0; i < 200; ++i) {
    const Doa d{az(rng), el(rng)};
    const auto y = real_sh(d, 1);
    REQUIRE(y.size() == 4);
    CHECK(y[0] == doctest::Approx(1.0));
    CHECK(y[1] == doctest::Approx(std::sin(d.azimuth * kRad) * std::cos(d.elevation * kRad)));
    CHECK(y[2] == doctest::Approx(std::sin(d.elevation * kRad)));
    CHECK(y[3] == doctest::Approx(std::cos(d.azimuth * kRad) * std::cos(d.elevation * kRad)));
  }
}

TEST_CASE("real SH order 2 matches closed forms") {
  // SN3D order 2 (ACN 4..8), written from the textbook Cartesian forms.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> az(-180.0, 180.0), el(-90.0, 90.0);
  const double r3 = std::sqrt(3.0);
  for (int i = 0; i < 200; ++i) {
    const Doa d{az(rng), el(rng)};
    const Vec3 u = doa_to_unit_vector(d);
    const double x = u[0], yv = u[1], z = u[2];
    const auto y = real_sh(d, 2);
    CHECK(y[4] == doctest::Approx(r3 * x * yv));
    CHECK(y[5] == doctest::Approx(r3 * yv * z));
    CHECK(y[6] == doctest::Approx(0.5 * (3.0 * z * z - 1.0)));
    CHECK(y[7] == doctest::Approx(r3 * x * z));
    CHECK(y[8] == doctest::Approx(0.5 * r3 * (x * x - yv * yv)));
  }
}

TEST_CASE("SN3D energy identity: sum over degree of Y^2 equals 1 per order") {
  // Addition theorem: for SN3D, sum_m Y_nm(d)^2 = 1 for every order n.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> az(-180.0, 180.0), el(-90.0, 90.0);
  for (int i = 0; i < 50; ++i) {
    const auto y = real_sh({az(rng), el(rng)}, 30);
    for (int n = 0; n <= 30; ++n) {
      double s = 0.0;
      for (int m = -n; m <= n; ++m) s += y[static_cast<std::size_t>(n * n + n + m)] * y[static_cast<std::size_t>(n * n + n + m)];
      CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("FOA steering examples") {
  const auto a = steering_response({90.0, 0.0}, ArrayModel::foa_ideal());
  REQUIRE(a.taps.size() == 4);
  CHECK(a.taps[0][0] == doctest::Approx(1.0));
  CHECK(a.taps[1][0] == doctest::Approx(1.0));
  CHECK(std::abs(a.taps[2][0]) < 1e-15);
  CHECK(std::abs(a.taps[3][0]) < 1e-15);
}

TEST_CASE("anechoic IR at 1 m: FOA pattern, 70-sample delay, unit gain") {
  const MultiSignal ir = anechoic_ir({0.0, 0.0}, 1.0, ArrayModel::foa_ideal());
  CHECK(distance_delay_samples(1.0) == doctest::Approx(69.97084548104956));
  std::size_t peak = 0;
  for (std::size_t i = 0; i < ir[0].size(); ++i) {
    if (std::abs(ir[0][i]) > std::abs(ir[0][peak])) peak = i;
  }
  CHECK(peak == 70);
  double sum_w = 0.0, sum_x = 0.0;
  for (std::size_t i = 0; i < ir[0].size(); ++i) {
    sum_w += ir[0][i];
    sum_x += ir[3][i];
    CHECK(std::abs(ir[1][i]) < 1e-15);
    CHECK(std::abs(ir[2][i]) < 1e-15);
  }
  // DC gain of the windowed sinc is ~1.
  CHECK(sum_w == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(sum_x == doctest::Approx(sum_w));
}

TEST_CASE("inverse distance law on a low-pass signal") {
  Signal x(6000);
  const double w = 2.0 * std::numbers::pi * 300.0 / 24000.0;
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = std::sin(w * n) * std::sin(std::numbers::pi * n / x.size());
  for (const auto& arr : {ArrayModel::foa_ideal(), ArrayModel::tetrahedral()}) {
    const auto r1 = anechoic_ir({30.0, 10.0}, 1.0, arr);
    const auto r2 = anechoic_ir({30.0, 10.0}, 2.0, arr);
    const double ratio = rms(convolve(x, r2[0])) / rms(convolve(x, r1[0]));
    CHECK(ratio == doctest::Approx(0.5).epsilon(1e-4));
  }
}

TEST_CASE("tetrahedral sensor delays follow the plane-wave projection") {
  const ArrayModel arr = ArrayModel::tetrahedral();
  // Facing capsule 0 head-on: delay -r/c*fs.
  CHECK(arr.sensor_delay_samples(0, {45.0, 35.0}) == doctest::Approx(-0.042 / 343.0 * 24000.0));
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) sum += arr.sensor_delay_samples(i, {12.0, -40.0});
  // Tetrahedron capsule directions sum to (almost) zero.
  CHECK(std::abs(sum) < 0.02);
  CHECK_THROWS_AS(ArrayModel::tetrahedral(std::vector<Sensor>(3)), Error);
  CHECK_THROWS_AS(ArrayModel::tetrahedral(-1.0), Error);
}

TEST_CASE("equirectangular grid layout") {
  const auto nodes = equirectangular_nodes(5.0, 5.0);
  CHECK(nodes.size() == 72u * 37u);
  CHECK(nodes.front().azimuth == -180.0);
  CHECK(nodes.front().elevation == -90.0);
  CHECK(nodes.back().azimuth == 175.0);
  CHECK(nodes.back().elevation == 90.0);
  CHECK_THROWS_AS(equirectangular_nodes(7.0, 5.0), Error);
  CHECK_THROWS_AS(equirectangular_nodes(5.0, 7.0), Error);
}

TEST_CASE("planted order-1 field is recovered off-grid") {
  // Responses generated from known coefficients of an order-1 field.
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  const int taps = 6;
  std::vector<std::vector<double>> planted(4, std::vector<double>(4 * taps));
  for (auto& row : planted) {
    for (double& v : row) v = g(rng);
  }
  MeasuredGrid grid;
  grid.nodes = equirectangular_nodes(10.0, 10.0);
  for (const auto& d : grid.nodes) {
    const auto y = real_sh(d, 1);
    MultiSignal r(4, Signal(taps, 0.0));
    for (int c = 0; c < 4; ++c) {
      for (int ch = 0; ch < 4; ++ch) {
        for (int n = 0; n < taps; ++n) r[ch][n] += y[c] * planted[c][ch * taps + n];
      }
    }
    grid.responses.push_back(r);
  }
  const ArrayModel arr = ArrayModel::from_grid(ArrayKind::Tetrahedral, ArrayModel::tetrahedral().sensors(), grid, 1);
  std::uniform_real_distribution<double> az(-180.0, 180.0), el(-90.0, 90.0);
  for (int i = 0; i < 100; ++i) {
    const Doa d{az(rng), el(rng)};
    const auto y = real_sh(d, 1);
    const auto s = steering_response(d, arr);
    double num = 0.0, den = 0.0;
    for (int ch = 0; ch < 4; ++ch) {
      for (int n = 0; n < taps; ++n) {
        double expect = 0.0;
        for (int c = 0; c < 4; ++c) expect += y[c] * planted[c][ch * taps + n];
        num += (s.taps[ch][n] - expect) * (s.taps[ch][n] - expect);
        den += expect * expect;
      }
    }
    CHECK(std::sqrt(num / den) < 1e-9);
  }
}

TEST_CASE("fit rejects sparse grids") {
  MeasuredGrid grid = sample_grid(ArrayModel::foa_ideal(), 90.0, 90.0);
  // 4 azimuths x 3 elevations, but the poles collapse: 6 distinct directions.
  CHECK_THROWS_AS(fit_sh(grid, 2), Error);
  try {
    fit_sh(grid, 2);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IllConditioned);
  }
  CHECK_NOTHROW(fit_sh(grid, 1));
}

TEST_CASE("synth reverb: infinite DRR equals anechoic") {
  const ArrayModel arr = ArrayModel::tetrahedral();
  const auto a = anechoic_ir({20.0, 5.0}, 1.3, arr);
  const auto b = synth_reverb_ir(0.4, std::numeric_limits<double>::infinity(), {20.0, 5.0}, 1.3, arr, 9);
  CHECK(a == b);
}

TEST_CASE("synth reverb: DRR and decay") {
  CHECK(20.0 * std::log10(tail_envelope(0.5, 0.5)) == doctest::Approx(-60.0));
  CHECK(20.0 * std::log10(tail_envelope(0.0, 0.5)) == doctest::Approx(0.0));
  for (const auto& arr : {ArrayModel::foa_ideal(), ArrayModel::tetrahedral()}) {
    for (double drr : {0.0, 6.0, -3.0}) {
      const auto direct = anechoic_ir({-60.0, 12.0}, 1.7, arr);
      const auto ir = synth_reverb_ir(0.5, drr, {-60.0, 12.0}, 1.7, arr, 42);
      double e_dir = total_energy(direct);
      double e_tail = 0.0;
      for (std::size_t ch = 0; ch < ir.size(); ++ch) {
        for (std::size_t i = 0; i < ir[ch].size(); ++i) {
          const double d = i < direct[ch].size() ? direct[ch][i] : 0.0;
          e_tail += (ir[ch][i] - d) * (ir[ch][i] - d);
        }
      }
      CHECK(std::abs(10.0 * std::log10(e_dir / e_tail) - drr) < 0.2);
    }
  }
}

TEST_CASE("synth reverb tail decays 60 dB over rt60") {
  const ArrayModel arr = ArrayModel::foa_ideal();
  const double rt60 = 0.5;
  const auto ir = synth_reverb_ir(rt60, 0.0, {0.0, 0.0}, 1.0, arr, 7);
  const auto start = static_cast<std::size_t>(std::floor(distance_delay_samples(1.0))) + kTailOnsetSamples;
  // Energy in 20 ms windows near the start vs one rt60 later.
  auto win = [&](std::size_t a) {
    double e = 0.0;
    for (std::size_t i = a; i < a + 480; ++i) e += ir[0][i] * ir[0][i];
    return e;
  };
  const double early = win(start);
  const double late = win(start + static_cast<std::size_t>(rt60 * 24000) - 480);
  const double expected = 20.0 * std::log10(tail_envelope(rt60 - 480.0 / 24000.0, rt60));
  CHECK(std::abs(10.0 * std::log10(late / early) - expected) < 3.0);
}

TEST_CASE("diffuse channel energies") {
  CHECK(diffuse_channel_energy(ArrayModel::foa_ideal()) == std::vector<double>{1.0, 1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(diffuse_channel_energy(ArrayModel::tetrahedral()) == std::vector<double>{1, 1, 1, 1});
}

TEST_CASE("measured grid responses are reproduced at the nodes") {
  const ArrayModel tetra = ArrayModel::tetrahedral();
  const MeasuredGrid grid = sample_grid(tetra, 5.0, 5.0);
  const ArrayModel arr = ArrayModel::from_grid(ArrayKind::Tetrahedral, tetra.sensors(), grid, 25);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.nodes.size(); i += 7) {
    const auto s = steering_response(grid.nodes[i], arr);
    double num = 0.0, den = 0.0;
    for (int ch = 0; ch < 4; ++ch) {
      for (std::size_t n = 0; n < s.taps[ch].size(); ++n) {
        const double d = s.taps[ch][n] - grid.responses[i][ch][n];
        num += d * d;
        den += grid.responses[i][ch][n] * grid.responses[i][ch][n];
      }
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  MESSAGE("worst relative error at nodes: " << worst);
  CHECK(worst < 1e-6);
}
