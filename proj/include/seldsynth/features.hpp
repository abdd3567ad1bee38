#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "seldsynth/array.hpp"
#include "seldsynth/core.hpp"
#include "seldsynth/dsp.hpp"

namespace seld {

inline constexpr int kWindowSamples = 960;
inline constexpr int kHopSamples = 480;
inline constexpr int kFftSize = 1024;
inline constexpr int kBins = kFftSize / 2 + 1;
inline constexpr int kMelBands = 64;
inline constexpr int kGccLags = 64;
inline constexpr double kPowerFloor = 1e-10;
inline constexpr double kPhatFloor = 1e-12;

/// Dense row-major float tensor with named axes.
struct Tensor {
  std::vector<std::size_t> dims;
  std::vector<std::string> axes;
  std::vector<float> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> d, std::vector<std::string> a);

  std::size_t size() const { return data.size(); }
  float& at3(std::size_t i, std::size_t j, std::size_t k) { return data[(i * dims[1] + j) * dims[2] + k]; }
  float at3(std::size_t i, std::size_t j, std::size_t k) const { return data[(i * dims[1] + j) * dims[2] + k]; }

  bool operator==(const Tensor&) const = default;
};

/// STFT of 4-channel audio: frames x 513 bins x channels.
struct StftTensor {
  std::size_t frames = 0;
  std::size_t channels = 0;
  std::vector<Complex> data;

  Complex& at(std::size_t t, std::size_t bin, std::size_t ch) { return data[(t * kBins + bin) * channels + ch]; }
  const Complex& at(std::size_t t, std::size_t bin, std::size_t ch) const {
    return data[(t * kBins + bin) * channels + ch];
  }
};

/// Periodic Hann window of 960 samples.
const std::vector<double>& analysis_window();

std::size_t stft_frame_count(std::size_t n_samples);

/// Hann-windowed 960-sample frames at a 480-sample hop, zero-padded to 1024; first frame starts at 0.
StftTensor stft(const MultiSignal& audio);

/// 64 x 513 triangular HTK-mel filterbank over 0..12 kHz (peak-normalized triangles).
const std::vector<std::array<double, kBins>>& mel_filterbank();

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// T x 64 x channels, 10 log10(mel power + 1e-10).
Tensor log_mel(const StftTensor& s);

/// T x 64 x 3 normalized active intensity (x, y, z) from ACN/SN3D FOA.
Tensor intensity_vectors(const StftTensor& s);

/// Channel pairs used by gcc_phat, in output order.
const std::array<std::pair<int, int>, 6>& gcc_pairs();

/// T x 64 x 6 GCC-PHAT over lags -32..+31; a positive lag means channel j lags channel i.
Tensor gcc_phat(const StftTensor& s);

/// Log-mel stacked with intensity (FOA, K = 7) or GCC-PHAT (MIC, K = 10).
Tensor extract(const MultiSignal& audio, Format format);

}  // namespace seld
