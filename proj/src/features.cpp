#include "seldsynth/features.hpp"

#include <cmath>
#include <numbers>

namespace seld {

Tensor::Tensor(std::vector<std::size_t> d, std::vector<std::string> a) : dims(std::move(d)), axes(std::move(a)) {
  std::size_t n = 1;
  for (auto v : dims) n *= v;
  data.assign(n, 0.0f);
  if (axes.size() != dims.size()) axes.resize(dims.size());
}

const std::vector<double>& analysis_window() {
  static const std::vector<double> w = [] {
    std::vector<double> v(kWindowSamples);
    for (int i = 0; i < kWindowSamples; ++i) {
      v[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / kWindowSamples);
    }
    return v;
  }();
  return w;
}

std::size_t stft_frame_count(std::size_t n_samples) {
  if (n_samples < static_cast<std::size_t>(kWindowSamples)) return 0;
  return (n_samples - kWindowSamples) / kHopSamples + 1;
}

StftTensor stft(const MultiSignal& audio) {
  if (audio.empty()) throw Error(ErrorKind::InvalidArgument, "no channels");
  const std::size_t n = audio[0].size();
  for (const auto& ch : audio) {
    if (ch.size() != n) throw Error(ErrorKind::Mismatch, "channels differ in length");
  }
  if (n < static_cast<std::size_t>(kWindowSamples)) {
    throw Error(ErrorKind::InvalidArgument, "audio shorter than one 960-sample window");
  }
  StftTensor s;
  s.frames = stft_frame_count(n);
  s.channels = audio.size();
  s.data.resize(s.frames * kBins * s.channels);
  const RealFft fft(kFftSize);
  const auto& win = analysis_window();
  std::vector<double> frame(kWindowSamples);
  std::vector<Complex> spec(kBins);
  for (std::size_t t = 0; t < s.frames; ++t) {
    for (std::size_t ch = 0; ch < s.channels; ++ch) {
      const double* x = audio[ch].data() + t * kHopSamples;
      for (int i = 0; i < kWindowSamples; ++i) frame[i] = x[i] * win[i];
      fft.forward(frame, spec);
      for (int k = 0; k < kBins; ++k) s.at(t, k, ch) = spec[k];
    }
  }
  return s;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

const std::vector<std::array<double, kBins>>& mel_filterbank() {
  static const std::vector<std::array<double, kBins>> fb = [] {
    std::vector<std::array<double, kBins>> out(kMelBands);
    const double top = hz_to_mel(kSampleRate / 2.0);
    std::array<double, kMelBands + 2> edges{};
    for (int i = 0; i < kMelBands + 2; ++i) edges[i] = mel_to_hz(top * i / (kMelBands + 1));
    for (int m = 0; m < kMelBands; ++m) {
      const double lo = edges[m];
      const double mid = edges[m + 1];
      const double hi = edges[m + 2];
      for (int k = 0; k < kBins; ++k) {
        const double f = static_cast<double>(k) * kSampleRate / kFftSize;
        double w = 0.0;
        if (f > lo && f <= mid) {
          w = (f - lo) / (mid - lo);
        } else if (f > mid && f < hi) {
          w = (hi - f) / (hi - mid);
        }
        out[m][k] = w;
      }
    }
    return out;
  }();
  return fb;
}

Tensor log_mel(const StftTensor& s) {
  Tensor out({s.frames, kMelBands, s.channels}, {"frame", "band", "channel"});
  const auto& fb = mel_filterbank();
  std::vector<double> power(kBins);
  for (std::size_t t = 0; t < s.frames; ++t) {
    for (std::size_t ch = 0; ch < s.channels; ++ch) {
      for (int k = 0; k < kBins; ++k) power[k] = std::norm(s.at(t, k, ch));
      for (int m = 0; m < kMelBands; ++m) {
        double acc = 0.0;
        for (int k = 0; k < kBins; ++k) acc += fb[m][k] * power[k];
        out.at3(t, m, ch) = static_cast<float>(10.0 * std::log10(acc + kPowerFloor));
      }
    }
  }
  return out;
}

Tensor intensity_vectors(const StftTensor& s) {
  if (s.channels != 4) throw Error(ErrorKind::InvalidArgument, "intensity vectors need 4-channel FOA input");
  Tensor out({s.frames, kMelBands, 3}, {"frame", "band", "component"});
  const auto& fb = mel_filterbank();
  std::vector<std::array<double, 4>> bin(kBins);
  for (std::size_t t = 0; t < s.frames; ++t) {
    for (int k = 0; k < kBins; ++k) {
      const Complex w = s.at(t, k, 0);
      const Complex y = s.at(t, k, 1);
      const Complex z = s.at(t, k, 2);
      const Complex x = s.at(t, k, 3);
      const Complex cw = std::conj(w);
      bin[k] = {(cw * x).real(), (cw * y).real(), (cw * z).real(),
                std::norm(w) + (std::norm(x) + std::norm(y) + std::norm(z)) / 3.0};
    }
    for (int m = 0; m < kMelBands; ++m) {
      std::array<double, 4> acc{};
      for (int k = 0; k < kBins; ++k) {
        const double g = fb[m][k];
        if (g == 0.0) continue;
        for (int c = 0; c < 4; ++c) acc[c] += g * bin[k][c];
      }
      for (int c = 0; c < 3; ++c) out.at3(t, m, c) = static_cast<float>(acc[c] / (acc[3] + kPowerFloor));
    }
  }
  return out;
}

const std::array<std::pair<int, int>, 6>& gcc_pairs() {
  static const std::array<std::pair<int, int>, 6> p{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  return p;
}

Tensor gcc_phat(const StftTensor& s) {
  if (s.channels != 4) throw Error(ErrorKind::InvalidArgument, "GCC-PHAT needs 4-channel MIC input");
  Tensor out({s.frames, kGccLags, 6}, {"frame", "lag", "pair"});
  const RealFft fft(kFftSize);
  std::vector<Complex> r(kBins);
  std::vector<double> cc(kFftSize);
  constexpr int half = kGccLags / 2;
  for (std::size_t t = 0; t < s.frames; ++t) {
    for (std::size_t p = 0; p < 6; ++p) {
      const auto [i, j] = gcc_pairs()[p];
      for (int k = 0; k < kBins; ++k) {
        const Complex c = std::conj(s.at(t, k, i)) * s.at(t, k, j);
        r[k] = c / (std::abs(c) + kPhatFloor);
      }
      fft.inverse(r, cc);
      for (int l = -half; l < half; ++l) {
        const int idx = l < 0 ? kFftSize + l : l;
        out.at3(t, l + half, p) = static_cast<float>(cc[idx] / kFftSize);
      }
    }
  }
  return out;
}

namespace {

void stack_into(Tensor& dst, const Tensor& src, std::size_t offset) {
  for (std::size_t t = 0; t < src.dims[0]; ++t) {
    for (std::size_t m = 0; m < src.dims[1]; ++m) {
      for (std::size_t c = 0; c < src.dims[2]; ++c) dst.at3(t, m, offset + c) = src.at3(t, m, c);
    }
  }
}

}  // namespace

Tensor extract(const MultiSignal& audio, Format format) {
  if (audio.size() != 4) throw Error(ErrorKind::InvalidArgument, "feature extraction needs 4-channel audio");
  const StftTensor s = stft(audio);
  const Tensor mel = log_mel(s);
  const Tensor spatial = format == Format::Foa ? intensity_vectors(s) : gcc_phat(s);
  Tensor out({s.frames, kMelBands, 4 + spatial.dims[2]}, {"frame", "band", "channel"});
  stack_into(out, mel, 0);
  stack_into(out, spatial, 4);
  return out;
}

}  // namespace seld
