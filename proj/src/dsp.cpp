#include "seldsynth/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "seldsynth/core.hpp"

namespace seld {

namespace {

struct PlanPair {
  std::size_t n = 0;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

// FFTW's planner is not thread-safe; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

const PlanPair* plans_for(std::size_t n) {
  static std::map<std::size_t, std::unique_ptr<PlanPair>> cache;
  std::lock_guard lock(planner_mutex());
  auto& slot = cache[n];
  if (!slot) {
    auto p = std::make_unique<PlanPair>();
    p->n = n;
    double* r = fftw_alloc_real(n);
    fftw_complex* c = fftw_alloc_complex(n / 2 + 1);
    p->fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), r, c, FFTW_ESTIMATE);
    p->inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), c, r, FFTW_ESTIMATE);
    fftw_free(r);
    fftw_free(c);
    slot = std::move(p);
  }
  return slot.get();
}

struct FftwBuffers {
  double* real;
  fftw_complex* cplx;
  explicit FftwBuffers(std::size_t n) : real(fftw_alloc_real(n)), cplx(fftw_alloc_complex(n / 2 + 1)) {}
  ~FftwBuffers() {
    fftw_free(real);
    fftw_free(cplx);
  }
  FftwBuffers(const FftwBuffers&) = delete;
  FftwBuffers& operator=(const FftwBuffers&) = delete;
};

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n), plans_(nullptr) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "FFT size must be >= 2");
  plans_ = plans_for(n);
}

void RealFft::forward(std::span<const double> in, std::span<Complex> out) const {
  if (in.size() > n_ || out.size() < bins()) throw Error(ErrorKind::InvalidArgument, "FFT buffer size");
  const auto* p = static_cast<const PlanPair*>(plans_);
  FftwBuffers buf(n_);
  std::copy(in.begin(), in.end(), buf.real);
  std::fill(buf.real + in.size(), buf.real + n_, 0.0);
  fftw_execute_dft_r2c(p->fwd, buf.real, buf.cplx);
  for (std::size_t k = 0; k < bins(); ++k) out[k] = {buf.cplx[k][0], buf.cplx[k][1]};
}

void RealFft::inverse(std::span<const Complex> in, std::span<double> out) const {
  if (in.size() < bins() || out.size() < n_) throw Error(ErrorKind::InvalidArgument, "IFFT buffer size");
  const auto* p = static_cast<const PlanPair*>(plans_);
  FftwBuffers buf(n_);
  for (std::size_t k = 0; k < bins(); ++k) {
    buf.cplx[k][0] = in[k].real();
    buf.cplx[k][1] = in[k].imag();
  }
  fftw_execute_dft_c2r(p->inv, buf.cplx, buf.real);
  std::copy(buf.real, buf.real + n_, out.begin());
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace {

constexpr std::size_t kDirectLimit = 32;

Signal direct_convolve(std::span<const double> x, std::span<const double> h) {
  Signal y(x.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    for (std::size_t j = 0; j < h.size(); ++j) y[i + j] += x[i] * h[j];
  }
  return y;
}

}  // namespace

std::vector<Signal> convolve_many(std::span<const double> x, std::span<const Signal> kernels) {
  std::vector<Signal> out(kernels.size());
  if (x.empty()) return out;
  std::size_t max_h = 0;
  for (const auto& h : kernels) max_h = std::max(max_h, h.size());
  if (max_h == 0) return out;

  if (std::min(x.size(), max_h) <= kDirectLimit) {
    for (std::size_t c = 0; c < kernels.size(); ++c) {
      if (!kernels[c].empty()) out[c] = direct_convolve(x, kernels[c]);
    }
    return out;
  }

  // Overlap-add with the block length matched to the longest kernel.
  const std::size_t nfft = std::max<std::size_t>(1024, next_pow2(2 * max_h));
  const std::size_t block = nfft - max_h + 1;
  const RealFft fft(nfft);
  const std::size_t nb = fft.bins();

  std::vector<std::vector<Complex>> spectra(kernels.size(), std::vector<Complex>(nb));
  for (std::size_t c = 0; c < kernels.size(); ++c) {
    if (!kernels[c].empty()) {
      fft.forward(kernels[c], spectra[c]);
      out[c].assign(x.size() + kernels[c].size() - 1, 0.0);
    }
  }
  std::vector<Complex> xs(nb);
  std::vector<Complex> ys(nb);
  Signal yb(nfft);
  const double scale = 1.0 / static_cast<double>(nfft);
  for (std::size_t start = 0; start < x.size(); start += block) {
    const std::size_t len = std::min(block, x.size() - start);
    fft.forward(x.subspan(start, len), xs);
    for (std::size_t c = 0; c < kernels.size(); ++c) {
      if (kernels[c].empty()) continue;
      for (std::size_t k = 0; k < nb; ++k) ys[k] = xs[k] * spectra[c][k];
      fft.inverse(ys, yb);
      auto& y = out[c];
      const std::size_t n = std::min(nfft, y.size() - start);
      for (std::size_t i = 0; i < n; ++i) y[start + i] += yb[i] * scale;
    }
  }
  return out;
}

Signal convolve(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  const Signal k(h.begin(), h.end());
  return std::move(convolve_many(x, std::span<const Signal>(&k, 1))[0]);
}

double kaiser(double t, double beta) {
  if (t < -1.0 || t > 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - t * t)) / std::cyl_bessel_i(0.0, beta);
}

FractionalDelay fractional_delay(double delay) {
  constexpr int half = kFracDelayTaps / 2;
  const long base = static_cast<long>(std::floor(delay));
  FractionalDelay fd;
  fd.first_index = base - (half - 1);
  fd.taps.resize(kFracDelayTaps);
  for (int i = 0; i < kFracDelayTaps; ++i) {
    const double t = static_cast<double>(fd.first_index + i) - delay;
    const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
    fd.taps[i] = sinc * kaiser(t / half, kFracDelayBeta);
  }
  return fd;
}

void accumulate_into(Signal& dst, std::span<const double> src, long offset, double gain) {
  for (std::size_t i = 0; i < src.size(); ++i) {
    const long j = offset + static_cast<long>(i);
    if (j < 0) continue;
    if (j >= static_cast<long>(dst.size())) break;
    dst[static_cast<std::size_t>(j)] += gain * src[i];
  }
}

double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

}  // namespace seld
