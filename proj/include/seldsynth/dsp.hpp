#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace seld {

using Signal = std::vector<double>;
using Complex = std::complex<double>;

/// Real-to-complex FFT of a fixed power-of-two or arbitrary size, backed by FFTW.
/// Plans are created with FFTW_ESTIMATE so results are bit-identical across runs.
/// Instances are cheap to copy; plans are cached per size and shared across threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n);

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// `in` is zero-padded (or must not exceed) size(); `out` receives bins() values.
  void forward(std::span<const double> in, std::span<Complex> out) const;
  /// Unnormalized inverse: forward then inverse scales by size().
  void inverse(std::span<const Complex> in, std::span<double> out) const;

 private:
  std::size_t n_;
  const void* plans_;
};

std::size_t next_pow2(std::size_t n);

/// Full linear convolution, length x.size() + h.size() - 1 (empty if either is empty).
Signal convolve(std::span<const double> x, std::span<const double> h);

/// Convolves one input with several kernels, sharing the input transforms.
std::vector<Signal> convolve_many(std::span<const double> x, std::span<const Signal> kernels);

/// Kaiser window evaluated at t in [-1, 1]; zero outside.
double kaiser(double t, double beta);

inline constexpr int kFracDelayTaps = 64;
inline constexpr double kFracDelayBeta = 8.0;

/// 64-tap Kaiser-windowed sinc centred at `delay` samples. The first tap sits at
/// `first_index` (may be negative; callers clip).
struct FractionalDelay {
  long first_index = 0;
  Signal taps;
};
FractionalDelay fractional_delay(double delay);

/// Adds `src` scaled by `gain` into `dst` starting at `offset`; samples outside `dst` are dropped.
void accumulate_into(Signal& dst, std::span<const double> src, long offset, double gain = 1.0);

double energy(std::span<const double> x);

}  // namespace seld
