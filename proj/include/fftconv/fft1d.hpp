// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fftconv/tensor.hpp"

namespace fftconv {

// Conventions: the forward transform computes X_k = sum_j x_j w_n^{kj} with
// w_n = exp(-2 pi i / n) and is unnormalized; every inverse divides by n.

bool is_power_of_two(std::size_t n) noexcept;
/// True when every prime factor of n lies in {2,3,5,7}. is_smooth(1) holds.
bool is_smooth(std::size_t n) noexcept;
/// Smallest power of two >= n (next_pow2(0) == 1).
std::size_t next_pow2(std::size_t n) noexcept;
unsigned log2_exact(std::size_t n) noexcept;

/// O(n^2) evaluation of the defining sum in double precision. Oracle for
/// every fast path.
std::vector<std::complex<double>> dft_naive(
    std::span<const std::complex<double>> x);
std::vector<std::complex<double>> dft_naive(std::span<const Complex> x);

enum class Direction : std::uint8_t { Forward, Inverse };

/// Power-of-two plan: twiddles w_n^j for j < n/2 and the bit-reversal table.
class Radix2Plan {
 public:
  /// Throws UnsupportedSizeError unless n is a power of two.
  explicit Radix2Plan(std::size_t n);

  std::size_t n() const noexcept { return n_; }
  unsigned log2n() const noexcept { return log2n_; }
  std::span<const Complex> twiddles() const noexcept { return twiddles_; }
  std::span<const std::uint32_t> bit_reversal() const noexcept {
    return bitrev_;
  }

 private:
  std::size_t n_;
  unsigned log2n_;
  std::vector<Complex> twiddles_;
  std::vector<std::uint32_t> bitrev_;
};

/// Spectrum tagged with its bin order.
struct Spectrum {
  std::vector<Complex> bins;
  FreqOrder order = FreqOrder::Natural;
};

/// Decimation in time. Natural order in and out (the input permutation is
/// part of this call).
std::vector<Complex> fft_dit(std::span<const Complex> x, const Radix2Plan& plan);

/// Natural-order inverse (normalized), decimation in time.
std::vector<Complex> ifft_dit(std::span<const Complex> X, const Radix2Plan& plan);

/// Decimation in frequency without the output permutation: bin k lands at
/// index bitrev(k).
Spectrum fft_dif_noreorder(std::span<const Complex> x, const Radix2Plan& plan);

/// Normalized DIT inverse that consumes bit-reversed bins directly, so the
/// DIF/DIT pair never materializes a permutation. Throws LayoutError unless
/// X.order == BitReversedDIF.
std::vector<Complex> ifft_dit_from_bitreversed(const Spectrum& X,
                                               const Radix2Plan& plan);

/// Explicit bit-reversal permutation (an involution). Length must be a
/// power of two.
std::vector<Complex> bit_reverse_permute(std::span<const Complex> x);

// In-place butterfly passes used by the batched and 2-D paths. Neither
// applies a permutation nor normalization.

/// Bit-reversed input -> natural-order output.
void dit_butterflies(std::span<Complex> data, const Radix2Plan& plan,
                     Direction dir);
/// Natural-order input -> bit-reversed output.
void dif_butterflies(std::span<Complex> data, const Radix2Plan& plan,
                     Direction dir);
void bit_reverse_inplace(std::span<Complex> data, const Radix2Plan& plan);

/// Mixed-radix Cooley-Tukey plan for 7-smooth n.
class SmoothPlan {
 public:
  /// Throws UnsupportedSizeError if n has a prime factor > 7 or n == 0.
  explicit SmoothPlan(std::size_t n);

  std::size_t n() const noexcept { return n_; }
  std::span<const unsigned> factors() const noexcept { return factors_; }

  /// Forward, natural order, out of place (in and out must not alias).
  void execute(std::span<const Complex> in, std::span<Complex> out) const;

 private:
  struct Stage {
    unsigned radix;
    std::size_t m;  // length of each sub-transform
    // w_{radix*m}^{r k} for r in [1, radix), k in [0, m), r-major.
    std::vector<Complex> twiddles;
  };

  void recurse(const Complex* in, std::size_t stride, Complex* out,
               std::size_t level) const;

  std::size_t n_;
  std::vector<unsigned> factors_;
  std::vector<Stage> stages_;
  // w_p^j, j < p, for the odd radices.
  std::vector<Complex> roots3_, roots5_, roots7_;
};

std::vector<Complex> fft_smooth(std::span<const Complex> x,
                                const SmoothPlan& plan);
/// Normalized natural-order inverse.
std::vector<Complex> ifft_smooth(std::span<const Complex> X,
                                 const SmoothPlan& plan);

/// Row b of the result is the transform of row b of the batch-major input.
std::vector<Complex> fft_batched(std::span<const Complex> rows,
                                 std::size_t batch, const Radix2Plan& plan);
std::vector<Complex> fft_batched(std::span<const Complex> rows,
                                 std::size_t batch, const SmoothPlan& plan);

/// Natural-order in-place transform of any 7-smooth length, radix-2 for
/// powers of two and mixed radix otherwise.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t n() const noexcept { return n_; }
  bool is_radix2() const noexcept { return radix2_ != nullptr; }
  /// Only valid when is_radix2().
  const Radix2Plan& radix2() const noexcept { return *radix2_; }

  void forward(std::span<Complex> data) const;
  /// Normalized by 1/n.
  void inverse(std::span<Complex> data) const;

 private:
  std::size_t n_;
  std::shared_ptr<const Radix2Plan> radix2_;
  std::shared_ptr<const SmoothPlan> smooth_;
};

}  // namespace fftconv
