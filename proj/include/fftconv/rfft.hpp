// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fftconv/fft1d.hpp"
#include "fftconv/tensor.hpp"

namespace fftconv {

/// How the 2-D transforms are executed.
///
/// Radix2Elided: power-of-two sizes; the column (height) pass is a DIF
/// transform whose bit-reversed output is left in place, and the inverse
/// column pass is the matching DIT that consumes it. Spectra carry
/// FreqOrder::BitReversedDIF.
///
/// SmoothNatural: 7-smooth sizes, natural bin order on both axes.
enum class FftPath : std::uint8_t { Radix2Elided, SmoothNatural };

enum class FreqOutputLayout : std::uint8_t {
  RowMajorFreq,    // n_h x (n_w/2+1)
  TransposedFreq,  // (n_w/2+1) x n_h
};

class RfftPlan {
 public:
  /// Throws UnsupportedSizeError when a size is not admissible for path.
  RfftPlan(std::size_t n_h, std::size_t n_w,
           FftPath path = FftPath::SmoothNatural,
           FreqOutputLayout layout = FreqOutputLayout::RowMajorFreq);

  std::size_t n_h() const noexcept { return n_h_; }
  std::size_t n_w() const noexcept { return n_w_; }
  /// Stored complex width floor(n_w/2)+1.
  std::size_t freq_width() const noexcept { return n_w_ / 2 + 1; }
  FftPath path() const noexcept { return path_; }
  FreqOutputLayout layout() const noexcept { return layout_; }
  FreqOrder order() const noexcept {
    return path_ == FftPath::Radix2Elided ? FreqOrder::BitReversedDIF
                                          : FreqOrder::Natural;
  }

  const FftPlan& rows() const noexcept { return rows_; }
  const FftPlan& cols() const noexcept { return cols_; }

 private:
  std::size_t n_h_;
  std::size_t n_w_;
  FftPath path_;
  FreqOutputLayout layout_;
  FftPlan rows_;
  FftPlan cols_;
};

/// First floor(n/2)+1 bins of the DFT of x zero-extended to n. Reads past
/// the end of x are treated as zeros. Throws DimensionError if x.size() > n.
std::vector<Complex> rfft1d(std::span<const float> x, std::size_t n);

/// Both half spectra from a single complex transform of a + i*b.
std::pair<std::vector<Complex>, std::vector<Complex>> rfft1d_pair(
    std::span<const float> a, std::span<const float> b, std::size_t n);

/// Real length-n signal from its floor(n/2)+1 stored bins (normalized).
std::vector<float> irfft1d(std::span<const Complex> half, std::size_t n);

/// Output window of an inverse transform, in padded-plane coordinates.
struct ClipWindow {
  std::size_t row0 = 0;
  std::size_t col0 = 0;
  std::size_t height = 0;
  std::size_t width = 0;
};

/// 2-D DFT of an h x w plane zero-extended to the plan size. Result extents
/// are (1, 1, n_h, n_w/2+1), or (1, 1, n_w/2+1, n_h) for TransposedFreq.
FreqTensor rfft2d(std::span<const float> plane, std::size_t h, std::size_t w,
                  const RfftPlan& plan);

/// Inverse of rfft2d, normalized by n_h*n_w and clipped to the top-left
/// out_h x out_w window.
std::vector<float> irfft2d(const FreqTensor& freq, const RfftPlan& plan,
                           std::size_t out_h, std::size_t out_w);
std::vector<float> irfft2d(const FreqTensor& freq, const RfftPlan& plan,
                           const ClipWindow& window);

/// rfft2d over every plane of t; out gets extents (S, P, n_h, n_w/2+1) in
/// BDHW with the plan's bin order (or (S, P, n_w/2+1, n_h) transposed).
/// Consecutive planes are transformed in pairs through one complex pass.
void rfft2d_batched(const RealTensor4& t, const RfftPlan& plan, FreqTensor& out);
FreqTensor rfft2d_batched(const RealTensor4& t, const RfftPlan& plan);

/// Inverse over every plane of freq, writing the window into out, which is
/// reshaped to (A, B, window.height, window.width).
void irfft2d_batched(const FreqTensor& freq, const RfftPlan& plan,
                     const ClipWindow& window, RealTensor4& out);

}  // namespace fftconv
