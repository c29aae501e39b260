// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace fftconv {

using Complex = std::complex<float>;

/// Extents of a rank-4 tensor, outermost first.
struct Shape4 {
  std::size_t d0 = 0;
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t d3 = 0;

  constexpr std::size_t volume() const noexcept { return d0 * d1 * d2 * d3; }
  friend constexpr bool operator==(const Shape4&, const Shape4&) = default;
};

/// Dense real tensor in BDHW order (batch, planes, height, width), width
/// innermost. Holds inputs, weights, outputs and all of their gradients.
class RealTensor4 {
 public:
  RealTensor4() = default;
  RealTensor4(std::size_t batch, std::size_t planes, std::size_t height,
              std::size_t width);
  explicit RealTensor4(Shape4 shape);
  /// Throws DimensionError if data.size() != shape.volume().
  RealTensor4(Shape4 shape, std::vector<float> data);

  const Shape4& shape() const noexcept { return shape_; }
  std::size_t batch() const noexcept { return shape_.d0; }
  std::size_t planes() const noexcept { return shape_.d1; }
  std::size_t height() const noexcept { return shape_.d2; }
  std::size_t width() const noexcept { return shape_.d3; }
  std::size_t size() const noexcept { return data_.size(); }

  float& operator()(std::size_t s, std::size_t p, std::size_t i,
                    std::size_t j) noexcept {
    return data_[offset(s, p, i, j)];
  }
  float operator()(std::size_t s, std::size_t p, std::size_t i,
                   std::size_t j) const noexcept {
    return data_[offset(s, p, i, j)];
  }

  std::span<float> plane(std::size_t s, std::size_t p) noexcept;
  std::span<const float> plane(std::size_t s, std::size_t p) const noexcept;

  std::span<float> values() noexcept { return data_; }
  std::span<const float> values() const noexcept { return data_; }

  /// Reshapes in place; storage is zero-filled and never shrinks.
  void reset(Shape4 shape);

  friend bool operator==(const RealTensor4&, const RealTensor4&) = default;

 private:
  std::size_t offset(std::size_t s, std::size_t p, std::size_t i,
                     std::size_t j) const noexcept {
    return ((s * shape_.d1 + p) * shape_.d2 + i) * shape_.d3 + j;
  }

  Shape4 shape_;
  std::vector<float> data_;
};

enum class FreqLayout : std::uint8_t { BDHW, HWBD };

/// Bin order along the height (column-transform) axis. BitReversedDIF
/// spectra come straight out of a decimation-in-frequency pass and are only
/// meaningful to pointwise stages and the matching DIT inverse.
enum class FreqOrder : std::uint8_t { Natural, BitReversedDIF };

/// Rank-4 complex tensor. Extents are given in storage order: (A, B, H', W')
/// for BDHW and (H', W', A, B) for HWBD.
class FreqTensor {
 public:
  FreqTensor() = default;
  FreqTensor(Shape4 extents, FreqLayout layout,
             FreqOrder order = FreqOrder::Natural);
  FreqTensor(Shape4 extents, FreqLayout layout, FreqOrder order,
             std::vector<Complex> data);

  const Shape4& extents() const noexcept { return extents_; }
  FreqLayout layout() const noexcept { return layout_; }
  FreqOrder order() const noexcept { return order_; }
  void set_order(FreqOrder order) noexcept { order_ = order; }
  std::size_t size() const noexcept { return extents_.volume(); }

  Complex& operator()(std::size_t i0, std::size_t i1, std::size_t i2,
                      std::size_t i3) noexcept {
    return data_[offset(i0, i1, i2, i3)];
  }
  const Complex& operator()(std::size_t i0, std::size_t i1, std::size_t i2,
                            std::size_t i3) const noexcept {
    return data_[offset(i0, i1, i2, i3)];
  }

  std::span<Complex> values() noexcept { return {data_.data(), size()}; }
  std::span<const Complex> values() const noexcept {
    return {data_.data(), size()};
  }

  /// Reuses the existing allocation when it is large enough; capacity only
  /// grows. Contents are unspecified afterwards.
  void reshape(Shape4 extents, FreqLayout layout, FreqOrder order);
  std::size_t capacity_bytes() const noexcept {
    return data_.capacity() * sizeof(Complex);
  }

  friend bool operator==(const FreqTensor& a, const FreqTensor& b);

 private:
  std::size_t offset(std::size_t i0, std::size_t i1, std::size_t i2,
                     std::size_t i3) const noexcept {
    return ((i0 * extents_.d1 + i1) * extents_.d2 + i2) * extents_.d3 + i3;
  }

  Shape4 extents_;
  FreqLayout layout_ = FreqLayout::BDHW;
  FreqOrder order_ = FreqOrder::Natural;
  std::vector<Complex> data_;
};

struct PadSpec {
  std::size_t p_h = 0;
  std::size_t p_w = 0;
  std::size_t target_h = 0;
  std::size_t target_w = 0;
};

/// Embeds every plane at offset (0,0) of a zero target_h x target_w plane.
RealTensor4 zero_pad(const RealTensor4& t, const PadSpec& spec);

/// Top-left out_h x out_w window of every plane.
RealTensor4 clip(const RealTensor4& t, std::size_t out_h, std::size_t out_w);

/// (a,b,i,j) in BDHW -> (i,j,a,b) in HWBD. Order tag is carried over.
FreqTensor transpose_bdhw_hwbd(const FreqTensor& t);
void transpose_bdhw_hwbd(const FreqTensor& in, FreqTensor& out);
/// Inverse of transpose_bdhw_hwbd.
FreqTensor transpose_hwbd_bdhw(const FreqTensor& t);
void transpose_hwbd_bdhw(const FreqTensor& in, FreqTensor& out);

// Golden tensor files: "FBT1", u32 rank (4), four u32 dims, u8 dtype
// (0 = real32, 1 = complex64 interleaved), little-endian row-major payload.

enum class TensorDtype : std::uint8_t { Real32 = 0, Complex64 = 1 };

struct TensorFileHeader {
  Shape4 shape;
  TensorDtype dtype = TensorDtype::Real32;
};

void write_tensor(const RealTensor4& t, const std::filesystem::path& path);
void write_tensor(const FreqTensor& t, const std::filesystem::path& path);
TensorFileHeader read_tensor_header(const std::filesystem::path& path);
RealTensor4 read_tensor(const std::filesystem::path& path);
/// Complex payloads are returned as BDHW, natural order.
FreqTensor read_freq_tensor(const std::filesystem::path& path);

/// max|got - want| / max|want| (absolute error when want is all zero).
double relative_max_error(std::span<const float> got,
                          std::span<const float> want);
double relative_max_error(std::span<const Complex> got,
                          std::span<const Complex> want);

}  // namespace fftconv
