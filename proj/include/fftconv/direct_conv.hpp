// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "fftconv/tensor.hpp"

namespace fftconv {

/// One convolution layer: minibatch S, f input planes, fp (f') output
/// planes, h x w inputs, kh x kw kernels. Padding (ph, pw) appends zeros
/// below and to the right of every input plane, so the padded input is
/// (h+ph) x (w+pw) and the forward output (h+ph-kh+1) x (w+pw-kw+1).
struct ConvProblem {
  std::size_t S = 1;
  std::size_t f = 1;
  std::size_t fp = 1;
  std::size_t h = 1;
  std::size_t w = 1;
  std::size_t kh = 1;
  std::size_t kw = 1;
  std::size_t ph = 0;
  std::size_t pw = 0;

  std::size_t padded_h() const noexcept { return h + ph; }
  std::size_t padded_w() const noexcept { return w + pw; }
  std::size_t out_h() const noexcept { return h + ph - kh + 1; }
  std::size_t out_w() const noexcept { return w + pw - kw + 1; }

  /// Throws DimensionError for zero extents or kernels larger than the
  /// padded input.
  void validate() const;

  /// Boundary padding ph = floor(kh/2), pw = floor(kw/2).
  ConvProblem with_boundary_padding() const;

  Shape4 input_shape() const noexcept { return {S, f, h, w}; }
  Shape4 weight_shape() const noexcept { return {fp, f, kh, kw}; }
  Shape4 output_shape() const noexcept { return {S, fp, out_h(), out_w()}; }

  friend bool operator==(const ConvProblem&, const ConvProblem&) = default;
  friend auto operator<=>(const ConvProblem&, const ConvProblem&) = default;
};

enum class Pass : std::uint8_t { Fprop, Bprop, AccGrad };

std::string_view to_string(Pass pass) noexcept;
std::optional<Pass> parse_pass(std::string_view name) noexcept;

struct Padding {
  std::size_t ph = 0;
  std::size_t pw = 0;
};

// Clarity-first oracle. Every reduction accumulates in double, innermost
// over kernel width, then kernel height, then the reduced plane index.

/// y[s,j,a,b] = sum_i sum_{u,v} x[s,i,a+u,b+v] * wgt[j,i,u,v]
/// (cross-correlation; reads beyond the input are zero padding).
RealTensor4 fprop_direct(const RealTensor4& x, const RealTensor4& wgt,
                         Padding pad = {});

/// gx[s,i,a,b] = sum_j sum_{u,v} gy[s,j,a-u,b-v] * wgt[j,i,u,v], i.e. full
/// correlation with the spatially flipped kernel; output h x w where
/// h = gy.height() + kh - 1 - ph.
RealTensor4 bprop_direct(const RealTensor4& gy, const RealTensor4& wgt,
                         Padding pad = {});

/// gw[j,i,u,v] = sum_s sum_{a,b} gy[s,j,a,b] * x[s,i,a+u,b+v]; output
/// kh x kw where kh = x.height() + ph - gy.height() + 1.
RealTensor4 accgrad_direct(const RealTensor4& gy, const RealTensor4& x,
                           Padding pad = {});

// Benchmark baseline: same results as the oracle, single-precision
// accumulation with loop orders that keep the innermost loop contiguous.
RealTensor4 fprop_direct_blocked(const RealTensor4& x, const RealTensor4& wgt,
                                 Padding pad = {});
RealTensor4 bprop_direct_blocked(const RealTensor4& gy, const RealTensor4& wgt,
                                 Padding pad = {});
RealTensor4 accgrad_direct_blocked(const RealTensor4& gy, const RealTensor4& x,
                                   Padding pad = {});

/// Multiply-adds of the direct forward pass,
/// S f f' kh kw (h+ph-kh+1) (w+pw-kw+1).
std::uint64_t flop_count(const ConvProblem& p);

}  // namespace fftconv
