// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "fftconv/cgemm.hpp"
#include "fftconv/direct_conv.hpp"
#include "fftconv/rfft.hpp"
#include "fftconv/tensor.hpp"

namespace fftconv {

/// Output tile extents for tiled execution.
struct TileSpec2d {
  std::size_t d_h = 0;
  std::size_t d_w = 0;
  friend bool operator==(const TileSpec2d&, const TileSpec2d&) = default;
};

/// Everything needed to run one problem in the frequency domain.
///
/// Untiled plans transform the whole padded input, so n_h >= h + ph and
/// n_w >= w + pw. Tiled plans transform one tile at a time and need
/// n_h >= d_h + kh - 1, n_w >= d_w + kw - 1.
struct ConvPlan {
  ConvProblem problem;
  std::size_t n_h = 0;
  std::size_t n_w = 0;
  FftPath fft_path = FftPath::SmoothNatural;
  GemmStrategy gemm = GemmStrategy::Batched;
  std::optional<TileSpec2d> tiling;
  std::size_t buffer_bytes = 0;

  friend bool operator==(const ConvPlan&, const ConvPlan&) = default;
};

std::string_view to_string(FftPath path) noexcept;
std::optional<FftPath> parse_fft_path(std::string_view name) noexcept;

/// True when n is a legal transform length for path.
bool admissible_size(std::size_t n, FftPath path) noexcept;
/// Smallest legal transform length >= n for path.
std::size_t smallest_admissible(std::size_t n, FftPath path) noexcept;

/// Validates and fills buffer_bytes. Throws DimensionError for a bad
/// problem, UnsupportedSizeError for a size the path cannot transform and
/// PlanError when the sizes or tiles do not cover the problem.
ConvPlan make_plan(const ConvProblem& problem, std::size_t n_h, std::size_t n_w,
                   FftPath path, GemmStrategy gemm = GemmStrategy::Batched,
                   std::optional<TileSpec2d> tiling = std::nullopt);

/// Smallest admissible sizes for the path.
ConvPlan default_plan(const ConvProblem& problem, FftPath path,
                      GemmStrategy gemm = GemmStrategy::Batched,
                      std::optional<TileSpec2d> tiling = std::nullopt);

/// One-line human summary, e.g. "16x16 radix2 batched tiles 8x8".
std::string describe(const ConvPlan& plan);

/// Frequency scratch reused across calls. Each buffer only ever grows.
/// One set of buffers serves one invocation at a time.
struct WorkBuffers {
  FreqTensor input;
  FreqTensor input_t;
  FreqTensor weight;
  FreqTensor weight_t;
  FreqTensor output;
  FreqTensor output_t;

  std::size_t capacity_bytes() const noexcept;
};

/// Conjugation of the two spectra entering the pointwise product.
struct SpectralProduct {
  bool conj_first = false;
  bool conj_second = false;
};

/// The product each pass needs: fprop conjugates the weights, bprop
/// conjugates nothing, accGrad conjugates gradOutput.
SpectralProduct default_product(Pass pass) noexcept;

/// y = x * wgt (correlation), shape (S, f', h+ph-kh+1, w+pw-kw+1).
RealTensor4 fprop_fft(const RealTensor4& x, const RealTensor4& wgt,
                      const ConvPlan& plan, WorkBuffers& buffers);
/// Gradient with respect to the input, shape (S, f, h, w).
RealTensor4 bprop_fft(const RealTensor4& gy, const RealTensor4& wgt,
                      const ConvPlan& plan, WorkBuffers& buffers);
/// Gradient with respect to the weights, shape (f', f, kh, kw).
RealTensor4 accgrad_fft(const RealTensor4& gy, const RealTensor4& x,
                        const ConvPlan& plan, WorkBuffers& buffers);

/// Runs a pass with an explicit product. Operands are (x, wgt) for fprop,
/// (gy, wgt) for bprop and (gy, x) for accGrad. Only the default product
/// gives the correct gradient; the others exist to probe verification.
RealTensor4 run_pass_fft(Pass pass, const RealTensor4& first,
                         const RealTensor4& second, const ConvPlan& plan,
                         WorkBuffers& buffers, SpectralProduct product);

/// Model operation counts with N = n_h n_w and the batch widened by the
/// tile count:
///   fft    = S f f' N + (S f + f f' + S f') N log2(N) / 2
///   direct = S f f' N kh kw
struct ModelCost {
  double fft_cost = 0.0;
  double direct_cost = 0.0;
};
ModelCost theoretical_flops(const ConvPlan& plan);

/// Relative max-norm tolerance against the direct oracle,
/// 1e-3 * max(1, log2(n_h n_w) / 10).
double engine_tolerance(const ConvPlan& plan) noexcept;

}  // namespace fftconv
