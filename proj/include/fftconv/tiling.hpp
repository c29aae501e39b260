// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace fftconv {

/// Tiling of a valid 1-D correlation of an n-vector with a w-tap kernel
/// into segments of d outputs. Tile k reads inputs [kd, kd + d + w - 1);
/// the last tile may be short.
struct TileSpec {
  std::size_t n = 0;
  std::size_t w = 0;
  std::size_t d = 0;
  std::size_t tile_input_len = 0;
  std::size_t tile_count = 0;

  std::size_t output_len() const noexcept { return n - w + 1; }
  /// Half-open output range [first, second) of tile k.
  std::pair<std::size_t, std::size_t> output_range(std::size_t k) const noexcept;
};

/// Throws DimensionError unless 1 <= w <= n and 1 <= d <= n - w + 1.
TileSpec make_tile_spec(std::size_t n, std::size_t w, std::size_t d);

/// Valid correlation y_a = sum_u x_{a+u} c_u computed tile by tile.
std::vector<float> tiled_conv1d(std::span<const float> x,
                                std::span<const float> c, std::size_t d);

/// Weight gradient g_j = sum_i x_{j+i} z_i over the length n-w+1 gradient z,
/// accumulated tile by tile in increasing tile order (the short remainder
/// tile last).
std::vector<float> tiled_accgrad1d(std::span<const float> x,
                                   std::span<const float> z, std::size_t d);

/// ceil(n/d) (d+w) log2(d+w): one small FFT convolution per tile.
double tile_cost_model(std::size_t n, std::size_t w, std::size_t d);

/// Argmin of tile_cost_model over d in [1, n-w+1]; ties go to the larger d.
std::size_t best_tile_size(std::size_t n, std::size_t w);

/// 2-D valid correlation of an h x w plane with a kh x kw kernel, using
/// rectangular output tiles of d_h x d_w (inputs (d_h+kh-1) x (d_w+kw-1)).
std::vector<float> tiled_conv2d(std::span<const float> plane, std::size_t h,
                                std::size_t w, std::span<const float> kernel,
                                std::size_t kh, std::size_t kw, std::size_t d_h,
                                std::size_t d_w);

}  // namespace fftconv
