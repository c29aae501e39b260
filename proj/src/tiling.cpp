// SPDX-License-Identifier: Apache-2.0
#include "fftconv/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fftconv/error.hpp"

namespace fftconv {

std::pair<std::size_t, std::size_t> TileSpec::output_range(
    std::size_t k) const noexcept {
  const std::size_t first = k * d;
  return {first, std::min(first + d, output_len())};
}

TileSpec make_tile_spec(std::size_t n, std::size_t w, std::size_t d) {
  if (w == 0 || w > n) {
    throw DimensionError("tiling: kernel length " + std::to_string(w) +
                         " not in [1, " + std::to_string(n) + "]");
  }
  const std::size_t out = n - w + 1;
  if (d == 0 || d > out) {
    throw DimensionError("tiling: tile size " + std::to_string(d) +
                         " not in [1, " + std::to_string(out) + "]");
  }
  return {n, w, d, d + w - 1, (out + d - 1) / d};
}

std::vector<float> tiled_conv1d(std::span<const float> x,
                                std::span<const float> c, std::size_t d) {
  const TileSpec t = make_tile_spec(x.size(), c.size(), d);
  std::vector<float> y(t.output_len());
  for (std::size_t k = 0; k < t.tile_count; ++k) {
    const auto [first, last] = t.output_range(k);
    const std::span<const float> seg =
        x.subspan(first, last - first + t.w - 1);
    for (std::size_t a = 0; a < last - first; ++a) {
      double acc = 0.0;
      for (std::size_t u = 0; u < t.w; ++u) {
        acc += static_cast<double>(seg[a + u]) * c[u];
      }
      y[first + a] = static_cast<float>(acc);
    }
  }
  return y;
}

std::vector<float> tiled_accgrad1d(std::span<const float> x,
                                   std::span<const float> z, std::size_t d) {
  if (z.empty() || z.size() > x.size()) {
    throw DimensionError("tiled_accgrad1d: gradient length " +
                         std::to_string(z.size()) + " vs input " +
                         std::to_string(x.size()));
  }
  const std::size_t w = x.size() - z.size() + 1;
  const TileSpec t = make_tile_spec(x.size(), w, d);
  std::vector<double> acc(w, 0.0);
  for (std::size_t k = 0; k < t.tile_count; ++k) {
    const auto [first, last] = t.output_range(k);
    for (std::size_t j = 0; j < w; ++j) {
      double part = 0.0;
      for (std::size_t i = first; i < last; ++i) {
        part += static_cast<double>(x[j + i]) * z[i];
      }
      acc[j] += part;
    }
  }
  return {acc.begin(), acc.end()};
}

double tile_cost_model(std::size_t n, std::size_t w, std::size_t d) {
  const double tiles = std::ceil(static_cast<double>(n) / static_cast<double>(d));
  const double len = static_cast<double>(d + w);
  return tiles * len * std::log2(len);
}

std::size_t best_tile_size(std::size_t n, std::size_t w) {
  const TileSpec whole = make_tile_spec(n, w, n - w + 1);
  std::size_t best = whole.d;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t d = whole.d; d >= 1; --d) {
    const double cost = tile_cost_model(n, w, d);
    if (cost < best_cost) {
      best_cost = cost;
      best = d;
    }
  }
  return best;
}

std::vector<float> tiled_conv2d(std::span<const float> plane, std::size_t h,
                                std::size_t w, std::span<const float> kernel,
                                std::size_t kh, std::size_t kw, std::size_t d_h,
                                std::size_t d_w) {
  if (plane.size() != h * w || kernel.size() != kh * kw) {
    throw DimensionError("tiled_conv2d: buffer sizes do not match extents");
  }
  const TileSpec th = make_tile_spec(h, kh, d_h);
  const TileSpec tw = make_tile_spec(w, kw, d_w);
  const std::size_t oh = th.output_len(), ow = tw.output_len();
  std::vector<float> out(oh * ow);
  for (std::size_t ti = 0; ti < th.tile_count; ++ti) {
    const auto [r0, r1] = th.output_range(ti);
    for (std::size_t tj = 0; tj < tw.tile_count; ++tj) {
      const auto [c0, c1] = tw.output_range(tj);
      // The tile's input window starts at (r0, c0); outputs are relative to it.
      const float* window = plane.data() + r0 * w + c0;
      for (std::size_t a = 0; a < r1 - r0; ++a) {
        for (std::size_t b = 0; b < c1 - c0; ++b) {
          double acc = 0.0;
          for (std::size_t u = 0; u < kh; ++u) {
            for (std::size_t v = 0; v < kw; ++v) {
              acc += static_cast<double>(window[(a + u) * w + b + v]) *
                     kernel[u * kw + v];
            }
          }
          out[(r0 + a) * ow + c0 + b] = static_cast<float>(acc);
        }
      }
    }
  }
  return out;
}

}  // namespace fftconv
