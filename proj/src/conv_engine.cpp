// SPDX-License-Identifier: Apache-2.0
#include "fftconv/conv_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "fftconv/error.hpp"
#include "fftconv/fft1d.hpp"

namespace fftconv {

std::string_view to_string(FftPath path) noexcept {
  return path == FftPath::Radix2Elided ? "radix2" : "smooth";
}

std::optional<FftPath> parse_fft_path(std::string_view name) noexcept {
  if (name == "radix2") return FftPath::Radix2Elided;
  if (name == "smooth") return FftPath::SmoothNatural;
  return std::nullopt;
}

bool admissible_size(std::size_t n, FftPath path) noexcept {
  if (n == 0) return false;
  return path == FftPath::Radix2Elided ? is_power_of_two(n) : is_smooth(n);
}

std::size_t smallest_admissible(std::size_t n, FftPath path) noexcept {
  if (n == 0) n = 1;
  if (path == FftPath::Radix2Elided) return next_pow2(n);
  while (!is_smooth(n)) ++n;
  return n;
}

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// Tile grid of one axis for a pass.
struct AxisTiles {
  std::size_t d = 0;      // output rows per tile
  std::size_t count = 0;  // tiles along the axis
};

// Output extent that tiles cover: the forward output for fprop and
// accGrad, the unpadded input for bprop.
AxisTiles axis_tiles(Pass pass, std::size_t d, std::size_t out_extent,
                     std::size_t in_extent) {
  const std::size_t extent = pass == Pass::Bprop ? in_extent : out_extent;
  const std::size_t eff = std::min(d, extent);
  return {eff, ceil_div(extent, eff)};
}

std::size_t max_tile_count(const ConvProblem& p, const TileSpec2d& t) {
  std::size_t best = 1;
  for (Pass pass : {Pass::Fprop, Pass::Bprop}) {
    const AxisTiles th = axis_tiles(pass, t.d_h, p.out_h(), p.h);
    const AxisTiles tw = axis_tiles(pass, t.d_w, p.out_w(), p.w);
    best = std::max(best, th.count * tw.count);
  }
  return best;
}

std::size_t estimate_buffer_bytes(const ConvPlan& plan) {
  const ConvProblem& p = plan.problem;
  const std::size_t batch = p.S * (plan.tiling ? max_tile_count(p, *plan.tiling) : 1);
  const std::size_t planes = batch * p.f + p.fp * p.f + batch * p.fp;
  const std::size_t bins = plan.n_h * (plan.n_w / 2 + 1);
  return 2 * planes * bins * sizeof(Complex);
}

void require_size(std::size_t n, FftPath path, const char* axis) {
  if (!admissible_size(n, path)) {
    throw UnsupportedSizeError(std::string(axis) + " transform size " +
                               std::to_string(n) + " is not admissible for the " +
                               std::string(to_string(path)) + " path");
  }
}

}  // namespace

ConvPlan make_plan(const ConvProblem& problem, std::size_t n_h, std::size_t n_w,
                   FftPath path, GemmStrategy gemm,
                   std::optional<TileSpec2d> tiling) {
  problem.validate();
  require_size(n_h, path, "height");
  require_size(n_w, path, "width");
  std::size_t need_h = problem.padded_h(), need_w = problem.padded_w();
  if (tiling) {
    if (tiling->d_h == 0 || tiling->d_w == 0 || tiling->d_h > problem.out_h() ||
        tiling->d_w > problem.out_w()) {
      throw PlanError("tile " + std::to_string(tiling->d_h) + "x" +
                      std::to_string(tiling->d_w) + " outside [1, " +
                      std::to_string(problem.out_h()) + "]x[1, " +
                      std::to_string(problem.out_w()) + "]");
    }
    need_h = tiling->d_h + problem.kh - 1;
    need_w = tiling->d_w + problem.kw - 1;
  }
  if (n_h < need_h || n_w < need_w) {
    throw PlanError("transform " + std::to_string(n_h) + "x" + std::to_string(n_w) +
                    " smaller than the required " + std::to_string(need_h) + "x" +
                    std::to_string(need_w));
  }
  ConvPlan plan{problem, n_h, n_w, path, gemm, tiling, 0};
  plan.buffer_bytes = estimate_buffer_bytes(plan);
  return plan;
}

ConvPlan default_plan(const ConvProblem& problem, FftPath path, GemmStrategy gemm,
                      std::optional<TileSpec2d> tiling) {
  std::size_t need_h = problem.padded_h(), need_w = problem.padded_w();
  if (tiling) {
    need_h = tiling->d_h + problem.kh - 1;
    need_w = tiling->d_w + problem.kw - 1;
  }
  return make_plan(problem, smallest_admissible(need_h, path),
                   smallest_admissible(need_w, path), path, gemm, tiling);
}

std::string describe(const ConvPlan& plan) {
  std::string s = std::to_string(plan.n_h) + "x" + std::to_string(plan.n_w) + " " +
                  std::string(to_string(plan.fft_path)) + " " +
                  std::string(to_string(plan.gemm));
  if (plan.tiling) {
    s += " tiles " + std::to_string(plan.tiling->d_h) + "x" +
         std::to_string(plan.tiling->d_w);
  }
  return s;
}

std::size_t WorkBuffers::capacity_bytes() const noexcept {
  return input.capacity_bytes() + input_t.capacity_bytes() +
         weight.capacity_bytes() + weight_t.capacity_bytes() +
         output.capacity_bytes() + output_t.capacity_bytes();
}

SpectralProduct default_product(Pass pass) noexcept {
  switch (pass) {
    case Pass::Fprop: return {false, true};
    case Pass::Bprop: return {false, false};
    case Pass::AccGrad: return {true, false};
  }
  return {};
}

namespace {

struct Slot {
  FreqTensor* freq;
  FreqTensor* transposed;
};

// FFT both operands, multiply per bin, inverse into the window.
void spectral_core(const RealTensor4& a, Slot sa, const RealTensor4& b, Slot sb,
                   Slot sc, const CgemmBatch& gemm, const RfftPlan& rplan,
                   const ClipWindow& window, RealTensor4& out) {
  rfft2d_batched(a, rplan, *sa.freq);
  transpose_bdhw_hwbd(*sa.freq, *sa.transposed);
  rfft2d_batched(b, rplan, *sb.freq);
  transpose_bdhw_hwbd(*sb.freq, *sb.transposed);
  cgemm_batched(*sa.transposed, *sb.transposed, gemm, *sc.transposed);
  transpose_hwbd_bdhw(*sc.transposed, *sc.freq);
  irfft2d_batched(*sc.freq, rplan, window, out);
}

// Tiles of every plane of t, stacked into the batch: tile (p, q) of
// sample s is batch entry (s * T_h + p) * T_w + q. Tile (p, q) starts at
// (p * d_h + off_h, q * d_w + off_w) and spans len_h x len_w; reads outside
// the source are zero.
RealTensor4 gather_tiles(const RealTensor4& t, AxisTiles th, AxisTiles tw,
                         std::ptrdiff_t off_h, std::ptrdiff_t off_w,
                         std::size_t len_h, std::size_t len_w) {
  const std::size_t S = t.batch(), P = t.planes();
  const auto H = static_cast<std::ptrdiff_t>(t.height());
  const auto W = static_cast<std::ptrdiff_t>(t.width());
  RealTensor4 out(S * th.count * tw.count, P, len_h, len_w);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t p = 0; p < th.count; ++p) {
      for (std::size_t q = 0; q < tw.count; ++q) {
        const std::size_t dst_s = (s * th.count + p) * tw.count + q;
        const std::ptrdiff_t r0 = static_cast<std::ptrdiff_t>(p * th.d) + off_h;
        const std::ptrdiff_t c0 = static_cast<std::ptrdiff_t>(q * tw.d) + off_w;
        const std::ptrdiff_t cb = std::max<std::ptrdiff_t>(0, -c0);
        const std::ptrdiff_t ce =
            std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(len_w), W - c0);
        for (std::size_t plane = 0; plane < P; ++plane) {
          const float* src = t.plane(s, plane).data();
          float* dst = out.plane(dst_s, plane).data();
          for (std::size_t r = 0; r < len_h; ++r) {
            const std::ptrdiff_t sr = r0 + static_cast<std::ptrdiff_t>(r);
            if (sr < 0 || sr >= H || cb >= ce) continue;
            std::copy(src + sr * W + c0 + cb, src + sr * W + c0 + ce,
                      dst + r * len_w + cb);
          }
        }
      }
    }
  }
  return out;
}

// Inverse of the stacking in gather_tiles for d_h x d_w output tiles.
void scatter_tiles(const RealTensor4& tiles, AxisTiles th, AxisTiles tw,
                   RealTensor4& out) {
  const std::size_t S = out.batch(), P = out.planes();
  const std::size_t H = out.height(), W = out.width();
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t p = 0; p < th.count; ++p) {
      for (std::size_t q = 0; q < tw.count; ++q) {
        const std::size_t src_s = (s * th.count + p) * tw.count + q;
        const std::size_t r0 = p * th.d, c0 = q * tw.d;
        const std::size_t rows = std::min(th.d, H - r0);
        const std::size_t cols = std::min(tw.d, W - c0);
        for (std::size_t plane = 0; plane < P; ++plane) {
          const float* src = tiles.plane(src_s, plane).data();
          float* dst = out.plane(s, plane).data();
          for (std::size_t r = 0; r < rows; ++r) {
            std::copy(src + r * tw.d, src + r * tw.d + cols, dst + (r0 + r) * W + c0);
          }
        }
      }
    }
  }
}

void require_shape(const RealTensor4& t, Shape4 want, const char* what) {
  if (t.shape() != want) {
    const Shape4 g = t.shape();
    throw PlanError(std::string(what) + " has shape " + std::to_string(g.d0) + "x" +
                    std::to_string(g.d1) + "x" + std::to_string(g.d2) + "x" +
                    std::to_string(g.d3) + ", plan expects " +
                    std::to_string(want.d0) + "x" + std::to_string(want.d1) + "x" +
                    std::to_string(want.d2) + "x" + std::to_string(want.d3));
  }
}

CgemmBatch gemm_for(Pass pass, std::size_t batch, const ConvProblem& p,
                    std::size_t bins, GemmStrategy strategy, SpectralProduct prod) {
  CgemmBatch g;
  g.bins = bins;
  g.strategy = strategy;
  g.conj_a = prod.conj_first;
  g.conjugate_b = prod.conj_second;
  switch (pass) {
    case Pass::Fprop:  // (S x f) . (f' x f)^T
      g.m = batch, g.k = p.f, g.n = p.fp, g.trans_b = true;
      break;
    case Pass::Bprop:  // (S x f') . (f' x f)
      g.m = batch, g.k = p.fp, g.n = p.f, g.trans_b = false;
      break;
    case Pass::AccGrad:  // (S x f')^T . (S x f)
      g.m = p.fp, g.k = batch, g.n = p.f, g.trans_a = true, g.trans_b = false;
      break;
  }
  return g;
}

}  // namespace

RealTensor4 run_pass_fft(Pass pass, const RealTensor4& first,
                         const RealTensor4& second, const ConvPlan& plan,
                         WorkBuffers& buffers, SpectralProduct product) {
  const ConvProblem& p = plan.problem;
  switch (pass) {
    case Pass::Fprop:
      require_shape(first, p.input_shape(), "input");
      require_shape(second, p.weight_shape(), "weight");
      break;
    case Pass::Bprop:
      require_shape(first, p.output_shape(), "gradOutput");
      require_shape(second, p.weight_shape(), "weight");
      break;
    case Pass::AccGrad:
      require_shape(first, p.output_shape(), "gradOutput");
      require_shape(second, p.input_shape(), "input");
      break;
  }

  const RfftPlan rplan(plan.n_h, plan.n_w, plan.fft_path);
  const std::size_t bins = plan.n_h * rplan.freq_width();
  const Slot in{&buffers.input, &buffers.input_t};
  const Slot wt{&buffers.weight, &buffers.weight_t};
  const Slot out{&buffers.output, &buffers.output_t};

  RealTensor4 result;
  if (!plan.tiling) {
    const CgemmBatch g = gemm_for(pass, p.S, p, bins, plan.gemm, product);
    switch (pass) {
      case Pass::Fprop:
        spectral_core(first, in, second, wt, out, g, rplan,
                      {0, 0, p.out_h(), p.out_w()}, result);
        break;
      case Pass::Bprop:
        spectral_core(first, out, second, wt, in, g, rplan, {0, 0, p.h, p.w}, result);
        break;
      case Pass::AccGrad:
        spectral_core(first, out, second, in, wt, g, rplan, {0, 0, p.kh, p.kw}, result);
        break;
    }
    return result;
  }

  const TileSpec2d& t = *plan.tiling;
  const AxisTiles th = axis_tiles(pass, t.d_h, p.out_h(), p.h);
  const AxisTiles tw = axis_tiles(pass, t.d_w, p.out_w(), p.w);
  const std::size_t len_h = th.d + p.kh - 1, len_w = tw.d + p.kw - 1;
  const std::size_t batch = p.S * th.count * tw.count;
  const CgemmBatch g = gemm_for(pass, batch, p, bins, plan.gemm, product);
  RealTensor4 tiles_out;
  switch (pass) {
    case Pass::Fprop: {
      const RealTensor4 xt = gather_tiles(first, th, tw, 0, 0, len_h, len_w);
      spectral_core(xt, in, second, wt, out, g, rplan, {0, 0, th.d, tw.d}, tiles_out);
      result.reset(p.output_shape());
      scatter_tiles(tiles_out, th, tw, result);
      break;
    }
    case Pass::Bprop: {
      const auto back_h = -static_cast<std::ptrdiff_t>(p.kh - 1);
      const auto back_w = -static_cast<std::ptrdiff_t>(p.kw - 1);
      const RealTensor4 gt = gather_tiles(first, th, tw, back_h, back_w, len_h, len_w);
      spectral_core(gt, out, second, wt, in, g, rplan,
                    {p.kh - 1, p.kw - 1, th.d, tw.d}, tiles_out);
      result.reset(p.input_shape());
      scatter_tiles(tiles_out, th, tw, result);
      break;
    }
    case Pass::AccGrad: {
      const RealTensor4 gt = gather_tiles(first, th, tw, 0, 0, th.d, tw.d);
      const RealTensor4 xt = gather_tiles(second, th, tw, 0, 0, len_h, len_w);
      spectral_core(gt, out, xt, in, wt, g, rplan, {0, 0, p.kh, p.kw}, result);
      break;
    }
  }
  return result;
}

RealTensor4 fprop_fft(const RealTensor4& x, const RealTensor4& wgt,
                      const ConvPlan& plan, WorkBuffers& buffers) {
  return run_pass_fft(Pass::Fprop, x, wgt, plan, buffers, default_product(Pass::Fprop));
}

RealTensor4 bprop_fft(const RealTensor4& gy, const RealTensor4& wgt,
                      const ConvPlan& plan, WorkBuffers& buffers) {
  return run_pass_fft(Pass::Bprop, gy, wgt, plan, buffers, default_product(Pass::Bprop));
}

RealTensor4 accgrad_fft(const RealTensor4& gy, const RealTensor4& x,
                        const ConvPlan& plan, WorkBuffers& buffers) {
  return run_pass_fft(Pass::AccGrad, gy, x, plan, buffers,
                      default_product(Pass::AccGrad));
}

ModelCost theoretical_flops(const ConvPlan& plan) {
  const ConvProblem& p = plan.problem;
  const double tiles =
      plan.tiling ? static_cast<double>(max_tile_count(p, *plan.tiling)) : 1.0;
  const double S = static_cast<double>(p.S) * tiles;
  const double f = static_cast<double>(p.f), fp = static_cast<double>(p.fp);
  const double N = static_cast<double>(plan.n_h * plan.n_w);
  const double logn = N > 1.0 ? std::log2(N) / 2.0 : 0.0;
  ModelCost c;
  c.fft_cost = S * f * fp * N + (S * f + f * fp + S * fp) * N * logn;
  c.direct_cost = static_cast<double>(p.S) * f * fp * N *
                  static_cast<double>(p.kh * p.kw);
  return c;
}

double engine_tolerance(const ConvPlan& plan) noexcept {
  const double bits = std::log2(static_cast<double>(plan.n_h * plan.n_w));
  return 1e-3 * std::max(1.0, bits / 10.0);
}

}  // namespace fftconv
