// SPDX-License-Identifier: Apache-2.0
#include "fftconv/direct_conv.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "fftconv/error.hpp"

namespace fftconv {

void ConvProblem::validate() const {
  if (S == 0 || f == 0 || fp == 0 || h == 0 || w == 0 || kh == 0 || kw == 0) {
    throw DimensionError("convolution problem has a zero extent");
  }
  if (kh > h + ph || kw > w + pw) {
    throw DimensionError("kernel " + std::to_string(kh) + "x" +
                         std::to_string(kw) + " larger than padded input " +
                         std::to_string(h + ph) + "x" + std::to_string(w + pw));
  }
}

ConvProblem ConvProblem::with_boundary_padding() const {
  ConvProblem p = *this;
  p.ph = kh / 2;
  p.pw = kw / 2;
  return p;
}

std::string_view to_string(Pass pass) noexcept {
  switch (pass) {
    case Pass::Fprop: return "fprop";
    case Pass::Bprop: return "bprop";
    case Pass::AccGrad: return "accGrad";
  }
  return "?";
}

std::optional<Pass> parse_pass(std::string_view name) noexcept {
  if (name == "fprop") return Pass::Fprop;
  if (name == "bprop") return Pass::Bprop;
  if (name == "accGrad" || name == "accgrad") return Pass::AccGrad;
  return std::nullopt;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace

RealTensor4 fprop_direct(const RealTensor4& x, const RealTensor4& wgt,
                         Padding pad) {
  require(x.planes() == wgt.planes(), "fprop_direct: input planes " +
                                          std::to_string(x.planes()) +
                                          " != weight planes " +
                                          std::to_string(wgt.planes()));
  const std::size_t H = x.height() + pad.ph;
  const std::size_t W = x.width() + pad.pw;
  require(wgt.height() >= 1 && wgt.width() >= 1 && wgt.height() <= H &&
              wgt.width() <= W,
          "fprop_direct: kernel larger than padded input");
  const std::size_t S = x.batch(), f = x.planes(), fp = wgt.batch();
  const std::size_t kh = wgt.height(), kw = wgt.width();
  const std::size_t oh = H - kh + 1, ow = W - kw + 1;
  RealTensor4 y(S, fp, oh, ow);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t j = 0; j < fp; ++j) {
      for (std::size_t a = 0; a < oh; ++a) {
        for (std::size_t b = 0; b < ow; ++b) {
          double acc = 0.0;
          for (std::size_t i = 0; i < f; ++i) {
            for (std::size_t u = 0; u < kh; ++u) {
              if (a + u >= x.height()) break;
              for (std::size_t v = 0; v < kw; ++v) {
                if (b + v >= x.width()) break;
                acc += static_cast<double>(x(s, i, a + u, b + v)) * wgt(j, i, u, v);
              }
            }
          }
          y(s, j, a, b) = static_cast<float>(acc);
        }
      }
    }
  }
  return y;
}

RealTensor4 bprop_direct(const RealTensor4& gy, const RealTensor4& wgt,
                         Padding pad) {
  require(gy.planes() == wgt.batch(), "bprop_direct: gradOutput planes " +
                                          std::to_string(gy.planes()) +
                                          " != weight output planes " +
                                          std::to_string(wgt.batch()));
  const std::size_t kh = wgt.height(), kw = wgt.width();
  const std::size_t H = gy.height() + kh - 1;
  const std::size_t W = gy.width() + kw - 1;
  require(H > pad.ph && W > pad.pw, "bprop_direct: padding consumes the input");
  const std::size_t h = H - pad.ph, w = W - pad.pw;
  const std::size_t S = gy.batch(), fp = gy.planes(), f = wgt.planes();
  RealTensor4 gx(S, f, h, w);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t i = 0; i < f; ++i) {
      for (std::size_t a = 0; a < h; ++a) {
        for (std::size_t b = 0; b < w; ++b) {
          double acc = 0.0;
          for (std::size_t j = 0; j < fp; ++j) {
            for (std::size_t u = 0; u < kh; ++u) {
              if (u > a || a - u >= gy.height()) continue;
              for (std::size_t v = 0; v < kw; ++v) {
                if (v > b || b - v >= gy.width()) continue;
                acc += static_cast<double>(gy(s, j, a - u, b - v)) * wgt(j, i, u, v);
              }
            }
          }
          gx(s, i, a, b) = static_cast<float>(acc);
        }
      }
    }
  }
  return gx;
}

RealTensor4 accgrad_direct(const RealTensor4& gy, const RealTensor4& x,
                           Padding pad) {
  require(gy.batch() == x.batch(), "accgrad_direct: minibatch mismatch");
  const std::size_t H = x.height() + pad.ph;
  const std::size_t W = x.width() + pad.pw;
  require(gy.height() >= 1 && gy.width() >= 1 && gy.height() <= H &&
              gy.width() <= W,
          "accgrad_direct: gradOutput larger than padded input");
  const std::size_t kh = H - gy.height() + 1, kw = W - gy.width() + 1;
  const std::size_t S = x.batch(), f = x.planes(), fp = gy.planes();
  RealTensor4 gw(fp, f, kh, kw);
  for (std::size_t j = 0; j < fp; ++j) {
    for (std::size_t i = 0; i < f; ++i) {
      for (std::size_t u = 0; u < kh; ++u) {
        for (std::size_t v = 0; v < kw; ++v) {
          double acc = 0.0;
          for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < gy.height(); ++a) {
              if (a + u >= x.height()) break;
              for (std::size_t b = 0; b < gy.width(); ++b) {
                if (b + v >= x.width()) break;
                acc += static_cast<double>(gy(s, j, a, b)) * x(s, i, a + u, b + v);
              }
            }
          }
          gw(j, i, u, v) = static_cast<float>(acc);
        }
      }
    }
  }
  return gw;
}

// --- blocked baseline -------------------------------------------------------

namespace {

RealTensor4 padded_copy(const RealTensor4& x, Padding pad) {
  if (pad.ph == 0 && pad.pw == 0) return x;
  return zero_pad(x, {pad.ph, pad.pw, x.height() + pad.ph, x.width() + pad.pw});
}

}  // namespace

RealTensor4 fprop_direct_blocked(const RealTensor4& x_in, const RealTensor4& wgt,
                                 Padding pad) {
  require(x_in.planes() == wgt.planes(), "fprop_direct: plane mismatch");
  const RealTensor4 x = padded_copy(x_in, pad);
  require(wgt.height() <= x.height() && wgt.width() <= x.width(),
          "fprop_direct: kernel larger than padded input");
  const std::size_t S = x.batch(), f = x.planes(), fp = wgt.batch();
  const std::size_t kh = wgt.height(), kw = wgt.width();
  const std::size_t W = x.width();
  const std::size_t oh = x.height() - kh + 1, ow = W - kw + 1;
  RealTensor4 y(S, fp, oh, ow);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t j = 0; j < fp; ++j) {
      float* out = y.plane(s, j).data();
      for (std::size_t i = 0; i < f; ++i) {
        const float* in = x.plane(s, i).data();
        const float* k = wgt.plane(j, i).data();
        for (std::size_t u = 0; u < kh; ++u) {
          for (std::size_t v = 0; v < kw; ++v) {
            const float wv = k[u * kw + v];
            for (std::size_t a = 0; a < oh; ++a) {
              const float* src = in + (a + u) * W + v;
              float* dst = out + a * ow;
              for (std::size_t b = 0; b < ow; ++b) dst[b] += wv * src[b];
            }
          }
        }
      }
    }
  }
  return y;
}

RealTensor4 bprop_direct_blocked(const RealTensor4& gy, const RealTensor4& wgt,
                                 Padding pad) {
  require(gy.planes() == wgt.batch(), "bprop_direct: plane mismatch");
  const std::size_t kh = wgt.height(), kw = wgt.width();
  const std::size_t H = gy.height() + kh - 1, W = gy.width() + kw - 1;
  require(H > pad.ph && W > pad.pw, "bprop_direct: padding consumes the input");
  const std::size_t S = gy.batch(), fp = gy.planes(), f = wgt.planes();
  const std::size_t oh = gy.height(), ow = gy.width();
  RealTensor4 full(S, f, H, W);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t i = 0; i < f; ++i) {
      float* out = full.plane(s, i).data();
      for (std::size_t j = 0; j < fp; ++j) {
        const float* g = gy.plane(s, j).data();
        const float* k = wgt.plane(j, i).data();
        for (std::size_t u = 0; u < kh; ++u) {
          for (std::size_t v = 0; v < kw; ++v) {
            const float wv = k[u * kw + v];
            for (std::size_t a = 0; a < oh; ++a) {
              const float* src = g + a * ow;
              float* dst = out + (a + u) * W + v;
              for (std::size_t b = 0; b < ow; ++b) dst[b] += wv * src[b];
            }
          }
        }
      }
    }
  }
  if (pad.ph == 0 && pad.pw == 0) return full;
  return clip(full, H - pad.ph, W - pad.pw);
}

RealTensor4 accgrad_direct_blocked(const RealTensor4& gy, const RealTensor4& x_in,
                                   Padding pad) {
  require(gy.batch() == x_in.batch(), "accgrad_direct: minibatch mismatch");
  const RealTensor4 x = padded_copy(x_in, pad);
  require(gy.height() <= x.height() && gy.width() <= x.width(),
          "accgrad_direct: gradOutput larger than padded input");
  const std::size_t S = x.batch(), f = x.planes(), fp = gy.planes();
  const std::size_t oh = gy.height(), ow = gy.width();
  const std::size_t W = x.width();
  const std::size_t kh = x.height() - oh + 1, kw = W - ow + 1;
  RealTensor4 gw(fp, f, kh, kw);
  std::vector<float> partial(ow);
  for (std::size_t j = 0; j < fp; ++j) {
    for (std::size_t i = 0; i < f; ++i) {
      float* out = gw.plane(j, i).data();
      for (std::size_t u = 0; u < kh; ++u) {
        for (std::size_t v = 0; v < kw; ++v) {
          std::fill(partial.begin(), partial.end(), 0.0f);
          for (std::size_t s = 0; s < S; ++s) {
            const float* g = gy.plane(s, j).data();
            const float* in = x.plane(s, i).data();
            for (std::size_t a = 0; a < oh; ++a) {
              const float* gr = g + a * ow;
              const float* xr = in + (a + u) * W + v;
              for (std::size_t b = 0; b < ow; ++b) partial[b] += gr[b] * xr[b];
            }
          }
          float acc = 0.0f;
          for (float p : partial) acc += p;
          out[u * kw + v] = acc;
        }
      }
    }
  }
  return gw;
}

std::uint64_t flop_count(const ConvProblem& p) {
  return static_cast<std::uint64_t>(p.S) * p.f * p.fp * p.kh * p.kw * p.out_h() *
         p.out_w();
}

}  // namespace fftconv
