// SPDX-License-Identifier: Apache-2.0
#include "fftconv/rfft.hpp"

#include <algorithm>
#include <string>

#include "fftconv/error.hpp"

namespace fftconv {

namespace {

std::size_t checked_size(std::size_t n, FftPath path, const char* axis) {
  if (n == 0) throw UnsupportedSizeError(std::string(axis) + " size is zero");
  if (path == FftPath::Radix2Elided && !is_power_of_two(n)) {
    throw UnsupportedSizeError(std::string(axis) + " size " + std::to_string(n) +
                               " is not a power of two (Radix2Elided)");
  }
  if (!is_smooth(n)) {
    throw UnsupportedSizeError(std::string(axis) + " size " + std::to_string(n) +
                               " is not 7-smooth");
  }
  return n;
}

// Splits F = FFT(a + i b) into the half spectra of a and b:
//   A_k = (F_k + conj(F_{n-k})) / 2,  B_k = (F_k - conj(F_{n-k})) / (2i).
void unpack_pair(const Complex* F, std::size_t n, Complex* A, Complex* B) {
  const std::size_t half = n / 2 + 1;
  for (std::size_t k = 0; k < half; ++k) {
    const Complex f = F[k];
    const Complex g = std::conj(F[(n - k) % n]);
    const Complex sum = f + g;
    const Complex diff = f - g;
    A[k] = {0.5f * sum.real(), 0.5f * sum.imag()};
    B[k] = {0.5f * diff.imag(), -0.5f * diff.real()};
  }
}

// Full Hermitian spectrum of a real signal from its stored half. The DC
// and (even n) Nyquist bins are forced real, as a real signal requires.
inline Complex hermitian_bin(const Complex* half, std::size_t n, std::size_t k) {
  const std::size_t stored = n / 2 + 1;
  if (k == 0 || (n % 2 == 0 && k == n / 2)) return {half[k].real(), 0.0f};
  return k < stored ? half[k] : std::conj(half[n - k]);
}

struct Scratch {
  std::vector<Complex> line;   // one transform
  std::vector<Complex> plane;  // n_h x freq_width, one or two planes
};

Scratch& scratch(std::size_t line, std::size_t plane) {
  thread_local Scratch s;
  if (s.line.size() < line) s.line.resize(line);
  if (s.plane.size() < plane) s.plane.resize(plane);
  return s;
}

// Row pass for a real plane (or pair of planes) into row-major half spectra.
// Rows at or beyond h are implicit zeros; loads past w read 0.
void row_pass(const float* a, const float* b, std::size_t h, std::size_t w,
              const RfftPlan& plan, Complex* outA, Complex* outB,
              Complex* line) {
  const std::size_t n_h = plan.n_h();
  const std::size_t n_w = plan.n_w();
  const std::size_t fw = plan.freq_width();
  const std::size_t cols = std::min(w, n_w);

  auto load_row = [&](const float* re, const float* im) {
    for (std::size_t j = 0; j < cols; ++j) {
      line[j] = {re ? re[j] : 0.0f, im ? im[j] : 0.0f};
    }
    std::fill(line + cols, line + n_w, Complex{});
  };

  if (b != nullptr) {
    // Two planes share each complex row transform.
    for (std::size_t r = 0; r < n_h; ++r) {
      Complex* ra = outA + r * fw;
      Complex* rb = outB + r * fw;
      if (r >= h) {
        std::fill(ra, ra + fw, Complex{});
        std::fill(rb, rb + fw, Complex{});
        continue;
      }
      load_row(a + r * w, b + r * w);
      plan.rows().forward({line, n_w});
      unpack_pair(line, n_w, ra, rb);
    }
    return;
  }

  // Single plane: rows r and r+1 share a transform.
  std::size_t r = 0;
  for (; r + 1 < n_h; r += 2) {
    Complex* r0 = outA + r * fw;
    Complex* r1 = outA + (r + 1) * fw;
    if (r >= h) {
      std::fill(r0, r0 + 2 * fw, Complex{});
      continue;
    }
    load_row(a + r * w, r + 1 < h ? a + (r + 1) * w : nullptr);
    plan.rows().forward({line, n_w});
    unpack_pair(line, n_w, r0, r1);
  }
  if (r < n_h) {
    Complex* r0 = outA + r * fw;
    if (r >= h) {
      std::fill(r0, r0 + fw, Complex{});
    } else {
      load_row(a + r * w, nullptr);
      plan.rows().forward({line, n_w});
      std::copy(line, line + fw, r0);
    }
  }
}

// Column pass over the row spectra, writing the plan's layout into dst.
void column_pass(const Complex* rows, const RfftPlan& plan, Complex* dst,
                 Complex* line) {
  const std::size_t n_h = plan.n_h();
  const std::size_t fw = plan.freq_width();
  const bool transposed = plan.layout() == FreqOutputLayout::TransposedFreq;
  for (std::size_t c = 0; c < fw; ++c) {
    for (std::size_t r = 0; r < n_h; ++r) line[r] = rows[r * fw + c];
    if (plan.path() == FftPath::Radix2Elided) {
      dif_butterflies({line, n_h}, plan.cols().radix2(), Direction::Forward);
    } else {
      plan.cols().forward({line, n_h});
    }
    if (transposed) {
      std::copy(line, line + n_h, dst + c * n_h);
    } else {
      for (std::size_t r = 0; r < n_h; ++r) dst[r * fw + c] = line[r];
    }
  }
}

void forward_planes(const float* a, const float* b, std::size_t h,
                    std::size_t w, const RfftPlan& plan, Complex* dstA,
                    Complex* dstB) {
  const std::size_t per_plane = plan.n_h() * plan.freq_width();
  Scratch& s = scratch(std::max(plan.n_h(), plan.n_w()), 2 * per_plane);
  Complex* rowsA = s.plane.data();
  Complex* rowsB = s.plane.data() + per_plane;
  row_pass(a, b, h, w, plan, rowsA, rowsB, s.line.data());
  column_pass(rowsA, plan, dstA, s.line.data());
  if (b != nullptr) column_pass(rowsB, plan, dstB, s.line.data());
}

// Inverse of one plane into the window. src is in the plan's layout.
void inverse_plane(const Complex* src, const RfftPlan& plan,
                   const ClipWindow& win, float* dst) {
  const std::size_t n_h = plan.n_h();
  const std::size_t n_w = plan.n_w();
  const std::size_t fw = plan.freq_width();
  const bool transposed = plan.layout() == FreqOutputLayout::TransposedFreq;
  Scratch& s = scratch(std::max(n_h, n_w), n_h * fw);
  Complex* line = s.line.data();
  Complex* rows = s.plane.data();

  const float inv_h = 1.0f / static_cast<float>(n_h);
  for (std::size_t c = 0; c < fw; ++c) {
    if (transposed) {
      std::copy(src + c * n_h, src + (c + 1) * n_h, line);
    } else {
      for (std::size_t r = 0; r < n_h; ++r) line[r] = src[r * fw + c];
    }
    if (plan.path() == FftPath::Radix2Elided) {
      dit_butterflies({line, n_h}, plan.cols().radix2(), Direction::Inverse);
      for (std::size_t r = 0; r < n_h; ++r) line[r] *= inv_h;
    } else {
      plan.cols().inverse({line, n_h});
    }
    for (std::size_t r = 0; r < n_h; ++r) rows[r * fw + c] = line[r];
  }

  // Rows of the window, two real rows per complex inverse transform.
  const std::size_t r_end = win.row0 + win.height;
  for (std::size_t r = win.row0; r < r_end; r += 2) {
    const bool pair = r + 1 < r_end;
    const Complex* ha = rows + r * fw;
    const Complex* hb = pair ? rows + (r + 1) * fw : nullptr;
    for (std::size_t k = 0; k < n_w; ++k) {
      const Complex za = hermitian_bin(ha, n_w, k);
      const Complex zb = hb ? hermitian_bin(hb, n_w, k) : Complex{};
      line[k] = {za.real() - zb.imag(), za.imag() + zb.real()};
    }
    plan.rows().inverse({line, n_w});
    float* out0 = dst + (r - win.row0) * win.width;
    for (std::size_t j = 0; j < win.width; ++j) out0[j] = line[win.col0 + j].real();
    if (pair) {
      float* out1 = out0 + win.width;
      for (std::size_t j = 0; j < win.width; ++j) out1[j] = line[win.col0 + j].imag();
    }
  }
}

Shape4 freq_extents(std::size_t a, std::size_t b, const RfftPlan& plan) {
  if (plan.layout() == FreqOutputLayout::TransposedFreq) {
    return {a, b, plan.freq_width(), plan.n_h()};
  }
  return {a, b, plan.n_h(), plan.freq_width()};
}

void check_window(const RfftPlan& plan, const ClipWindow& win) {
  if (win.row0 + win.height > plan.n_h() || win.col0 + win.width > plan.n_w()) {
    throw DimensionError("inverse window exceeds the " +
                         std::to_string(plan.n_h()) + "x" +
                         std::to_string(plan.n_w()) + " transform");
  }
}

void check_spectrum(const FreqTensor& freq, const RfftPlan& plan) {
  const Shape4 e = freq.extents();
  const Shape4 want = freq_extents(e.d0, e.d1, plan);
  if (freq.layout() != FreqLayout::BDHW) {
    throw LayoutError("inverse 2-D transform expects a BDHW spectrum");
  }
  if (e != want) {
    throw DimensionError("spectrum extents do not match the transform plan");
  }
  if (freq.order() != plan.order()) {
    throw LayoutError("spectrum bin order does not match the transform path");
  }
}

}  // namespace

RfftPlan::RfftPlan(std::size_t n_h, std::size_t n_w, FftPath path,
                   FreqOutputLayout layout)
    : n_h_(checked_size(n_h, path, "height")),
      n_w_(checked_size(n_w, path, "width")),
      path_(path),
      layout_(layout),
      rows_(n_w),
      cols_(n_h) {}

std::vector<Complex> rfft1d(std::span<const float> x, std::size_t n) {
  if (x.size() > n) {
    throw DimensionError("rfft1d: input length " + std::to_string(x.size()) +
                         " exceeds transform size " + std::to_string(n));
  }
  const FftPlan plan(n);
  std::vector<Complex> line(n);
  for (std::size_t j = 0; j < x.size(); ++j) line[j] = {x[j], 0.0f};
  plan.forward(line);
  line.resize(n / 2 + 1);
  return line;
}

std::pair<std::vector<Complex>, std::vector<Complex>> rfft1d_pair(
    std::span<const float> a, std::span<const float> b, std::size_t n) {
  if (a.size() > n || b.size() > n) {
    throw DimensionError("rfft1d_pair: input longer than transform size " +
                         std::to_string(n));
  }
  const FftPlan plan(n);
  std::vector<Complex> line(n);
  for (std::size_t j = 0; j < n; ++j) {
    line[j] = {j < a.size() ? a[j] : 0.0f, j < b.size() ? b[j] : 0.0f};
  }
  plan.forward(line);
  std::vector<Complex> A(n / 2 + 1);
  std::vector<Complex> B(n / 2 + 1);
  unpack_pair(line.data(), n, A.data(), B.data());
  return {std::move(A), std::move(B)};
}

std::vector<float> irfft1d(std::span<const Complex> half, std::size_t n) {
  if (half.size() != n / 2 + 1) {
    throw DimensionError("irfft1d: expected " + std::to_string(n / 2 + 1) +
                         " bins, got " + std::to_string(half.size()));
  }
  const FftPlan plan(n);
  std::vector<Complex> line(n);
  for (std::size_t k = 0; k < n; ++k) line[k] = hermitian_bin(half.data(), n, k);
  plan.inverse(line);
  std::vector<float> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = line[k].real();
  return out;
}

FreqTensor rfft2d(std::span<const float> plane, std::size_t h, std::size_t w,
                  const RfftPlan& plan) {
  if (plane.size() != h * w) {
    throw DimensionError("rfft2d: plane buffer does not hold h*w values");
  }
  if (h > plan.n_h() || w > plan.n_w()) {
    throw DimensionError("rfft2d: plane " + std::to_string(h) + "x" +
                         std::to_string(w) + " larger than transform " +
                         std::to_string(plan.n_h()) + "x" +
                         std::to_string(plan.n_w()));
  }
  FreqTensor out(freq_extents(1, 1, plan), FreqLayout::BDHW, plan.order());
  forward_planes(plane.data(), nullptr, h, w, plan, out.values().data(), nullptr);
  return out;
}

std::vector<float> irfft2d(const FreqTensor& freq, const RfftPlan& plan,
                           const ClipWindow& window) {
  check_spectrum(freq, plan);
  check_window(plan, window);
  if (freq.extents().d0 * freq.extents().d1 != 1) {
    throw DimensionError("irfft2d expects a single plane; use irfft2d_batched");
  }
  std::vector<float> out(window.height * window.width);
  inverse_plane(freq.values().data(), plan, window, out.data());
  return out;
}

std::vector<float> irfft2d(const FreqTensor& freq, const RfftPlan& plan,
                           std::size_t out_h, std::size_t out_w) {
  return irfft2d(freq, plan, ClipWindow{0, 0, out_h, out_w});
}

void rfft2d_batched(const RealTensor4& t, const RfftPlan& plan, FreqTensor& out) {
  if (t.height() > plan.n_h() || t.width() > plan.n_w()) {
    throw DimensionError("rfft2d_batched: planes " + std::to_string(t.height()) +
                         "x" + std::to_string(t.width()) +
                         " larger than transform " + std::to_string(plan.n_h()) +
                         "x" + std::to_string(plan.n_w()));
  }
  out.reshape(freq_extents(t.batch(), t.planes(), plan), FreqLayout::BDHW,
              plan.order());
  const std::size_t planes = t.batch() * t.planes();
  const std::size_t in_stride = t.height() * t.width();
  const std::size_t out_stride = plan.n_h() * plan.freq_width();
  const float* src = t.values().data();
  Complex* dst = out.values().data();
  std::size_t p = 0;
  for (; p + 1 < planes; p += 2) {
    forward_planes(src + p * in_stride, src + (p + 1) * in_stride, t.height(),
                   t.width(), plan, dst + p * out_stride,
                   dst + (p + 1) * out_stride);
  }
  if (p < planes) {
    forward_planes(src + p * in_stride, nullptr, t.height(), t.width(), plan,
                   dst + p * out_stride, nullptr);
  }
}

FreqTensor rfft2d_batched(const RealTensor4& t, const RfftPlan& plan) {
  FreqTensor out;
  rfft2d_batched(t, plan, out);
  return out;
}

void irfft2d_batched(const FreqTensor& freq, const RfftPlan& plan,
                     const ClipWindow& window, RealTensor4& out) {
  check_spectrum(freq, plan);
  check_window(plan, window);
  const Shape4 e = freq.extents();
  out.reset({e.d0, e.d1, window.height, window.width});
  const std::size_t planes = e.d0 * e.d1;
  const std::size_t in_stride = plan.n_h() * plan.freq_width();
  const std::size_t out_stride = window.height * window.width;
  for (std::size_t p = 0; p < planes; ++p) {
    inverse_plane(freq.values().data() + p * in_stride, plan, window,
                  out.values().data() + p * out_stride);
  }
}

}  // namespace fftconv
