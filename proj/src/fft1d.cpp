// SPDX-License-Identifier: Apache-2.0
#include "fftconv/fft1d.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "complex_ops.hpp"
#include "fftconv/error.hpp"

namespace fftconv {

using detail::cmul;

bool is_power_of_two(std::size_t n) noexcept { return std::has_single_bit(n); }

bool is_smooth(std::size_t n) noexcept {
  if (n == 0) return false;
  for (std::size_t p : {2u, 3u, 5u, 7u}) {
    while (n % p == 0) n /= p;
  }
  return n == 1;
}

std::size_t next_pow2(std::size_t n) noexcept {
  return n <= 1 ? 1 : std::bit_ceil(n);
}

unsigned log2_exact(std::size_t n) noexcept {
  return static_cast<unsigned>(std::countr_zero(n));
}

namespace {

// exp(-2 pi i k / n) in double, k reduced mod n.
std::complex<double> root(std::size_t k, std::size_t n) {
  const double angle =
      -2.0 * std::numbers::pi * static_cast<double>(k % n) / static_cast<double>(n);
  return {std::cos(angle), std::sin(angle)};
}

Complex root_f(std::size_t k, std::size_t n) {
  const auto r = root(k, n);
  return {static_cast<float>(r.real()), static_cast<float>(r.imag())};
}

void check_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": input length " +
                         std::to_string(got) + " does not match plan size " +
                         std::to_string(want));
  }
}

void scale(std::span<Complex> data, float factor) {
  for (Complex& v : data) v *= factor;
}

}  // namespace

std::vector<std::complex<double>> dft_naive(
    std::span<const std::complex<double>> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> roots(n);
  for (std::size_t k = 0; k < n; ++k) roots[k] = root(k, n);
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += x[j] * roots[(k * j) % n];
    out[k] = acc;
  }
  return out;
}

std::vector<std::complex<double>> dft_naive(std::span<const Complex> x) {
  std::vector<std::complex<double>> wide(x.begin(), x.end());
  return dft_naive(std::span<const std::complex<double>>(wide));
}

// --- radix 2 ----------------------------------------------------------------

Radix2Plan::Radix2Plan(std::size_t n) : n_(n), log2n_(0) {
  if (!is_power_of_two(n)) {
    throw UnsupportedSizeError("radix-2 plan needs a power of two, got " +
                               std::to_string(n));
  }
  log2n_ = log2_exact(n);
  twiddles_.resize(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j) twiddles_[j] = root_f(j, n);
  bitrev_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::uint32_t r = 0;
    for (unsigned b = 0; b < log2n_; ++b) r |= ((k >> b) & 1u) << (log2n_ - 1 - b);
    bitrev_[k] = r;
  }
}

void bit_reverse_inplace(std::span<Complex> data, const Radix2Plan& plan) {
  const auto rev = plan.bit_reversal();
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (k < rev[k]) std::swap(data[k], data[rev[k]]);
  }
}

void dit_butterflies(std::span<Complex> data, const Radix2Plan& plan,
                     Direction dir) {
  const std::size_t n = plan.n();
  const Complex* tw = plan.twiddles().data();
  const bool inverse = dir == Direction::Inverse;
  Complex* a = data.data();
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t step = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        Complex w = tw[j * step];
        if (inverse) w = std::conj(w);
        const Complex u = a[start + j];
        const Complex v = cmul(a[start + j + half], w);
        a[start + j] = u + v;
        a[start + j + half] = u - v;
      }
    }
  }
}

void dif_butterflies(std::span<Complex> data, const Radix2Plan& plan,
                     Direction dir) {
  const std::size_t n = plan.n();
  const Complex* tw = plan.twiddles().data();
  const bool inverse = dir == Direction::Inverse;
  Complex* a = data.data();
  for (std::size_t len = n; len >= 2; len >>= 1) {
    const std::size_t half = len >> 1;
    const std::size_t step = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        Complex w = tw[j * step];
        if (inverse) w = std::conj(w);
        const Complex u = a[start + j];
        const Complex v = a[start + j + half];
        a[start + j] = u + v;
        a[start + j + half] = cmul(u - v, w);
      }
    }
  }
}

std::vector<Complex> fft_dit(std::span<const Complex> x, const Radix2Plan& plan) {
  check_length(x.size(), plan.n(), "fft_dit");
  std::vector<Complex> out(x.begin(), x.end());
  bit_reverse_inplace(out, plan);
  dit_butterflies(out, plan, Direction::Forward);
  return out;
}

std::vector<Complex> ifft_dit(std::span<const Complex> X, const Radix2Plan& plan) {
  check_length(X.size(), plan.n(), "ifft_dit");
  std::vector<Complex> out(X.begin(), X.end());
  bit_reverse_inplace(out, plan);
  dit_butterflies(out, plan, Direction::Inverse);
  scale(out, 1.0f / static_cast<float>(plan.n()));
  return out;
}

Spectrum fft_dif_noreorder(std::span<const Complex> x, const Radix2Plan& plan) {
  check_length(x.size(), plan.n(), "fft_dif_noreorder");
  Spectrum out{{x.begin(), x.end()}, FreqOrder::BitReversedDIF};
  dif_butterflies(out.bins, plan, Direction::Forward);
  return out;
}

std::vector<Complex> ifft_dit_from_bitreversed(const Spectrum& X,
                                               const Radix2Plan& plan) {
  if (X.order != FreqOrder::BitReversedDIF) {
    throw LayoutError(
        "ifft_dit_from_bitreversed expects a bit-reversed (DIF) spectrum");
  }
  check_length(X.bins.size(), plan.n(), "ifft_dit_from_bitreversed");
  std::vector<Complex> out = X.bins;
  dit_butterflies(out, plan, Direction::Inverse);
  scale(out, 1.0f / static_cast<float>(plan.n()));
  return out;
}

std::vector<Complex> bit_reverse_permute(std::span<const Complex> x) {
  const Radix2Plan plan(x.size());
  std::vector<Complex> out(x.begin(), x.end());
  bit_reverse_inplace(out, plan);
  return out;
}

// --- mixed radix --------------------------------------------------------------

SmoothPlan::SmoothPlan(std::size_t n) : n_(n) {
  if (!is_smooth(n)) {
    throw UnsupportedSizeError("size " + std::to_string(n) +
                               " is not 7-smooth (no Bluestein fallback)");
  }
  std::size_t rest = n;
  for (unsigned p : {2u, 3u, 5u, 7u}) {
    while (rest % p == 0) {
      factors_.push_back(p);
      rest /= p;
    }
  }
  std::size_t span = n;
  for (unsigned p : factors_) {
    const std::size_t m = span / p;
    Stage stage{p, m, {}};
    stage.twiddles.resize((p - 1) * m);
    for (std::size_t r = 1; r < p; ++r) {
      for (std::size_t k = 0; k < m; ++k) {
        stage.twiddles[(r - 1) * m + k] = root_f(r * k, span);
      }
    }
    stages_.push_back(std::move(stage));
    span = m;
  }
  for (std::size_t j = 0; j < 3; ++j) roots3_.push_back(root_f(j, 3));
  for (std::size_t j = 0; j < 5; ++j) roots5_.push_back(root_f(j, 5));
  for (std::size_t j = 0; j < 7; ++j) roots7_.push_back(root_f(j, 7));
}

void SmoothPlan::recurse(const Complex* in, std::size_t stride, Complex* out,
                         std::size_t level) const {
  if (level == stages_.size()) {
    out[0] = in[0];
    return;
  }
  const Stage& st = stages_[level];
  const std::size_t p = st.radix;
  const std::size_t m = st.m;

  if (m > 1) {
    for (std::size_t r = 0; r < p; ++r) {
      recurse(in + r * stride, stride * p, out + r * m, level + 1);
    }
  }

  if (p == 2) {
    if (m == 1) {
      const Complex a = in[0];
      const Complex b = in[stride];
      out[0] = a + b;
      out[1] = a - b;
      return;
    }
    const Complex* tw = st.twiddles.data();
    for (std::size_t k = 0; k < m; ++k) {
      const Complex a = out[k];
      const Complex b = cmul(out[m + k], tw[k]);
      out[k] = a + b;
      out[m + k] = a - b;
    }
    return;
  }

  const Complex* roots = p == 3 ? roots3_.data() : p == 5 ? roots5_.data()
                                                          : roots7_.data();
  Complex t[7];
  for (std::size_t k = 0; k < m; ++k) {
    if (m == 1) {
      for (std::size_t r = 0; r < p; ++r) t[r] = in[r * stride];
    } else {
      t[0] = out[k];
      for (std::size_t r = 1; r < p; ++r) {
        t[r] = cmul(out[r * m + k], st.twiddles[(r - 1) * m + k]);
      }
    }
    for (std::size_t q = 0; q < p; ++q) {
      Complex acc = t[0];
      for (std::size_t r = 1; r < p; ++r) acc += cmul(t[r], roots[(r * q) % p]);
      out[q * m + k] = acc;
    }
  }
}

void SmoothPlan::execute(std::span<const Complex> in,
                         std::span<Complex> out) const {
  check_length(in.size(), n_, "fft_smooth");
  check_length(out.size(), n_, "fft_smooth");
  recurse(in.data(), 1, out.data(), 0);
}

std::vector<Complex> fft_smooth(std::span<const Complex> x,
                                const SmoothPlan& plan) {
  check_length(x.size(), plan.n(), "fft_smooth");
  std::vector<Complex> out(plan.n());
  plan.execute(x, out);
  return out;
}

std::vector<Complex> ifft_smooth(std::span<const Complex> X,
                                 const SmoothPlan& plan) {
  check_length(X.size(), plan.n(), "ifft_smooth");
  std::vector<Complex> conj_in(X.size());
  std::transform(X.begin(), X.end(), conj_in.begin(),
                 [](Complex v) { return std::conj(v); });
  std::vector<Complex> out(plan.n());
  plan.execute(conj_in, out);
  const float inv_n = 1.0f / static_cast<float>(plan.n());
  for (Complex& v : out) v = std::conj(v) * inv_n;
  return out;
}

// --- batched ------------------------------------------------------------------

std::vector<Complex> fft_batched(std::span<const Complex> rows,
                                 std::size_t batch, const Radix2Plan& plan) {
  const std::size_t n = plan.n();
  check_length(rows.size(), batch * n, "fft_batched");
  std::vector<Complex> out(rows.begin(), rows.end());
  for (std::size_t b = 0; b < batch; ++b) {
    std::span<Complex> row(out.data() + b * n, n);
    bit_reverse_inplace(row, plan);
    dit_butterflies(row, plan, Direction::Forward);
  }
  return out;
}

std::vector<Complex> fft_batched(std::span<const Complex> rows,
                                 std::size_t batch, const SmoothPlan& plan) {
  const std::size_t n = plan.n();
  check_length(rows.size(), batch * n, "fft_batched");
  std::vector<Complex> out(rows.size());
  for (std::size_t b = 0; b < batch; ++b) {
    plan.execute(rows.subspan(b * n, n), std::span<Complex>(out.data() + b * n, n));
  }
  return out;
}

// --- dispatch -----------------------------------------------------------------

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (is_power_of_two(n)) {
    radix2_ = std::make_shared<const Radix2Plan>(n);
  } else {
    smooth_ = std::make_shared<const SmoothPlan>(n);
  }
}

namespace {

std::vector<Complex>& scratch(std::size_t n) {
  thread_local std::vector<Complex> buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}

}  // namespace

void FftPlan::forward(std::span<Complex> data) const {
  if (radix2_) {
    bit_reverse_inplace(data, *radix2_);
    dit_butterflies(data, *radix2_, Direction::Forward);
    return;
  }
  auto& tmp = scratch(n_);
  std::copy(data.begin(), data.end(), tmp.begin());
  smooth_->execute({tmp.data(), n_}, data);
}

void FftPlan::inverse(std::span<Complex> data) const {
  const float inv_n = 1.0f / static_cast<float>(n_);
  if (radix2_) {
    bit_reverse_inplace(data, *radix2_);
    dit_butterflies(data, *radix2_, Direction::Inverse);
    scale(data, inv_n);
    return;
  }
  auto& tmp = scratch(n_);
  std::transform(data.begin(), data.end(), tmp.begin(),
                 [](Complex v) { return std::conj(v); });
  smooth_->execute({tmp.data(), n_}, data);
  for (Complex& v : data) v = std::conj(v) * inv_n;
}

}  // namespace fftconv
