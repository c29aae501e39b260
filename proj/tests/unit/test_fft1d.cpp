// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fftconv/error.hpp"
#include "fftconv/fft1d.hpp"
#include "test_support.hpp"

using namespace fftconv;
using test::random_complex;
using test::to_float;

namespace {

double rel(const std::vector<Complex>& got, const std::vector<Complex>& want) {
  return relative_max_error(got, want);
}

std::vector<Complex> impulse(std::size_t n) {
  std::vector<Complex> v(n);
  v[0] = 1.0f;
  return v;
}

void expect_all_ones(const std::vector<Complex>& v) {
  for (const Complex& c : v) {
    EXPECT_NEAR(c.real(), 1.0f, 1e-6f);
    EXPECT_NEAR(c.imag(), 0.0f, 1e-6f);
  }
}

}  // namespace

TEST(SizeHelpers, SmoothAndPowers) {
  EXPECT_TRUE(is_smooth(1));
  EXPECT_TRUE(is_smooth(14));
  EXPECT_TRUE(is_smooth(210));
  EXPECT_FALSE(is_smooth(13));
  EXPECT_FALSE(is_smooth(22));
  EXPECT_FALSE(is_smooth(0));
  EXPECT_EQ(next_pow2(13), 16u);
  EXPECT_EQ(next_pow2(16), 16u);
  EXPECT_EQ(next_pow2(1), 1u);
  EXPECT_EQ(log2_exact(64), 6u);
}

TEST(DftNaive, ImpulseAndConstant) {
  expect_all_ones(to_float(dft_naive(std::vector<Complex>{1, 0, 0, 0})));
  const auto c = dft_naive(std::vector<Complex>{1, 1, 1, 1});
  EXPECT_NEAR(c[0].real(), 4.0, 1e-12);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_NEAR(std::abs(c[k]), 0.0, 1e-12);
}

TEST(DftNaive, RampByHand) {
  const auto X = dft_naive(std::vector<Complex>{1, 2, 3, 4});
  const std::complex<double> want[] = {{10, 0}, {-2, 2}, {-2, 0}, {-2, -2}};
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(X[k].real(), want[k].real(), 1e-12);
    EXPECT_NEAR(X[k].imag(), want[k].imag(), 1e-12);
  }
}

TEST(Radix2Plan, TwiddlesAreUnitAndAntisymmetric) {
  for (std::size_t n = 2; n <= 4096; n *= 2) {
    Radix2Plan plan(n);
    ASSERT_EQ(plan.twiddles().size(), n / 2);
    for (std::size_t j = 0; j < n / 2; ++j) {
      EXPECT_NEAR(std::abs(plan.twiddles()[j]), 1.0f, 1e-6f);
      // w^{j+n/2} = -w^j, with w^{j+n/2} evaluated independently.
      const double ang = -2.0 * M_PI * static_cast<double>(j + n / 2) / n;
      EXPECT_NEAR(std::cos(ang), -plan.twiddles()[j].real(), 1e-6);
      EXPECT_NEAR(std::sin(ang), -plan.twiddles()[j].imag(), 1e-6);
    }
  }
}

TEST(Radix2Plan, RejectsNonPowerOfTwo) {
  EXPECT_THROW(Radix2Plan(12), UnsupportedSizeError);
  EXPECT_THROW(Radix2Plan(0), UnsupportedSizeError);
}

TEST(FftDit, ImpulseEverySize) {
  for (std::size_t n = 1; n <= 1024; n *= 2) {
    expect_all_ones(fft_dit(impulse(n), Radix2Plan(n)));
  }
}

TEST(FftDit, MatchesNaive) {
  std::mt19937 rng(11);
  for (std::size_t n = 2; n <= 4096; n *= 2) {
    Radix2Plan plan(n);
    auto x = random_complex(rng, n);
    EXPECT_LT(rel(fft_dit(x, plan), to_float(dft_naive(x))), n == 8 ? 1e-5 : 1e-4)
        << "n=" << n;
  }
}

TEST(FftDit, Linearity) {
  std::mt19937 rng(12);
  Radix2Plan plan(64);
  auto x = random_complex(rng, 64), y = random_complex(rng, 64);
  const Complex a{0.5f, -1.5f}, b{2.0f, 0.25f};
  std::vector<Complex> z(64);
  for (std::size_t i = 0; i < 64; ++i) z[i] = a * x[i] + b * y[i];
  auto X = fft_dit(x, plan), Y = fft_dit(y, plan), Z = fft_dit(z, plan);
  std::vector<Complex> comb(64);
  for (std::size_t i = 0; i < 64; ++i) comb[i] = a * X[i] + b * Y[i];
  EXPECT_LT(rel(Z, comb), 1e-5);
}

TEST(FftDit, LengthMismatchThrows) {
  Radix2Plan plan(8);
  EXPECT_THROW(fft_dit(std::vector<Complex>(4), plan), DimensionError);
  EXPECT_THROW(fft_dif_noreorder(std::vector<Complex>(16), plan), DimensionError);
}

TEST(FftDif, RampIsBitReversedSpectrum) {
  Spectrum s = fft_dif_noreorder(std::vector<Complex>{1, 2, 3, 4}, Radix2Plan(4));
  EXPECT_EQ(s.order, FreqOrder::BitReversedDIF);
  const Complex want[] = {{10, 0}, {-2, 0}, {-2, 2}, {-2, -2}};
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(s.bins[k].real(), want[k].real(), 1e-6f);
    EXPECT_NEAR(s.bins[k].imag(), want[k].imag(), 1e-6f);
  }
}

TEST(FftDif, ImpulseGivesOnes) {
  expect_all_ones(fft_dif_noreorder(impulse(32), Radix2Plan(32)).bins);
}

TEST(FftDif, PermutedMatchesDitAndNaive) {
  std::mt19937 rng(13);
  for (std::size_t n = 2; n <= 1024; n *= 2) {
    Radix2Plan plan(n);
    auto x = random_complex(rng, n);
    auto dif = bit_reverse_permute(fft_dif_noreorder(x, plan).bins);
    EXPECT_LT(rel(dif, fft_dit(x, plan)), 1e-5);
    EXPECT_LT(rel(dif, to_float(dft_naive(x))), 1e-4);
  }
}

TEST(BitReversal, Involution) {
  std::mt19937 rng(14);
  auto x = random_complex(rng, 128);
  EXPECT_EQ(bit_reverse_permute(bit_reverse_permute(x)), x);
  EXPECT_THROW(bit_reverse_permute(std::vector<Complex>(6)), UnsupportedSizeError);
}

TEST(ElidedInverse, RoundTrip) {
  std::mt19937 rng(15);
  for (std::size_t n = 1; n <= 256; n *= 2) {
    Radix2Plan plan(n);
    auto x = random_complex(rng, n);
    EXPECT_LT(rel(ifft_dit_from_bitreversed(fft_dif_noreorder(x, plan), plan), x), 1e-5);
  }
  Radix2Plan p64(64);
  auto imp = ifft_dit_from_bitreversed(fft_dif_noreorder(impulse(64), p64), p64);
  EXPECT_LT(rel(imp, impulse(64)), 1e-6);
}

TEST(ElidedInverse, RejectsNaturalOrder) {
  Radix2Plan plan(8);
  Spectrum s{std::vector<Complex>(8), FreqOrder::Natural};
  EXPECT_THROW(ifft_dit_from_bitreversed(s, plan), LayoutError);
}

TEST(ElidedInverse, PointwiseProductIsCircularCorrelation) {
  std::mt19937 rng(16);
  const std::size_t n = 8;
  Radix2Plan plan(n);
  auto x = random_complex(rng, n), c = random_complex(rng, n);
  Spectrum X = fft_dif_noreorder(x, plan), C = fft_dif_noreorder(c, plan);
  Spectrum P{std::vector<Complex>(n), FreqOrder::BitReversedDIF};
  Spectrum Q{std::vector<Complex>(n), FreqOrder::BitReversedDIF};
  for (std::size_t k = 0; k < n; ++k) {
    P.bins[k] = X.bins[k] * std::conj(C.bins[k]);
    Q.bins[k] = X.bins[k] * C.bins[k];
  }
  std::vector<Complex> corr(n), conv(n);
  for (std::size_t a = 0; a < n; ++a) {
    std::complex<double> s1{}, s2{};
    for (std::size_t u = 0; u < n; ++u) {
      s1 += std::complex<double>(x[(a + u) % n]) * std::conj(std::complex<double>(c[u]));
      s2 += std::complex<double>(x[(a + n - u) % n]) * std::complex<double>(c[u]);
    }
    corr[a] = Complex(s1);
    conv[a] = Complex(s2);
  }
  EXPECT_LT(rel(ifft_dit_from_bitreversed(P, plan), corr), 1e-5);
  EXPECT_LT(rel(ifft_dit_from_bitreversed(Q, plan), conv), 1e-5);
}

TEST(Ifft, NaturalRoundTripAndScale) {
  std::mt19937 rng(17);
  Radix2Plan plan(32);
  auto X = random_complex(rng, 32);
  auto x = ifft_dit(X, plan);
  auto back = fft_dit(x, plan);
  EXPECT_LT(rel(back, X), 1e-5);
  // Unnormalized forward of the unnormalized inverse gives n X.
  std::vector<Complex> unnorm(32);
  for (std::size_t i = 0; i < 32; ++i) unnorm[i] = x[i] * 32.0f;
  auto nx = fft_dit(unnorm, plan);
  std::vector<Complex> want(32);
  for (std::size_t i = 0; i < 32; ++i) want[i] = X[i] * 32.0f;
  EXPECT_LT(rel(nx, want), 1e-5);
}

TEST(SmoothPlan, FactorsMultiplyToN) {
  for (std::size_t n = 1; n <= 1000; ++n) {
    if (!is_smooth(n)) {
      EXPECT_THROW(SmoothPlan{n}, UnsupportedSizeError) << n;
      continue;
    }
    SmoothPlan plan(n);
    std::size_t prod = 1;
    for (unsigned f : plan.factors()) {
      EXPECT_TRUE(f == 2 || f == 3 || f == 5 || f == 7);
      prod *= f;
    }
    EXPECT_EQ(prod, n);
  }
}

TEST(FftSmooth, ImpulseAndSmallSizes) {
  expect_all_ones(fft_smooth(impulse(6), SmoothPlan(6)));
  std::mt19937 rng(18);
  for (std::size_t n : {15u, 14u, 7u, 5u, 3u}) {
    auto x = random_complex(rng, n);
    EXPECT_LT(rel(fft_smooth(x, SmoothPlan(n)), to_float(dft_naive(x))), 1e-5) << n;
  }
}

TEST(FftSmooth, AllSmoothSizesUpTo128) {
  std::mt19937 rng(19);
  for (std::size_t n = 1; n <= 128; ++n) {
    if (!is_smooth(n)) continue;
    SmoothPlan plan(n);
    auto x = random_complex(rng, n);
    EXPECT_LT(rel(fft_smooth(x, plan), to_float(dft_naive(x))), 1e-4) << n;
    EXPECT_LT(rel(ifft_smooth(fft_smooth(x, plan), plan), x), 1e-4) << n;
  }
}

TEST(FftSmooth, RejectsThirteen) {
  EXPECT_THROW(SmoothPlan(13), UnsupportedSizeError);
  EXPECT_THROW(FftPlan(26), UnsupportedSizeError);
}

TEST(FftBatched, RowsAreIndependent) {
  std::mt19937 rng(20);
  Radix2Plan r(16);
  SmoothPlan s(12);
  auto rows = random_complex(rng, 16 * 16);
  auto out = fft_batched(rows, 16, r);
  for (std::size_t b = 0; b < 16; ++b) {
    std::vector<Complex> row(rows.begin() + b * 16, rows.begin() + (b + 1) * 16);
    std::vector<Complex> got(out.begin() + b * 16, out.begin() + (b + 1) * 16);
    EXPECT_LT(rel(got, to_float(dft_naive(row))), 1e-5);
  }
  auto rows12 = random_complex(rng, 12);
  EXPECT_EQ(fft_batched(rows12, 1, s), fft_smooth(rows12, s));
  auto imps = std::vector<Complex>(64 * 8);
  for (std::size_t b = 0; b < 64; ++b) imps[b * 8] = 1.0f;
  expect_all_ones(fft_batched(imps, 64, Radix2Plan(8)));
  EXPECT_THROW(fft_batched(rows12, 2, s), DimensionError);
}

TEST(Parseval, AllPaths) {
  std::mt19937 rng(21);
  for (std::size_t n : {8u, 64u, 60u, 98u, 256u}) {
    auto x = random_complex(rng, n);
    FftPlan plan(n);
    std::vector<Complex> X = x;
    plan.forward(X);
    double ex = 0, eX = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ex += std::norm(std::complex<double>(x[i]));
      eX += std::norm(std::complex<double>(X[i]));
    }
    EXPECT_NEAR(eX / n, ex, 1e-4 * ex) << n;
  }
}

TEST(FftPlan, PathsAgreeAfterOrderNormalization) {
  std::mt19937 rng(22);
  for (std::size_t n = 2; n <= 512; n *= 2) {
    auto x = random_complex(rng, n);
    Radix2Plan r(n);
    SmoothPlan s(n);
    auto a = fft_dit(x, r);
    auto b = bit_reverse_permute(fft_dif_noreorder(x, r).bins);
    auto c = fft_smooth(x, s);
    std::vector<Complex> d = x;
    FftPlan(n).forward(d);
    EXPECT_LT(rel(b, a), 1e-4);
    EXPECT_LT(rel(c, a), 1e-4);
    EXPECT_LT(rel(d, a), 1e-4);
    FftPlan(n).inverse(d);
    EXPECT_LT(rel(d, x), 1e-5);
  }
}
