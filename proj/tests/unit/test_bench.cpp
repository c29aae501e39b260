// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "fftconv/bench.hpp"
#include "fftconv/error.hpp"
#include "test_support.hpp"

using namespace fftconv;

namespace {

GridSpec desk_grid() { return {{1, 4}, {4, 16}, {}, {3, 9}, {8, 16}}; }

GridSpec tiny_grid() { return {{1, 2}, {2}, {3}, {3}, {4}}; }

std::size_t line_of(std::string_view text) {
  try {
    parse_grid(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(Methods, NamesRoundTrip) {
  for (Method m : kAllMethods) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_FALSE(parse_method("cudnn").has_value());
}

TEST(Grid, DeskGridExpandsWithOutputParameterization) {
  const auto problems = desk_grid().problems();
  ASSERT_EQ(problems.size(), 16u);
  for (const ConvProblem& p : problems) {
    EXPECT_EQ(p.fp, p.f);
    EXPECT_EQ(p.h, p.w);
    EXPECT_EQ(p.out_h() == 8 || p.out_h() == 16, true);
    EXPECT_EQ(p.h, p.out_h() + p.kh - 1);
  }
}

TEST(Grid, ParsesKeysCommentsAndDefaults) {
  const GridSpec g = parse_grid(
      "# desk grid\n"
      "S = 1, 4\n"
      "\n"
      "f=4,16   # paired with fp\n"
      "k = 3 ,9\r\n"
      "y = 8,16");
  EXPECT_EQ(g.S, (std::vector<std::size_t>{1, 4}));
  EXPECT_EQ(g.f, (std::vector<std::size_t>{4, 16}));
  EXPECT_TRUE(g.fp.empty());
  EXPECT_EQ(g.k, (std::vector<std::size_t>{3, 9}));
  EXPECT_EQ(g.y, (std::vector<std::size_t>{8, 16}));
  EXPECT_EQ(g.problems().size(), 16u);

  const GridSpec only_s = parse_grid("S = 2\nfp = 3\n");
  EXPECT_EQ(only_s.S, (std::vector<std::size_t>{2}));
  EXPECT_EQ(only_s.f, default_grid().f);
  for (const ConvProblem& p : only_s.problems()) EXPECT_EQ(p.fp, 3u);

  EXPECT_EQ(parse_grid("").problems(), default_grid().problems());
}

TEST(Grid, MalformedLinesNameTheLine) {
  EXPECT_EQ(line_of("S = 1\nspeed = 3\n"), 2u);
  EXPECT_EQ(line_of("S = 1\n\nf = 0\n"), 3u);
  EXPECT_EQ(line_of("k = 3,\n"), 1u);
  EXPECT_EQ(line_of("y 8\n"), 1u);
  EXPECT_EQ(line_of("S = 1\nS = 2\n"), 2u);
  EXPECT_EQ(line_of("f = -4\n"), 1u);
  EXPECT_THROW(load_grid("/nonexistent/grid.txt"), FormatError);
}

TEST(Grid, DefaultStaysDeskScale) {
  for (const ConvProblem& p : default_grid().problems()) {
    EXPECT_LE(p.S, 16u);
    EXPECT_LE(p.f, 32u);
    EXPECT_LE(p.fp, 32u);
    EXPECT_LE(p.out_h(), 32u);
  }
}

TEST(MethodPlan, EachMethodGetsItsPath) {
  const ConvProblem p{.S = 1, .f = 2, .fp = 2, .h = 40, .w = 40, .kh = 9, .kw = 9};
  EXPECT_FALSE(method_plan(p, Method::Direct).has_value());
  const ConvPlan r2 = *method_plan(p, Method::FftRadix2);
  EXPECT_EQ(r2.n_h, 64u);
  EXPECT_FALSE(r2.tiling.has_value());
  const ConvPlan sm = *method_plan(p, Method::FftSmooth);
  EXPECT_EQ(sm.n_h, 40u);
  const ConvPlan ti = *method_plan(p, Method::FftTiled);
  ASSERT_TRUE(ti.tiling.has_value());
  EXPECT_EQ(ti.fft_path, FftPath::SmoothNatural);
  EXPECT_EQ(ti.n_h, ti.tiling->d_h + p.kh - 1);
  EXPECT_GE(ti.n_h, ti.tiling->d_h + p.kh - 1);
  EXPECT_LE(ti.tiling->d_h, p.out_h());
}

TEST(Tred, ToyCaseCountsSixteen) {
  // 2x2 kernel over a 3x3 input: 4 outputs of 4 multiply-adds each.
  const ConvProblem p{.S = 1, .f = 1, .fp = 1, .h = 3, .w = 3, .kh = 2, .kw = 2};
  EXPECT_EQ(flop_count(p), 16u);
  EXPECT_EQ(tred_per_s(16, 2.0), 8e6);
}

TEST(Bench, RowsCoverGridPassesAndMethods) {
  BenchOptions o;
  o.trials = 1;
  std::size_t seen = 0;
  o.on_record = [&](const BenchRecord&) { ++seen; };
  const GridSpec g = tiny_grid();
  const auto rows = run_bench(g, o);
  ASSERT_EQ(rows.size(), g.problems().size() * 3 * kAllMethods.size());
  EXPECT_EQ(seen, rows.size());
  for (const BenchRecord& r : rows) {
    EXPECT_TRUE(std::isfinite(r.time_us));
    EXPECT_GT(r.time_us, 0.0);
    EXPECT_GT(r.tred_per_s, 0.0);
    EXPECT_EQ(r.tred_per_s, tred_per_s(flop_count(r.problem), r.time_us));
    EXPECT_EQ(r.problem_size, r.problem.S * r.problem.f * r.problem.fp);
    if (r.method == Method::Direct) {
      EXPECT_EQ(r.speedup_vs_direct, 1.0);
      EXPECT_EQ(r.plan_nh, 0u);
    } else {
      EXPECT_GT(r.plan_nh, 0u);
    }
  }
}

TEST(Bench, MethodSubsetStillReferencesDirect) {
  BenchOptions o;
  o.trials = 1;
  o.methods = {Method::FftSmooth};
  const auto rows = run_bench(tiny_grid(), o);
  ASSERT_EQ(rows.size(), 2u * 3u);
  for (const BenchRecord& r : rows) EXPECT_GT(r.speedup_vs_direct, 0.0);
}

TEST(Csv, RoundTripsEveryField) {
  BenchOptions o;
  o.trials = 1;
  const auto rows = run_bench(tiny_grid(), o);
  std::stringstream ss;
  write_csv(ss, rows, 1);
  const std::string text = ss.str();
  EXPECT_NE(text.find("# workers=1\n"), std::string::npos);
  EXPECT_NE(text.find(std::string(kCsvColumns) + "\n"), std::string::npos);
  const auto back = read_csv(ss);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].problem, rows[i].problem);
    EXPECT_EQ(back[i].pass, rows[i].pass);
    EXPECT_EQ(back[i].method, rows[i].method);
    EXPECT_EQ(back[i].plan_nh, rows[i].plan_nh);
    EXPECT_EQ(back[i].time_us, rows[i].time_us);
    EXPECT_EQ(back[i].speedup_vs_direct, rows[i].speedup_vs_direct);
    EXPECT_EQ(back[i].tred_per_s, rows[i].tred_per_s);
    EXPECT_EQ(back[i].tred_per_s, tred_per_s(flop_count(back[i].problem), back[i].time_us));
  }
}

TEST(Csv, RejectsMalformedRows) {
  std::stringstream a("# x\nS,f\n");
  EXPECT_THROW(read_csv(a), ParseError);
  std::stringstream b(std::string(kCsvColumns) + "\n1,1,1,3,3,2,2,fprop,direct,0,0,1.5,1,1\n");
  EXPECT_THROW(read_csv(b), ParseError);
  std::stringstream c(std::string(kCsvColumns) +
                      "\n1,1,1,3,3,2,2,sideways,direct,0,0,1.5,1,1,1\n");
  EXPECT_THROW(read_csv(c), ParseError);
  std::stringstream d("");
  EXPECT_THROW(read_csv(d), ParseError);
}

TEST(Verify, DefaultSuitePasses) {
  const VerifyReport r = run_verify({});
  EXPECT_TRUE(r.ok());
  for (const PassReport& p : r.passes) {
    EXPECT_EQ(p.checks, 20u * 4u);
    EXPECT_LT(p.max_error, 1.0);
  }
}

TEST(Verify, WrongConjugationFails) {
  VerifyOptions o;
  o.trials = 5;
  o.product_override = {{Pass::Bprop, SpectralProduct{false, true}}};
  const VerifyReport r = run_verify(o);
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.passes[0].failures, 0u);
  EXPECT_GT(r.passes[1].failures, 0u);

  o.product_override = {{Pass::AccGrad, SpectralProduct{false, true}}};
  EXPECT_GT(run_verify(o).passes[2].failures, 0u);
}

TEST(Verify, ZeroTrialsIsNotOk) {
  VerifyOptions o;
  o.trials = 0;
  EXPECT_FALSE(run_verify(o).ok());
}

TEST(Spectrum, OnesGiveDcOnly) {
  RealTensor4 t(1, 1, 4, 4);
  for (float& v : t.values()) v = 1.0f;
  const FreqTensor s = forward_spectrum(t, 4, 4);
  EXPECT_EQ(s.extents(), (Shape4{1, 1, 4, 3}));
  EXPECT_NEAR(s(0, 0, 0, 0).real(), 16.0f, 1e-5f);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i || j) EXPECT_LT(std::abs(s(0, 0, i, j)), 1e-5f);
}

TEST(Spectrum, MatchesNaiveDftAndRoundTrips) {
  std::mt19937 rng(8);
  const RealTensor4 t = test::random_tensor(rng, {2, 3, 8, 8});
  const FreqTensor s = forward_spectrum(t, 8, 8);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t p = 0; p < 3; ++p) {
      const auto plane = t.plane(b, p);
      const auto ref = test::naive_dft2d({plane.begin(), plane.end()}, 8, 8, 8, 8);
      double worst = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
          const std::complex<double> got(s(b, p, i, j));
          worst = std::max(worst, std::abs(got - ref[i * 8 + j]));
          scale = std::max(scale, std::abs(ref[i * 8 + j]));
        }
      }
      EXPECT_LT(worst / scale, 1e-5);
    }
  }
  const RealTensor4 back = inverse_spectrum(s, 8, 8, 8);
  EXPECT_LT(relative_max_error(back.values(), t.values()), 1e-5);
}

TEST(Spectrum, OddWidthAndPaddedTransform) {
  std::mt19937 rng(9);
  const RealTensor4 t = test::random_tensor(rng, {1, 2, 5, 7});
  const FreqTensor s = forward_spectrum(t, 6, 9);
  EXPECT_EQ(s.extents(), (Shape4{1, 2, 6, 5}));
  EXPECT_LT(relative_max_error(inverse_spectrum(s, 9, 5, 7).values(), t.values()), 1e-5);
  EXPECT_THROW(forward_spectrum(t, 4, 9), DimensionError);
  EXPECT_THROW(forward_spectrum(t, 11, 9), UnsupportedSizeError);
  EXPECT_THROW(inverse_spectrum(s, 12, 5, 7), DimensionError);
}
