// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "fftconv/conv_engine.hpp"
#include "fftconv/error.hpp"
#include "test_support.hpp"

using namespace fftconv;
using test::dot;
using test::numeric_gradient;
using test::random_tensor;

namespace {

double rel(const RealTensor4& got, const RealTensor4& want) {
  EXPECT_EQ(got.shape(), want.shape());
  if (got.shape() != want.shape()) return 1e9;
  return relative_max_error(got.values(), want.values());
}

struct Operands {
  RealTensor4 x, wgt, gy;
};

Operands make_operands(std::mt19937& rng, const ConvProblem& p) {
  return {random_tensor(rng, p.input_shape()), random_tensor(rng, p.weight_shape()),
          random_tensor(rng, p.output_shape())};
}

// Max relative error of the three passes against the direct oracle.
double worst_error(const ConvPlan& plan, const Operands& o, WorkBuffers& buf) {
  const Padding pad{plan.problem.ph, plan.problem.pw};
  double e = rel(fprop_fft(o.x, o.wgt, plan, buf), fprop_direct(o.x, o.wgt, pad));
  e = std::max(e, rel(bprop_fft(o.gy, o.wgt, plan, buf), bprop_direct(o.gy, o.wgt, pad)));
  e = std::max(e, rel(accgrad_fft(o.gy, o.x, plan, buf), accgrad_direct(o.gy, o.x, pad)));
  return e;
}

ConvProblem random_problem(std::mt19937& rng) {
  std::uniform_int_distribution<int> pick(0, 2), spatial(4, 16), kern(0, 3), pad(0, 2);
  const std::size_t counts[] = {1, 2, 4}, kernels[] = {1, 2, 3, 5};
  ConvProblem p;
  p.S = counts[pick(rng)];
  p.f = counts[pick(rng)];
  p.fp = counts[pick(rng)];
  p.h = spatial(rng);
  p.w = spatial(rng);
  p.kh = kernels[kern(rng)];
  p.kw = kernels[kern(rng)];
  p.ph = pad(rng);
  p.pw = pad(rng);
  return p;
}

}  // namespace

TEST(ConvPlan, DefaultSizesPerPath) {
  const ConvProblem p{.S = 1, .f = 1, .fp = 1, .h = 13, .w = 12, .kh = 3, .kw = 3};
  const ConvPlan r = default_plan(p, FftPath::Radix2Elided);
  EXPECT_EQ(r.n_h, 16u);
  EXPECT_EQ(r.n_w, 16u);
  const ConvPlan s = default_plan(p, FftPath::SmoothNatural);
  EXPECT_EQ(s.n_h, 14u);
  EXPECT_EQ(s.n_w, 12u);
  EXPECT_GT(s.buffer_bytes, 0u);
  EXPECT_EQ(describe(r), "16x16 radix2 batched");
}

TEST(ConvPlan, RejectsBadSizesAndTiles) {
  const ConvProblem p{.S = 1, .f = 1, .fp = 1, .h = 13, .w = 13, .kh = 3, .kw = 3};
  EXPECT_THROW(make_plan(p, 13, 14, FftPath::SmoothNatural), UnsupportedSizeError);
  EXPECT_THROW(make_plan(p, 14, 14, FftPath::Radix2Elided), UnsupportedSizeError);
  EXPECT_THROW(make_plan(p, 12, 14, FftPath::SmoothNatural), PlanError);
  EXPECT_THROW(make_plan(p, 16, 16, FftPath::Radix2Elided, GemmStrategy::Batched,
                         TileSpec2d{0, 4}),
               PlanError);
  EXPECT_THROW(make_plan(p, 16, 16, FftPath::Radix2Elided, GemmStrategy::Batched,
                         TileSpec2d{12, 4}),
               PlanError);
  EXPECT_THROW(make_plan(p, 4, 8, FftPath::Radix2Elided, GemmStrategy::Batched,
                         TileSpec2d{4, 4}),
               PlanError);
  EXPECT_NO_THROW(make_plan(p, 8, 8, FftPath::Radix2Elided, GemmStrategy::Batched,
                            TileSpec2d{4, 4}));
  ConvProblem bad = p;
  bad.kh = 20;
  EXPECT_THROW(make_plan(bad, 32, 32, FftPath::Radix2Elided), DimensionError);
}

TEST(ConvPlan, OperandShapeMustMatchPlan) {
  const ConvProblem p{.S = 2, .f = 2, .fp = 2, .h = 8, .w = 8, .kh = 3, .kw = 3};
  const ConvPlan plan = default_plan(p, FftPath::Radix2Elided);
  WorkBuffers buf;
  EXPECT_THROW(fprop_fft(RealTensor4(2, 2, 9, 8), RealTensor4(p.weight_shape()), plan, buf),
               PlanError);
  EXPECT_THROW(bprop_fft(RealTensor4(p.input_shape()), RealTensor4(p.weight_shape()), plan, buf),
               PlanError);
}

TEST(FpropFft, OnesCountOverlaps) {
  const ConvProblem p{.S = 1, .f = 1, .fp = 1, .h = 3, .w = 3, .kh = 2, .kw = 2};
  RealTensor4 x(p.input_shape()), k(p.weight_shape());
  for (float& v : x.values()) v = 1.0f;
  for (float& v : k.values()) v = 1.0f;
  WorkBuffers buf;
  for (FftPath path : {FftPath::Radix2Elided, FftPath::SmoothNatural}) {
    const RealTensor4 y = fprop_fft(x, k, default_plan(p, path), buf);
    ASSERT_EQ(y.shape(), (Shape4{1, 1, 2, 2}));
    for (float v : y.values()) EXPECT_NEAR(v, 4.0f, 1e-5f);
  }
}

TEST(FpropFft, UnitKernelIsIdentityForAnyPlan) {
  std::mt19937 rng(81);
  const ConvProblem p{.S = 2, .f = 1, .fp = 1, .h = 7, .w = 5, .kh = 1, .kw = 1};
  const RealTensor4 x = random_tensor(rng, p.input_shape());
  RealTensor4 k(p.weight_shape());
  k.values()[0] = 1.0f;
  WorkBuffers buf;
  for (const ConvPlan& plan : {make_plan(p, 8, 8, FftPath::Radix2Elided),
                              make_plan(p, 7, 5, FftPath::SmoothNatural),
                              make_plan(p, 9, 10, FftPath::SmoothNatural),
                              make_plan(p, 32, 16, FftPath::Radix2Elided)}) {
    EXPECT_LT(rel(fprop_fft(x, k, plan, buf), x), 1e-5) << describe(plan);
    EXPECT_LT(rel(bprop_fft(x, k, plan, buf), x), 1e-5) << describe(plan);
  }
}

TEST(EngineFft, DeskLayerWithOddInput) {
  std::mt19937 rng(82);
  const ConvProblem p{.S = 4, .f = 8, .fp = 8, .h = 13, .w = 13, .kh = 3, .kw = 3};
  const Operands o = make_operands(rng, p);
  WorkBuffers buf;
  for (const ConvPlan& plan : {make_plan(p, 14, 14, FftPath::SmoothNatural),
                              make_plan(p, 16, 16, FftPath::Radix2Elided),
                              make_plan(p, 15, 16, FftPath::SmoothNatural)}) {
    EXPECT_LT(worst_error(plan, o, buf), engine_tolerance(plan)) << describe(plan);
  }
}

TEST(BpropFft, MatchesDirectAndZeroGradient) {
  std::mt19937 rng(83);
  const ConvProblem p{.S = 2, .f = 3, .fp = 2, .h = 8, .w = 8, .kh = 3, .kw = 3};
  const Operands o = make_operands(rng, p);
  WorkBuffers buf;
  for (FftPath path : {FftPath::Radix2Elided, FftPath::SmoothNatural}) {
    const ConvPlan plan = default_plan(p, path);
    EXPECT_LT(rel(bprop_fft(o.gy, o.wgt, plan, buf), bprop_direct(o.gy, o.wgt)), 1e-4);
    const RealTensor4 zero = bprop_fft(RealTensor4(p.output_shape()), o.wgt, plan, buf);
    for (float v : zero.values()) EXPECT_EQ(v, 0.0f);
  }
}

TEST(AccGradFft, MatchesDirectAndImpulses) {
  std::mt19937 rng(84);
  const ConvProblem p{.S = 3, .f = 2, .fp = 2, .h = 9, .w = 9, .kh = 4, .kw = 4};
  const Operands o = make_operands(rng, p);
  WorkBuffers buf;
  for (FftPath path : {FftPath::Radix2Elided, FftPath::SmoothNatural}) {
    const ConvPlan plan = default_plan(p, path);
    EXPECT_LT(rel(accgrad_fft(o.gy, o.x, plan, buf), accgrad_direct(o.gy, o.x)), 1e-4);
    const RealTensor4 zero = accgrad_fft(RealTensor4(p.output_shape()), o.x, plan, buf);
    for (float v : zero.values()) EXPECT_EQ(v, 0.0f);
  }
  const ConvProblem q{.S = 1, .f = 1, .fp = 1, .h = 6, .w = 6, .kh = 3, .kw = 3};
  RealTensor4 x(q.input_shape()), gy(q.output_shape());
  x(0, 0, 0, 0) = 1.0f;
  gy(0, 0, 0, 0) = 1.0f;
  const RealTensor4 gw = accgrad_fft(gy, x, default_plan(q, FftPath::Radix2Elided), buf);
  for (std::size_t u = 0; u < 3; ++u)
    for (std::size_t v = 0; v < 3; ++v)
      EXPECT_NEAR(gw(0, 0, u, v), (u == 0 && v == 0) ? 1.0f : 0.0f, 1e-6f);
}

TEST(EngineFft, RandomProblemsMatchDirect) {
  std::mt19937 rng(85);
  WorkBuffers buf;
  for (int trial = 0; trial < 40; ++trial) {
    const ConvProblem p = random_problem(rng);
    if (p.kh > p.padded_h() || p.kw > p.padded_w()) continue;
    const Operands o = make_operands(rng, p);
    for (FftPath path : {FftPath::Radix2Elided, FftPath::SmoothNatural}) {
      const ConvPlan plan = default_plan(p, path);
      EXPECT_LT(worst_error(plan, o, buf), engine_tolerance(plan))
          << "trial " << trial << " " << describe(plan);
    }
  }
}

TEST(EngineFft, EveryGemmStrategyAgrees) {
  std::mt19937 rng(86);
  const ConvProblem p{.S = 3, .f = 5, .fp = 4, .h = 10, .w = 9, .kh = 3, .kw = 2, .ph = 1};
  const Operands o = make_operands(rng, p);
  WorkBuffers buf;
  for (GemmStrategy g : {GemmStrategy::Batched, GemmStrategy::PerBin, GemmStrategy::Tiled}) {
    const ConvPlan plan = default_plan(p, FftPath::SmoothNatural, g);
    EXPECT_LT(worst_error(plan, o, buf), engine_tolerance(plan)) << describe(plan);
  }
}

TEST(EngineFft, TiledPlansMatchDirect) {
  std::mt19937 rng(87);
  WorkBuffers buf;
  for (int trial = 0; trial < 20; ++trial) {
    const ConvProblem p = random_problem(rng);
    if (p.kh > p.padded_h() || p.kw > p.padded_w()) continue;
    const Operands o = make_operands(rng, p);
    std::uniform_int_distribution<std::size_t> dh(1, p.out_h()), dw(1, p.out_w());
    const TileSpec2d t{dh(rng), dw(rng)};
    for (FftPath path : {FftPath::Radix2Elided, FftPath::SmoothNatural}) {
      const ConvPlan plan = default_plan(p, path, GemmStrategy::Batched, t);
      EXPECT_LT(worst_error(plan, o, buf), engine_tolerance(plan))
          << "trial " << trial << " " << describe(plan);
    }
  }
}

TEST(EngineFft, PathsAgree) {
  std::mt19937 rng(88);
  const ConvProblem p{.S = 2, .f = 3, .fp = 2, .h = 12, .w = 11, .kh = 5, .kw = 3};
  const Operands o = make_operands(rng, p);
  WorkBuffers buf;
  const ConvPlan a = make_plan(p, 16, 16, FftPath::Radix2Elided);
  const ConvPlan b = make_plan(p, 16, 16, FftPath::SmoothNatural);
  EXPECT_LT(rel(fprop_fft(o.x, o.wgt, a, buf), fprop_fft(o.x, o.wgt, b, buf)), 1e-4);
  EXPECT_LT(rel(bprop_fft(o.gy, o.wgt, a, buf), bprop_fft(o.gy, o.wgt, b, buf)), 1e-4);
  EXPECT_LT(rel(accgrad_fft(o.gy, o.x, a, buf), accgrad_fft(o.gy, o.x, b, buf)), 1e-4);
}

TEST(WorkBuffers, ReuseIsInvisible) {
  std::mt19937 rng(89);
  const ConvProblem big{.S = 4, .f = 4, .fp = 4, .h = 16, .w = 16, .kh = 5, .kw = 5};
  const ConvProblem small{.S = 2, .f = 3, .fp = 1, .h = 7, .w = 6, .kh = 2, .kw = 3};
  WorkBuffers shared;
  const Operands ob = make_operands(rng, big);
  const ConvPlan pb = default_plan(big, FftPath::Radix2Elided);
  fprop_fft(ob.x, ob.wgt, pb, shared);
  accgrad_fft(ob.gy, ob.x, pb, shared);
  const std::size_t grown = shared.capacity_bytes();
  for (int rep = 0; rep < 3; ++rep) {
    const Operands os = make_operands(rng, small);
    for (FftPath path : {FftPath::Radix2Elided, FftPath::SmoothNatural}) {
      const ConvPlan ps = default_plan(small, path);
      WorkBuffers fresh;
      EXPECT_EQ(fprop_fft(os.x, os.wgt, ps, shared), fprop_fft(os.x, os.wgt, ps, fresh));
      EXPECT_EQ(bprop_fft(os.gy, os.wgt, ps, shared), bprop_fft(os.gy, os.wgt, ps, fresh));
      EXPECT_EQ(accgrad_fft(os.gy, os.x, ps, shared), accgrad_fft(os.gy, os.x, ps, fresh));
    }
  }
  EXPECT_EQ(shared.capacity_bytes(), grown);
}

TEST(EngineFft, GradientsMatchFiniteDifferences) {
  std::mt19937 rng(90);
  std::uniform_int_distribution<std::size_t> small(1, 3), spatial(3, 8);
  for (int trial = 0; trial < 6; ++trial) {
    ConvProblem p{.S = small(rng), .f = small(rng), .fp = small(rng), .h = spatial(rng),
                  .w = spatial(rng)};
    p.kh = std::min<std::size_t>(p.h, small(rng));
    p.kw = std::min<std::size_t>(p.w, small(rng));
    const Operands o = make_operands(rng, p);
    for (FftPath path : {FftPath::Radix2Elided, FftPath::SmoothNatural}) {
      const ConvPlan plan = default_plan(p, path);
      WorkBuffers buf;
      const auto loss_x = [&](const RealTensor4& xv) {
        return dot(fprop_fft(xv, o.wgt, plan, buf), o.gy);
      };
      const auto loss_w = [&](const RealTensor4& wv) {
        return dot(fprop_fft(o.x, wv, plan, buf), o.gy);
      };
      // fprop is linear, so a wide step only reduces float cancellation.
      const RealTensor4 nx = numeric_gradient(loss_x, o.x, 1e-2f);
      const RealTensor4 nw = numeric_gradient(loss_w, o.wgt, 1e-2f);
      EXPECT_LT(rel(bprop_fft(o.gy, o.wgt, plan, buf), nx), 1e-2) << describe(plan);
      EXPECT_LT(rel(accgrad_fft(o.gy, o.x, plan, buf), nw), 1e-2) << describe(plan);
    }
  }
}

TEST(EngineFft, WrongConjugationIsDetected) {
  std::mt19937 rng(91);
  const ConvProblem p{.S = 2, .f = 2, .fp = 2, .h = 8, .w = 8, .kh = 3, .kw = 3};
  const Operands o = make_operands(rng, p);
  WorkBuffers buf;
  const ConvPlan plan = default_plan(p, FftPath::Radix2Elided);
  const RealTensor4 good = bprop_direct(o.gy, o.wgt);
  const RealTensor4 flipped =
      run_pass_fft(Pass::Bprop, o.gy, o.wgt, plan, buf, SpectralProduct{false, true});
  EXPECT_GT(rel(flipped, good), 0.1);
  const RealTensor4 acc_wrong =
      run_pass_fft(Pass::AccGrad, o.gy, o.x, plan, buf, SpectralProduct{false, true});
  EXPECT_GT(rel(acc_wrong, accgrad_direct(o.gy, o.x)), 0.1);
}

TEST(ModelCost, FormulaProperties) {
  const ConvProblem unit{.S = 2, .f = 3, .fp = 4, .h = 32, .w = 32, .kh = 1, .kw = 1};
  const ModelCost c1 = theoretical_flops(make_plan(unit, 32, 32, FftPath::Radix2Elided));
  EXPECT_DOUBLE_EQ(c1.direct_cost, 2.0 * 3 * 4 * 1024);
  // S f f' N + (S f + f f' + S f') N log2(N) / 2 with N = 1024.
  EXPECT_DOUBLE_EQ(c1.fft_cost, 24.0 * 1024 + (6.0 + 12.0 + 8.0) * 1024 * 5.0);
  EXPECT_GT(c1.fft_cost, c1.direct_cost);

  double fft_at_k1 = 0.0, direct_at_k1 = 0.0;
  for (std::size_t k = 1; k <= 9; k += 2) {
    const ConvProblem p{.S = 64, .f = 64, .fp = 64, .h = 32, .w = 32, .kh = k, .kw = k};
    const ModelCost c = theoretical_flops(make_plan(p, 32, 32, FftPath::Radix2Elided));
    if (k == 1) {
      fft_at_k1 = c.fft_cost;
      direct_at_k1 = c.direct_cost;
    }
    EXPECT_DOUBLE_EQ(c.fft_cost, fft_at_k1);
    EXPECT_DOUBLE_EQ(c.direct_cost, direct_at_k1 * static_cast<double>(k * k));
  }
  const ConvProblem l3{.S = 64, .f = 64, .fp = 64, .h = 32, .w = 32, .kh = 9, .kw = 9};
  const ModelCost c = theoretical_flops(make_plan(l3, 32, 32, FftPath::Radix2Elided));
  EXPECT_GT(c.direct_cost / c.fft_cost, 7.0);
}

TEST(EngineTolerance, GrowsWithTransformSize) {
  const ConvProblem p{.S = 1, .f = 1, .fp = 1, .h = 4, .w = 4, .kh = 1, .kw = 1};
  EXPECT_DOUBLE_EQ(engine_tolerance(make_plan(p, 4, 4, FftPath::Radix2Elided)), 1e-3);
  EXPECT_DOUBLE_EQ(engine_tolerance(make_plan(p, 64, 64, FftPath::Radix2Elided)), 1.2e-3);
}

TEST(FftPathNames, RoundTrip) {
  for (FftPath f : {FftPath::Radix2Elided, FftPath::SmoothNatural}) {
    EXPECT_EQ(parse_fft_path(to_string(f)), f);
  }
  EXPECT_EQ(smallest_admissible(13, FftPath::SmoothNatural), 14u);
  EXPECT_EQ(smallest_admissible(13, FftPath::Radix2Elided), 16u);
  EXPECT_EQ(smallest_admissible(11, FftPath::SmoothNatural), 12u);
}
