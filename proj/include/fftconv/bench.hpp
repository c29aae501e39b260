// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fftconv/conv_engine.hpp"

namespace fftconv {

enum class Method : std::uint8_t { Direct, FftRadix2, FftSmooth, FftTiled };

inline constexpr std::array<Method, 4> kAllMethods{
    Method::Direct, Method::FftRadix2, Method::FftSmooth, Method::FftTiled};
inline constexpr std::array<Pass, 3> kAllPasses{Pass::Fprop, Pass::Bprop,
                                                Pass::AccGrad};

std::string_view to_string(Method method) noexcept;
std::optional<Method> parse_method(std::string_view name) noexcept;

/// Value lists for each configuration dimension. Every problem is square:
/// h = w = y + k - 1 and kh = kw = k. An empty fp list pairs f' with f.
struct GridSpec {
  std::vector<std::size_t> S;
  std::vector<std::size_t> f;
  std::vector<std::size_t> fp;
  std::vector<std::size_t> k;
  std::vector<std::size_t> y;

  std::vector<ConvProblem> problems() const;
};

/// S in {1,4,16}, f = f' in {4,16,32}, k in {3,9}, y in {8,16,32}.
GridSpec default_grid();

/// Lines of `key = v1, v2, ...` with keys S, f, fp, k, y. Blank lines and
/// '#' comments are ignored; missing keys keep the default grid's values
/// (fp keeps following f). Throws ParseError naming the line.
GridSpec parse_grid(std::string_view text);
GridSpec load_grid(const std::filesystem::path& path);

/// Plan a method runs with, nullopt for Direct. The tiled method uses
/// best_tile_size on each axis and the smallest 7-smooth transform that
/// holds one tile.
std::optional<ConvPlan> method_plan(const ConvProblem& problem, Method method);

/// Median wall time in microseconds of `trials` runs after one warmup.
/// Direct runs the blocked time-domain baseline.
double time_pass(const ConvProblem& problem, Pass pass, Method method,
                 std::size_t trials, std::uint32_t seed);

/// flop_count * 1e6 / time_us.
double tred_per_s(std::uint64_t flops, double time_us) noexcept;

struct BenchRecord {
  ConvProblem problem;
  Pass pass = Pass::Fprop;
  Method method = Method::Direct;
  std::size_t plan_nh = 0;  // 0 for direct
  std::size_t plan_nw = 0;
  double time_us = 0.0;
  double speedup_vs_direct = 0.0;
  double tred_per_s = 0.0;
  std::size_t problem_size = 0;  // S f f'
  std::string plan_summary;
};

struct BenchOptions {
  std::size_t trials = 5;
  std::uint32_t seed = 1;
  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  std::function<void(const BenchRecord&)> on_record;
};

/// One record per (problem, pass, method), problems in grid order. Direct
/// is always timed so speedups have a reference, but only reported if
/// requested.
std::vector<BenchRecord> run_bench(const GridSpec& grid, const BenchOptions& options);

inline constexpr std::string_view kCsvColumns =
    "S,f,fp,h,w,kh,kw,pass,method,plan_nh,plan_nw,time_us,speedup_vs_direct,"
    "tred_per_s,problem_size";

/// '#' header lines (worker count, metric definitions), the column line,
/// then one row per record. Reals use the shortest round-trip form.
void write_csv(std::ostream& out, const std::vector<BenchRecord>& records,
               std::size_t workers);
/// Inverse of write_csv (plan summaries are not stored). Throws ParseError.
std::vector<BenchRecord> read_csv(std::istream& in);

struct PassReport {
  Pass pass = Pass::Fprop;
  std::size_t checks = 0;
  std::size_t failures = 0;
  double max_error = 0.0;  // relative to each check's own tolerance, as error/tol
  double max_relative_error = 0.0;
};

struct VerifyOptions {
  std::uint32_t seed = 1;
  std::size_t trials = 20;
  /// Replaces the spectral product of one pass; used to show the suite
  /// catches a wrong conjugation.
  std::optional<std::pair<Pass, SpectralProduct>> product_override;
};

struct VerifyReport {
  std::array<PassReport, 3> passes;
  bool ok() const noexcept;
};

/// Random problems (S, f, f' <= 4, h, w <= 16, k <= 5, random padding), each
/// run through every pass on both paths with and without tiling, compared
/// with the direct oracle at engine_tolerance.
VerifyReport run_verify(const VerifyOptions& options);

/// Natural-order spectrum of every plane, extents (S, P, n_h, n_w/2+1).
/// Throws UnsupportedSizeError unless both sizes are 7-smooth.
FreqTensor forward_spectrum(const RealTensor4& t, std::size_t n_h, std::size_t n_w);
/// Inverse of forward_spectrum for transform width n_w, clipped to
/// out_h x out_w.
RealTensor4 inverse_spectrum(const FreqTensor& spectrum, std::size_t n_w,
                             std::size_t out_h, std::size_t out_w);

}  // namespace fftconv
