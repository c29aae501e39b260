// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "fftconv/conv_engine.hpp"

namespace fftconv {

/// 7-smooth integers in [n, next_pow2(n)], ascending. A power of two
/// yields just itself.
std::vector<std::size_t> smooth_sizes(std::size_t n);

struct PlanKey {
  ConvProblem problem;
  Pass pass = Pass::Fprop;
  friend bool operator==(const PlanKey&, const PlanKey&) = default;
  friend auto operator<=>(const PlanKey&, const PlanKey&) = default;
};

struct CachedPlan {
  ConvPlan plan;
  double time_us = 0.0;
  friend bool operator==(const CachedPlan&, const CachedPlan&) = default;
};

/// Winning plan per (problem, pass). Lookups may run concurrently; tuning
/// of one key is serialized through tuning_lock().
class PlanCache {
 public:
  PlanCache() = default;
  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

  std::optional<CachedPlan> find(const PlanKey& key) const;
  void store(const PlanKey& key, const CachedPlan& entry);
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  void clear();
  /// Snapshot ordered by key.
  std::vector<std::pair<PlanKey, CachedPlan>> entries() const;

  std::mutex& tuning_lock(const PlanKey& key);

  /// Replaces the contents with the file's entries. Throws ParseError
  /// (with the offending line) or FormatError if the file cannot be read.
  void load(const std::filesystem::path& path);
  /// Header "fftconv-plancache v1", then one tab-separated entry per line.
  void save(const std::filesystem::path& path) const;

  std::string serialize() const;
  void deserialize(const std::string& text);

 private:
  mutable std::shared_mutex mutex_;
  std::map<PlanKey, CachedPlan> entries_;
  std::mutex locks_mutex_;
  std::map<PlanKey, std::unique_ptr<std::mutex>> locks_;
};

struct TuneOptions {
  std::vector<FftPath> paths{FftPath::Radix2Elided, FftPath::SmoothNatural};
  std::vector<GemmStrategy> gemms{GemmStrategy::Batched, GemmStrategy::PerBin,
                                  GemmStrategy::Tiled};
  bool try_tiling = true;
  std::uint32_t seed = 1234;
};

/// The search space for one problem: every size pair, path, strategy and
/// tiling option, and the valid plans they combine into.
struct CandidateSet {
  ConvProblem problem;
  std::vector<std::pair<std::size_t, std::size_t>> sizes;
  std::vector<FftPath> paths;
  std::vector<GemmStrategy> gemms;
  std::vector<std::optional<TileSpec2d>> tile_options;

  std::vector<ConvPlan> plans() const;
};

CandidateSet make_candidates(const ConvProblem& problem, const TuneOptions& options = {});

struct CandidateTiming {
  ConvPlan plan;
  double time_us = 0.0;  // median; unset when the probe check failed
  double probe_error = 0.0;
  bool correct = false;
};

struct TuneResult {
  ConvPlan plan;
  double time_us = 0.0;
  bool cached = false;
  std::size_t measurements = 0;  // timed runs, warmups excluded
  std::vector<CandidateTiming> candidates;
};

/// Operands of one pass, uniform in [-1, 1): (x, wgt) for fprop, (gy, wgt)
/// for bprop and (gy, x) for accGrad.
struct PassOperands {
  RealTensor4 first;
  RealTensor4 second;
};
PassOperands synthetic_operands(const ConvProblem& problem, Pass pass,
                                std::uint32_t seed);
/// The oracle result for the same operands.
RealTensor4 run_pass_direct(Pass pass, const PassOperands& operands,
                            const ConvProblem& problem);

/// Median of `budget` timed runs (after one discarded warmup) of one pass.
double measure_plan(const ConvPlan& plan, Pass pass, std::size_t budget,
                    std::uint32_t seed);

/// Returns the cached plan for (problem, pass) if present. Otherwise every
/// candidate is checked against the direct oracle on a small probe of the
/// same spatial shape, the correct ones are timed with measure_plan, and
/// the fastest is cached and returned. Throws PlanError if budget == 0.
TuneResult tune(const ConvProblem& problem, Pass pass, std::size_t budget,
                PlanCache& cache, const TuneOptions& options = {});

}  // namespace fftconv
