// SPDX-License-Identifier: Apache-2.0
#include "fftconv/autotuner.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <fstream>
#include <random>
#include <sstream>
#include <string_view>

#include "fftconv/error.hpp"
#include "fftconv/fft1d.hpp"
#include "fftconv/tiling.hpp"

namespace fftconv {

std::vector<std::size_t> smooth_sizes(std::size_t n) {
  if (n == 0) n = 1;
  std::vector<std::size_t> out;
  for (std::size_t m = n, hi = next_pow2(n); m <= hi; ++m) {
    if (is_smooth(m)) out.push_back(m);
  }
  return out;
}

// --- cache ------------------------------------------------------------------

std::optional<CachedPlan> PlanCache::find(const PlanKey& key) const {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void PlanCache::store(const PlanKey& key, const CachedPlan& entry) {
  std::unique_lock lock(mutex_);
  entries_[key] = entry;
}

std::size_t PlanCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void PlanCache::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
}

std::vector<std::pair<PlanKey, CachedPlan>> PlanCache::entries() const {
  std::shared_lock lock(mutex_);
  return {entries_.begin(), entries_.end()};
}

std::mutex& PlanCache::tuning_lock(const PlanKey& key) {
  std::lock_guard lock(locks_mutex_);
  auto& slot = locks_[key];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

namespace {

constexpr std::string_view kHeader = "fftconv-plancache v1";
constexpr std::size_t kFields = 18;

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::size_t parse_count(std::string_view s, std::size_t line, const char* field) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(line, std::string("bad ") + field + " '" + std::string(s) + "'");
  }
  return v;
}

double parse_time(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty() || !(v >= 0.0)) {
    throw ParseError(line, "bad time_us '" + std::string(s) + "'");
  }
  return v;
}

std::pair<PlanKey, CachedPlan> parse_entry(std::string_view text, std::size_t line) {
  const auto f = split_tabs(text);
  if (f.size() != kFields) {
    throw ParseError(line, "expected " + std::to_string(kFields) + " fields, got " +
                               std::to_string(f.size()));
  }
  ConvProblem p;
  p.S = parse_count(f[0], line, "S");
  p.f = parse_count(f[1], line, "f");
  p.fp = parse_count(f[2], line, "fp");
  p.h = parse_count(f[3], line, "h");
  p.w = parse_count(f[4], line, "w");
  p.kh = parse_count(f[5], line, "kh");
  p.kw = parse_count(f[6], line, "kw");
  p.ph = parse_count(f[7], line, "ph");
  p.pw = parse_count(f[8], line, "pw");
  const auto pass = parse_pass(f[9]);
  if (!pass) throw ParseError(line, "unknown pass '" + std::string(f[9]) + "'");
  const std::size_t n_h = parse_count(f[10], line, "n_h");
  const std::size_t n_w = parse_count(f[11], line, "n_w");
  const auto path = parse_fft_path(f[12]);
  if (!path) throw ParseError(line, "unknown fft path '" + std::string(f[12]) + "'");
  const auto gemm = parse_gemm_strategy(f[13]);
  if (!gemm) throw ParseError(line, "unknown gemm strategy '" + std::string(f[13]) + "'");
  const std::size_t d_h = parse_count(f[14], line, "tile_h");
  const std::size_t d_w = parse_count(f[15], line, "tile_w");
  const std::size_t bytes = parse_count(f[16], line, "buffer_bytes");
  const double time_us = parse_time(f[17], line);
  if ((d_h == 0) != (d_w == 0)) throw ParseError(line, "tile extents must both be zero or nonzero");
  std::optional<TileSpec2d> tiling;
  if (d_h != 0) tiling = TileSpec2d{d_h, d_w};
  ConvPlan plan;
  try {
    plan = make_plan(p, n_h, n_w, *path, *gemm, tiling);
  } catch (const Error& e) {
    throw ParseError(line, std::string("invalid plan: ") + e.what());
  }
  if (plan.buffer_bytes != bytes) {
    throw ParseError(line, "buffer_bytes " + std::to_string(bytes) +
                               " does not match the plan (" +
                               std::to_string(plan.buffer_bytes) + ")");
  }
  return {PlanKey{p, *pass}, CachedPlan{plan, time_us}};
}

}  // namespace

std::string PlanCache::serialize() const {
  std::ostringstream out;
  out << kHeader << '\n';
  for (const auto& [key, entry] : entries()) {
    const ConvProblem& p = key.problem;
    const ConvPlan& plan = entry.plan;
    const std::size_t d_h = plan.tiling ? plan.tiling->d_h : 0;
    const std::size_t d_w = plan.tiling ? plan.tiling->d_w : 0;
    out << p.S << '\t' << p.f << '\t' << p.fp << '\t' << p.h << '\t' << p.w << '\t'
        << p.kh << '\t' << p.kw << '\t' << p.ph << '\t' << p.pw << '\t'
        << to_string(key.pass) << '\t' << plan.n_h << '\t' << plan.n_w << '\t'
        << to_string(plan.fft_path) << '\t' << to_string(plan.gemm) << '\t' << d_h
        << '\t' << d_w << '\t' << plan.buffer_bytes << '\t'
        << format_double(entry.time_us) << '\n';
  }
  return out.str();
}

void PlanCache::deserialize(const std::string& text) {
  std::map<PlanKey, CachedPlan> parsed;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') {
      throw ParseError(number, "carriage return in line ending");
    }
    if (!header) {
      if (line != kHeader) {
        throw ParseError(number, "expected header '" + std::string(kHeader) + "'");
      }
      header = true;
      continue;
    }
    if (line.empty()) continue;
    auto [key, entry] = parse_entry(line, number);
    if (parsed.contains(key)) throw ParseError(number, "duplicate entry");
    parsed.emplace(key, entry);
  }
  if (!header) throw ParseError(1, "empty cache file (missing header)");
  std::unique_lock lock(mutex_);
  entries_ = std::move(parsed);
}

void PlanCache::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open plan cache " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  deserialize(buf.str());
}

void PlanCache::save(const std::filesystem::path& path) const {
  const std::string text = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write plan cache " + path.string());
  out << text;
  if (!out) throw FormatError("write failed for " + path.string());
}

// --- candidates ---------------------------------------------------------------

std::vector<ConvPlan> CandidateSet::plans() const {
  std::vector<ConvPlan> out;
  for (const auto& tiling : tile_options) {
    std::size_t need_h = problem.padded_h(), need_w = problem.padded_w();
    if (tiling) {
      need_h = tiling->d_h + problem.kh - 1;
      need_w = tiling->d_w + problem.kw - 1;
    }
    const auto hs = smooth_sizes(need_h);
    const auto ws = smooth_sizes(need_w);
    for (std::size_t n_h : hs) {
      for (std::size_t n_w : ws) {
        for (FftPath path : paths) {
          if (!admissible_size(n_h, path) || !admissible_size(n_w, path)) continue;
          for (GemmStrategy g : gemms) {
            out.push_back(make_plan(problem, n_h, n_w, path, g, tiling));
          }
        }
      }
    }
  }
  return out;
}

CandidateSet make_candidates(const ConvProblem& problem, const TuneOptions& options) {
  problem.validate();
  CandidateSet c;
  c.problem = problem;
  c.paths = options.paths;
  c.gemms = options.gemms;
  c.tile_options.push_back(std::nullopt);
  if (options.try_tiling) {
    const std::size_t d_h = best_tile_size(problem.padded_h(), problem.kh);
    const std::size_t d_w = best_tile_size(problem.padded_w(), problem.kw);
    if (d_h < problem.out_h() || d_w < problem.out_w()) {
      c.tile_options.push_back(TileSpec2d{d_h, d_w});
    }
  }
  for (std::size_t n_h : smooth_sizes(problem.padded_h())) {
    for (std::size_t n_w : smooth_sizes(problem.padded_w())) c.sizes.emplace_back(n_h, n_w);
  }
  return c;
}

// --- measurement ----------------------------------------------------------------

namespace {

RealTensor4 random_tensor(std::mt19937& rng, Shape4 shape) {
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  RealTensor4 t(shape);
  for (float& v : t.values()) v = dist(rng);
  return t;
}

}  // namespace

PassOperands synthetic_operands(const ConvProblem& p, Pass pass, std::uint32_t seed) {
  std::mt19937 rng(seed);
  switch (pass) {
    case Pass::Fprop:
      return {random_tensor(rng, p.input_shape()), random_tensor(rng, p.weight_shape())};
    case Pass::Bprop:
      return {random_tensor(rng, p.output_shape()), random_tensor(rng, p.weight_shape())};
    case Pass::AccGrad:
      return {random_tensor(rng, p.output_shape()), random_tensor(rng, p.input_shape())};
  }
  return {};
}

RealTensor4 run_pass_direct(Pass pass, const PassOperands& o, const ConvProblem& p) {
  const Padding pad{p.ph, p.pw};
  switch (pass) {
    case Pass::Fprop: return fprop_direct(o.first, o.second, pad);
    case Pass::Bprop: return bprop_direct(o.first, o.second, pad);
    case Pass::AccGrad: return accgrad_direct(o.first, o.second, pad);
  }
  return {};
}

namespace {

ConvProblem probe_of(const ConvProblem& p) {
  ConvProblem q = p;
  q.S = 1;
  q.f = std::min<std::size_t>(p.f, 2);
  q.fp = std::min<std::size_t>(p.fp, 2);
  return q;
}

ConvPlan with_problem(const ConvPlan& plan, const ConvProblem& p) {
  return make_plan(p, plan.n_h, plan.n_w, plan.fft_path, plan.gemm, plan.tiling);
}

}  // namespace

double measure_plan(const ConvPlan& plan, Pass pass, std::size_t budget,
                    std::uint32_t seed) {
  if (budget == 0) throw PlanError("measurement budget must be at least 1");
  const PassOperands o = synthetic_operands(plan.problem, pass, seed);
  WorkBuffers buffers;
  const SpectralProduct prod = default_product(pass);
  run_pass_fft(pass, o.first, o.second, plan, buffers, prod);  // warmup
  std::vector<double> times;
  times.reserve(budget);
  for (std::size_t i = 0; i < budget; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const RealTensor4 r = run_pass_fft(pass, o.first, o.second, plan, buffers, prod);
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
  }
  std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
  return times[times.size() / 2];
}

TuneResult tune(const ConvProblem& problem, Pass pass, std::size_t budget,
                PlanCache& cache, const TuneOptions& options) {
  if (budget == 0) throw PlanError("tuning budget must be at least 1 trial");
  const PlanKey key{problem, pass};
  if (auto hit = cache.find(key)) return {hit->plan, hit->time_us, true, 0, {}};

  std::lock_guard serial(cache.tuning_lock(key));
  if (auto hit = cache.find(key)) return {hit->plan, hit->time_us, true, 0, {}};

  const CandidateSet set = make_candidates(problem, options);
  const ConvProblem probe = probe_of(problem);
  const PassOperands probe_ops = synthetic_operands(probe, pass, options.seed ^ 0x9e37u);
  const RealTensor4 want = run_pass_direct(pass, probe_ops, probe);

  TuneResult result;
  bool found = false;
  for (const ConvPlan& plan : set.plans()) {
    CandidateTiming c{plan, 0.0, 0.0, false};
    WorkBuffers buffers;
    const RealTensor4 got = run_pass_fft(pass, probe_ops.first, probe_ops.second,
                                         with_problem(plan, probe), buffers,
                                         default_product(pass));
    c.probe_error = relative_max_error(got.values(), want.values());
    c.correct = c.probe_error <= engine_tolerance(plan);
    if (c.correct) {
      c.time_us = measure_plan(plan, pass, budget, options.seed);
      result.measurements += budget;
      if (!found || c.time_us < result.time_us) {
        result.plan = plan;
        result.time_us = c.time_us;
        found = true;
      }
    }
    result.candidates.push_back(c);
  }
  if (!found) throw PlanError("no candidate plan reproduced the direct oracle");
  cache.store(key, {result.plan, result.time_us});
  return result;
}

}  // namespace fftconv
