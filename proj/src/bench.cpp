// SPDX-License-Identifier: Apache-2.0
#include "fftconv/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "fftconv/autotuner.hpp"
#include "fftconv/error.hpp"
#include "fftconv/tiling.hpp"

namespace fftconv {

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Direct: return "direct";
    case Method::FftRadix2: return "fft_radix2";
    case Method::FftSmooth: return "fft_smooth";
    case Method::FftTiled: return "fft_tiled";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

// --- grid -----------------------------------------------------------------------

std::vector<ConvProblem> GridSpec::problems() const {
  std::vector<ConvProblem> out;
  const std::vector<std::size_t> fps = fp.empty() ? std::vector<std::size_t>{0} : fp;
  for (std::size_t s : S)
    for (std::size_t fi : f)
      for (std::size_t fo : fps)
        for (std::size_t kk : k)
          for (std::size_t yy : y) {
            ConvProblem p;
            p.S = s;
            p.f = fi;
            p.fp = fp.empty() ? fi : fo;
            p.kh = p.kw = kk;
            p.h = p.w = yy + kk - 1;
            out.push_back(p);
          }
  return out;
}

GridSpec default_grid() {
  return {{1, 4, 16}, {4, 16, 32}, {}, {3, 9}, {8, 16, 32}};
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, ptr};
}

}  // namespace

GridSpec parse_grid(std::string_view text) {
  GridSpec g = default_grid();
  std::map<std::string, std::vector<std::size_t>*> fields{
      {"S", &g.S}, {"f", &g.f}, {"fp", &g.fp}, {"k", &g.k}, {"y", &g.y}};
  std::map<std::string, bool> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = values'");
    const std::string key(trim(line.substr(0, eq)));
    const auto it = fields.find(key);
    if (it == fields.end()) throw ParseError(line_no, "unknown key '" + key + "'");
    if (seen[key]) throw ParseError(line_no, "duplicate key '" + key + "'");
    seen[key] = true;
    std::vector<std::size_t> values;
    std::string_view rest = line.substr(eq + 1);
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view item = trim(rest.substr(0, comma));
      std::size_t v = 0;
      if (!parse_number(item, v) || v == 0) {
        throw ParseError(line_no, "value '" + std::string(item) +
                                      "' for " + key + " is not a positive integer");
      }
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    *it->second = std::move(values);
  }
  return g;
}

GridSpec load_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open grid file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_grid(ss.str());
}

// --- timing ---------------------------------------------------------------------

std::optional<ConvPlan> method_plan(const ConvProblem& problem, Method method) {
  switch (method) {
    case Method::Direct: return std::nullopt;
    case Method::FftRadix2: return default_plan(problem, FftPath::Radix2Elided);
    case Method::FftSmooth: return default_plan(problem, FftPath::SmoothNatural);
    case Method::FftTiled: {
      const TileSpec2d tiles{best_tile_size(problem.padded_h(), problem.kh),
                             best_tile_size(problem.padded_w(), problem.kw)};
      return default_plan(problem, FftPath::SmoothNatural, GemmStrategy::Batched, tiles);
    }
  }
  return std::nullopt;
}

namespace {

RealTensor4 run_direct_blocked(Pass pass, const PassOperands& o, const ConvProblem& p) {
  const Padding pad{p.ph, p.pw};
  switch (pass) {
    case Pass::Fprop: return fprop_direct_blocked(o.first, o.second, pad);
    case Pass::Bprop: return bprop_direct_blocked(o.first, o.second, pad);
    case Pass::AccGrad: return accgrad_direct_blocked(o.first, o.second, pad);
  }
  return {};
}

}  // namespace

double time_pass(const ConvProblem& problem, Pass pass, Method method,
                 std::size_t trials, std::uint32_t seed) {
  if (trials == 0) throw PlanError("at least one timed trial is required");
  const PassOperands o = synthetic_operands(problem, pass, seed);
  const std::optional<ConvPlan> plan = method_plan(problem, method);
  WorkBuffers buffers;
  const auto run = [&] {
    if (plan) {
      return run_pass_fft(pass, o.first, o.second, *plan, buffers, default_product(pass));
    }
    return run_direct_blocked(pass, o, problem);
  };
  run();
  std::vector<double> times;
  for (std::size_t i = 0; i < trials; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const RealTensor4 r = run();
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
  }
  std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
  return std::max(times[times.size() / 2], 1e-3);
}

double tred_per_s(std::uint64_t flops, double time_us) noexcept {
  return static_cast<double>(flops) * 1e6 / time_us;
}

std::vector<BenchRecord> run_bench(const GridSpec& grid, const BenchOptions& options) {
  std::vector<BenchRecord> records;
  for (const ConvProblem& p : grid.problems()) {
    for (Pass pass : kAllPasses) {
      const double direct_us = time_pass(p, pass, Method::Direct, options.trials, options.seed);
      for (Method m : options.methods) {
        BenchRecord r;
        r.problem = p;
        r.pass = pass;
        r.method = m;
        r.time_us = m == Method::Direct
                        ? direct_us
                        : time_pass(p, pass, m, options.trials, options.seed);
        if (const auto plan = method_plan(p, m)) {
          r.plan_nh = plan->n_h;
          r.plan_nw = plan->n_w;
          r.plan_summary = describe(*plan);
        } else {
          r.plan_summary = "direct";
        }
        r.speedup_vs_direct = direct_us / r.time_us;
        r.tred_per_s = tred_per_s(flop_count(p), r.time_us);
        r.problem_size = p.S * p.f * p.fp;
        if (options.on_record) options.on_record(r);
        records.push_back(std::move(r));
      }
    }
  }
  return records;
}

// --- csv ------------------------------------------------------------------------

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records,
               std::size_t workers) {
  out << "# fftconv bench\n"
      << "# workers=" << workers << "\n"
      << "# speedup_vs_direct = direct time / method time, same problem and pass;"
         " direct is the blocked time-domain loop\n"
      << "# tred_per_s = S*f*fp*kh*kw*(h-kh+1)*(w-kw+1) * 1e6 / time_us\n"
      << kCsvColumns << "\n";
  for (const BenchRecord& r : records) {
    const ConvProblem& p = r.problem;
    out << p.S << ',' << p.f << ',' << p.fp << ',' << p.h << ',' << p.w << ','
        << p.kh << ',' << p.kw << ',' << to_string(r.pass) << ',' << to_string(r.method)
        << ',' << r.plan_nh << ',' << r.plan_nw << ',' << format_double(r.time_us) << ','
        << format_double(r.speedup_vs_direct) << ',' << format_double(r.tred_per_s)
        << ',' << r.problem_size << '\n';
  }
}

std::vector<BenchRecord> read_csv(std::istream& in) {
  std::vector<BenchRecord> records;
  std::string line;
  std::size_t line_no = 0;
  bool have_columns = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!have_columns) {
      if (line != kCsvColumns) throw ParseError(line_no, "unexpected column line");
      have_columns = true;
      continue;
    }
    std::vector<std::string_view> cells;
    std::string_view rest = line;
    while (true) {
      const auto c = rest.find(',');
      cells.push_back(rest.substr(0, c));
      if (c == std::string_view::npos) break;
      rest = rest.substr(c + 1);
    }
    if (cells.size() != 15) {
      throw ParseError(line_no, "expected 15 fields, got " + std::to_string(cells.size()));
    }
    BenchRecord r;
    ConvProblem& p = r.problem;
    std::size_t* counts[] = {&p.S, &p.f, &p.fp, &p.h, &p.w, &p.kh, &p.kw};
    for (std::size_t i = 0; i < 7; ++i) {
      if (!parse_number(cells[i], *counts[i])) throw ParseError(line_no, "bad count field");
    }
    const auto pass = parse_pass(cells[7]);
    const auto method = parse_method(cells[8]);
    if (!pass || !method) throw ParseError(line_no, "bad pass or method");
    r.pass = *pass;
    r.method = *method;
    if (!parse_number(cells[9], r.plan_nh) || !parse_number(cells[10], r.plan_nw) ||
        !parse_number(cells[11], r.time_us) || !parse_number(cells[12], r.speedup_vs_direct) ||
        !parse_number(cells[13], r.tred_per_s) || !parse_number(cells[14], r.problem_size)) {
      throw ParseError(line_no, "bad numeric field");
    }
    records.push_back(r);
  }
  if (!have_columns) throw ParseError(line_no + 1, "missing column line");
  return records;
}

// --- verify ---------------------------------------------------------------------

bool VerifyReport::ok() const noexcept {
  return std::all_of(passes.begin(), passes.end(),
                     [](const PassReport& r) { return r.failures == 0 && r.checks > 0; });
}

VerifyReport run_verify(const VerifyOptions& options) {
  VerifyReport report;
  for (std::size_t i = 0; i < 3; ++i) report.passes[i].pass = kAllPasses[i];
  std::mt19937 rng(options.seed);
  const auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  WorkBuffers buffers;
  for (std::size_t t = 0; t < options.trials; ++t) {
    ConvProblem p;
    p.S = pick(1, 4);
    p.f = pick(1, 4);
    p.fp = pick(1, 4);
    p.h = pick(1, 16);
    p.w = pick(1, 16);
    p.kh = pick(1, std::min<std::size_t>(5, p.h));
    p.kw = pick(1, std::min<std::size_t>(5, p.w));
    p.ph = pick(0, p.kh - 1);
    p.pw = pick(0, p.kw - 1);
    const TileSpec2d tiles{pick(1, p.out_h()), pick(1, p.out_w())};
    for (std::size_t i = 0; i < 3; ++i) {
      const Pass pass = kAllPasses[i];
      const PassOperands o = synthetic_operands(p, pass, static_cast<std::uint32_t>(rng()));
      const RealTensor4 want = run_pass_direct(pass, o, p);
      SpectralProduct product = default_product(pass);
      if (options.product_override && options.product_override->first == pass) {
        product = options.product_override->second;
      }
      for (FftPath path : {FftPath::Radix2Elided, FftPath::SmoothNatural}) {
        for (bool tiled : {false, true}) {
          const ConvPlan plan =
              default_plan(p, path, GemmStrategy::Batched,
                           tiled ? std::optional<TileSpec2d>(tiles) : std::nullopt);
          const RealTensor4 got = run_pass_fft(pass, o.first, o.second, plan, buffers, product);
          const double err = relative_max_error(got.values(), want.values());
          const double tol = engine_tolerance(plan);
          PassReport& r = report.passes[i];
          ++r.checks;
          if (!(err <= tol)) ++r.failures;
          r.max_error = std::max(r.max_error, err / tol);
          r.max_relative_error = std::max(r.max_relative_error, err);
        }
      }
    }
  }
  return report;
}

// --- golden spectra -------------------------------------------------------------

FreqTensor forward_spectrum(const RealTensor4& t, std::size_t n_h, std::size_t n_w) {
  if (t.height() > n_h || t.width() > n_w) {
    throw DimensionError("transform " + std::to_string(n_h) + "x" + std::to_string(n_w) +
                         " smaller than the " + std::to_string(t.height()) + "x" +
                         std::to_string(t.width()) + " input");
  }
  const RfftPlan plan(n_h, n_w, FftPath::SmoothNatural);
  return rfft2d_batched(t, plan);
}

RealTensor4 inverse_spectrum(const FreqTensor& spectrum, std::size_t n_w,
                             std::size_t out_h, std::size_t out_w) {
  if (spectrum.layout() != FreqLayout::BDHW || spectrum.order() != FreqOrder::Natural) {
    throw LayoutError("inverse_spectrum expects a natural-order BDHW spectrum");
  }
  const Shape4 e = spectrum.extents();
  if (e.d3 != n_w / 2 + 1) {
    throw DimensionError("spectrum width " + std::to_string(e.d3) +
                         " does not match transform width " + std::to_string(n_w));
  }
  if (out_h > e.d2 || out_w > n_w) {
    throw DimensionError("output window exceeds the transform");
  }
  const RfftPlan plan(e.d2, n_w, FftPath::SmoothNatural);
  RealTensor4 out;
  irfft2d_batched(spectrum, plan, ClipWindow{0, 0, out_h, out_w}, out);
  return out;
}

}  // namespace fftconv
