// SPDX-License-Identifier: Apache-2.0
// fftconv: verify | bench | plan | fft
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#if defined(__linux__)
#include <sched.h>
#endif

#include "fftconv/autotuner.hpp"
#include "fftconv/bench.hpp"
#include "fftconv/error.hpp"

namespace fs = std::filesystem;
using namespace fftconv;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

// Keeps every measurement on the CPU we started on. Returns the worker count.
std::size_t pin_to_one_cpu() {
#if defined(__linux__)
  const int cpu = sched_getcpu();
  if (cpu >= 0) {
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(cpu, &set);
    sched_setaffinity(0, sizeof set, &set);
  }
#endif
  return 1;
}

void print_report(const VerifyReport& r, std::ostream& out) {
  for (const PassReport& p : r.passes) {
    char line[160];
    std::snprintf(line, sizeof line, "%-8s checks=%zu failures=%zu max_rel_error=%.3g error/tol=%.3g\n",
                  std::string(to_string(p.pass)).c_str(), p.checks, p.failures,
                  p.max_relative_error, p.max_error);
    out << line;
  }
  out << "verify: " << (r.ok() ? "PASS" : "FAIL") << "\n";
}

struct VerifyArgs {
  std::uint32_t seed = 1;
  std::size_t trials = 20;
};

int cmd_verify(const VerifyArgs& a) {
  VerifyOptions o;
  o.seed = a.seed;
  o.trials = a.trials;
  const VerifyReport r = run_verify(o);
  print_report(r, std::cout);
  return r.ok() ? kOk : kVerifyFailed;
}

struct BenchArgs {
  std::uint32_t seed = 1;
  std::size_t trials = 5;
  std::size_t verify_trials = 10;
  std::string grid;
  std::string out;
  std::vector<std::string> methods;
  bool force = false;
};

int cmd_bench(const BenchArgs& a) {
  BenchOptions o;
  o.seed = a.seed;
  o.trials = a.trials;
  if (!a.methods.empty()) {
    o.methods.clear();
    for (const std::string& name : a.methods) {
      const auto m = parse_method(name);
      if (!m) {
        std::cerr << "unknown method '" << name << "'\n";
        return kUsage;
      }
      o.methods.push_back(*m);
    }
  }
  const GridSpec grid = a.grid.empty() ? default_grid() : load_grid(a.grid);

  VerifyOptions vo;
  vo.seed = a.seed;
  vo.trials = a.verify_trials;
  const VerifyReport vr = run_verify(vo);
  print_report(vr, std::cerr);
  if (!vr.ok() && !a.force) {
    std::cerr << "bench: refusing to run with a failing verify suite (use --force)\n";
    return kVerifyFailed;
  }

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) {
      std::cerr << "bench: cannot write " << a.out << "\n";
      return kUsage;
    }
  }
  std::ostream& out = a.out.empty() ? std::cout : file;

  const std::size_t workers = pin_to_one_cpu();
  const std::size_t total = grid.problems().size() * kAllPasses.size() * o.methods.size();
  std::size_t done = 0;
  o.on_record = [&](const BenchRecord& r) {
    ++done;
    std::fprintf(stderr, "[%zu/%zu] S=%zu f=%zu fp=%zu h=%zu k=%zu %s %s: %.1f us (%s)\n", done,
                 total, r.problem.S, r.problem.f, r.problem.fp, r.problem.h, r.problem.kh,
                 std::string(to_string(r.pass)).c_str(),
                 std::string(to_string(r.method)).c_str(), r.time_us, r.plan_summary.c_str());
  };
  const auto records = run_bench(grid, o);
  write_csv(out, records, workers);
  out.flush();
  if (!out) {
    std::cerr << "bench: write failed\n";
    return kUsage;
  }
  return kOk;
}

struct PlanArgs {
  ConvProblem problem;
  std::size_t w = 0, kw = 0, pw = 0;
  bool pw_set = false;
  std::string pass = "fprop";
  std::size_t trials = 5;
  std::uint32_t seed = 1234;
  std::string cache;
  bool no_tiling = false;
};

int cmd_plan(PlanArgs a) {
  ConvProblem p = a.problem;
  p.w = a.w ? a.w : p.h;
  p.kw = a.kw ? a.kw : p.kh;
  p.pw = a.pw_set ? a.pw : p.ph;
  p.validate();
  const auto pass = parse_pass(a.pass);
  if (!pass) {
    std::cerr << "unknown pass '" << a.pass << "'\n";
    return kUsage;
  }

  PlanCache cache;
  if (!a.cache.empty() && fs::exists(a.cache)) cache.load(a.cache);

  TuneOptions o;
  o.seed = a.seed;
  o.try_tiling = !a.no_tiling;
  std::cout << "problem S=" << p.S << " f=" << p.f << " fp=" << p.fp << " h=" << p.h
            << " w=" << p.w << " kh=" << p.kh << " kw=" << p.kw << " ph=" << p.ph
            << " pw=" << p.pw << " pass=" << to_string(*pass) << "\n";
  const auto join = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
    return s;
  };
  std::cout << "heights: " << join(smooth_sizes(p.padded_h())) << "\n"
            << "widths: " << join(smooth_sizes(p.padded_w())) << "\n";

  const TuneResult r = tune(p, *pass, a.trials, cache, o);
  if (r.cached) {
    std::cout << "cached: " << describe(r.plan) << " " << r.time_us << " us\n";
    return kOk;
  }
  for (const CandidateTiming& c : r.candidates) {
    char line[200];
    if (c.correct) {
      std::snprintf(line, sizeof line, "  %-36s probe_err=%-10.3g %10.2f us\n",
                    describe(c.plan).c_str(), c.probe_error, c.time_us);
    } else {
      std::snprintf(line, sizeof line, "  %-36s probe_err=%-10.3g   rejected\n",
                    describe(c.plan).c_str(), c.probe_error);
    }
    std::cout << line;
  }
  std::cout << "winner: " << describe(r.plan) << " " << r.time_us << " us ("
            << r.candidates.size() << " candidates, " << r.measurements << " timed runs)\n";
  if (!a.cache.empty()) cache.save(a.cache);
  return kOk;
}

struct FftArgs {
  std::string in;
  std::string out;
  std::string direction = "forward";
  std::size_t nh = 0, nw = 0, out_h = 0, out_w = 0;
};

int cmd_fft(const FftArgs& a) {
  const TensorFileHeader head = read_tensor_header(a.in);
  if (a.direction == "forward") {
    if (head.dtype != TensorDtype::Real32) {
      std::cerr << "fft: forward expects a real tensor file\n";
      return kUsage;
    }
    const RealTensor4 t = read_tensor(a.in);
    const std::size_t nh = a.nh ? a.nh : smallest_admissible(t.height(), FftPath::SmoothNatural);
    const std::size_t nw = a.nw ? a.nw : smallest_admissible(t.width(), FftPath::SmoothNatural);
    write_tensor(forward_spectrum(t, nh, nw), a.out);
  } else {
    if (head.dtype != TensorDtype::Complex64) {
      std::cerr << "fft: inverse expects a complex tensor file\n";
      return kUsage;
    }
    const FreqTensor s = read_freq_tensor(a.in);
    const std::size_t nw = a.nw ? a.nw : 2 * (s.extents().d3 - 1);
    if (nw == 0) {
      std::cerr << "fft: transform width needed (--nw)\n";
      return kUsage;
    }
    write_tensor(inverse_spectrum(s, nw, a.out_h ? a.out_h : s.extents().d2,
                                  a.out_w ? a.out_w : nw),
                 a.out);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain convolution engine: verification, benchmarks, plans, FFTs"};
  app.require_subcommand(1);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Randomized equivalence suite against the direct oracle");
  verify->add_option("--seed", va.seed, "RNG seed");
  verify->add_option("--trials", va.trials, "Random problems")->check(CLI::PositiveNumber);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Time every method over a configuration grid, CSV out");
  bench->add_option("--seed", ba.seed, "RNG seed");
  bench->add_option("--trials", ba.trials, "Timed runs per measurement (median)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--verify-trials", ba.verify_trials, "Problems in the pre-bench verify")
      ->check(CLI::PositiveNumber);
  bench->add_option("--grid", ba.grid, "Grid file (key = comma-separated values)")
      ->check(CLI::ExistingFile);
  bench->add_option("--out", ba.out, "CSV output (default stdout)");
  bench->add_option("--methods", ba.methods, "Subset of direct,fft_radix2,fft_smooth,fft_tiled")
      ->delimiter(',');
  bench->add_flag("--force", ba.force, "Run even if verify fails");

  PlanArgs pa;
  auto* plan = app.add_subcommand("plan", "Autotune one problem and print the candidates");
  plan->set_help_flag("--help", "Print this help message and exit");
  plan->add_option("--S", pa.problem.S, "Minibatch")->check(CLI::PositiveNumber);
  plan->add_option("--f", pa.problem.f, "Input planes")->check(CLI::PositiveNumber);
  plan->add_option("--fp", pa.problem.fp, "Output planes")->check(CLI::PositiveNumber);
  plan->add_option("--h", pa.problem.h, "Input height")->required()->check(CLI::PositiveNumber);
  plan->add_option("--w", pa.w, "Input width (default h)")->check(CLI::PositiveNumber);
  pa.problem.kh = 3;
  plan->add_option("--kh", pa.problem.kh, "Kernel height")->check(CLI::PositiveNumber);
  plan->add_option("--kw", pa.kw, "Kernel width (default kh)")->check(CLI::PositiveNumber);
  plan->add_option("--ph", pa.problem.ph, "Bottom padding");
  plan->add_option("--pw", pa.pw, "Right padding (default ph)")
      ->each([&](const std::string&) { pa.pw_set = true; });
  plan->add_option("--pass", pa.pass, "fprop | bprop | accgrad");
  plan->add_option("--trials", pa.trials, "Timed runs per candidate")->check(CLI::PositiveNumber);
  plan->add_option("--seed", pa.seed, "Seed for synthetic operands");
  plan->add_option("--cache", pa.cache, "Plan cache file, read and updated");
  plan->add_flag("--no-tiling", pa.no_tiling, "Skip tiled candidates");

  FftArgs fa;
  auto* fft = app.add_subcommand("fft", "2-D real FFT of a tensor file");
  fft->add_option("--in", fa.in, "Input tensor file")->required()->check(CLI::ExistingFile);
  fft->add_option("--out", fa.out, "Output tensor file")->required();
  fft->add_option("--direction", fa.direction, "forward | inverse")
      ->check(CLI::IsMember({"forward", "inverse"}));
  fft->add_option("--nh", fa.nh, "Transform height (forward; default smallest 7-smooth)");
  fft->add_option("--nw", fa.nw, "Transform width (default smallest 7-smooth, or 2(W-1) inverse)");
  fft->add_option("--out-h", fa.out_h, "Inverse output height (default n_h)");
  fft->add_option("--out-w", fa.out_w, "Inverse output width (default n_w)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*verify) return cmd_verify(va);
    if (*bench) return cmd_bench(ba);
    if (*plan) return cmd_plan(pa);
    if (*fft) return cmd_fft(fa);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
