// SPDX-License-Identifier: Apache-2.0
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "fftconv/autotuner.hpp"
#include "fftconv/bench.hpp"
#include "fftconv/conv_engine.hpp"
#include "fftconv/direct_conv.hpp"
#include "fftconv/error.hpp"
#include "fftconv/tiling.hpp"

namespace py = pybind11;
using namespace fftconv;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using ComplexArray =
    py::array_t<std::complex<float>, py::array::c_style | py::array::forcecast>;

Shape4 shape_of(const py::array& a, const char* name) {
  if (a.ndim() != 4) {
    throw DimensionError(std::string(name) + " must be 4-D, got " + std::to_string(a.ndim()) + "-D");
  }
  return {static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
          static_cast<std::size_t>(a.shape(2)), static_cast<std::size_t>(a.shape(3))};
}

RealTensor4 to_tensor(const FloatArray& a, const char* name) {
  const Shape4 s = shape_of(a, name);
  return RealTensor4(s, std::vector<float>(a.data(), a.data() + s.volume()));
}

FloatArray to_array(const RealTensor4& t) {
  const Shape4& s = t.shape();
  FloatArray out({s.d0, s.d1, s.d2, s.d3});
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

// Runs one pass either directly or through a plan built for the problem.
RealTensor4 run(Pass pass, const ConvProblem& p, const RealTensor4& a, const RealTensor4& b,
                const std::string& method, std::optional<std::size_t> n_h,
                std::optional<std::size_t> n_w) {
  if (method == "direct") return run_pass_direct(pass, {a, b}, p);
  const auto path = parse_fft_path(method);
  if (!path) throw PlanError("method must be direct, radix2 or smooth, got '" + method + "'");
  ConvPlan plan = default_plan(p, *path);
  if (n_h || n_w) plan = make_plan(p, n_h.value_or(plan.n_h), n_w.value_or(plan.n_w), *path);
  WorkBuffers buffers;
  return run_pass_fft(pass, a, b, plan, buffers, default_product(pass));
}

ConvProblem problem_from(Shape4 in, Shape4 wgt, std::size_t ph, std::size_t pw) {
  ConvProblem p{in.d0, in.d1, wgt.d0, in.d2, in.d3, wgt.d2, wgt.d3, ph, pw};
  if (wgt.d1 != in.d1) {
    throw DimensionError("weight planes " + std::to_string(wgt.d1) + " != input planes " +
                         std::to_string(in.d1));
  }
  p.validate();
  return p;
}

}  // namespace

PYBIND11_MODULE(_fftconv, m) {
  m.doc() = "Frequency-domain convolution: fprop, bprop and accGrad on BDHW float32 tensors.";

  auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  const py::tuple value_bases = py::make_tuple(base, py::handle(PyExc_ValueError));
  py::register_exception<DimensionError>(m, "DimensionError", value_bases);
  py::register_exception<UnsupportedSizeError>(m, "UnsupportedSizeError", value_bases);
  py::register_exception<PlanError>(m, "PlanError", value_bases);
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<LayoutError>(m, "LayoutError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());

  m.def(
      "fprop",
      [](const FloatArray& x, const FloatArray& w, const std::string& method, std::size_t ph,
         std::size_t pw, std::optional<std::size_t> n_h, std::optional<std::size_t> n_w) {
        const RealTensor4 xt = to_tensor(x, "x"), wt = to_tensor(w, "w");
        const ConvProblem p = problem_from(xt.shape(), wt.shape(), ph, pw);
        RealTensor4 r;
        {
          py::gil_scoped_release nogil;
          r = run(Pass::Fprop, p, xt, wt, method, n_h, n_w);
        }
        return to_array(r);
      },
      py::arg("x"), py::arg("w"), py::arg("method") = "smooth", py::arg("ph") = 0,
      py::arg("pw") = 0, py::arg("n_h") = py::none(), py::arg("n_w") = py::none(),
      "Correlation of x (S, f, h, w) with w (f', f, kh, kw); returns (S, f', out_h, out_w).");

  m.def(
      "bprop",
      [](const FloatArray& gy, const FloatArray& w, const std::string& method, std::size_t ph,
         std::size_t pw, std::optional<std::size_t> n_h, std::optional<std::size_t> n_w) {
        const RealTensor4 gt = to_tensor(gy, "gy"), wt = to_tensor(w, "w");
        const Shape4 g = gt.shape(), k = wt.shape();
        if (g.d1 != k.d0 || g.d2 + k.d2 < 1 + ph || g.d3 + k.d3 < 1 + pw) {
          throw DimensionError("gradOutput and weight shapes do not fit together");
        }
        const Shape4 in{g.d0, k.d1, g.d2 + k.d2 - 1 - ph, g.d3 + k.d3 - 1 - pw};
        const ConvProblem p = problem_from(in, k, ph, pw);
        RealTensor4 r;
        {
          py::gil_scoped_release nogil;
          r = run(Pass::Bprop, p, gt, wt, method, n_h, n_w);
        }
        return to_array(r);
      },
      py::arg("gy"), py::arg("w"), py::arg("method") = "smooth", py::arg("ph") = 0,
      py::arg("pw") = 0, py::arg("n_h") = py::none(), py::arg("n_w") = py::none(),
      "Gradient with respect to the input, (S, f, h, w).");

  m.def(
      "accgrad",
      [](const FloatArray& gy, const FloatArray& x, const std::string& method, std::size_t ph,
         std::size_t pw, std::optional<std::size_t> n_h, std::optional<std::size_t> n_w) {
        const RealTensor4 gt = to_tensor(gy, "gy"), xt = to_tensor(x, "x");
        const Shape4 g = gt.shape(), in = xt.shape();
        if (g.d0 != in.d0 || in.d2 + ph < g.d2 || in.d3 + pw < g.d3) {
          throw DimensionError("gradOutput and input shapes do not fit together");
        }
        const Shape4 k{g.d1, in.d1, in.d2 + ph - g.d2 + 1, in.d3 + pw - g.d3 + 1};
        const ConvProblem p = problem_from(in, k, ph, pw);
        RealTensor4 r;
        {
          py::gil_scoped_release nogil;
          r = run(Pass::AccGrad, p, gt, xt, method, n_h, n_w);
        }
        return to_array(r);
      },
      py::arg("gy"), py::arg("x"), py::arg("method") = "smooth", py::arg("ph") = 0,
      py::arg("pw") = 0, py::arg("n_h") = py::none(), py::arg("n_w") = py::none(),
      "Gradient with respect to the weights, (f', f, kh, kw).");

  m.def(
      "rfft2",
      [](const FloatArray& x, std::optional<std::size_t> n_h, std::optional<std::size_t> n_w) {
        const RealTensor4 t = to_tensor(x, "x");
        const FreqTensor s = forward_spectrum(
            t, n_h.value_or(smallest_admissible(t.height(), FftPath::SmoothNatural)),
            n_w.value_or(smallest_admissible(t.width(), FftPath::SmoothNatural)));
        const Shape4 e = s.extents();
        ComplexArray out({e.d0, e.d1, e.d2, e.d3});
        std::copy(s.values().begin(), s.values().end(), out.mutable_data());
        return out;
      },
      py::arg("x"), py::arg("n_h") = py::none(), py::arg("n_w") = py::none(),
      "Half spectrum of every plane, (S, P, n_h, n_w // 2 + 1), natural order.");

  m.def(
      "irfft2",
      [](const ComplexArray& X, std::size_t n_w, std::optional<std::size_t> out_h,
         std::optional<std::size_t> out_w) {
        const Shape4 e = shape_of(X, "X");
        const FreqTensor s(e, FreqLayout::BDHW, FreqOrder::Natural,
                           std::vector<Complex>(X.data(), X.data() + e.volume()));
        return to_array(inverse_spectrum(s, n_w, out_h.value_or(e.d2), out_w.value_or(n_w)));
      },
      py::arg("X"), py::arg("n_w"), py::arg("out_h") = py::none(), py::arg("out_w") = py::none(),
      "Inverse of rfft2 for transform width n_w, clipped to out_h x out_w.");

  m.def("smooth_sizes", &smooth_sizes, py::arg("n"),
        "7-smooth transform sizes in [n, next power of two].");
  m.def("best_tile_size", &best_tile_size, py::arg("n"), py::arg("w"));
  m.def(
      "flop_count",
      [](std::size_t S, std::size_t f, std::size_t fp, std::size_t h, std::size_t w,
         std::size_t kh, std::size_t kw, std::size_t ph, std::size_t pw) {
        const ConvProblem p{S, f, fp, h, w, kh, kw, ph, pw};
        p.validate();
        return flop_count(p);
      },
      py::arg("S"), py::arg("f"), py::arg("fp"), py::arg("h"), py::arg("w"), py::arg("kh"),
      py::arg("kw"), py::arg("ph") = 0, py::arg("pw") = 0,
      "Multiply-adds of the direct forward pass.");

  m.def(
      "tune",
      [](std::size_t S, std::size_t f, std::size_t fp, std::size_t h, std::size_t w,
         std::size_t kh, std::size_t kw, const std::string& pass, std::size_t budget) {
        const auto ps = parse_pass(pass);
        if (!ps) throw PlanError("pass must be fprop, bprop or accgrad");
        const ConvProblem p{S, f, fp, h, w, kh, kw, 0, 0};
        PlanCache cache;
        TuneResult r;
        {
          py::gil_scoped_release nogil;
          r = tune(p, *ps, budget, cache);
        }
        py::dict d;
        d["n_h"] = r.plan.n_h;
        d["n_w"] = r.plan.n_w;
        d["path"] = std::string(to_string(r.plan.fft_path));
        d["gemm"] = std::string(to_string(r.plan.gemm));
        d["tiling"] = r.plan.tiling ? py::object(py::make_tuple(r.plan.tiling->d_h,
                                                                r.plan.tiling->d_w))
                                    : py::object(py::none());
        d["time_us"] = r.time_us;
        d["candidates"] = r.candidates.size();
        d["summary"] = describe(r.plan);
        return d;
      },
      py::arg("S"), py::arg("f"), py::arg("fp"), py::arg("h"), py::arg("w"), py::arg("kh"),
      py::arg("kw"), py::arg("pass_name") = "fprop", py::arg("budget") = 3,
      "Autotune one problem and describe the winning plan.");
}
