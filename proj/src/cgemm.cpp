// SPDX-License-Identifier: Apache-2.0
#include "fftconv/cgemm.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "complex_ops.hpp"
#include "fftconv/error.hpp"

namespace fftconv {

std::string_view to_string(GemmStrategy s) noexcept {
  switch (s) {
    case GemmStrategy::Batched: return "batched";
    case GemmStrategy::PerBin: return "per_bin";
    case GemmStrategy::Tiled: return "tiled";
  }
  return "?";
}

std::optional<GemmStrategy> parse_gemm_strategy(std::string_view name) noexcept {
  if (name == "batched") return GemmStrategy::Batched;
  if (name == "per_bin") return GemmStrategy::PerBin;
  if (name == "tiled") return GemmStrategy::Tiled;
  return std::nullopt;
}

namespace {

struct Operand {
  const Complex* data;
  std::size_t rows;  // logical rows of op(X)
  std::size_t cols;  // logical cols of op(X)
  bool trans;
  bool conj;

  Complex at(std::size_t r, std::size_t c) const noexcept {
    const Complex v = trans ? data[c * rows + r] : data[r * cols + c];
    return conj ? std::conj(v) : v;
  }
};

// Packs op(B) as split real/imaginary k x n rows so the inner loop over n is
// contiguous and vectorizes.
void pack_split(const Operand& op, float* re, float* im) {
  for (std::size_t r = 0; r < op.rows; ++r) {
    for (std::size_t c = 0; c < op.cols; ++c) {
      const Complex v = op.at(r, c);
      re[r * op.cols + c] = v.real();
      im[r * op.cols + c] = v.imag();
    }
  }
}

void store_row(Complex* c_row, const float* re, const float* im, std::size_t n,
               bool accumulate) {
  if (accumulate) {
    for (std::size_t q = 0; q < n; ++q) c_row[q] += Complex{re[q], im[q]};
  } else {
    for (std::size_t q = 0; q < n; ++q) c_row[q] = {re[q], im[q]};
  }
}

void run_batched(const Complex* A, const Complex* B, Complex* C,
                 const CgemmBatch& s) {
  const std::size_t a_size = s.m * s.k, b_size = s.k * s.n, c_size = s.m * s.n;
  std::vector<float> b_re(b_size), b_im(b_size), acc_re(s.n), acc_im(s.n);
  for (std::size_t t = 0; t < s.bins; ++t) {
    const Operand a{A + t * a_size, s.m, s.k, s.trans_a, s.conj_a};
    const Operand b{B + t * b_size, s.k, s.n, s.trans_b, s.conjugate_b};
    pack_split(b, b_re.data(), b_im.data());
    Complex* c = C + t * c_size;
    for (std::size_t r = 0; r < s.m; ++r) {
      std::fill(acc_re.begin(), acc_re.end(), 0.0f);
      std::fill(acc_im.begin(), acc_im.end(), 0.0f);
      for (std::size_t q = 0; q < s.k; ++q) {
        const Complex av = a.at(r, q);
        const float ar = av.real(), ai = av.imag();
        const float* br = b_re.data() + q * s.n;
        const float* bi = b_im.data() + q * s.n;
        for (std::size_t col = 0; col < s.n; ++col) {
          acc_re[col] += ar * br[col] - ai * bi[col];
          acc_im[col] += ar * bi[col] + ai * br[col];
        }
      }
      store_row(c + r * s.n, acc_re.data(), acc_im.data(), s.n, s.accumulate);
    }
  }
}

void gemm_one_bin(const Operand& a, const Operand& b, Complex* c,
                  std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1,
                  bool accumulate) {
  for (std::size_t r = r0; r < r1; ++r) {
    for (std::size_t col = c0; col < c1; ++col) {
      Complex acc{};
      for (std::size_t q = 0; q < a.cols; ++q) {
        acc += detail::cmul(a.at(r, q), b.at(q, col));
      }
      Complex& dst = c[r * b.cols + col];
      dst = accumulate ? dst + acc : acc;
    }
  }
}

void run_per_bin(const Complex* A, const Complex* B, Complex* C,
                 const CgemmBatch& s) {
  const std::size_t a_size = s.m * s.k, b_size = s.k * s.n, c_size = s.m * s.n;
  for (std::size_t t = 0; t < s.bins; ++t) {
    const Operand a{A + t * a_size, s.m, s.k, s.trans_a, s.conj_a};
    const Operand b{B + t * b_size, s.k, s.n, s.trans_b, s.conjugate_b};
    gemm_one_bin(a, b, C + t * c_size, 0, s.m, 0, s.n, s.accumulate);
  }
}

void run_tiled(const Complex* A, const Complex* B, Complex* C,
               const CgemmBatch& s) {
  constexpr std::size_t kBinChunk = 8;
  constexpr std::size_t kBlock = 16;
  const std::size_t a_size = s.m * s.k, b_size = s.k * s.n, c_size = s.m * s.n;
  for (std::size_t t0 = 0; t0 < s.bins; t0 += kBinChunk) {
    const std::size_t t1 = std::min(s.bins, t0 + kBinChunk);
    for (std::size_t r0 = 0; r0 < s.m; r0 += kBlock) {
      const std::size_t r1 = std::min(s.m, r0 + kBlock);
      for (std::size_t c0 = 0; c0 < s.n; c0 += kBlock) {
        const std::size_t c1 = std::min(s.n, c0 + kBlock);
        for (std::size_t t = t0; t < t1; ++t) {
          const Operand a{A + t * a_size, s.m, s.k, s.trans_a, s.conj_a};
          const Operand b{B + t * b_size, s.k, s.n, s.trans_b, s.conjugate_b};
          gemm_one_bin(a, b, C + t * c_size, r0, r1, c0, c1, s.accumulate);
        }
      }
    }
  }
}

std::string dims(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

void cgemm_batched(const FreqTensor& A, const FreqTensor& B,
                   const CgemmBatch& spec, FreqTensor& C) {
  if (A.layout() != FreqLayout::HWBD || B.layout() != FreqLayout::HWBD) {
    throw LayoutError("cgemm_batched operands must be HWBD");
  }
  if (A.order() != B.order()) {
    throw LayoutError("cgemm_batched operands disagree on bin order");
  }
  const Shape4 ea = A.extents();
  const Shape4 eb = B.extents();
  if (ea.d0 != eb.d0 || ea.d1 != eb.d1 || ea.d0 * ea.d1 != spec.bins) {
    throw DimensionError("cgemm_batched: bin grids " + dims(ea.d0, ea.d1) +
                         " and " + dims(eb.d0, eb.d1) + " vs " +
                         std::to_string(spec.bins) + " bins");
  }
  const std::size_t ar = spec.trans_a ? spec.k : spec.m;
  const std::size_t ac = spec.trans_a ? spec.m : spec.k;
  const std::size_t br = spec.trans_b ? spec.n : spec.k;
  const std::size_t bc = spec.trans_b ? spec.k : spec.n;
  if (ea.d2 != ar || ea.d3 != ac) {
    throw DimensionError("cgemm_batched: A bins are " + dims(ea.d2, ea.d3) +
                         ", expected " + dims(ar, ac));
  }
  if (eb.d2 != br || eb.d3 != bc) {
    throw DimensionError("cgemm_batched: B bins are " + dims(eb.d2, eb.d3) +
                         ", expected " + dims(br, bc));
  }
  const Shape4 ec{ea.d0, ea.d1, spec.m, spec.n};
  if (spec.accumulate) {
    if (C.extents() != ec || C.layout() != FreqLayout::HWBD) {
      throw DimensionError("cgemm_batched: accumulate target has wrong shape");
    }
    C.set_order(A.order());
  } else {
    C.reshape(ec, FreqLayout::HWBD, A.order());
  }

  const Complex* a = A.values().data();
  const Complex* b = B.values().data();
  Complex* c = C.values().data();
  switch (spec.strategy) {
    case GemmStrategy::Batched: run_batched(a, b, c, spec); break;
    case GemmStrategy::PerBin: run_per_bin(a, b, c, spec); break;
    case GemmStrategy::Tiled: run_tiled(a, b, c, spec); break;
  }
}

FreqTensor cgemm_batched(const FreqTensor& A, const FreqTensor& B,
                         const CgemmBatch& spec) {
  FreqTensor C;
  cgemm_batched(A, B, spec, C);
  return C;
}

}  // namespace fftconv
