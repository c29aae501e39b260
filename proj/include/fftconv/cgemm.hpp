// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "fftconv/tensor.hpp"

namespace fftconv {

/// Execution strategy for the per-bin products.
enum class GemmStrategy : std::uint8_t {
  Batched,  // one fused pass over all bins with packed operands
  PerBin,   // an independent small product per bin
  Tiled,    // bins grouped in chunks, output blocked in m and n
};

std::string_view to_string(GemmStrategy s) noexcept;
std::optional<GemmStrategy> parse_gemm_strategy(std::string_view name) noexcept;

/// Shape of one batched product. For every bin t:
///
///   C_t[r, c] (+)= sum_q opA(A_t)[r, q] * opB(B_t)[q, c]
///
/// with A_t stored m x k (k x m when trans_a) and B_t stored n x k
/// (k x n when !trans_b); the conj flags conjugate an operand in place of
/// materializing it. The defaults give C_t = A_t * conj?(B_t)^T.
struct CgemmBatch {
  std::size_t bins = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  bool trans_a = false;
  bool conj_a = false;
  bool trans_b = true;
  bool conjugate_b = false;
  bool accumulate = false;
  GemmStrategy strategy = GemmStrategy::Batched;
};

/// A and B are HWBD tensors whose two outer extents enumerate the bins and
/// whose two inner extents hold each bin's matrix. C is reshaped to
/// (H', W', m, n) HWBD unless spec.accumulate, in which case it must already
/// have that shape. Throws LayoutError (layout/order) or DimensionError.
void cgemm_batched(const FreqTensor& A, const FreqTensor& B,
                   const CgemmBatch& spec, FreqTensor& C);
FreqTensor cgemm_batched(const FreqTensor& A, const FreqTensor& B,
                         const CgemmBatch& spec);

}  // namespace fftconv
