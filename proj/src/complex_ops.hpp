// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fftconv/tensor.hpp"

// Plain complex arithmetic for hot loops: std::complex operator* carries
// the C99 Annex G inf/nan recovery path, which blocks vectorization.
namespace fftconv::detail {

inline Complex cmul(Complex a, Complex b) noexcept {
  return {a.real() * b.real() - a.imag() * b.imag(),
          a.real() * b.imag() + a.imag() * b.real()};
}

/// a * conj(b)
inline Complex cmul_conj(Complex a, Complex b) noexcept {
  return {a.real() * b.real() + a.imag() * b.imag(),
          a.imag() * b.real() - a.real() * b.imag()};
}

}  // namespace fftconv::detail
