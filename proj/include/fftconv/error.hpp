// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fftconv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand extents are inconsistent with each other or with a plan.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A golden tensor file is malformed (magic, header, payload length).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Transform length has a prime factor outside {2,3,5,7}, or is not a power
/// of two where one is required.
class UnsupportedSizeError : public Error {
 public:
  using Error::Error;
};

/// Tensor layout or bin-order tag does not match what an operation consumes.
class LayoutError : public Error {
 public:
  using Error::Error;
};

/// A convolution plan violates its invariants or does not match a problem.
class PlanError : public Error {
 public:
  using Error::Error;
};

/// Line-oriented text input could not be parsed.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace fftconv
