// SPDX-License-Identifier: Apache-2.0
#include "fftconv/tensor.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "fftconv/error.hpp"

namespace fftconv {

namespace {

std::string shape_str(const Shape4& s) {
  return std::to_string(s.d0) + "x" + std::to_string(s.d1) + "x" +
         std::to_string(s.d2) + "x" + std::to_string(s.d3);
}

}  // namespace

RealTensor4::RealTensor4(std::size_t batch, std::size_t planes,
                         std::size_t height, std::size_t width)
    : RealTensor4(Shape4{batch, planes, height, width}) {}

RealTensor4::RealTensor4(Shape4 shape)
    : shape_(shape), data_(shape.volume(), 0.0f) {}

RealTensor4::RealTensor4(Shape4 shape, std::vector<float> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.volume()) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str(shape_));
  }
}

std::span<float> RealTensor4::plane(std::size_t s, std::size_t p) noexcept {
  const std::size_t n = shape_.d2 * shape_.d3;
  return {data_.data() + (s * shape_.d1 + p) * n, n};
}

std::span<const float> RealTensor4::plane(std::size_t s,
                                          std::size_t p) const noexcept {
  const std::size_t n = shape_.d2 * shape_.d3;
  return {data_.data() + (s * shape_.d1 + p) * n, n};
}

void RealTensor4::reset(Shape4 shape) {
  shape_ = shape;
  data_.assign(shape.volume(), 0.0f);
}

FreqTensor::FreqTensor(Shape4 extents, FreqLayout layout, FreqOrder order)
    : extents_(extents),
      layout_(layout),
      order_(order),
      data_(extents.volume()) {}

FreqTensor::FreqTensor(Shape4 extents, FreqLayout layout, FreqOrder order,
                       std::vector<Complex> data)
    : extents_(extents), layout_(layout), order_(order), data_(std::move(data)) {
  if (data_.size() != extents_.volume()) {
    throw DimensionError("frequency data length " +
                         std::to_string(data_.size()) +
                         " does not match extents " + shape_str(extents_));
  }
}

void FreqTensor::reshape(Shape4 extents, FreqLayout layout, FreqOrder order) {
  extents_ = extents;
  layout_ = layout;
  order_ = order;
  if (data_.size() < extents.volume()) data_.resize(extents.volume());
}

bool operator==(const FreqTensor& a, const FreqTensor& b) {
  if (a.extents_ != b.extents_ || a.layout_ != b.layout_ ||
      a.order_ != b.order_) {
    return false;
  }
  const auto av = a.values();
  const auto bv = b.values();
  return std::equal(av.begin(), av.end(), bv.begin());
}

RealTensor4 zero_pad(const RealTensor4& t, const PadSpec& spec) {
  if (spec.target_h < t.height() + spec.p_h ||
      spec.target_w < t.width() + spec.p_w) {
    throw DimensionError("zero_pad target " + std::to_string(spec.target_h) +
                         "x" + std::to_string(spec.target_w) +
                         " smaller than padded source " +
                         std::to_string(t.height() + spec.p_h) + "x" +
                         std::to_string(t.width() + spec.p_w));
  }
  RealTensor4 out(t.batch(), t.planes(), spec.target_h, spec.target_w);
  for (std::size_t s = 0; s < t.batch(); ++s) {
    for (std::size_t p = 0; p < t.planes(); ++p) {
      const auto src = t.plane(s, p);
      auto dst = out.plane(s, p);
      for (std::size_t i = 0; i < t.height(); ++i) {
        std::copy_n(src.data() + i * t.width(), t.width(),
                    dst.data() + i * spec.target_w);
      }
    }
  }
  return out;
}

RealTensor4 clip(const RealTensor4& t, std::size_t out_h, std::size_t out_w) {
  if (out_h > t.height() || out_w > t.width()) {
    throw DimensionError("clip window " + std::to_string(out_h) + "x" +
                         std::to_string(out_w) + " exceeds source " +
                         std::to_string(t.height()) + "x" +
                         std::to_string(t.width()));
  }
  RealTensor4 out(t.batch(), t.planes(), out_h, out_w);
  for (std::size_t s = 0; s < t.batch(); ++s) {
    for (std::size_t p = 0; p < t.planes(); ++p) {
      const auto src = t.plane(s, p);
      auto dst = out.plane(s, p);
      for (std::size_t i = 0; i < out_h; ++i) {
        std::copy_n(src.data() + i * t.width(), out_w, dst.data() + i * out_w);
      }
    }
  }
  return out;
}

namespace {

// (a,b,i,j) -> (i,j,a,b): both directions are the same index swap of the
// two outer and two inner extents.
void swap_outer_inner(const FreqTensor& in, FreqTensor& out,
                      FreqLayout out_layout) {
  const Shape4 e = in.extents();
  out.reshape({e.d2, e.d3, e.d0, e.d1}, out_layout, in.order());
  const std::size_t outer = e.d0 * e.d1;
  const std::size_t inner = e.d2 * e.d3;
  const Complex* src = in.values().data();
  Complex* dst = out.values().data();
  // Blocked to keep both sides cache resident on larger tensors.
  constexpr std::size_t kBlock = 32;
  for (std::size_t o0 = 0; o0 < outer; o0 += kBlock) {
    const std::size_t o1 = std::min(outer, o0 + kBlock);
    for (std::size_t i0 = 0; i0 < inner; i0 += kBlock) {
      const std::size_t i1 = std::min(inner, i0 + kBlock);
      for (std::size_t o = o0; o < o1; ++o) {
        for (std::size_t i = i0; i < i1; ++i) {
          dst[i * outer + o] = src[o * inner + i];
        }
      }
    }
  }
}

}  // namespace

void transpose_bdhw_hwbd(const FreqTensor& in, FreqTensor& out) {
  if (in.layout() != FreqLayout::BDHW) {
    throw LayoutError("transpose_bdhw_hwbd expects a BDHW tensor");
  }
  swap_outer_inner(in, out, FreqLayout::HWBD);
}

FreqTensor transpose_bdhw_hwbd(const FreqTensor& t) {
  FreqTensor out;
  transpose_bdhw_hwbd(t, out);
  return out;
}

void transpose_hwbd_bdhw(const FreqTensor& in, FreqTensor& out) {
  if (in.layout() != FreqLayout::HWBD) {
    throw LayoutError("transpose_hwbd_bdhw expects an HWBD tensor");
  }
  swap_outer_inner(in, out, FreqLayout::BDHW);
}

FreqTensor transpose_hwbd_bdhw(const FreqTensor& t) {
  FreqTensor out;
  transpose_hwbd_bdhw(t, out);
  return out;
}

// --- golden files -----------------------------------------------------------

namespace {

constexpr std::array<char, 4> kMagic = {'F', 'B', 'T', '1'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 * 4 + 1;
// Upper bound on scalars per file; anything above is treated as corrupt.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

void put_u32(std::string& buf, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
         (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

void put_f32(std::string& buf, float v) { put_u32(buf, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t checked_dim(std::size_t d) {
  if (d > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError("tensor dimension " + std::to_string(d) +
                      " does not fit the u32 file header");
  }
  return static_cast<std::uint32_t>(d);
}

std::string encode_header(const Shape4& s, TensorDtype dtype) {
  std::string buf(kMagic.begin(), kMagic.end());
  put_u32(buf, 4);
  put_u32(buf, checked_dim(s.d0));
  put_u32(buf, checked_dim(s.d1));
  put_u32(buf, checked_dim(s.d2));
  put_u32(buf, checked_dim(s.d3));
  buf.push_back(static_cast<char>(dtype));
  return buf;
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct Decoded {
  TensorFileHeader header;
  const unsigned char* payload;
};

Decoded decode(const std::string& bytes, const std::filesystem::path& path) {
  if (bytes.size() < kHeaderBytes) {
    throw FormatError(path.string() + ": truncated header");
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError(path.string() + ": bad magic");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (get_u32(p + 4) != 4) {
    throw FormatError(path.string() + ": rank " + std::to_string(get_u32(p + 4)) +
                      " is not 4");
  }
  std::uint64_t dims[4];
  std::uint64_t count = 1;
  for (int k = 0; k < 4; ++k) {
    dims[k] = get_u32(p + 8 + 4 * k);
    if (dims[k] != 0 && count > kMaxElements / dims[k]) {
      throw FormatError(path.string() + ": dimension product overflows");
    }
    count *= dims[k];
  }
  const unsigned char code = p[24];
  if (code > 1) {
    throw FormatError(path.string() + ": unknown dtype " + std::to_string(code));
  }
  const auto dtype = static_cast<TensorDtype>(code);
  const std::uint64_t scalar_bytes = dtype == TensorDtype::Real32 ? 4 : 8;
  const std::uint64_t payload = bytes.size() - kHeaderBytes;
  if (payload != count * scalar_bytes) {
    throw FormatError(path.string() + ": payload holds " +
                      std::to_string(payload) + " bytes, header implies " +
                      std::to_string(count * scalar_bytes));
  }
  return {{{dims[0], dims[1], dims[2], dims[3]}, dtype}, p + kHeaderBytes};
}

float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

}  // namespace

void write_tensor(const RealTensor4& t, const std::filesystem::path& path) {
  std::string buf = encode_header(t.shape(), TensorDtype::Real32);
  buf.reserve(buf.size() + 4 * t.size());
  for (float v : t.values()) put_f32(buf, v);
  write_bytes(path, buf);
}

void write_tensor(const FreqTensor& t, const std::filesystem::path& path) {
  std::string buf = encode_header(t.extents(), TensorDtype::Complex64);
  buf.reserve(buf.size() + 8 * t.size());
  for (const Complex& v : t.values()) {
    put_f32(buf, v.real());
    put_f32(buf, v.imag());
  }
  write_bytes(path, buf);
}

TensorFileHeader read_tensor_header(const std::filesystem::path& path) {
  const std::string bytes = read_bytes(path);
  return decode(bytes, path).header;
}

RealTensor4 read_tensor(const std::filesystem::path& path) {
  const std::string bytes = read_bytes(path);
  const Decoded d = decode(bytes, path);
  if (d.header.dtype != TensorDtype::Real32) {
    throw FormatError(path.string() + ": expected a real32 tensor");
  }
  std::vector<float> data(d.header.shape.volume());
  for (std::size_t k = 0; k < data.size(); ++k) data[k] = get_f32(d.payload + 4 * k);
  return RealTensor4(d.header.shape, std::move(data));
}

FreqTensor read_freq_tensor(const std::filesystem::path& path) {
  const std::string bytes = read_bytes(path);
  const Decoded d = decode(bytes, path);
  if (d.header.dtype != TensorDtype::Complex64) {
    throw FormatError(path.string() + ": expected a complex64 tensor");
  }
  std::vector<Complex> data(d.header.shape.volume());
  for (std::size_t k = 0; k < data.size(); ++k) {
    data[k] = {get_f32(d.payload + 8 * k), get_f32(d.payload + 8 * k + 4)};
  }
  return FreqTensor(d.header.shape, FreqLayout::BDHW, FreqOrder::Natural,
                    std::move(data));
}

// --- comparisons ------------------------------------------------------------

namespace {

template <typename T>
double rel_error(std::span<const T> got, std::span<const T> want) {
  if (got.size() != want.size()) {
    throw DimensionError("relative_max_error: length " +
                         std::to_string(got.size()) + " vs " +
                         std::to_string(want.size()));
  }
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    diff = std::max(diff, static_cast<double>(std::abs(got[k] - want[k])));
    scale = std::max(scale, static_cast<double>(std::abs(want[k])));
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace

double relative_max_error(std::span<const float> got,
                          std::span<const float> want) {
  return rel_error(got, want);
}

double relative_max_error(std::span<const Complex> got,
                          std::span<const Complex> want) {
  return rel_error(got, want);
}

}  // namespace fftconv
