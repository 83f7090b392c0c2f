#ifndef NEURACRYPT_TENSOR_HPP
#define NEURACRYPT_TENSOR_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "neuracrypt/errors.hpp"

namespace neuracrypt {

// Dense row-major f32 tensor. Dumb on purpose: shape plus payload.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(std::vector<std::uint64_t> dims) : dims_(std::move(dims)) {
    data_.assign(element_count(), 0.0f);
  }
  Tensor(std::vector<std::uint64_t> dims, std::vector<float> payload)
      : dims_(std::move(dims)), data_(std::move(payload)) {
    if (data_.size() != element_count())
      fail(errc::shape_mismatch, "payload length does not match dims");
  }

  const std::vector<std::uint64_t>& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }
  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }
  const std::vector<float>& payload() const { return data_; }

  std::uint64_t dim(std::size_t i) const { return dims_[i]; }

  std::size_t element_count() const {
    std::size_t n = 1;
    for (std::uint64_t d : dims_) n *= static_cast<std::size_t>(d);
    return n;
  }

  bool all_finite() const {
    for (float v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool operator==(const Tensor& o) const { return dims_ == o.dims_ && data_ == o.data_; }

private:
  std::vector<std::uint64_t> dims_;
  std::vector<float> data_;
};

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class ByteReader {
public:
  ByteReader(const std::string& bytes, const std::string& what) : bytes_(bytes), what_(what) {}

  std::uint64_t take(int n) {
    if (pos_ + n > bytes_.size()) fail(errc::format_error, what_ + ": truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += n;
    return v;
  }
  std::uint16_t u16() { return static_cast<std::uint16_t>(take(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(take(4)); }
  std::uint64_t u64() { return take(8); }

  std::string magic() {
    if (pos_ + 4 > bytes_.size()) fail(errc::format_error, what_ + ": truncated");
    std::string m = bytes_.substr(pos_, 4);
    pos_ += 4;
    return m;
  }

  const char* raw(std::size_t n) {
    if (pos_ + n > bytes_.size()) fail(errc::format_error, what_ + ": truncated");
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

private:
  const std::string& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_error, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

// Atomic write: temp file in the same directory, then rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(errc::io_error, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(errc::io_error, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

// NCT1 tensor file: magic, u8 dtype (1 = f32), u8 ndim, u16 reserved,
// ndim x u64 little-endian dims, row-major little-endian f32 payload.
inline constexpr char kTensorMagic[5] = "NCT1";

inline std::string serialize_tensor(const Tensor& t) {
  std::string out;
  out.reserve(8 + t.rank() * 8 + t.size() * 4);
  out.append(kTensorMagic, 4);
  out.push_back(static_cast<char>(1));  // dtype f32
  out.push_back(static_cast<char>(t.rank()));
  detail::put_u16(out, 0);
  for (std::uint64_t d : t.dims()) detail::put_u64(out, d);
  static_assert(sizeof(float) == 4);
  const std::size_t payload_bytes = t.size() * 4;
  const std::size_t base = out.size();
  out.resize(base + payload_bytes);
  std::memcpy(out.data() + base, t.data(), payload_bytes);
  return out;
}

inline Tensor deserialize_tensor(const std::string& bytes, const std::string& what = "tensor") {
  detail::ByteReader r(bytes, what);
  if (r.magic() != "NCT1") fail(errc::format_error, what + ": bad magic");
  const auto dtype = static_cast<std::uint8_t>(r.take(1));
  if (dtype != 1) fail(errc::format_error, what + ": unsupported dtype");
  const auto ndim = static_cast<std::uint8_t>(r.take(1));
  r.u16();  // reserved
  std::vector<std::uint64_t> dims;
  std::size_t count = 1;
  for (int i = 0; i < ndim; ++i) {
    dims.push_back(r.u64());
    count *= static_cast<std::size_t>(dims.back());
  }
  if (r.remaining() != count * 4) fail(errc::format_error, what + ": payload length mismatch");
  std::vector<float> payload(count);
  std::memcpy(payload.data(), r.raw(count * 4), count * 4);
  return Tensor(std::move(dims), std::move(payload));
}

inline void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  detail::write_file_atomic(path, serialize_tensor(t));
}

inline Tensor read_tensor(const std::filesystem::path& path) {
  return deserialize_tensor(detail::read_file(path), path.filename().string());
}

// Binary 8-bit PGM (P5, maxval 255) to a [H, W, 1] tensor in [0,1].
inline Tensor ingest_pgm_bytes(const std::string& bytes, const std::string& what = "pgm") {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto token = [&] {
    skip_ws();
    std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) fail(errc::format_error, what + ": truncated header");
    return bytes.substr(start, pos - start);
  };
  if (token() != "P5") fail(errc::format_error, what + ": not a binary PGM (P5)");
  std::uint64_t width = 0, height = 0, maxval = 0;
  try {
    width = std::stoull(token());
    height = std::stoull(token());
    maxval = std::stoull(token());
  } catch (const std::exception&) {
    fail(errc::format_error, what + ": bad header field");
  }
  if (maxval != 255) fail(errc::format_error, what + ": only maxval 255 is supported");
  if (width == 0 || height == 0) fail(errc::format_error, what + ": empty image");
  if (pos >= bytes.size()) fail(errc::format_error, what + ": truncated");
  ++pos;  // single whitespace after maxval
  const std::size_t need = static_cast<std::size_t>(width) * height;
  if (bytes.size() - pos < need) fail(errc::format_error, what + ": truncated payload");
  Tensor img({height, width, 1});
  for (std::size_t i = 0; i < need; ++i)
    img[i] = static_cast<float>(static_cast<unsigned char>(bytes[pos + i])) / 255.0f;
  return img;
}

inline Tensor ingest_pgm(const std::filesystem::path& path) {
  return ingest_pgm_bytes(detail::read_file(path), path.filename().string());
}

// Quantizes a [H, W, 1] tensor in [0,1] back to binary PGM bytes.
inline std::string render_pgm(const Tensor& img) {
  if (img.rank() != 3 || img.dim(2) != 1) fail(errc::shape_mismatch, "pgm wants [H, W, 1]");
  std::string out = "P5\n" + std::to_string(img.dim(1)) + " " + std::to_string(img.dim(0)) +
                    "\n255\n";
  for (std::size_t i = 0; i < img.size(); ++i) {
    float v = img[i];
    v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f))));
  }
  return out;
}

inline void write_pgm(const std::filesystem::path& path, const Tensor& img) {
  detail::write_file_atomic(path, render_pgm(img));
}

}  // namespace neuracrypt

#endif
