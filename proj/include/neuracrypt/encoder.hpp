#ifndef NEURACRYPT_ENCODER_HPP
#define NEURACRYPT_ENCODER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "neuracrypt/errors.hpp"
#include "neuracrypt/prng.hpp"
#include "neuracrypt/tensor.hpp"

namespace neuracrypt {

struct ArchConfig {
  std::uint32_t image_height = 256;
  std::uint32_t image_width = 256;
  std::uint32_t channels_in = 1;
  std::uint32_t patch_size = 16;
  std::uint32_t depth = 7;
  std::uint32_t hidden_dim = 2048;

  void validate() const {
    if (image_height == 0 || image_width == 0 || channels_in == 0 || hidden_dim == 0)
      fail(errc::invalid_arch, "zero-sized architecture field");
    if (patch_size == 0 || image_height % patch_size != 0 || image_width % patch_size != 0)
      fail(errc::invalid_arch, "patch size must divide both image dimensions");
    if (depth < 2) fail(errc::invalid_arch, "depth must be at least 2");
  }

  std::uint32_t grid_height() const { return image_height / patch_size; }
  std::uint32_t grid_width() const { return image_width / patch_size; }
  std::uint32_t num_patches() const { return grid_height() * grid_width(); }

  // Mixing blocks [channel_norm -> relu -> 1x1 conv] after the patchify conv;
  // the positional embedding is added just before the last block's conv, and
  // the last conv is followed by the final ReLU. See docs/key format notes:
  // depth 2 and 3 both yield one block.
  std::uint32_t mixing_blocks() const { return depth >= 3 ? depth - 2 : 1; }

  bool operator==(const ArchConfig&) const = default;
};

// All weights derive deterministically from (seed, arch, format_version);
// this struct is the private artifact and is never published.
struct EncoderKey {
  std::uint64_t seed = 0;
  ArchConfig arch;
  std::uint16_t format_version = 1;
};

inline std::uint64_t parameter_count(const ArchConfig& arch) {
  arch.validate();
  const std::uint64_t h = arch.hidden_dim;
  const std::uint64_t patchify =
      static_cast<std::uint64_t>(arch.patch_size) * arch.patch_size * arch.channels_in * h;
  const std::uint64_t mixers = static_cast<std::uint64_t>(arch.mixing_blocks()) * h * h;
  const std::uint64_t norms = static_cast<std::uint64_t>(arch.mixing_blocks()) * 2 * h;
  const std::uint64_t positional = static_cast<std::uint64_t>(arch.num_patches()) * h;
  return patchify + mixers + norms + positional;
}

// --- key file -------------------------------------------------------------
// NCK1: magic, u16 version, u16 reserved, u64 seed (LE), then u32 x 6 arch
// fields (height, width, channels_in, patch_size, depth, hidden_dim).

inline constexpr std::uint16_t kKeyFormatVersion = 1;

inline std::string serialize_key(const EncoderKey& key) {
  key.arch.validate();
  std::string out;
  out.append("NCK1", 4);
  detail::put_u16(out, key.format_version);
  detail::put_u16(out, 0);
  detail::put_u64(out, key.seed);
  detail::put_u32(out, key.arch.image_height);
  detail::put_u32(out, key.arch.image_width);
  detail::put_u32(out, key.arch.channels_in);
  detail::put_u32(out, key.arch.patch_size);
  detail::put_u32(out, key.arch.depth);
  detail::put_u32(out, key.arch.hidden_dim);
  return out;
}

inline EncoderKey deserialize_key(const std::string& bytes) {
  detail::ByteReader r(bytes, "key");
  if (r.magic() != "NCK1") fail(errc::format_error, "key: bad magic");
  EncoderKey key;
  key.format_version = r.u16();
  if (key.format_version != kKeyFormatVersion)
    fail(errc::version_error,
         "key: unsupported format version " + std::to_string(key.format_version));
  r.u16();  // reserved
  key.seed = r.u64();
  key.arch.image_height = r.u32();
  key.arch.image_width = r.u32();
  key.arch.channels_in = r.u32();
  key.arch.patch_size = r.u32();
  key.arch.depth = r.u32();
  key.arch.hidden_dim = r.u32();
  key.arch.validate();
  return key;
}

inline void write_key(const std::filesystem::path& path, const EncoderKey& key) {
  detail::write_file_atomic(path, serialize_key(key));
}

inline EncoderKey read_key(const std::filesystem::path& path) {
  return deserialize_key(detail::read_file(path));
}

// --- weight materialization -------------------------------------------------

struct EncoderWeights {
  ArchConfig arch;
  Tensor patchify;                 // [hidden, p, p, cin]
  std::vector<Tensor> mixers;      // mixing_blocks() of [hidden, hidden]
  std::vector<Tensor> norm_scale;  // per block, [hidden]
  std::vector<Tensor> norm_shift;  // per block, [hidden]
  Tensor positional;               // [num_patches, hidden]
  std::uint64_t seed = 0;
};

// Deterministic fill: one splitmix64 stream, Box-Muller gaussians, weights
// written row-major in this fixed order: patchify kernel, mixing kernels
// except the last, all norm scale/shift pairs, positional embeddings, final
// mixing kernel. Conv kernels carry He scaling sqrt(2 / fan_in); norm affine
// and positional embeddings are plain N(0,1). Draws are computed in double
// and truncated to f32.
inline EncoderWeights sample_encoder(const EncoderKey& key) {
  key.arch.validate();
  const ArchConfig& a = key.arch;
  GaussianStream g(key.seed);
  EncoderWeights w;
  w.arch = a;
  w.seed = key.seed;

  auto fill = [&g](Tensor& t, double scale) {
    for (std::size_t i = 0; i < t.size(); ++i)
      t[i] = static_cast<float>(g.next() * scale);
  };

  const std::uint32_t blocks = a.mixing_blocks();
  w.patchify = Tensor({a.hidden_dim, a.patch_size, a.patch_size, a.channels_in});
  fill(w.patchify, std::sqrt(2.0 / (static_cast<double>(a.patch_size) * a.patch_size *
                                    a.channels_in)));
  const double mix_scale = std::sqrt(2.0 / static_cast<double>(a.hidden_dim));
  w.mixers.assign(blocks, Tensor());
  for (std::uint32_t b = 0; b + 1 < blocks; ++b) {
    w.mixers[b] = Tensor({a.hidden_dim, a.hidden_dim});
    fill(w.mixers[b], mix_scale);
  }
  for (std::uint32_t b = 0; b < blocks; ++b) {
    Tensor scale({a.hidden_dim}), shift({a.hidden_dim});
    fill(scale, 1.0);
    fill(shift, 1.0);
    w.norm_scale.push_back(std::move(scale));
    w.norm_shift.push_back(std::move(shift));
  }
  w.positional = Tensor({a.num_patches(), a.hidden_dim});
  fill(w.positional, 1.0);
  w.mixers[blocks - 1] = Tensor({a.hidden_dim, a.hidden_dim});
  fill(w.mixers[blocks - 1], mix_scale);
  return w;
}

// --- pipeline stages ----------------------------------------------------------

namespace detail {

// Fixed-order dot product with eight lanes; deterministic and vectorizable.
inline float dot_f32(const float* a, const float* b, std::size_t n) {
  float acc[8] = {0.f, 0.f, 0.f, 0.f, 0.f, 0.f, 0.f, 0.f};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (int k = 0; k < 8; ++k) acc[k] += a[i + k] * b[i + k];
  float tail = 0.f;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) +
         tail;
}

}  // namespace detail

// Non-overlapping patch convolution. First layer: kernel [C_out, k, k, C_in]
// with stride = k over an [H, W, C_in] input, giving [H/k, W/k, C_out]; a
// 1x1 kernel degenerates to per-position channel mixing.
inline Tensor patchify_conv(const Tensor& input, const Tensor& kernel) {
  if (input.rank() != 3 || kernel.rank() != 4) fail(errc::shape_mismatch, "conv wants 3-d input and 4-d kernel");
  const std::uint64_t h = input.dim(0), wdt = input.dim(1), cin = input.dim(2);
  const std::uint64_t cout = kernel.dim(0), k = kernel.dim(1);
  if (kernel.dim(2) != k || kernel.dim(3) != cin)
    fail(errc::shape_mismatch, "kernel does not match input channels");
  if (k == 0 || h % k != 0 || wdt % k != 0)
    fail(errc::shape_mismatch, "spatial dims not divisible by stride");
  const std::uint64_t gh = h / k, gw = wdt / k;
  Tensor out({gh, gw, cout});
  const std::size_t patch_len = static_cast<std::size_t>(k) * k * cin;
  std::vector<float> patch(patch_len);
  for (std::uint64_t gi = 0; gi < gh; ++gi) {
    for (std::uint64_t gj = 0; gj < gw; ++gj) {
      // Gather the patch contiguously so each filter is a single dot.
      std::size_t idx = 0;
      for (std::uint64_t di = 0; di < k; ++di) {
        const float* row = input.data() + ((gi * k + di) * wdt + gj * k) * cin;
        for (std::uint64_t dj = 0; dj < k * cin; ++dj) patch[idx++] = row[dj];
      }
      float* dst = out.data() + (gi * gw + gj) * cout;
      for (std::uint64_t co = 0; co < cout; ++co)
        dst[co] = detail::dot_f32(patch.data(), kernel.data() + co * patch_len, patch_len);
    }
  }
  return out;
}

// Per-channel normalization over the patch positions of a single sample
// (statistics never cross samples), then the key's random affine.
inline Tensor channel_norm(const Tensor& x, const Tensor& scale, const Tensor& shift,
                           double eps = 1e-5) {
  if (x.rank() != 2) fail(errc::shape_mismatch, "channel_norm wants [patches, channels]");
  const std::uint64_t p = x.dim(0), c = x.dim(1);
  if (scale.size() != c || shift.size() != c)
    fail(errc::shape_mismatch, "affine does not match channel count");
  Tensor out({p, c});
  std::vector<double> mean(c, 0.0), var(c, 0.0);
  for (std::uint64_t i = 0; i < p; ++i)
    for (std::uint64_t j = 0; j < c; ++j) mean[j] += x[i * c + j];
  for (std::uint64_t j = 0; j < c; ++j) mean[j] /= static_cast<double>(p);
  for (std::uint64_t i = 0; i < p; ++i)
    for (std::uint64_t j = 0; j < c; ++j) {
      const double d = x[i * c + j] - mean[j];
      var[j] += d * d;
    }
  for (std::uint64_t j = 0; j < c; ++j) var[j] /= static_cast<double>(p);
  for (std::uint64_t j = 0; j < c; ++j) {
    const double inv = 1.0 / std::sqrt(var[j] + eps);
    for (std::uint64_t i = 0; i < p; ++i) {
      const double normalized = (x[i * c + j] - mean[j]) * inv;
      out[i * c + j] = static_cast<float>(normalized * scale[j] + shift[j]);
    }
  }
  return out;
}

inline Tensor relu(Tensor x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < 0.0f) x[i] = 0.0f;
  return x;
}

// Elementwise addition of the per-patch embeddings; fixed per key, not per
// sample.
inline Tensor add_positional(const Tensor& x, const Tensor& embeddings) {
  if (x.rank() != 2 || embeddings.rank() != 2 || x.dims() != embeddings.dims())
    fail(errc::shape_mismatch, "positional embeddings do not match activations");
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += embeddings[i];
  return out;
}

// Per-patch channel mixing: activations [P, C_in] by kernel [C_out, C_in].
// Runs as a blocked broadcast-axpy over the transposed kernel: the inner loop
// is unit-stride on both operands with no reduction, so it vectorizes, and
// each transposed row is reused across the patch block from L1.
inline Tensor mix_channels(const Tensor& x, const Tensor& kernel) {
  if (x.rank() != 2 || kernel.rank() != 2 || kernel.dim(1) != x.dim(1))
    fail(errc::shape_mismatch, "mixing kernel does not match activations");
  const std::uint64_t p = x.dim(0), cin = x.dim(1), cout = kernel.dim(0);
  std::vector<float> kt(static_cast<std::size_t>(cin) * cout);
  {
    constexpr std::uint64_t kTile = 32;
    for (std::uint64_t i0 = 0; i0 < cout; i0 += kTile)
      for (std::uint64_t j0 = 0; j0 < cin; j0 += kTile)
        for (std::uint64_t i = i0; i < std::min(i0 + kTile, cout); ++i)
          for (std::uint64_t j = j0; j < std::min(j0 + kTile, cin); ++j)
            kt[j * cout + i] = kernel[i * cin + j];
  }
  Tensor out({p, cout});
  constexpr std::uint64_t kBlock = 128;
  for (std::uint64_t p0 = 0; p0 < p; p0 += kBlock) {
    const std::uint64_t p1 = std::min(p0 + kBlock, p);
    for (std::uint64_t ci = 0; ci < cin; ++ci) {
      const float* ktrow = kt.data() + ci * cout;
      for (std::uint64_t i = p0; i < p1; ++i) {
        const float xv = x[i * cin + ci];
        float* orow = out.data() + i * cout;
        for (std::uint64_t co = 0; co < cout; ++co) orow[co] += xv * ktrow[co];
      }
    }
  }
  return out;
}

// Unordered set of per-patch feature vectors. Equality of published outputs
// is multiset equality; downstream consumers must not rely on positions.
struct PatchSet {
  Tensor data;  // [num_patches, hidden_dim]

  std::size_t count() const { return data.rank() == 2 ? data.dim(0) : 0; }
  std::size_t width() const { return data.rank() == 2 ? data.dim(1) : 0; }

  std::vector<std::vector<float>> rows() const {
    std::vector<std::vector<float>> out;
    out.reserve(count());
    for (std::size_t i = 0; i < count(); ++i)
      out.emplace_back(data.data() + i * width(), data.data() + (i + 1) * width());
    return out;
  }

  // Lexicographic row order: the canonical representative of the multiset.
  PatchSet canonical_sorted() const {
    auto r = rows();
    std::sort(r.begin(), r.end());
    PatchSet out;
    out.data = Tensor({count(), width()});
    for (std::size_t i = 0; i < r.size(); ++i)
      std::copy(r[i].begin(), r[i].end(), out.data.data() + i * width());
    return out;
  }

  bool multiset_equal(const PatchSet& o) const {
    return canonical_sorted().data == o.canonical_sorted().data;
  }
};

// Fisher-Yates over patch rows, driven by splitmix64(seed XOR nonce). The
// nonce is fresh per sample and never stored in the published output.
inline PatchSet shuffle_patches(PatchSet set, std::uint64_t key_seed, std::uint64_t nonce) {
  const std::size_t n = set.count(), w = set.width();
  SplitMix64 rng(key_seed ^ nonce);
  for (std::size_t i = n; i-- > 1;) {
    const std::size_t j = static_cast<std::size_t>(rng.next() % (i + 1));
    if (j != i)
      std::swap_ranges(set.data.data() + i * w, set.data.data() + (i + 1) * w,
                       set.data.data() + j * w);
  }
  return set;
}

struct EncodeOptions {
  bool positional = true;
  bool normalization = true;  // diagnostic only; locality tests switch it off
  bool shuffle = true;
};

// Full pipeline: patchify conv, then [channel_norm -> relu -> 1x1 conv]
// blocks with the positional embedding added before the last conv, then the
// final ReLU and the per-sample patch shuffle.
inline PatchSet encode(const EncoderWeights& w, const Tensor& image, std::uint64_t nonce,
                       const EncodeOptions& opts = {}) {
  const ArchConfig& a = w.arch;
  if (image.rank() != 3 || image.dim(0) != a.image_height || image.dim(1) != a.image_width ||
      image.dim(2) != a.channels_in)
    fail(errc::shape_mismatch, "image does not match the key architecture");
  for (std::size_t i = 0; i < image.size(); ++i)
    if (!(image[i] >= 0.0f && image[i] <= 1.0f))
      fail(errc::shape_mismatch, "pixel values must lie in [0,1]");

  Tensor act = patchify_conv(image, w.patchify);
  act = Tensor({a.num_patches(), a.hidden_dim}, act.payload());  // flatten the grid
  const std::uint32_t blocks = a.mixing_blocks();
  for (std::uint32_t b = 0; b < blocks; ++b) {
    if (opts.normalization) act = channel_norm(act, w.norm_scale[b], w.norm_shift[b]);
    act = relu(std::move(act));
    if (b + 1 == blocks && opts.positional) act = add_positional(act, w.positional);
    act = mix_channels(act, w.mixers[b]);
  }
  act = relu(std::move(act));
  if (!act.all_finite()) fail(errc::non_finite_output, "encoder produced non-finite values");

  PatchSet out;
  out.data = std::move(act);
  if (opts.shuffle) out = shuffle_patches(std::move(out), w.seed, nonce);
  return out;
}

inline PatchSet encode(const EncoderKey& key, const Tensor& image, std::uint64_t nonce,
                       const EncodeOptions& opts = {}) {
  return encode(sample_encoder(key), image, nonce, opts);
}

// Default per-sample nonce: random access mix of the key seed and the sample
// ordinal, so parallel encodes agree with sequential ones.
inline std::uint64_t derive_nonce(std::uint64_t key_seed, std::uint64_t sample_ordinal) {
  return mix64(key_seed ^ 0x5ca1ab1e0ddba11ull ^ mix64(sample_ordinal));
}

}  // namespace neuracrypt

#endif
