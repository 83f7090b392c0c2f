#ifndef NEURACRYPT_SYNTH_HPP
#define NEURACRYPT_SYNTH_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "neuracrypt/errors.hpp"
#include "neuracrypt/prng.hpp"
#include "neuracrypt/tensor.hpp"

namespace neuracrypt {

// Two-class blob images: class 0 puts a dimmer blob in the left half, class 1
// a brighter blob in the right half, so the classes stay linearly separable
// after mean pooling. Everything derives from the seed.
struct SyntheticDatasetConfig {
  std::uint32_t image_height = 32;
  std::uint32_t image_width = 32;
  std::uint32_t sample_count = 128;
  std::uint64_t seed = 1;
  // Per-class blob parameters: center given as a fraction of the image, with
  // jitter; intensity sampled from [lo, hi].
  struct BlobClass {
    double center_x_frac;
    double center_y_frac;
    double center_jitter_frac = 0.08;
    double radius_frac = 0.18;
    double intensity_lo;
    double intensity_hi;
  };
  BlobClass class0{0.28, 0.5, 0.08, 0.18, 0.35, 0.55};
  BlobClass class1{0.72, 0.5, 0.08, 0.18, 0.75, 0.95};
  double background = 0.08;
  double noise = 0.02;
};

struct SyntheticDataset {
  std::vector<Tensor> images;  // [H, W, 1] each, values in [0,1]
  std::vector<int> labels;     // 0 / 1
};

inline SyntheticDataset synth_generate(const SyntheticDatasetConfig& cfg) {
  if (cfg.sample_count == 0) fail(errc::invalid_arch, "sample count must be positive");
  if (cfg.image_height == 0 || cfg.image_width == 0)
    fail(errc::invalid_arch, "empty image dimensions");
  SyntheticDataset out;
  SplitMix64 rng(cfg.seed);
  const double h = cfg.image_height, w = cfg.image_width;
  for (std::uint32_t s = 0; s < cfg.sample_count; ++s) {
    const int label = static_cast<int>(s % 2);
    const auto& cls = label == 0 ? cfg.class0 : cfg.class1;
    const double cx = (cls.center_x_frac + (rng.next_unit() - 0.5) * 2 * cls.center_jitter_frac) * w;
    const double cy = (cls.center_y_frac + (rng.next_unit() - 0.5) * 2 * cls.center_jitter_frac) * h;
    const double radius = cls.radius_frac * std::min(h, w);
    const double amp = cls.intensity_lo + rng.next_unit() * (cls.intensity_hi - cls.intensity_lo);
    Tensor img({cfg.image_height, cfg.image_width, 1});
    for (std::uint32_t y = 0; y < cfg.image_height; ++y) {
      for (std::uint32_t x = 0; x < cfg.image_width; ++x) {
        const double dx = (x + 0.5) - cx, dy = (y + 0.5) - cy;
        double v = cfg.background +
                   amp * std::exp(-(dx * dx + dy * dy) / (2.0 * radius * radius)) +
                   (rng.next_unit() - 0.5) * 2.0 * cfg.noise;
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        img[y * cfg.image_width + x] = static_cast<float>(v);
      }
    }
    out.images.push_back(std::move(img));
    out.labels.push_back(label);
  }
  return out;
}

}  // namespace neuracrypt

#endif
