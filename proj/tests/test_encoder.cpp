#include <catch2/catch_amalgamated.hpp>

#include "neuracrypt/encoder.hpp"

using namespace neuracrypt;

namespace {

Tensor random_image(const ArchConfig& arch, std::uint64_t seed) {
  Tensor img({arch.image_height, arch.image_width, arch.channels_in});
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<float>(rng.next_unit());
  return img;
}

const ArchConfig kSmallArch{32, 32, 1, 8, 3, 64};

}  // namespace

TEST_CASE("arch validation") {
  CHECK_NOTHROW(ArchConfig{}.validate());
  CHECK_THROWS_AS((ArchConfig{30, 32, 1, 8, 3, 64}.validate()), Error);   // 8 does not divide 30
  CHECK_THROWS_AS((ArchConfig{32, 32, 1, 8, 1, 64}.validate()), Error);   // depth < 2
  CHECK_THROWS_AS((ArchConfig{32, 32, 1, 0, 3, 64}.validate()), Error);
  CHECK(ArchConfig{}.num_patches() == 256);
  CHECK(kSmallArch.num_patches() == 16);
}

TEST_CASE("key file round-trips and rejects corruption") {
  const EncoderKey key{0x0123456789abcdefull, kSmallArch, kKeyFormatVersion};
  std::string bytes = serialize_key(key);
  const EncoderKey back = deserialize_key(bytes);
  CHECK(back.seed == key.seed);
  CHECK(back.arch == key.arch);
  CHECK(serialize_key(back) == bytes);

  SECTION("corrupted magic") {
    bytes[0] = 'Z';
    CHECK_THROWS_MATCHES(deserialize_key(bytes), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("FormatError")));
  }
  SECTION("version bump") {
    bytes[4] = 2;
    CHECK_THROWS_MATCHES(deserialize_key(bytes), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("VersionError")));
  }
}

TEST_CASE("weight materialization is deterministic and He-scaled") {
  const EncoderKey key{42, kSmallArch, kKeyFormatVersion};
  const EncoderWeights a = sample_encoder(key);
  const EncoderWeights b = sample_encoder(key);
  CHECK(a.patchify == b.patchify);
  REQUIRE(a.mixers.size() == b.mixers.size());
  for (std::size_t i = 0; i < a.mixers.size(); ++i) CHECK(a.mixers[i] == b.mixers[i]);
  CHECK(a.positional == b.positional);

  // the very first weight is the first Box-Muller draw times sqrt(2/fan_in)
  GaussianStream g(42);
  const double fan_in = 8.0 * 8.0 * 1.0;
  CHECK(a.patchify[0] == static_cast<float>(g.next() * std::sqrt(2.0 / fan_in)));

  // depth 3 gives one mixing block
  CHECK(a.mixers.size() == 1);
  CHECK(a.norm_scale.size() == 1);
}

TEST_CASE("parameter count lands near the published scale") {
  const std::uint64_t params = parameter_count(ArchConfig{});
  CHECK(params == 22040576ull);
  CHECK(params > 21755000ull);   // within -5 percent of 22.9M
  CHECK(params < 24045000ull);   // within +5 percent
}

TEST_CASE("patchify_conv computes disjoint-patch convolutions") {
  SECTION("1x1 identity kernel is the identity") {
    Tensor x({1, 1, 1});
    x[0] = 0.37f;
    Tensor k({1, 1, 1, 1});
    k[0] = 1.0f;
    const Tensor y = patchify_conv(x, k);
    CHECK(y.dims() == std::vector<std::uint64_t>{1, 1, 1});
    CHECK(y[0] == 0.37f);
  }
  SECTION("all-ones kernel sums the patch") {
    Tensor x({2, 2, 1});
    x[0] = 0.1f; x[1] = 0.2f; x[2] = 0.3f; x[3] = 0.4f;
    Tensor k({1, 2, 2, 1});
    for (std::size_t i = 0; i < 4; ++i) k[i] = 1.0f;
    const Tensor y = patchify_conv(x, k);
    REQUIRE(y.dims() == std::vector<std::uint64_t>{1, 1, 1});
    CHECK_THAT(y[0], Catch::Matchers::WithinAbs(1.0, 1e-6));
  }
  SECTION("32x32 with patch 8 gives a 4x4 grid") {
    Tensor x({32, 32, 1});
    Tensor k({5, 8, 8, 1});
    const Tensor y = patchify_conv(x, k);
    CHECK(y.dims() == std::vector<std::uint64_t>{4, 4, 5});
  }
  SECTION("shape errors") {
    Tensor x({3, 3, 1});
    Tensor k({1, 2, 2, 1});
    CHECK_THROWS_AS(patchify_conv(x, k), Error);  // 2 does not divide 3
  }
}

TEST_CASE("channel_norm normalizes per channel over patches") {
  Tensor scale({1}), shift({1});
  scale[0] = 1.0f;
  shift[0] = 0.0f;

  SECTION("constant channel becomes the shift") {
    Tensor x({3, 1});
    x[0] = x[1] = x[2] = 5.0f;
    shift[0] = 0.25f;
    const Tensor y = channel_norm(x, scale, shift);
    for (std::size_t i = 0; i < 3; ++i) CHECK_THAT(y[i], Catch::Matchers::WithinAbs(0.25, 1e-6));
  }
  SECTION("unit-variance input stays put") {
    Tensor x({2, 1});
    x[0] = -1.0f;
    x[1] = 1.0f;
    const Tensor y = channel_norm(x, scale, shift);
    CHECK_THAT(y[0], Catch::Matchers::WithinAbs(-1.0, 1e-4));
    CHECK_THAT(y[1], Catch::Matchers::WithinAbs(1.0, 1e-4));
  }
  SECTION("a single patch degenerates to the shift") {
    Tensor x({1, 1});
    x[0] = 3.0f;
    shift[0] = -0.5f;
    const Tensor y = channel_norm(x, scale, shift);
    CHECK_THAT(y[0], Catch::Matchers::WithinAbs(-0.5, 1e-6));
  }
}

TEST_CASE("relu") {
  Tensor x({3});
  x[0] = -1.0f; x[1] = 0.0f; x[2] = 2.0f;
  const Tensor y = relu(x);
  CHECK(y[0] == 0.0f);
  CHECK(y[1] == 0.0f);
  CHECK(y[2] == 2.0f);
  CHECK(relu(y) == y);  // idempotent
}

TEST_CASE("add_positional") {
  Tensor x({2, 2});
  x[0] = 1; x[1] = 2; x[2] = 3; x[3] = 4;
  SECTION("zero embeddings are the identity") {
    Tensor e({2, 2});
    CHECK(add_positional(x, e) == x);
  }
  SECTION("single patch adds the embedding") {
    Tensor x1({1, 2}), e({1, 2});
    x1[0] = 1; x1[1] = 2; e[0] = 10; e[1] = 20;
    const Tensor y = add_positional(x1, e);
    CHECK(y[0] == 11.0f);
    CHECK(y[1] == 22.0f);
  }
  SECTION("swap-then-add differs from add-then-swap for unequal embeddings") {
    Tensor e({2, 2});
    e[0] = 1; e[1] = 1; e[2] = 2; e[3] = 2;
    Tensor swapped({2, 2});
    swapped[0] = x[2]; swapped[1] = x[3]; swapped[2] = x[0]; swapped[3] = x[1];
    const Tensor a = add_positional(swapped, e);
    Tensor b = add_positional(x, e);
    std::swap(b[0], b[2]);
    std::swap(b[1], b[3]);
    CHECK_FALSE(a == b);
  }
  SECTION("shape mismatch") {
    Tensor e({3, 2});
    CHECK_THROWS_AS(add_positional(x, e), Error);
  }
}

TEST_CASE("shuffle_patches preserves the multiset") {
  PatchSet set;
  set.data = Tensor({4, 3});
  SplitMix64 rng(11);
  for (std::size_t i = 0; i < set.data.size(); ++i)
    set.data[i] = static_cast<float>(rng.next_unit());

  SECTION("one patch is a fixed point") {
    PatchSet one;
    one.data = Tensor({1, 5});
    for (std::size_t i = 0; i < 5; ++i) one.data[i] = static_cast<float>(i);
    const PatchSet out = shuffle_patches(one, 7, 9);
    CHECK(out.data == one.data);
  }
  SECTION("sorted rows are invariant across nonces") {
    const PatchSet a = shuffle_patches(set, 7, 1);
    const PatchSet b = shuffle_patches(set, 7, 2);
    CHECK(a.multiset_equal(b));
    CHECK(a.multiset_equal(set));
  }
  SECTION("different nonces usually reorder") {
    const PatchSet a = shuffle_patches(set, 7, 1);
    const PatchSet b = shuffle_patches(set, 7, 2);
    CHECK_FALSE(a.data == b.data);
  }
}

TEST_CASE("encode produces the documented shapes deterministically") {
  const EncoderKey key{1234, kSmallArch, kKeyFormatVersion};
  const Tensor img = random_image(kSmallArch, 99);

  const PatchSet a = encode(key, img, 5);
  CHECK(a.count() == 16);
  CHECK(a.width() == 64);
  CHECK(a.data.all_finite());

  const PatchSet b = encode(key, img, 5);
  CHECK(a.data == b.data);  // bit-identical

  const PatchSet c = encode(key, img, 6);
  CHECK(a.multiset_equal(c));

  SECTION("shape arithmetic for a depth-7 arch") {
    const ArchConfig deep{16, 16, 1, 8, 7, 32};
    const EncoderKey k2{9, deep, kKeyFormatVersion};
    const PatchSet out = encode(k2, random_image(deep, 3), 0);
    CHECK(out.count() == 4);
    CHECK(out.width() == 32);
  }
  SECTION("image shape and range validation") {
    CHECK_THROWS_AS(encode(key, Tensor({16, 32, 1}), 0), Error);
    Tensor bad = img;
    bad[0] = 1.5f;
    CHECK_THROWS_AS(encode(key, bad, 0), Error);
  }
}

TEST_CASE("patch locality without positional and normalization stages") {
  const EncoderKey key{77, kSmallArch, kKeyFormatVersion};
  const EncoderWeights w = sample_encoder(key);
  EncodeOptions opts;
  opts.positional = false;
  opts.normalization = false;  // cross-patch statistics off
  opts.shuffle = false;

  Tensor img = random_image(kSmallArch, 1);
  const PatchSet base = encode(w, img, 0, opts);

  // poke one pixel inside patch (1, 2) of the 4x4 grid
  Tensor poked = img;
  const std::size_t row = 1 * 8 + 3, col = 2 * 8 + 4;
  poked[row * 32 + col] = poked[row * 32 + col] < 0.5f ? 1.0f : 0.0f;
  const PatchSet changed = encode(w, poked, 0, opts);

  const std::size_t target = 1 * 4 + 2;
  for (std::size_t p = 0; p < base.count(); ++p) {
    bool equal = true;
    for (std::size_t j = 0; j < base.width(); ++j)
      equal &= base.data[p * base.width() + j] == changed.data[p * base.width() + j];
    if (p == target)
      CHECK_FALSE(equal);
    else
      CHECK(equal);
  }
}

TEST_CASE("thousand-seed finiteness sweep and seed separation") {
  const ArchConfig tiny{16, 16, 1, 8, 4, 16};
  const Tensor img = random_image(tiny, 5);
  PatchSet prev;
  int distinct = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const EncoderKey key{seed, tiny, kKeyFormatVersion};
    const PatchSet out = encode(key, img, 1);
    REQUIRE(out.data.all_finite());
    if (seed > 0 && !(out.data == prev.data)) ++distinct;
    prev = out;
  }
  CHECK(distinct == 999);  // all consecutive seed pairs differ
}
