#include <catch2/catch_amalgamated.hpp>

#include "neuracrypt/discrete.hpp"
#include "neuracrypt/prng.hpp"

using namespace neuracrypt;

namespace {

DiscreteInstance example2_instance() {
  return DiscreteInstance::create({1, 2, 3, 4, 5}, {"+", "+", "-", "-", "-"});
}

DiscreteInstance example1_instance() {
  std::vector<SampleId> samples(16);
  std::vector<Label> labels;
  for (int i = 0; i < 16; ++i) samples[i] = i + 1;
  for (char c : std::string("++--++----------")) labels.emplace_back(1, c);
  return DiscreteInstance::create(samples, labels);
}

}  // namespace

TEST_CASE("validate_permutation accepts valid images") {
  const auto inst = example2_instance();
  const Permutation t1 = validate_permutation(inst, {2, 1, 5, 4, 3});
  CHECK(t1.image_ids(inst) == std::vector<SampleId>{2, 1, 5, 4, 3});
  const Permutation id = validate_permutation(inst, {1, 2, 3, 4, 5});
  CHECK(id.is_identity());
}

TEST_CASE("validate_permutation rejects bad images") {
  const auto inst = example2_instance();
  CHECK_THROWS_MATCHES(validate_permutation(inst, {1, 1, 3, 4, 5}), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("DuplicateImage")));
  CHECK_THROWS_MATCHES(validate_permutation(inst, {1, 2, 3, 4}), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("LengthMismatch")));
  CHECK_THROWS_MATCHES(validate_permutation(inst, {1, 2, 3, 4, 9}), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("UnknownSample")));
}

TEST_CASE("apply_encoder maps tuples elementwise") {
  const auto inst = example2_instance();
  const Permutation t1 = validate_permutation(inst, {2, 1, 5, 4, 3});
  CHECK(apply_encoder(inst, t1, {2, 3, 4}) == std::vector<SampleId>{1, 5, 4});
  const Permutation id = Permutation::identity(5);
  CHECK(apply_encoder(inst, id, {3, 1, 5}) == std::vector<SampleId>{3, 1, 5});
  CHECK_THROWS_AS(apply_encoder(inst, t1, {7}), Error);
  // round trip through the inverse
  const auto encoded = apply_encoder(inst, t1, {2, 3, 4});
  CHECK(apply_encoder(inst, invert(t1), encoded) == std::vector<SampleId>{2, 3, 4});
}

TEST_CASE("invert composes to the identity") {
  const auto inst = example2_instance();
  const Permutation t1 = validate_permutation(inst, {2, 1, 5, 4, 3});
  CHECK(t1.then(invert(t1)).is_identity());
  CHECK(invert(t1).then(t1).is_identity());
  CHECK(t1.inverse().image_ids(inst) == std::vector<SampleId>{2, 1, 5, 4, 3});  // self-inverse
  CHECK(invert(Permutation::identity(5)).is_identity());

  SplitMix64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SampleIndex> img(8);
    std::iota(img.begin(), img.end(), SampleIndex{0});
    for (std::size_t i = img.size(); i-- > 1;)
      std::swap(img[i], img[static_cast<std::size_t>(rng.next() % (i + 1))]);
    const Permutation t{img};
    CHECK(t.then(invert(t)).is_identity());
    CHECK(invert(invert(t)) == t);
  }
}

TEST_CASE("enumerate_sym produces all distinct bijections with uniform weights") {
  const auto inst3 = DiscreteInstance::create({10, 20, 30}, {"a", "b", "b"});
  const EncoderFamily f3 = enumerate_sym(inst3);
  REQUIRE(f3.size() == 6);
  for (std::size_t i = 0; i < f3.size(); ++i) CHECK(f3.weight(i) == Rational(1, 6));

  const auto inst5 = example2_instance();
  CHECK(enumerate_sym(inst5).size() == 120);

  std::set<std::vector<SampleIndex>> distinct;
  for (const auto& m : f3.members()) distinct.insert(m.image());
  CHECK(distinct.size() == 6);
}

TEST_CASE("enumerate_sym enforces the factorial guard") {
  const auto inst = example1_instance();
  CHECK_THROWS_MATCHES(enumerate_sym(inst), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("TooLarge")));
  CHECK_NOTHROW(enumerate_sym(example2_instance(), 5));
}

TEST_CASE("label_classes partitions the sample space") {
  const auto inst = example2_instance();
  const auto classes = label_classes(inst);
  REQUIRE(classes.size() == 2);
  CHECK(classes[0].first == "+");
  CHECK(classes[0].second == std::vector<SampleIndex>{0, 1});
  CHECK(classes[1].first == "-");
  CHECK(classes[1].second == std::vector<SampleIndex>{2, 3, 4});

  const auto single = DiscreteInstance::create({1, 2, 3}, {"x", "x", "x"});
  const auto sc = label_classes(single);
  REQUIRE(sc.size() == 1);
  CHECK(sc[0].second.size() == 3);

  const auto big = example1_instance();
  const auto bc = label_classes(big);
  REQUIRE(bc.size() == 2);
  std::size_t pos = bc[0].first == "+" ? 0 : 1;
  CHECK(bc[pos].second.size() == 4);
  CHECK(bc[1 - pos].second.size() == 12);

  // partition property: disjoint and covering
  std::vector<bool> seen(big.size(), false);
  for (const auto& [label, members] : bc)
    for (SampleIndex i : members) {
      CHECK_FALSE(seen[i]);
      seen[i] = true;
    }
  CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
}

TEST_CASE("label_preserving_count is the class factorial product") {
  CHECK(label_preserving_count(example1_instance()) == 11496038400ull);
  CHECK(label_preserving_count(example2_instance()) == 2 * 6);
}

TEST_CASE("label_preserving_family enumerates exactly F0") {
  const auto inst = DiscreteInstance::create({1, 2, 3, 4}, {"+", "+", "-", "-"});
  const EncoderFamily f0 = label_preserving_family(inst);
  REQUIRE(f0.size() == 4);
  std::set<std::vector<SampleId>> images;
  for (const auto& m : f0.members()) {
    std::vector<SampleId> ids = m.image_ids(inst);
    images.insert(ids);
  }
  const std::set<std::vector<SampleId>> expected{
      {1, 2, 3, 4}, {2, 1, 3, 4}, {1, 2, 4, 3}, {2, 1, 4, 3}};
  CHECK(images == expected);

  SECTION("all labels identical gives Sym") {
    const auto uniform = DiscreteInstance::create({1, 2, 3}, {"x", "x", "x"});
    CHECK(label_preserving_family(uniform).size() == 6);
  }
  SECTION("all labels distinct gives only the identity") {
    const auto distinct = DiscreteInstance::create({1, 2, 3}, {"a", "b", "c"});
    const EncoderFamily f = label_preserving_family(distinct);
    REQUIRE(f.size() == 1);
    CHECK(f.member(0).is_identity());
  }
  SECTION("cap is enforced") {
    CHECK_THROWS_AS(label_preserving_family(example1_instance(), 1000), Error);
  }
}

TEST_CASE("encoder family rejects duplicates and bad weights") {
  const auto inst = example2_instance();
  const Permutation t1 = validate_permutation(inst, {2, 1, 5, 4, 3});
  CHECK_THROWS_AS(EncoderFamily::uniform({t1, t1}), Error);
  CHECK_THROWS_AS(EncoderFamily::create({t1}, {Rational(-1)}), Error);
  // weights renormalize exactly
  const EncoderFamily f = EncoderFamily::create(
      {t1, Permutation::identity(5)}, {Rational(2), Rational(6)});
  CHECK(f.weight(0) == Rational(1, 4));
  CHECK(f.weight(1) == Rational(3, 4));
}

TEST_CASE("dataset prior merges duplicate sets and validates") {
  const auto inst = example2_instance();
  // (2,4,3) and (3,2,4) are the same underlying set
  const DatasetPrior prior = DatasetPrior::create(
      inst, {{{2, 4, 3}, Rational(1, 4)}, {{3, 2, 4}, Rational(1, 4)}, {{1, 2, 5}, Rational(1, 2)}});
  CHECK(prior.entries().size() == 2);
  CHECK(prior.set_mass({1, 2, 3}) == Rational(1, 2));  // indices of samples 2,3,4
  CHECK(prior.set_mass({0, 1, 4}) == Rational(1, 2));

  CHECK_THROWS_AS(DatasetPrior::create(inst, {{{2, 2, 3}, Rational(1)}}), Error);
  CHECK_THROWS_AS(
      DatasetPrior::create(inst, {{{1, 2}, Rational(1, 2)}, {{1, 2, 3}, Rational(1, 2)}}), Error);
  CHECK_THROWS_AS(DatasetPrior::create(inst, {}), Error);
}

TEST_CASE("observation validates and derives the label multiset") {
  const auto inst = example2_instance();
  const Observation obs =
      Observation::create(inst, {4, 1, 5}, {"+", "+", "-", "-", "-"});
  CHECK(obs.encoded() == std::vector<SampleIndex>{0, 3, 4});  // sorted by instance order
  CHECK(obs.label_multiset() == std::vector<std::uint32_t>{0, 1, 1});  // one +, two -
  CHECK_THROWS_AS(Observation::create(inst, {1, 1, 2}, {"+", "+", "-", "-", "-"}), Error);
  CHECK_THROWS_AS(Observation::create(inst, {1}, {"+", "+"}), Error);
  CHECK_THROWS_AS(Observation::create(inst, {1}, {"+", "+", "-", "-", "?"}), Error);
}
