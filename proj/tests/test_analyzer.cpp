#include <catch2/catch_amalgamated.hpp>

#include "neuracrypt/analyzer.hpp"

using namespace neuracrypt;

namespace {

DiscreteInstance example2_instance() {
  return DiscreteInstance::create({1, 2, 3, 4, 5}, {"+", "+", "-", "-", "-"});
}

EncoderFamily example2_family(const DiscreteInstance& inst) {
  return EncoderFamily::uniform({
      validate_permutation(inst, {2, 1, 5, 4, 3}),
      validate_permutation(inst, {2, 1, 3, 5, 4}),
      validate_permutation(inst, {1, 2, 3, 5, 4}),
      validate_permutation(inst, {4, 3, 1, 2, 5}),
      validate_permutation(inst, {3, 4, 2, 1, 5}),
      validate_permutation(inst, {5, 2, 4, 3, 1}),
  });
}

// The Example-3 listing is in inverse one-line notation; build members as the
// inverses so the printed label configurations reproduce.
EncoderFamily example3_family(const DiscreteInstance& inst) {
  return EncoderFamily::uniform({
      validate_permutation(inst, {1, 2, 3, 4, 5}).inverse(),
      validate_permutation(inst, {2, 1, 3, 5, 4}).inverse(),
      validate_permutation(inst, {1, 2, 5, 4, 3}).inverse(),
      validate_permutation(inst, {1, 3, 2, 4, 5}).inverse(),
      validate_permutation(inst, {1, 5, 2, 3, 4}).inverse(),
  });
}

EncoderFamily example3_outer_family(const DiscreteInstance& inst) {
  return EncoderFamily::uniform({
      validate_permutation(inst, {1, 2, 3, 4, 5}).inverse(),
      validate_permutation(inst, {3, 2, 1, 4, 5}).inverse(),
  });
}

DatasetPrior uniform_pos_prior(const DiscreteInstance& inst) {
  return DatasetPrior::create(inst, {{{2, 4, 3}, Rational(1, 3)},
                                     {{2, 5, 4}, Rational(1, 3)},
                                     {{1, 5, 4}, Rational(1, 3)}});
}

std::string lc_of(const DiscreteInstance& inst, const Permutation& t) {
  return lc_to_string(inst, label_configuration(inst, t));
}

}  // namespace

TEST_CASE("label_configuration matches the worked examples") {
  const auto inst = example2_instance();
  CHECK(lc_of(inst, validate_permutation(inst, {2, 1, 5, 4, 3})) == "++---");
  CHECK(lc_of(inst, Permutation::identity(5)) == "++---");

  // 16-sample instance with the published encoder
  std::vector<SampleId> samples(16);
  std::vector<Label> labels;
  for (int i = 0; i < 16; ++i) samples[i] = i + 1;
  for (char c : std::string("++--++----------")) labels.emplace_back(1, c);
  const auto big = DiscreteInstance::create(samples, labels);
  const Permutation t =
      validate_permutation(big, {12, 2, 11, 4, 6, 8, 16, 15, 13, 7, 9, 5, 3, 14, 1, 10});
  CHECK(lc_of(big, t) == "-+---+-+---+----");
}

TEST_CASE("LC multiset is conserved") {
  const auto inst = example2_instance();
  const auto base = original_label_configuration(inst);
  auto sorted = [](LcVector v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  const EncoderFamily sym = enumerate_sym(inst, 5);
  for (const auto& m : sym.members())
    CHECK(sorted(label_configuration(inst, m)) == sorted(base));
}

TEST_CASE("partition_by_lc reproduces the composition example") {
  const auto inst = example2_instance();
  const EncoderFamily f = example3_family(inst);
  auto sizes = partition_by_lc(inst, f).sizes();
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{2, 3});

  const EncoderFamily composed = compose_families(example3_outer_family(inst), f);
  CHECK(composed.size() == 10);
  auto csizes = partition_by_lc(inst, composed).sizes();
  std::sort(csizes.begin(), csizes.end());
  CHECK(csizes == std::vector<std::size_t>{3, 3, 4});

  // label-preserving family collapses to a single class
  const auto inst4 = DiscreteInstance::create({1, 2, 3, 4}, {"+", "+", "-", "-"});
  CHECK(partition_by_lc(inst4, label_preserving_family(inst4)).classes.size() == 1);
}

TEST_CASE("anonymity_list picks the indistinguishable members") {
  const auto inst = example2_instance();
  const EncoderFamily f = example2_family(inst);
  CHECK(anonymity_list(inst, f, f.member(0)) == std::vector<std::size_t>{0, 1, 2});
  CHECK(anonymity_list(inst, f, f.member(5)) == std::vector<std::size_t>{5});
  CHECK_THROWS_MATCHES(anonymity_list(inst, f, Permutation::identity(5)), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("NotInFamily")));
}

TEST_CASE("possible_datasets reproduces the worked branches") {
  const auto inst = example2_instance();
  const EncoderFamily f = example2_family(inst);

  SECTION("branch T_A = T_1") {
    const Observation obs = observe(inst, f.member(0), {2, 3, 4});
    CHECK(obs.encoded() == std::vector<SampleIndex>{0, 3, 4});  // Z = (1,4,5)
    const auto pos = possible_datasets(inst, f, obs);
    REQUIRE(pos.size() == 3);
    CHECK(pos[0] == std::vector<SampleId>{2, 4, 3});
    CHECK(pos[1] == std::vector<SampleId>{2, 5, 4});
    CHECK(pos[2] == std::vector<SampleId>{1, 5, 4});
  }
  SECTION("branch T_A = T_4") {
    const Observation obs = observe(inst, f.member(3), {2, 3, 4});
    const auto pos = possible_datasets(inst, f, obs);
    REQUIRE(pos.size() == 2);
    CHECK(pos[0] == std::vector<SampleId>{3, 4, 2});
    CHECK(pos[1] == std::vector<SampleId>{4, 3, 1});
    // forced members: {3,4} lie in every candidate
    for (const auto& tuple : pos) {
      CHECK(std::find(tuple.begin(), tuple.end(), 3) != tuple.end());
      CHECK(std::find(tuple.begin(), tuple.end(), 4) != tuple.end());
    }
  }
  SECTION("branch T_A = T_6 pins the dataset exactly") {
    const Observation obs = observe(inst, f.member(5), {2, 3, 4});
    const auto pos = possible_datasets(inst, f, obs);
    REQUIRE(pos.size() == 1);
    CHECK(pos[0] == std::vector<SampleId>{2, 4, 3});
  }
  SECTION("identity-only family returns Z itself") {
    const EncoderFamily idf = EncoderFamily::uniform({Permutation::identity(5)});
    const Observation obs = observe(inst, idf.member(0), {4, 2, 3});
    const auto pos = possible_datasets(inst, idf, obs);
    REQUIRE(pos.size() == 1);
    CHECK(pos[0] == std::vector<SampleId>{2, 3, 4});
  }
  SECTION("inconsistent label configuration") {
    const Observation obs = Observation::create(inst, {1, 2}, {"-", "-", "+", "+", "-"});
    const EncoderFamily three = EncoderFamily::uniform(
        {f.member(0), f.member(1), f.member(2)});
    CHECK_THROWS_MATCHES(possible_datasets(inst, three, obs), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("InconsistentObservation")));
  }
}

TEST_CASE("joint posterior enumerates (dataset, encoder) pairs") {
  const auto inst = example2_instance();
  const EncoderFamily f = example2_family(inst);
  const DatasetPrior prior = uniform_pos_prior(inst);
  const Observation obs = observe(inst, f.member(0), {2, 3, 4});

  const JointPosterior joint = joint_posterior(inst, f, prior, obs);
  REQUIRE(joint.entries.size() == 3);
  for (const auto& e : joint.entries) CHECK(e.probability == Rational(1, 3));

  SECTION("identity family with a point prior") {
    const EncoderFamily idf = EncoderFamily::uniform({Permutation::identity(5)});
    const DatasetPrior point = DatasetPrior::create(inst, {{{2, 3, 4}, Rational(1)}});
    const Observation o = observe(inst, idf.member(0), {2, 3, 4});
    const JointPosterior j = joint_posterior(inst, idf, point, o);
    REQUIRE(j.entries.size() == 1);
    CHECK(j.entries[0].probability == Rational(1));
  }
  SECTION("zero evidence") {
    const DatasetPrior off = DatasetPrior::create(inst, {{{1, 2, 3}, Rational(1)}});
    CHECK_THROWS_MATCHES(joint_posterior(inst, f, off, obs), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("ZeroEvidence")));
  }
}

TEST_CASE("dataset posterior reproduces the golden membership probabilities") {
  const auto inst = example2_instance();
  const EncoderFamily f = example2_family(inst);
  const Observation obs = observe(inst, f.member(0), {2, 3, 4});

  SECTION("uniform prior over the candidate sets") {
    const PosteriorTable post = dataset_posterior(inst, f, uniform_pos_prior(inst), obs);
    CHECK(post.total() == Rational(1));
    CHECK(membership_probability(post, 1) == Rational(1, 3));
    CHECK(membership_probability(post, 2) == Rational(2, 3));
    CHECK(membership_probability(post, 4) == Rational(1));
    CHECK(membership_probability(post, 99) == Rational(0));
  }
  SECTION("exchangeable uniform prior over all 3-subsets agrees") {
    std::vector<std::pair<std::vector<SampleId>, Rational>> entries;
    for (SampleId a = 1; a <= 5; ++a)
      for (SampleId b = a + 1; b <= 5; ++b)
        for (SampleId c = b + 1; c <= 5; ++c) entries.push_back({{a, b, c}, Rational(1, 10)});
    const DatasetPrior uniform_all = DatasetPrior::create(inst, entries);
    const PosteriorTable post = dataset_posterior(inst, f, uniform_all, obs);
    CHECK(membership_probability(post, 1) == Rational(1, 3));
    CHECK(membership_probability(post, 2) == Rational(2, 3));
    CHECK(membership_probability(post, 4) == Rational(1));
  }
  SECTION("weighted prior flips the odds") {
    const DatasetPrior weighted = DatasetPrior::create(
        inst, {{{2, 4, 3}, Rational(1, 10)},
               {{2, 5, 4}, Rational(1, 10)},
               {{1, 5, 4}, Rational(4, 10)},
               {{1, 2, 3}, Rational(4, 10)}});
    const PosteriorTable post = dataset_posterior(inst, f, weighted, obs);
    CHECK(membership_probability(post, 1) == Rational(2, 3));
    CHECK(membership_probability(post, 2) == Rational(1, 3));
  }
  SECTION("point prior gives a point posterior") {
    const DatasetPrior point = DatasetPrior::create(inst, {{{2, 3, 4}, Rational(1)}});
    const PosteriorTable post = dataset_posterior(inst, f, point, obs);
    REQUIRE(post.entries.size() == 1);
    CHECK(post.entries[0].probability == Rational(1));
  }
}

TEST_CASE("label_only_posterior restricts and renormalizes the prior") {
  const auto inst = example2_instance();
  // label multiset: one +, two -
  const std::vector<std::uint32_t> y{0, 1, 1};
  const DatasetPrior prior = DatasetPrior::create(
      inst, {{{1, 3, 4}, Rational(1, 4)}, {{2, 3, 5}, Rational(1, 4)}, {{1, 2, 3}, Rational(1, 2)}});
  const PosteriorTable post = label_only_posterior(inst, prior, y);
  REQUIRE(post.entries.size() == 2);
  CHECK(post.entries[0].probability == Rational(1, 2));
  CHECK(post.entries[1].probability == Rational(1, 2));

  const DatasetPrior single = DatasetPrior::create(inst, {{{1, 3, 4}, Rational(1)}});
  const PosteriorTable point = label_only_posterior(inst, single, y);
  REQUIRE(point.entries.size() == 1);
  CHECK(point.entries[0].probability == Rational(1));

  CHECK_THROWS_MATCHES(label_only_posterior(inst, single, {0, 0, 0}), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("ZeroEvidence")));
}

TEST_CASE("perfect privacy holds for the label-preserving family and fails off it") {
  const auto inst = DiscreteInstance::create({1, 2, 3, 4}, {"+", "+", "-", "-"});
  std::vector<std::pair<std::vector<SampleId>, Rational>> entries;
  for (SampleId a = 1; a <= 4; ++a)
    for (SampleId b = a + 1; b <= 4; ++b) entries.push_back({{a, b}, Rational(1, 6)});
  const DatasetPrior prior = DatasetPrior::create(inst, entries);
  const EncoderFamily f0 = label_preserving_family(inst);

  const PrivacyReport good = is_perfectly_private(inst, f0, prior);
  CHECK(good.perfectly_private);
  for (const auto& obs : good.per_observation) CHECK(obs.tv_distance == 0);

  EncoderFamily widened = EncoderFamily::uniform(
      {f0.member(0), f0.member(1), f0.member(2), f0.member(3),
       validate_permutation(inst, {3, 4, 1, 2})});
  const PrivacyReport bad = is_perfectly_private(inst, widened, prior);
  CHECK_FALSE(bad.perfectly_private);

  const EncoderFamily identity_only = EncoderFamily::uniform({Permutation::identity(4)});
  CHECK_FALSE(is_perfectly_private(inst, identity_only, prior).perfectly_private);
}

TEST_CASE("compose_families composes, merges duplicates and keeps weights") {
  const auto inst = example2_instance();
  const EncoderFamily f = example2_family(inst);

  SECTION("identity outer family returns the inner one") {
    const EncoderFamily idf = EncoderFamily::uniform({Permutation::identity(5)});
    const EncoderFamily composed = compose_families(idf, f);
    REQUIRE(composed.size() == f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      auto idx = composed.find(f.member(i));
      REQUIRE(idx);
      CHECK(composed.weight(*idx) == f.weight(i));
    }
  }
  SECTION("Sym composed with Sym stays uniform Sym") {
    const auto inst3 = DiscreteInstance::create({1, 2, 3}, {"+", "-", "-"});
    const EncoderFamily sym = enumerate_sym(inst3);
    const EncoderFamily composed = compose_families(sym, sym);
    REQUIRE(composed.size() == 6);
    for (std::size_t i = 0; i < composed.size(); ++i)
      CHECK(composed.weight(i) == Rational(1, 6));
  }
  SECTION("degree mismatch") {
    const auto inst3 = DiscreteInstance::create({1, 2, 3}, {"+", "-", "-"});
    CHECK_THROWS_MATCHES(compose_families(enumerate_sym(inst3), f), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("InstanceMismatch")));
  }
}

TEST_CASE("mutual information edge cases") {
  const auto inst = DiscreteInstance::create({1, 2, 3, 4}, {"+", "+", "-", "-"});
  std::vector<std::pair<std::vector<SampleId>, Rational>> entries;
  for (SampleId a = 1; a <= 4; ++a)
    for (SampleId b = a + 1; b <= 4; ++b) entries.push_back({{a, b}, Rational(1, 6)});
  const DatasetPrior prior = DatasetPrior::create(inst, entries);

  SECTION("identity family reveals everything: I = H(X_A)") {
    const EncoderFamily idf = EncoderFamily::uniform({Permutation::identity(4)});
    CHECK_THAT(mutual_information(inst, idf, prior),
               Catch::Matchers::WithinAbs(std::log2(6.0), 1e-9));
  }
  SECTION("deterministic prior carries no information") {
    const DatasetPrior point = DatasetPrior::create(inst, {{{1, 3}, Rational(1)}});
    const EncoderFamily f0 = label_preserving_family(inst);
    CHECK_THAT(mutual_information(inst, f0, point), Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
  SECTION("label-preserving family leaks exactly the label information") {
    // Direct oracle: I(X_A; Y_A) by enumeration over the prior.
    const EncoderFamily f0 = label_preserving_family(inst);
    std::map<std::vector<std::uint32_t>, Rational> label_marginal;
    for (const auto& e : prior.entries()) {
      std::vector<std::uint32_t> y;
      for (SampleIndex i : e.tuple) y.push_back(inst.label_index_of(i));
      std::sort(y.begin(), y.end());
      label_marginal[y] += e.probability;
    }
    double label_info = 0.0;
    for (const auto& e : prior.entries()) {
      std::vector<std::uint32_t> y;
      for (SampleIndex i : e.tuple) y.push_back(inst.label_index_of(i));
      std::sort(y.begin(), y.end());
      label_info +=
          to_double(e.probability) * std::log2(to_double(1 / label_marginal[y]));
    }
    CHECK_THAT(mutual_information(inst, f0, prior),
               Catch::Matchers::WithinAbs(label_info, 1e-9));
  }
}

TEST_CASE("guessing probability") {
  const auto inst = example2_instance();
  const EncoderFamily f = example2_family(inst);

  SECTION("identity family is a giveaway") {
    const EncoderFamily idf = EncoderFamily::uniform({Permutation::identity(5)});
    CHECK(guessing_probability(inst, idf, uniform_pos_prior(inst)) == Rational(1));
  }
  SECTION("uniform setup: the worked observation splits Eve's guess three ways") {
    const DatasetPrior prior = uniform_pos_prior(inst);
    const Observation obs = observe(inst, f.member(0), {2, 3, 4});  // Z=(1,4,5)
    const PosteriorTable post = dataset_posterior(inst, f, prior, obs);
    Rational best(0);
    for (const auto& [set, mass] : post.mass_by_set())
      if (mass > best) best = mass;
    CHECK(best == Rational(1, 3));
  }
  SECTION("total MAP success agrees with a per-observation recomputation") {
    // independent oracle route: walk every realizable observation from the
    // report and rebuild its posterior through joint_posterior
    const DatasetPrior prior = uniform_pos_prior(inst);
    const PrivacyReport report = is_perfectly_private(inst, f, prior);
    Rational total(0);
    for (const auto& stats : report.per_observation) {
      const PosteriorTable post = dataset_posterior(inst, f, prior, stats.observation);
      Rational best(0);
      for (const auto& [set, mass] : post.mass_by_set())
        if (mass > best) best = mass;
      total += stats.probability * best;
    }
    CHECK(total == guessing_probability(inst, f, prior));
    CHECK(total == report.guess_probability_exact);
  }
  SECTION("disjoint-support tuples under the label-preserving family guess at 1/k") {
    const auto inst6 =
        DiscreteInstance::create({1, 2, 3, 4, 5, 6}, {"a", "a", "a", "a", "a", "a"});
    const DatasetPrior prior = DatasetPrior::create(
        inst6,
        {{{1, 2}, Rational(1, 3)}, {{3, 4}, Rational(1, 3)}, {{5, 6}, Rational(1, 3)}});
    const EncoderFamily f0 = label_preserving_family(inst6);
    CHECK(guessing_probability(inst6, f0, prior) == Rational(1, 3));
  }
}

TEST_CASE("posterior support equals the positive-prior slice of Pos") {
  const auto inst = example2_instance();
  const EncoderFamily f = example2_family(inst);
  const DatasetPrior prior = DatasetPrior::create(
      inst, {{{2, 4, 3}, Rational(1, 2)}, {{1, 5, 4}, Rational(1, 2)}});
  const Observation obs = observe(inst, f.member(0), {2, 3, 4});
  const auto pos = possible_datasets(inst, f, obs);
  const PosteriorTable post = dataset_posterior(inst, f, prior, obs);
  // support must be exactly the Pos tuples whose set carries prior mass
  std::vector<std::vector<SampleId>> expected;
  for (const auto& tuple : pos) {
    std::vector<SampleIndex> key;
    for (SampleId id : tuple) key.push_back(*inst.index_of(id));
    std::sort(key.begin(), key.end());
    if (prior.set_mass(key) > 0) expected.push_back(tuple);
  }
  REQUIRE(post.entries.size() == expected.size());
  for (const auto& e : post.entries)
    CHECK(std::find(expected.begin(), expected.end(), e.tuple) != expected.end());
}
