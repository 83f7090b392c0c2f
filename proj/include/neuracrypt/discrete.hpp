#ifndef NEURACRYPT_DISCRETE_HPP
#define NEURACRYPT_DISCRETE_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "neuracrypt/errors.hpp"
#include "neuracrypt/rational.hpp"

namespace neuracrypt {

using SampleId = std::int64_t;
using Label = std::string;
using SampleIndex = std::uint32_t;

// Finite ordered sample space with a labeling. The position of a sample in
// `samples` is its rank under the instance order; label-configuration vectors
// index by it, so the order is fixed for the lifetime of the instance.
class DiscreteInstance {
public:
  static DiscreteInstance create(std::vector<SampleId> samples, std::vector<Label> labels) {
    if (samples.empty()) fail(errc::invalid_instance, "sample space is empty");
    if (samples.size() != labels.size())
      fail(errc::invalid_instance, "labels must parallel samples");
    DiscreteInstance inst;
    inst.samples_ = std::move(samples);
    for (SampleIndex i = 0; i < inst.samples_.size(); ++i) {
      if (!inst.index_by_id_.emplace(inst.samples_[i], i).second)
        fail(errc::invalid_instance, "duplicate sample id " + std::to_string(inst.samples_[i]));
    }
    inst.label_idx_.reserve(labels.size());
    for (const Label& l : labels) {
      auto it = std::find(inst.alphabet_.begin(), inst.alphabet_.end(), l);
      if (it == inst.alphabet_.end()) {
        inst.alphabet_.push_back(l);
        inst.label_idx_.push_back(static_cast<std::uint32_t>(inst.alphabet_.size() - 1));
      } else {
        inst.label_idx_.push_back(static_cast<std::uint32_t>(it - inst.alphabet_.begin()));
      }
    }
    return inst;
  }

  std::size_t size() const { return samples_.size(); }
  SampleId sample_id(SampleIndex i) const { return samples_[i]; }
  const std::vector<SampleId>& samples() const { return samples_; }
  const std::vector<Label>& label_alphabet() const { return alphabet_; }
  std::uint32_t label_index_of(SampleIndex i) const { return label_idx_[i]; }
  const Label& label_of(SampleIndex i) const { return alphabet_[label_idx_[i]]; }

  std::optional<SampleIndex> index_of(SampleId id) const {
    auto it = index_by_id_.find(id);
    if (it == index_by_id_.end()) return std::nullopt;
    return it->second;
  }

  SampleIndex require_index(SampleId id) const {
    auto idx = index_of(id);
    if (!idx) fail(errc::unknown_sample, "sample " + std::to_string(id) + " not in the instance");
    return *idx;
  }

  bool operator==(const DiscreteInstance& o) const {
    return samples_ == o.samples_ && label_idx_ == o.label_idx_ && alphabet_ == o.alphabet_;
  }

private:
  std::vector<SampleId> samples_;
  std::vector<Label> alphabet_;
  std::vector<std::uint32_t> label_idx_;  // parallel to samples_
  std::unordered_map<SampleId, SampleIndex> index_by_id_;
};

// Bijection on the sample space, stored as the index image: image()[i] is the
// position of T(x_i).
class Permutation {
public:
  explicit Permutation(std::vector<SampleIndex> image) : image_(std::move(image)) {}

  static Permutation identity(std::size_t n) {
    std::vector<SampleIndex> img(n);
    std::iota(img.begin(), img.end(), SampleIndex{0});
    return Permutation(std::move(img));
  }

  std::size_t degree() const { return image_.size(); }
  SampleIndex operator()(SampleIndex i) const { return image_[i]; }
  const std::vector<SampleIndex>& image() const { return image_; }

  Permutation inverse() const {
    std::vector<SampleIndex> inv(image_.size());
    for (SampleIndex i = 0; i < image_.size(); ++i) inv[image_[i]] = i;
    return Permutation(std::move(inv));
  }

  // (after . *this)(x) = after(this(x)).
  Permutation then(const Permutation& after) const {
    if (after.degree() != degree()) fail(errc::length_mismatch, "composition degree mismatch");
    std::vector<SampleIndex> img(image_.size());
    for (SampleIndex i = 0; i < image_.size(); ++i) img[i] = after.image_[image_[i]];
    return Permutation(std::move(img));
  }

  bool is_identity() const {
    for (SampleIndex i = 0; i < image_.size(); ++i)
      if (image_[i] != i) return false;
    return true;
  }

  std::vector<SampleId> image_ids(const DiscreteInstance& inst) const {
    std::vector<SampleId> out(image_.size());
    for (SampleIndex i = 0; i < image_.size(); ++i) out[i] = inst.sample_id(image_[i]);
    return out;
  }

  bool operator==(const Permutation& o) const { return image_ == o.image_; }
  bool operator<(const Permutation& o) const { return image_ < o.image_; }

private:
  std::vector<SampleIndex> image_;
};

// Validates a candidate image vector given by sample ids. Never repairs.
inline Permutation validate_permutation(const DiscreteInstance& inst,
                                        const std::vector<SampleId>& image_ids) {
  if (image_ids.size() != inst.size())
    fail(errc::length_mismatch, "image has " + std::to_string(image_ids.size()) +
                                    " entries, sample space has " + std::to_string(inst.size()));
  std::vector<SampleIndex> image(image_ids.size());
  std::vector<bool> seen(inst.size(), false);
  for (std::size_t i = 0; i < image_ids.size(); ++i) {
    const SampleIndex idx = inst.require_index(image_ids[i]);
    if (seen[idx])
      fail(errc::duplicate_image, "sample " + std::to_string(image_ids[i]) + " appears twice");
    seen[idx] = true;
    image[i] = idx;
  }
  return Permutation(std::move(image));
}

// Elementwise image of an ordered tuple of samples.
inline std::vector<SampleId> apply_encoder(const DiscreteInstance& inst, const Permutation& t,
                                           const std::vector<SampleId>& tuple) {
  std::vector<SampleId> out;
  out.reserve(tuple.size());
  for (SampleId id : tuple) out.push_back(inst.sample_id(t(inst.require_index(id))));
  return out;
}

inline Permutation invert(const Permutation& t) { return t.inverse(); }

// Finite set of bijections with a sampling distribution. Members are distinct
// as functions; weights are exact and sum to 1.
class EncoderFamily {
public:
  static EncoderFamily create(std::vector<Permutation> members, std::vector<Rational> weights) {
    if (members.empty()) fail(errc::invalid_instance, "empty encoder family");
    if (members.size() != weights.size())
      fail(errc::length_mismatch, "family weights must parallel members");
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (members[i].degree() != members[0].degree())
        fail(errc::length_mismatch, "family members have mixed degrees");
      if (weights[i] < 0) fail(errc::invalid_instance, "negative encoder weight");
    }
    std::map<std::vector<SampleIndex>, std::size_t> seen;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (!seen.emplace(members[i].image(), i).second)
        fail(errc::duplicate_image, "duplicate family member at index " + std::to_string(i));
    }
    Rational total = std::accumulate(weights.begin(), weights.end(), Rational(0));
    if (total == 0) fail(errc::invalid_instance, "family weights sum to zero");
    // Exact renormalization; float-authored weights must already sum to 1
    // within 1e-12 (checked by the IO layer).
    for (Rational& w : weights) w /= total;
    EncoderFamily f;
    f.members_ = std::move(members);
    f.weights_ = std::move(weights);
    return f;
  }

  static EncoderFamily uniform(std::vector<Permutation> members) {
    std::vector<Rational> w(members.size(), Rational(1, static_cast<long>(members.size())));
    return create(std::move(members), std::move(w));
  }

  std::size_t size() const { return members_.size(); }
  const Permutation& member(std::size_t i) const { return members_[i]; }
  const std::vector<Permutation>& members() const { return members_; }
  const Rational& weight(std::size_t i) const { return weights_[i]; }

  std::optional<std::size_t> find(const Permutation& t) const {
    for (std::size_t i = 0; i < members_.size(); ++i)
      if (members_[i] == t) return i;
    return std::nullopt;
  }

private:
  std::vector<Permutation> members_;
  std::vector<Rational> weights_;
};

inline constexpr std::size_t kDefaultSymCap = 8;
inline constexpr std::uint64_t kDefaultPreservingCap = 1000000;

// Uniform family over all |X|! bijections. Factorial blowup guard: n <= cap.
inline EncoderFamily enumerate_sym(const DiscreteInstance& inst,
                                   std::size_t cap = kDefaultSymCap) {
  const std::size_t n = inst.size();
  if (n > cap)
    fail(errc::too_large, "Sym enumeration for |X|=" + std::to_string(n) +
                              " exceeds cap " + std::to_string(cap));
  std::vector<SampleIndex> img(n);
  std::iota(img.begin(), img.end(), SampleIndex{0});
  std::vector<Permutation> members;
  do {
    members.emplace_back(img);
  } while (std::next_permutation(img.begin(), img.end()));
  return EncoderFamily::uniform(std::move(members));
}

// Label classes X^y, in alphabet order. Classes partition the sample space.
inline std::vector<std::pair<Label, std::vector<SampleIndex>>> label_classes(
    const DiscreteInstance& inst) {
  std::vector<std::pair<Label, std::vector<SampleIndex>>> classes;
  for (const Label& l : inst.label_alphabet()) classes.emplace_back(l, std::vector<SampleIndex>{});
  for (SampleIndex i = 0; i < inst.size(); ++i)
    classes[inst.label_index_of(i)].second.push_back(i);
  return classes;
}

// prod_y |X^y|!  — the cardinality of the label-class-preserving family, and
// equally of any Sym(X) anonymity list. Counting only, no enumeration.
inline std::uint64_t label_preserving_count(const DiscreteInstance& inst) {
  std::uint64_t total = 1;
  for (const auto& [label, members] : label_classes(inst)) {
    (void)label;
    for (std::uint64_t k = 2; k <= members.size(); ++k) {
      if (total > UINT64_MAX / k) fail(errc::too_large, "class factorial product overflows u64");
      total *= k;
    }
  }
  return total;
}

// Uniform family over F0 = {T : T(X^y) = X^y for all y}: every bijection that
// permutes samples only within their label class.
inline EncoderFamily label_preserving_family(const DiscreteInstance& inst,
                                             std::uint64_t cap = kDefaultPreservingCap) {
  const std::uint64_t count = label_preserving_count(inst);
  if (count > cap)
    fail(errc::too_large, "label-preserving family has " + std::to_string(count) +
                              " members, cap is " + std::to_string(cap));
  const auto classes = label_classes(inst);
  // Per-class permutations, combined by odometer.
  std::vector<std::vector<std::vector<SampleIndex>>> per_class;
  for (const auto& [label, members] : classes) {
    (void)label;
    std::vector<std::vector<SampleIndex>> perms;
    std::vector<SampleIndex> arrangement = members;
    do {
      perms.push_back(arrangement);
    } while (std::next_permutation(arrangement.begin(), arrangement.end()));
    per_class.push_back(std::move(perms));
  }
  std::vector<Permutation> result;
  result.reserve(count);
  std::vector<std::size_t> odo(per_class.size(), 0);
  while (true) {
    std::vector<SampleIndex> img(inst.size());
    for (std::size_t c = 0; c < per_class.size(); ++c) {
      const auto& positions = classes[c].second;
      const auto& target = per_class[c][odo[c]];
      for (std::size_t j = 0; j < positions.size(); ++j) img[positions[j]] = target[j];
    }
    result.emplace_back(std::move(img));
    std::size_t d = per_class.size();
    while (d > 0) {
      --d;
      if (++odo[d] < per_class[d].size()) break;
      odo[d] = 0;
      if (d == 0) return EncoderFamily::uniform(std::move(result));
    }
  }
}

// Distribution over Alice's candidate datasets. The paper treats X_A as an
// unordered subset whose transmission gets re-sorted by encoded value, so the
// prior is over underlying sets; entries are authored as representative
// ordered tuples and merged by set.
class DatasetPrior {
public:
  struct Entry {
    std::vector<SampleIndex> tuple;  // authored order, distinct entries
    Rational probability;
  };

  static DatasetPrior create(const DiscreteInstance& inst,
                             std::vector<std::pair<std::vector<SampleId>, Rational>> entries) {
    if (entries.empty()) fail(errc::invalid_prior, "empty dataset prior");
    DatasetPrior prior;
    std::map<std::vector<SampleIndex>, std::size_t> by_set;
    Rational total(0);
    for (auto& [ids, p] : entries) {
      if (p < 0) fail(errc::invalid_prior, "negative prior probability");
      if (ids.empty()) fail(errc::invalid_prior, "empty candidate tuple");
      std::vector<SampleIndex> tuple;
      tuple.reserve(ids.size());
      for (SampleId id : ids) tuple.push_back(inst.require_index(id));
      std::vector<SampleIndex> key = tuple;
      std::sort(key.begin(), key.end());
      if (std::adjacent_find(key.begin(), key.end()) != key.end())
        fail(errc::invalid_prior, "candidate tuple repeats a sample");
      if (!prior.entries_.empty() && tuple.size() != prior.entries_.front().tuple.size())
        fail(errc::invalid_prior, "candidate tuples have mixed lengths");
      total += p;
      auto it = by_set.find(key);
      if (it == by_set.end()) {
        by_set.emplace(std::move(key), prior.entries_.size());
        prior.entries_.push_back(Entry{std::move(tuple), std::move(p)});
      } else {
        prior.entries_[it->second].probability += p;
      }
    }
    if (total == 0) fail(errc::invalid_prior, "prior mass is zero");
    for (auto& e : prior.entries_) e.probability /= total;
    for (const auto& [key, idx] : by_set) prior.set_index_.emplace(key, idx);
    return prior;
  }

  std::size_t tuple_length() const { return entries_.front().tuple.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  // Mass of the underlying set, keyed by sorted index tuple. Zero if absent.
  Rational set_mass(const std::vector<SampleIndex>& sorted_key) const {
    auto it = set_index_.find(sorted_key);
    if (it == set_index_.end()) return Rational(0);
    return entries_[it->second].probability;
  }

private:
  std::vector<Entry> entries_;
  std::map<std::vector<SampleIndex>, std::size_t> set_index_;
};

// Eve's observed data: Z = T_A(X_A) sorted ascending by the instance order,
// plus the label configuration vector of the (unknown) encoder.
class Observation {
public:
  static Observation create(const DiscreteInstance& inst, std::vector<SampleId> encoded,
                            const std::vector<Label>& lc_labels) {
    if (encoded.empty()) fail(errc::invalid_instance, "observation has no encoded samples");
    if (lc_labels.size() != inst.size())
      fail(errc::length_mismatch, "label configuration must cover the sample space");
    Observation obs;
    for (SampleId id : encoded) obs.encoded_.push_back(inst.require_index(id));
    std::sort(obs.encoded_.begin(), obs.encoded_.end());
    if (std::adjacent_find(obs.encoded_.begin(), obs.encoded_.end()) != obs.encoded_.end())
      fail(errc::duplicate_image, "encoded samples repeat");
    obs.lc_.reserve(lc_labels.size());
    for (const Label& l : lc_labels) {
      auto it = std::find(inst.label_alphabet().begin(), inst.label_alphabet().end(), l);
      if (it == inst.label_alphabet().end())
        fail(errc::invalid_instance, "label '" + l + "' not in the alphabet");
      obs.lc_.push_back(static_cast<std::uint32_t>(it - inst.label_alphabet().begin()));
    }
    return obs;
  }

  static Observation from_indices(std::vector<SampleIndex> encoded_sorted,
                                  std::vector<std::uint32_t> lc) {
    Observation obs;
    obs.encoded_ = std::move(encoded_sorted);
    obs.lc_ = std::move(lc);
    return obs;
  }

  const std::vector<SampleIndex>& encoded() const { return encoded_; }
  const std::vector<std::uint32_t>& label_config() const { return lc_; }

  // Y_A: multiset of labels attached to Z, read off the label configuration.
  std::vector<std::uint32_t> label_multiset() const {
    std::vector<std::uint32_t> ys;
    ys.reserve(encoded_.size());
    for (SampleIndex z : encoded_) ys.push_back(lc_[z]);
    std::sort(ys.begin(), ys.end());
    return ys;
  }

private:
  std::vector<SampleIndex> encoded_;
  std::vector<std::uint32_t> lc_;
};

}  // namespace neuracrypt

#endif
