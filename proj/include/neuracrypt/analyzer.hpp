#ifndef NEURACRYPT_ANALYZER_HPP
#define NEURACRYPT_ANALYZER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "neuracrypt/discrete.hpp"
#include "neuracrypt/errors.hpp"
#include "neuracrypt/rational.hpp"

namespace neuracrypt {

// Label configuration vector: entry i is the label (index) of T^-1(x_i).
using LcVector = std::vector<std::uint32_t>;

inline LcVector label_configuration(const DiscreteInstance& inst, const Permutation& t) {
  if (t.degree() != inst.size()) fail(errc::length_mismatch, "permutation degree mismatch");
  const Permutation inv = t.inverse();
  LcVector lc(inst.size());
  for (SampleIndex i = 0; i < inst.size(); ++i) lc[i] = inst.label_index_of(inv(i));
  return lc;
}

inline LcVector original_label_configuration(const DiscreteInstance& inst) {
  LcVector lc(inst.size());
  for (SampleIndex i = 0; i < inst.size(); ++i) lc[i] = inst.label_index_of(i);
  return lc;
}

inline std::string lc_to_string(const DiscreteInstance& inst, const LcVector& lc) {
  std::string out;
  bool single_char = true;
  for (const Label& l : inst.label_alphabet()) single_char &= l.size() == 1;
  for (std::size_t i = 0; i < lc.size(); ++i) {
    if (!single_char && i) out += ",";
    out += inst.label_alphabet()[lc[i]];
  }
  return out;
}

// Equivalence classes of a family under equal label configuration, in
// lexicographic LC order. Eve cannot distinguish members within a class.
struct AnonymityPartition {
  struct Class {
    LcVector lc;
    std::vector<std::size_t> members;  // indices into the family
  };
  std::vector<Class> classes;

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s;
    s.reserve(classes.size());
    for (const auto& c : classes) s.push_back(c.members.size());
    return s;
  }
  std::size_t min_class_size() const {
    std::size_t m = SIZE_MAX;
    for (const auto& c : classes) m = std::min(m, c.members.size());
    return m;
  }
};

inline AnonymityPartition partition_by_lc(const DiscreteInstance& inst,
                                          const EncoderFamily& family) {
  std::map<LcVector, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < family.size(); ++i)
    groups[label_configuration(inst, family.member(i))].push_back(i);
  AnonymityPartition part;
  for (auto& [lc, members] : groups)
    part.classes.push_back(AnonymityPartition::Class{lc, std::move(members)});
  return part;
}

// F_T = {T' in F : LC(T') = LC(T)}. Nonempty, always contains T.
inline std::vector<std::size_t> anonymity_list(const DiscreteInstance& inst,
                                               const EncoderFamily& family,
                                               const Permutation& t) {
  if (!family.find(t)) fail(errc::not_in_family, "encoder is not a family member");
  const LcVector target = label_configuration(inst, t);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < family.size(); ++i)
    if (label_configuration(inst, family.member(i)) == target) members.push_back(i);
  return members;
}

// Builds the observation Eve sees when Alice holds `tuple` and samples T.
inline Observation observe(const DiscreteInstance& inst, const Permutation& t,
                           const std::vector<SampleId>& tuple) {
  std::vector<SampleIndex> z;
  z.reserve(tuple.size());
  for (SampleId id : tuple) z.push_back(t(inst.require_index(id)));
  std::sort(z.begin(), z.end());
  if (std::adjacent_find(z.begin(), z.end()) != z.end())
    fail(errc::duplicate_image, "dataset repeats a sample");
  return Observation::from_indices(std::move(z), label_configuration(inst, t));
}

namespace detail {

// Candidate tuple induced by one encoder: entry i = T^-1(z_i), Z sorted.
inline std::vector<SampleIndex> candidate_for(const Permutation& t, const Observation& obs) {
  const Permutation inv = t.inverse();
  std::vector<SampleIndex> tuple;
  tuple.reserve(obs.encoded().size());
  for (SampleIndex z : obs.encoded()) tuple.push_back(inv(z));
  return tuple;
}

inline std::vector<std::size_t> lc_matching_members(const DiscreteInstance& inst,
                                                    const EncoderFamily& family,
                                                    const Observation& obs) {
  std::vector<std::size_t> matching;
  for (std::size_t i = 0; i < family.size(); ++i)
    if (label_configuration(inst, family.member(i)) == obs.label_config()) matching.push_back(i);
  return matching;
}

inline std::vector<SampleIndex> sorted_key(std::vector<SampleIndex> tuple) {
  std::sort(tuple.begin(), tuple.end());
  return tuple;
}

}  // namespace detail

// Pos(X_A): every dataset some anonymity-list member could have encoded to Z.
// Tuples are ordered by the generating encoder (entry i = T^-1(z_i)); a tuple
// arising from several encoders appears once, first-generator order.
inline std::vector<std::vector<SampleId>> possible_datasets(const DiscreteInstance& inst,
                                                            const EncoderFamily& family,
                                                            const Observation& obs) {
  const auto matching = detail::lc_matching_members(inst, family, obs);
  if (matching.empty())
    fail(errc::inconsistent_observation, "no family member matches the label configuration");
  std::vector<std::vector<SampleId>> out;
  std::map<std::vector<SampleIndex>, bool> seen;
  for (std::size_t m : matching) {
    auto tuple = detail::candidate_for(family.member(m), obs);
    if (seen.emplace(tuple, true).second) {
      std::vector<SampleId> ids;
      ids.reserve(tuple.size());
      for (SampleIndex i : tuple) ids.push_back(inst.sample_id(i));
      out.push_back(std::move(ids));
    }
  }
  return out;
}

// Exact posterior over candidate datasets (or over (dataset, encoder) pairs).
struct PosteriorTable {
  struct Entry {
    std::vector<SampleId> tuple;
    Rational probability;
  };
  std::vector<Entry> entries;

  Rational total() const {
    Rational t(0);
    for (const auto& e : entries) t += e.probability;
    return t;
  }

  // Aggregates tuple orderings of the same underlying set.
  std::map<std::vector<SampleId>, Rational> mass_by_set() const {
    std::map<std::vector<SampleId>, Rational> out;
    for (const auto& e : entries) {
      std::vector<SampleId> key = e.tuple;
      std::sort(key.begin(), key.end());
      out[key] += e.probability;
    }
    return out;
  }
};

struct JointPosterior {
  struct Entry {
    std::vector<SampleId> tuple;
    std::size_t member;  // index into the family
    Rational probability;
  };
  std::vector<Entry> entries;
};

// Pr[X_A, T_A | Z, C]: proportional to 1(T(X)=Z) 1(LC(T)=C) Pr[X] Pr[T].
inline JointPosterior joint_posterior(const DiscreteInstance& inst, const EncoderFamily& family,
                                      const DatasetPrior& prior, const Observation& obs) {
  if (obs.encoded().size() != prior.tuple_length())
    fail(errc::length_mismatch, "observation size differs from prior tuple length");
  JointPosterior joint;
  Rational total(0);
  const auto matching = detail::lc_matching_members(inst, family, obs);
  for (std::size_t m : matching) {
    auto tuple = detail::candidate_for(family.member(m), obs);
    const Rational p = prior.set_mass(detail::sorted_key(tuple)) * family.weight(m);
    if (p == 0) continue;
    std::vector<SampleId> ids;
    ids.reserve(tuple.size());
    for (SampleIndex i : tuple) ids.push_back(inst.sample_id(i));
    joint.entries.push_back(JointPosterior::Entry{std::move(ids), m, p});
    total += p;
  }
  if (total == 0) fail(errc::zero_evidence, "observation has zero probability under the priors");
  for (auto& e : joint.entries) e.probability /= total;
  return joint;
}

// Marginal of the joint over encoders. Support is contained in Pos(X_A).
inline PosteriorTable dataset_posterior(const DiscreteInstance& inst, const EncoderFamily& family,
                                        const DatasetPrior& prior, const Observation& obs) {
  const JointPosterior joint = joint_posterior(inst, family, prior, obs);
  PosteriorTable table;
  std::map<std::vector<SampleId>, std::size_t> index;
  for (const auto& e : joint.entries) {
    auto it = index.find(e.tuple);
    if (it == index.end()) {
      index.emplace(e.tuple, table.entries.size());
      table.entries.push_back(PosteriorTable::Entry{e.tuple, e.probability});
    } else {
      table.entries[it->second].probability += e.probability;
    }
  }
  return table;
}

// Pr[X_A | Y_A]: the prior restricted to candidates whose label multiset is
// Y_A, renormalized. What Eve would know from the labels alone.
inline PosteriorTable label_only_posterior(const DiscreteInstance& inst, const DatasetPrior& prior,
                                           const std::vector<std::uint32_t>& label_multiset) {
  if (label_multiset.empty()) fail(errc::invalid_instance, "empty label multiset");
  PosteriorTable table;
  Rational total(0);
  for (const auto& entry : prior.entries()) {
    std::vector<std::uint32_t> ys;
    ys.reserve(entry.tuple.size());
    for (SampleIndex i : entry.tuple) ys.push_back(inst.label_index_of(i));
    std::sort(ys.begin(), ys.end());
    if (ys != label_multiset) continue;
    std::vector<SampleId> ids;
    ids.reserve(entry.tuple.size());
    for (SampleIndex i : entry.tuple) ids.push_back(inst.sample_id(i));
    table.entries.push_back(PosteriorTable::Entry{std::move(ids), entry.probability});
    total += entry.probability;
  }
  if (total == 0) fail(errc::zero_evidence, "no prior mass is consistent with the label multiset");
  for (auto& e : table.entries) e.probability /= total;
  return table;
}

inline Rational membership_probability(const PosteriorTable& posterior, SampleId x) {
  Rational p(0);
  for (const auto& e : posterior.entries)
    if (std::find(e.tuple.begin(), e.tuple.end(), x) != e.tuple.end()) p += e.probability;
  return p;
}

// All compositions T' . T (apply T first, then T'), product weights, with
// coinciding functions merged by summing weight: the family stays a
// distribution over functions regardless of construction path.
inline EncoderFamily compose_families(const EncoderFamily& outer, const EncoderFamily& inner) {
  if (outer.member(0).degree() != inner.member(0).degree())
    fail(errc::instance_mismatch, "families act on different sample spaces");
  std::vector<Permutation> members;
  std::vector<Rational> weights;
  std::map<std::vector<SampleIndex>, std::size_t> index;
  for (std::size_t o = 0; o < outer.size(); ++o) {
    for (std::size_t i = 0; i < inner.size(); ++i) {
      Permutation composed = inner.member(i).then(outer.member(o));
      const Rational w = outer.weight(o) * inner.weight(i);
      auto it = index.find(composed.image());
      if (it == index.end()) {
        index.emplace(composed.image(), members.size());
        members.push_back(std::move(composed));
        weights.push_back(w);
      } else {
        weights[it->second] += w;
      }
    }
  }
  return EncoderFamily::create(std::move(members), std::move(weights));
}

// ---------------------------------------------------------------------------
// Exhaustive joint enumeration: every (candidate set, encoder) pair, grouped
// by the observation it produces. Everything downstream (perfect privacy,
// mutual information, guessing probability) reads off this table.
// ---------------------------------------------------------------------------

struct ObservationStats {
  Observation observation;
  Rational probability;
  PosteriorTable dataset;     // canonical candidate tuples
  PosteriorTable label_only;  // prior entries with matching labels
  Rational tv_distance;       // between the two, compared at set granularity
};

struct PrivacyReport {
  bool perfectly_private = false;
  double mutual_information_bits = 0.0;
  double max_guess_probability = 0.0;
  Rational guess_probability_exact;
  std::vector<ObservationStats> per_observation;
};

namespace detail {

struct JointTable {
  // key: (sorted Z, LC)
  struct Cell {
    Rational probability;
    std::map<std::vector<SampleIndex>, Rational> candidate_tuples;  // canonical order
  };
  std::map<std::pair<std::vector<SampleIndex>, LcVector>, Cell> cells;
};

inline JointTable enumerate_joint(const DiscreteInstance& inst, const EncoderFamily& family,
                                  const DatasetPrior& prior) {
  JointTable table;
  std::vector<LcVector> lcs(family.size());
  std::vector<Permutation> inverses;
  inverses.reserve(family.size());
  for (std::size_t m = 0; m < family.size(); ++m) {
    lcs[m] = label_configuration(inst, family.member(m));
    inverses.push_back(family.member(m).inverse());
  }
  for (const auto& entry : prior.entries()) {
    if (entry.probability == 0) continue;
    for (std::size_t m = 0; m < family.size(); ++m) {
      if (family.weight(m) == 0) continue;
      const Permutation& t = family.member(m);
      std::vector<SampleIndex> z;
      z.reserve(entry.tuple.size());
      for (SampleIndex i : entry.tuple) z.push_back(t(i));
      std::sort(z.begin(), z.end());
      std::vector<SampleIndex> candidate;
      candidate.reserve(z.size());
      for (SampleIndex zi : z) candidate.push_back(inverses[m](zi));
      const Rational mass = entry.probability * family.weight(m);
      auto& cell = table.cells[{std::move(z), lcs[m]}];
      cell.probability += mass;
      cell.candidate_tuples[candidate] += mass;
    }
  }
  return table;
}

inline std::map<std::vector<SampleIndex>, Rational> by_set(
    const std::map<std::vector<SampleIndex>, Rational>& tuples) {
  std::map<std::vector<SampleIndex>, Rational> out;
  for (const auto& [tuple, p] : tuples) out[sorted_key(tuple)] += p;
  return out;
}

}  // namespace detail

// Compares, for every realizable observation, the dataset posterior with the
// label-only posterior. Perfectly private iff every total-variation distance
// is exactly zero under rational arithmetic.
inline PrivacyReport is_perfectly_private(const DiscreteInstance& inst,
                                          const EncoderFamily& family,
                                          const DatasetPrior& prior) {
  const detail::JointTable joint = detail::enumerate_joint(inst, family, prior);
  PrivacyReport report;
  report.perfectly_private = true;
  Rational guess(0);
  double mi = 0.0;
  for (const auto& [key, cell] : joint.cells) {
    ObservationStats stats;
    stats.observation = Observation::from_indices(key.first, key.second);
    stats.probability = cell.probability;

    for (const auto& [tuple, mass] : cell.candidate_tuples) {
      std::vector<SampleId> ids;
      ids.reserve(tuple.size());
      for (SampleIndex i : tuple) ids.push_back(inst.sample_id(i));
      stats.dataset.entries.push_back(
          PosteriorTable::Entry{std::move(ids), mass / cell.probability});
    }
    stats.label_only = label_only_posterior(inst, prior, stats.observation.label_multiset());

    const auto posterior_sets = detail::by_set(cell.candidate_tuples);
    std::map<std::vector<SampleIndex>, Rational> label_sets;
    for (const auto& e : stats.label_only.entries) {
      std::vector<SampleIndex> key2;
      key2.reserve(e.tuple.size());
      for (SampleId id : e.tuple) key2.push_back(inst.require_index(id));
      std::sort(key2.begin(), key2.end());
      label_sets[key2] += e.probability;
    }
    Rational tv(0);
    Rational best(0);
    for (const auto& [set, mass] : posterior_sets) {
      const Rational p = mass / cell.probability;
      if (p > best) best = p;
      const Rational q = [&] {
        auto it = label_sets.find(set);
        return it == label_sets.end() ? Rational(0) : it->second;
      }();
      tv += abs(p - q);
      // Mutual information term: sum p(S,obs) log2 p(S|obs)/p(S).
      const Rational set_prior = prior.set_mass(set);
      mi += to_double(mass) * std::log2(to_double(p / set_prior));
    }
    for (const auto& [set, q] : label_sets) {
      if (posterior_sets.find(set) == posterior_sets.end()) tv += q;
    }
    stats.tv_distance = tv / 2;
    if (stats.tv_distance != 0) report.perfectly_private = false;
    guess += cell.probability * best;
    report.per_observation.push_back(std::move(stats));
  }
  report.guess_probability_exact = guess;
  report.max_guess_probability = to_double(guess);
  report.mutual_information_bits = std::max(mi, 0.0);
  return report;
}

// I(X_A ; (Z, C)) in bits, by exact enumeration of the joint.
inline double mutual_information(const DiscreteInstance& inst, const EncoderFamily& family,
                                 const DatasetPrior& prior) {
  const detail::JointTable joint = detail::enumerate_joint(inst, family, prior);
  double mi = 0.0;
  for (const auto& [key, cell] : joint.cells) {
    (void)key;
    for (const auto& [set, mass] : detail::by_set(cell.candidate_tuples)) {
      const Rational conditional = mass / cell.probability;
      mi += to_double(mass) * std::log2(to_double(conditional / prior.set_mass(set)));
    }
  }
  return std::max(mi, 0.0);
}

// Eve's one-shot MAP success: sum over observations of Pr[obs] * max posterior.
inline Rational guessing_probability(const DiscreteInstance& inst, const EncoderFamily& family,
                                     const DatasetPrior& prior) {
  const detail::JointTable joint = detail::enumerate_joint(inst, family, prior);
  Rational guess(0);
  for (const auto& [key, cell] : joint.cells) {
    (void)key;
    Rational best(0);
    for (const auto& [set, mass] : detail::by_set(cell.candidate_tuples))
      if (mass > best) best = mass;
    guess += best;  // best is already Pr[obs] * max conditional
  }
  return guess;
}

}  // namespace neuracrypt

#endif
