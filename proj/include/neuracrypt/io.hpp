#ifndef NEURACRYPT_IO_HPP
#define NEURACRYPT_IO_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "neuracrypt/analyzer.hpp"
#include "neuracrypt/attacks.hpp"
#include "neuracrypt/discrete.hpp"
#include "neuracrypt/encoder.hpp"
#include "neuracrypt/synth.hpp"
#include "neuracrypt/tensor.hpp"

namespace neuracrypt {

namespace fs = std::filesystem;
using Json = nlohmann::json;

// --- instance files ----------------------------------------------------------

struct InstanceSpec {
  DiscreteInstance instance;
  std::optional<EncoderFamily> family;
  std::optional<DatasetPrior> dataset_prior;
};

namespace detail {

inline Rational weight_from_json(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return Rational(static_cast<long long>(j.get<std::int64_t>()));
  if (j.is_number_float()) return rational_from_double(j.get<double>());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  fail(errc::format_error, where + ": weight must be a number or a rational string");
}

// Float-authored weights must sum to 1 within 1e-12 before exact
// renormalization; exact strings must sum to 1 exactly.
inline void check_weight_total(const std::vector<Rational>& weights, bool any_float,
                               const std::string& where) {
  Rational total(0);
  for (const Rational& w : weights) total += w;
  if (any_float) {
    if (std::abs(to_double(total) - 1.0) > 1e-12)
      fail(errc::format_error, where + ": weights sum to " + std::to_string(to_double(total)));
  } else if (total != 1) {
    fail(errc::format_error, where + ": weights sum to " + rational_to_string(total));
  }
}

}  // namespace detail

struct EnumerationCaps {
  std::size_t sym_samples = kDefaultSymCap;             // |X| cap for Sym(X)
  std::uint64_t preserving_members = kDefaultPreservingCap;  // prod |X^y|! cap
};

inline InstanceSpec parse_instance_spec(const Json& root, const EnumerationCaps& caps = {}) {
  if (!root.is_object()) fail(errc::format_error, "instance: top level must be an object");
  if (!root.contains("samples") || !root.contains("labels"))
    fail(errc::format_error, "instance: 'samples' and 'labels' are required");
  std::vector<SampleId> samples;
  for (const auto& v : root.at("samples")) {
    if (!v.is_number_integer()) fail(errc::format_error, "instance.samples: integer ids only");
    samples.push_back(v.get<SampleId>());
  }
  std::vector<Label> labels;
  for (const auto& v : root.at("labels")) {
    if (v.is_string())
      labels.push_back(v.get<std::string>());
    else if (v.is_number_integer())
      labels.push_back(std::to_string(v.get<std::int64_t>()));
    else
      fail(errc::format_error, "instance.labels: strings or integers only");
  }
  InstanceSpec spec{DiscreteInstance::create(std::move(samples), std::move(labels)), {}, {}};

  if (root.contains("family")) {
    const Json& fam = root.at("family");
    std::vector<Permutation> members;
    if (fam.is_string()) {
      const std::string kind = fam.get<std::string>();
      if (kind == "sym")
        spec.family = enumerate_sym(spec.instance, caps.sym_samples);
      else if (kind == "label-preserving" || kind == "f0")
        spec.family = label_preserving_family(spec.instance, caps.preserving_members);
      else
        fail(errc::format_error, "instance.family: unknown family '" + kind + "'");
    } else if (fam.is_array()) {
      for (const auto& vec : fam) {
        std::vector<SampleId> image;
        for (const auto& v : vec) image.push_back(v.get<SampleId>());
        members.push_back(validate_permutation(spec.instance, image));
      }
      if (root.contains("encoder_prior")) {
        std::vector<Rational> weights;
        bool any_float = false;
        for (const auto& w : root.at("encoder_prior")) {
          any_float |= w.is_number_float();
          weights.push_back(detail::weight_from_json(w, "instance.encoder_prior"));
        }
        if (weights.size() != members.size())
          fail(errc::format_error, "instance.encoder_prior: length mismatch with family");
        detail::check_weight_total(weights, any_float, "instance.encoder_prior");
        spec.family = EncoderFamily::create(std::move(members), std::move(weights));
      } else {
        spec.family = EncoderFamily::uniform(std::move(members));
      }
    } else {
      fail(errc::format_error, "instance.family: array or family name expected");
    }
  }

  if (root.contains("dataset_prior")) {
    std::vector<std::pair<std::vector<SampleId>, Rational>> entries;
    bool any_float = false;
    std::vector<Rational> weights;
    for (const auto& e : root.at("dataset_prior")) {
      if (!e.is_object() || !e.contains("tuple") || !e.contains("p"))
        fail(errc::format_error, "instance.dataset_prior: entries need 'tuple' and 'p'");
      std::vector<SampleId> tuple;
      for (const auto& v : e.at("tuple")) tuple.push_back(v.get<SampleId>());
      any_float |= e.at("p").is_number_float();
      Rational p = detail::weight_from_json(e.at("p"), "instance.dataset_prior");
      weights.push_back(p);
      entries.emplace_back(std::move(tuple), std::move(p));
    }
    detail::check_weight_total(weights, any_float, "instance.dataset_prior");
    spec.dataset_prior = DatasetPrior::create(spec.instance, std::move(entries));
  }
  return spec;
}

inline InstanceSpec read_instance_spec(const fs::path& path, const EnumerationCaps& caps = {}) {
  const std::string text = detail::read_file(path);
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    // nlohmann reports the byte offset; surface it for line-precise fixes.
    fail(errc::format_error, path.string() + ": " + e.what());
  }
  return parse_instance_spec(root, caps);
}

// --- analysis report -----------------------------------------------------------

inline Json posterior_to_json(const PosteriorTable& table) {
  Json out = Json::array();
  for (const auto& e : table.entries) {
    Json row;
    row["tuple"] = e.tuple;
    row["p"] = rational_to_string(e.probability);
    row["p_float"] = to_double(e.probability);
    out.push_back(std::move(row));
  }
  return out;
}

// Full privacy pipeline over an instance file: per-observation posteriors,
// mutual information, guessing probability, perfect-privacy verdict, and the
// family's anonymity partition.
inline Json analyze(const InstanceSpec& spec) {
  if (!spec.family) fail(errc::format_error, "instance has no encoder family");
  if (!spec.dataset_prior) fail(errc::format_error, "instance has no dataset prior");
  const DiscreteInstance& inst = spec.instance;
  const PrivacyReport report = is_perfectly_private(inst, *spec.family, *spec.dataset_prior);

  Json out;
  out["perfectly_private"] = report.perfectly_private;
  out["mutual_information_bits"] = report.mutual_information_bits;
  out["guessing_probability"] = rational_to_string(report.guess_probability_exact);
  out["guessing_probability_float"] = report.max_guess_probability;

  Json partition = Json::array();
  for (const auto& cls : partition_by_lc(inst, *spec.family).classes) {
    Json row;
    row["lc"] = lc_to_string(inst, cls.lc);
    row["size"] = cls.members.size();
    row["members"] = cls.members;
    partition.push_back(std::move(row));
  }
  out["lc_partition"] = std::move(partition);

  Json observations = Json::array();
  for (const auto& stats : report.per_observation) {
    Json row;
    std::vector<SampleId> z;
    for (SampleIndex i : stats.observation.encoded()) z.push_back(inst.sample_id(i));
    row["z"] = z;
    row["lc"] = lc_to_string(inst, stats.observation.label_config());
    row["probability"] = rational_to_string(stats.probability);
    row["posterior"] = posterior_to_json(stats.dataset);
    row["label_only_posterior"] = posterior_to_json(stats.label_only);
    row["tv_distance"] = rational_to_string(stats.tv_distance);
    observations.push_back(std::move(row));
  }
  out["observations"] = std::move(observations);
  return out;
}

// --- publication workflow ----------------------------------------------------------

inline constexpr int kManifestFormatVersion = 1;

// The public record pairing encoded sample files with labels and owner
// identity. Carries output shape only; the seed and nonces never appear.
struct PublicationManifest {
  std::string owner_id;
  std::string task;
  std::uint64_t patch_count = 0;
  std::uint64_t hidden_dim = 0;
  std::vector<std::pair<std::string, std::string>> samples;  // (file, label)

  Json to_json() const {
    Json out;
    out["format_version"] = kManifestFormatVersion;
    out["owner_id"] = owner_id;
    out["task"] = task;
    out["patch_count"] = patch_count;
    out["hidden_dim"] = hidden_dim;
    Json rows = Json::array();
    for (const auto& [file, label] : samples) {
      Json row;
      row["file"] = file;
      row["label"] = label;
      rows.push_back(std::move(row));
    }
    out["samples"] = std::move(rows);
    return out;
  }

  static PublicationManifest from_json(const Json& j) {
    if (!j.is_object() || !j.contains("samples"))
      fail(errc::format_error, "manifest: object with 'samples' expected");
    if (j.value("format_version", 0) != kManifestFormatVersion)
      fail(errc::version_error, "manifest: unsupported format version");
    PublicationManifest m;
    m.owner_id = j.value("owner_id", "");
    m.task = j.value("task", "");
    m.patch_count = j.value("patch_count", std::uint64_t{0});
    m.hidden_dim = j.value("hidden_dim", std::uint64_t{0});
    for (const auto& row : j.at("samples")) {
      if (!row.contains("file") || !row.contains("label"))
        fail(errc::format_error, "manifest: sample rows need 'file' and 'label'");
      m.samples.emplace_back(row.at("file").get<std::string>(),
                             row.at("label").get<std::string>());
    }
    return m;
  }
};

inline Json read_json(const fs::path& path) {
  try {
    return Json::parse(detail::read_file(path));
  } catch (const Json::parse_error& e) {
    fail(errc::format_error, path.string() + ": " + e.what());
  }
}

inline void write_json(const fs::path& path, const Json& j) {
  detail::write_file_atomic(path, j.dump(2) + "\n");
}

// labels file: JSON object mapping input file name to label string.
inline std::map<std::string, std::string> read_labels_file(const fs::path& path) {
  const Json j = read_json(path);
  if (!j.is_object()) fail(errc::format_error, path.string() + ": label map expected");
  std::map<std::string, std::string> labels;
  for (const auto& [k, v] : j.items()) {
    if (v.is_string())
      labels[k] = v.get<std::string>();
    else if (v.is_number_integer())
      labels[k] = std::to_string(v.get<std::int64_t>());
    else
      fail(errc::format_error, path.string() + ": labels must be strings or integers");
  }
  return labels;
}

struct EncodeDatasetResult {
  PublicationManifest manifest;
  std::vector<std::pair<std::string, std::uint64_t>> nonces;  // private sidecar content
};

// Encodes every PGM in input_dir (sorted by name) with a fresh nonce each and
// writes one NCT1 per sample plus manifest.json. Nothing key-derived beyond
// the output shape enters out_dir; nonces are returned for the caller's
// private sidecar.
inline EncodeDatasetResult encode_dataset(const EncoderKey& key, const fs::path& input_dir,
                                          const fs::path& labels_file, const fs::path& out_dir,
                                          const std::string& owner_id, const std::string& task,
                                          std::size_t threads = 1) {
  const auto labels = read_labels_file(labels_file);
  std::vector<fs::path> inputs;
  for (const auto& entry : fs::directory_iterator(input_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".pgm")
      inputs.push_back(entry.path());
  std::sort(inputs.begin(), inputs.end());
  if (inputs.empty()) fail(errc::io_error, "no .pgm inputs in " + input_dir.string());
  for (const auto& path : inputs)
    if (labels.find(path.filename().string()) == labels.end())
      fail(errc::missing_label, "no label for " + path.filename().string());

  fs::create_directories(out_dir);
  const EncoderWeights weights = sample_encoder(key);
  EncodeDatasetResult result;
  result.manifest.owner_id = owner_id;
  result.manifest.task = task;
  result.manifest.patch_count = key.arch.num_patches();
  result.manifest.hidden_dim = key.arch.hidden_dim;
  result.manifest.samples.resize(inputs.size());
  result.nonces.resize(inputs.size());

  auto encode_one = [&](std::size_t i) {
    const Tensor img = ingest_pgm(inputs[i]);
    const std::uint64_t nonce = derive_nonce(key.seed, i);
    const PatchSet encoded = encode(weights, img, nonce);
    const std::string out_name = inputs[i].stem().string() + ".nct";
    write_tensor(out_dir / out_name, encoded.data);
    result.manifest.samples[i] = {out_name, labels.at(inputs[i].filename().string())};
    result.nonces[i] = {out_name, nonce};
  };
  if (threads <= 1) {
    for (std::size_t i = 0; i < inputs.size(); ++i) encode_one(i);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < inputs.size(); i += threads) encode_one(i);
      });
    (void)next;
    for (auto& th : pool) th.join();
  }
  write_json(out_dir / "manifest.json", result.manifest.to_json());
  return result;
}

// --- pooling -----------------------------------------------------------------------

struct PooledShard {
  std::string owner_id;
  fs::path directory;  // where the shard's NCT1 files live
  std::vector<std::pair<std::string, std::string>> samples;
};

struct PooledManifest {
  std::string task;
  std::uint64_t hidden_dim = 0;
  std::vector<PooledShard> shards;

  Json to_json() const {
    Json out;
    out["format_version"] = kManifestFormatVersion;
    out["task"] = task;
    out["hidden_dim"] = hidden_dim;
    Json owners = Json::array();
    for (const auto& shard : shards) {
      Json o;
      o["owner_id"] = shard.owner_id;
      o["dir"] = shard.directory.string();
      Json rows = Json::array();
      for (const auto& [file, label] : shard.samples)
        rows.push_back(Json{{"file", file}, {"label", label}});
      o["samples"] = std::move(rows);
      owners.push_back(std::move(o));
    }
    out["owners"] = std::move(owners);
    return out;
  }
};

// Concatenates owner shards, keeping owner provenance. Owners must agree on
// the label vocabulary and the feature width.
inline PooledManifest pool_merge(const std::vector<std::pair<PublicationManifest, fs::path>>&
                                     manifests_with_dirs) {
  if (manifests_with_dirs.empty()) fail(errc::io_error, "nothing to pool");
  PooledManifest pool;
  std::vector<std::string> vocab;
  auto vocab_of = [](const PublicationManifest& m) {
    std::vector<std::string> v;
    for (const auto& [file, label] : m.samples) v.push_back(label);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  for (std::size_t i = 0; i < manifests_with_dirs.size(); ++i) {
    const auto& [m, dir] = manifests_with_dirs[i];
    if (i == 0) {
      pool.task = m.task;
      pool.hidden_dim = m.hidden_dim;
      vocab = vocab_of(m);
    } else {
      if (m.hidden_dim != pool.hidden_dim)
        fail(errc::dim_mismatch, "owner '" + m.owner_id + "' has hidden_dim " +
                                     std::to_string(m.hidden_dim) + ", pool has " +
                                     std::to_string(pool.hidden_dim));
      if (vocab_of(m) != vocab)
        fail(errc::vocab_mismatch, "owner '" + m.owner_id + "' uses a different label vocabulary");
    }
    pool.shards.push_back(PooledShard{m.owner_id, dir, m.samples});
  }
  return pool;
}

// --- features and the utility proxy ---------------------------------------------------

// Raw patches in patchify order, as double vectors (attack input space).
inline Population extract_patches(const Tensor& image, std::uint32_t patch_size) {
  if (image.rank() != 3) fail(errc::shape_mismatch, "extract_patches wants [H, W, C]");
  const std::uint64_t h = image.dim(0), w = image.dim(1), c = image.dim(2);
  if (patch_size == 0 || h % patch_size != 0 || w % patch_size != 0)
    fail(errc::shape_mismatch, "patch size must divide image dims");
  const std::uint64_t gh = h / patch_size, gw = w / patch_size;
  Population out;
  out.reserve(gh * gw);
  for (std::uint64_t gi = 0; gi < gh; ++gi)
    for (std::uint64_t gj = 0; gj < gw; ++gj) {
      Vec patch;
      patch.reserve(static_cast<std::size_t>(patch_size) * patch_size * c);
      for (std::uint64_t di = 0; di < patch_size; ++di) {
        const float* row = image.data() + ((gi * patch_size + di) * w + gj * patch_size) * c;
        for (std::uint64_t k = 0; k < patch_size * c; ++k) patch.push_back(row[k]);
      }
      out.push_back(std::move(patch));
    }
  return out;
}

inline Population tensor_rows(const Tensor& t) {
  if (t.rank() != 2) fail(errc::shape_mismatch, "expected a [rows, cols] tensor");
  Population out;
  out.reserve(t.dim(0));
  for (std::uint64_t i = 0; i < t.dim(0); ++i)
    out.emplace_back(t.data() + i * t.dim(1), t.data() + (i + 1) * t.dim(1));
  return out;
}

struct UtilityMetrics {
  double accuracy = 0.0;
  double auc = 0.0;
  std::size_t count = 0;
};

struct UtilityReport {
  UtilityMetrics dev;
  UtilityMetrics test;
  std::map<std::string, UtilityMetrics> per_owner_test;
  std::vector<std::string> vocabulary;  // vocabulary[1] is the positive class

  Json to_json() const {
    auto metrics = [](const UtilityMetrics& m) {
      return Json{{"accuracy", m.accuracy}, {"auc", m.auc}, {"count", m.count}};
    };
    Json out;
    out["dev"] = metrics(dev);
    out["test"] = metrics(test);
    Json owners = Json::object();
    for (const auto& [owner, m] : per_owner_test) owners[owner] = metrics(m);
    out["per_owner_test"] = std::move(owners);
    out["vocabulary"] = vocabulary;
    return out;
  }
};

// Logistic regression on per-sample feature vectors with a deterministic
// 60-20-20 split. The stand-in for full-model training: good encodings keep
// the classes separable, shuffled labels drop the AUC to chance.
inline UtilityReport utility_proxy(const Population& features, const std::vector<int>& labels,
                                   const std::vector<std::string>& owners,
                                   const std::vector<std::string>& vocabulary,
                                   std::uint64_t split_seed = 17, std::size_t steps = 600,
                                   double lr = 0.5) {
  if (features.size() != labels.size() || features.size() != owners.size())
    fail(errc::dim_mismatch, "features, labels and owners must parallel");
  if (features.size() < 5) fail(errc::single_class_data, "too few samples to split");
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(split_seed);
  for (std::size_t i = order.size(); i-- > 1;)
    std::swap(order[i], order[static_cast<std::size_t>(rng.next() % (i + 1))]);
  const std::size_t n_train = features.size() * 60 / 100;
  const std::size_t n_dev = features.size() * 20 / 100;

  Population train_x;
  std::vector<int> train_y;
  for (std::size_t i = 0; i < n_train; ++i) {
    train_x.push_back(features[order[i]]);
    train_y.push_back(labels[order[i]]);
  }
  const LogisticModel clf = train_logistic(train_x, train_y, steps, lr);

  auto evaluate = [&](std::size_t begin, std::size_t end,
                      const std::string& owner_filter) -> UtilityMetrics {
    Population xs;
    std::vector<int> ys;
    for (std::size_t i = begin; i < end; ++i) {
      if (!owner_filter.empty() && owners[order[i]] != owner_filter) continue;
      xs.push_back(features[order[i]]);
      ys.push_back(labels[order[i]]);
    }
    UtilityMetrics m;
    m.count = xs.size();
    if (xs.empty()) return m;
    const Vec scores = clf.score_all(xs);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
      correct += (scores[i] >= 0.5 ? 1 : 0) == ys[i] ? 1 : 0;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(xs.size());
    bool has0 = false, has1 = false;
    for (int y : ys) (y ? has1 : has0) = true;
    m.auc = (has0 && has1) ? roc_auc(scores, ys) : 0.5;
    return m;
  };

  UtilityReport report;
  report.vocabulary = vocabulary;
  report.dev = evaluate(n_train, n_train + n_dev, "");
  report.test = evaluate(n_train + n_dev, features.size(), "");
  std::vector<std::string> distinct = owners;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() > 1)
    for (const auto& owner : distinct)
      report.per_owner_test[owner] = evaluate(n_train + n_dev, features.size(), owner);
  return report;
}

// Loads mean-pooled features for every sample of a pooled manifest.
struct PooledFeatures {
  Population features;
  std::vector<int> labels;
  std::vector<std::string> owners;
  std::vector<std::string> vocabulary;
};

inline PooledFeatures load_pooled_features(const PooledManifest& pool) {
  PooledFeatures out;
  std::vector<std::string> vocab;
  for (const auto& shard : pool.shards)
    for (const auto& [file, label] : shard.samples) vocab.push_back(label);
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  if (vocab.size() < 2) fail(errc::single_class_data, "pool carries a single label");
  if (vocab.size() > 2) fail(errc::vocab_mismatch, "utility proxy supports two classes");
  out.vocabulary = vocab;
  for (const auto& shard : pool.shards) {
    for (const auto& [file, label] : shard.samples) {
      const Tensor t = read_tensor(shard.directory / file);
      out.features.push_back(mean_pool(tensor_rows(t)));
      out.labels.push_back(label == vocab[1] ? 1 : 0);
      out.owners.push_back(shard.owner_id);
    }
  }
  return out;
}

// --- report rendering -----------------------------------------------------------------

// Human-readable view of analyze / attack / utility report JSON.
inline std::string report_render(const Json& report, bool csv = false) {
  std::string out;
  if (report.contains("lc_partition")) {
    const auto& part = report.at("lc_partition");
    if (csv) {
      out += "class,lc,size\n";
      for (std::size_t i = 0; i < part.size(); ++i)
        out += std::to_string(i) + "," + part[i].at("lc").get<std::string>() + "," +
               std::to_string(part[i].at("size").get<std::size_t>()) + "\n";
    } else {
      out += "LC-anonymity classes:\n";
      for (std::size_t i = 0; i < part.size(); ++i)
        out += "  [" + std::to_string(i) + "] lc=" + part[i].at("lc").get<std::string>() +
               "  size=" + std::to_string(part[i].at("size").get<std::size_t>()) + "\n";
    }
  }
  if (report.contains("observations")) {
    const auto& obs = report.at("observations");
    if (obs.empty()) {
      out += "no observations\n";
    } else {
      out += "observations: " + std::to_string(obs.size()) + "\n";
      out += "perfectly_private: ";
      out += report.value("perfectly_private", false) ? "true" : "false";
      out += "\nmutual_information_bits: " +
             std::to_string(report.value("mutual_information_bits", 0.0));
      out += "\nguessing_probability: " + report.value("guessing_probability", std::string("?")) +
             "\n";
    }
  }
  if (report.contains("mse_ratio")) {
    out += "attack mse_ratio " + std::to_string(report.at("mse_ratio").get<double>()) +
           (report.at("mse_ratio").get<double>() < 1.0 ? "  (attack beats the mean baseline)"
                                                       : "  (mean baseline wins)") +
           "\n";
  }
  if (report.contains("transfer_auc_on_z") &&
      report.at("transfer_auc_on_z").is_number()) {
    const double on_z = report.at("transfer_auc_on_z").get<double>();
    if (on_z >= 0)
      out += "transfer AUC on Z* " +
             std::to_string(report.value("transfer_auc_on_zstar", -1.0)) + ", on true Z " +
             std::to_string(on_z) + "\n";
  }
  if (report.contains("test")) {
    out += "utility test accuracy " +
           std::to_string(report.at("test").value("accuracy", 0.0)) + ", auc " +
           std::to_string(report.at("test").value("auc", 0.0)) + "\n";
    if (report.contains("per_owner_test"))
      for (const auto& [owner, m] : report.at("per_owner_test").items())
        out += "  owner " + owner + ": accuracy " + std::to_string(m.value("accuracy", 0.0)) +
               ", auc " + std::to_string(m.value("auc", 0.0)) + "\n";
  }
  if (out.empty()) out = "nothing to report\n";
  return out;
}

inline Json attack_report_to_json(const AttackReport& r) {
  Json out;
  out["mse_ratio"] = r.mse_ratio;
  out["epochs_run"] = r.epochs_run;
  out["final_loss"] = r.final_loss;
  out["attacker_mse"] = r.attacker_mse;
  out["baseline_mse"] = r.baseline_mse;
  out["rank_deficient"] = r.rank_deficient;
  if (r.transfer_auc_on_zstar >= 0) out["transfer_auc_on_zstar"] = r.transfer_auc_on_zstar;
  if (r.transfer_auc_on_z >= 0) out["transfer_auc_on_z"] = r.transfer_auc_on_z;
  return out;
}

// Attacker model persistence (JSON; desk scale).
inline Json attacker_to_json(const AttackerModel& m) {
  Json out;
  out["kind"] = m.kind == AttackerModel::Kind::linear ? "linear" : "two-layer";
  out["in_dim"] = m.in_dim;
  out["out_dim"] = m.out_dim;
  out["width"] = m.width;
  out["params"] = m.params;
  return out;
}

inline AttackerModel attacker_from_json(const Json& j) {
  AttackerModel m;
  const std::string kind = j.value("kind", "");
  if (kind == "linear")
    m.kind = AttackerModel::Kind::linear;
  else if (kind == "two-layer")
    m.kind = AttackerModel::Kind::two_layer;
  else
    fail(errc::unsupported_model, "unknown attacker kind '" + kind + "'");
  m.in_dim = j.at("in_dim").get<std::size_t>();
  m.out_dim = j.at("out_dim").get<std::size_t>();
  m.width = j.value("width", std::size_t{0});
  m.params = j.at("params").get<std::vector<double>>();
  const std::size_t expected = m.kind == AttackerModel::Kind::linear
                                   ? m.out_dim * m.in_dim + m.out_dim
                                   : m.width * m.in_dim + m.width + m.out_dim * m.width + m.out_dim;
  if (m.params.size() != expected) fail(errc::format_error, "attacker parameter size mismatch");
  return m;
}

}  // namespace neuracrypt

#endif
