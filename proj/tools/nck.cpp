// nck: key management, encoding, publication, privacy analysis and the
// attack suite, as one CLI. Exit codes: 0 success, 2 usage error,
// 3 data/format error, 4 infeasible-scale error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "neuracrypt/io.hpp"

namespace nc = neuracrypt;
namespace fs = std::filesystem;

namespace {

nc::EnumerationCaps caps_from_env() {
  nc::EnumerationCaps caps;
  if (const char* env = std::getenv("NCK_CAP")) {
    // Blunt override: raises both enumeration caps to the given value.
    const std::uint64_t v = std::strtoull(env, nullptr, 10);
    if (v > 0) {
      caps.sym_samples = static_cast<std::size_t>(v);
      caps.preserving_members = v;
    }
  }
  return caps;
}

struct DatasetOnDisk {
  std::vector<fs::path> raw_files;                 // sorted .pgm
  std::vector<nc::Tensor> raw_images;
  std::vector<nc::Population> raw_patches;         // per sample
  std::vector<nc::Population> published;           // per sample patch sets
  std::vector<std::string> published_labels;
  std::uint32_t patch_size = 0;
};

std::vector<fs::path> list_pgms(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".pgm")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) nc::fail(nc::errc::io_error, "no .pgm files in " + dir.string());
  return files;
}

// Pairs raw PGMs with published NCT1 files by stem, via the manifest.
DatasetOnDisk load_attack_data(const fs::path& raw_dir, const fs::path& pub_dir,
                               std::uint32_t patch_flag) {
  DatasetOnDisk data;
  data.raw_files = list_pgms(raw_dir);
  const nc::PublicationManifest manifest =
      nc::PublicationManifest::from_json(nc::read_json(pub_dir / "manifest.json"));
  std::map<std::string, std::pair<std::string, std::string>> by_stem;
  for (const auto& [file, label] : manifest.samples)
    by_stem[fs::path(file).stem().string()] = {file, label};

  for (const auto& raw : data.raw_files) {
    nc::Tensor img = nc::ingest_pgm(raw);
    auto it = by_stem.find(raw.stem().string());
    if (it == by_stem.end())
      nc::fail(nc::errc::missing_label, "no published sample for " + raw.filename().string());
    nc::Tensor enc = nc::read_tensor(pub_dir / it->second.first);
    if (data.patch_size == 0) {
      if (patch_flag) {
        data.patch_size = patch_flag;
      } else {
        // Square-grid inference from the manifest patch count.
        const auto patches = manifest.patch_count;
        std::uint32_t g = 1;
        while (static_cast<std::uint64_t>(g) * g < patches) ++g;
        if (static_cast<std::uint64_t>(g) * g != patches || img.dim(0) % g || img.dim(1) % g)
          nc::fail(nc::errc::shape_mismatch,
                   "cannot infer patch size; pass --patch explicitly");
        data.patch_size = static_cast<std::uint32_t>(img.dim(0) / g);
      }
    }
    data.raw_patches.push_back(nc::extract_patches(img, data.patch_size));
    data.raw_images.push_back(std::move(img));
    data.published.push_back(nc::tensor_rows(enc));
    data.published_labels.push_back(it->second.second);
  }
  return data;
}

std::vector<nc::PairedSample> paired(const DatasetOnDisk& d) {
  std::vector<nc::PairedSample> pairs;
  pairs.reserve(d.raw_patches.size());
  for (std::size_t i = 0; i < d.raw_patches.size(); ++i)
    pairs.push_back(nc::PairedSample{d.raw_patches[i], d.published[i]});
  return pairs;
}

nc::Population pool_vectors(const std::vector<nc::Population>& by_sample) {
  nc::Population all;
  for (const auto& p : by_sample) all.insert(all.end(), p.begin(), p.end());
  return all;
}

void emit_report(const nc::Json& report, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    nc::write_json(out_path, report);
    std::cout << "report written to " << out_path << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NeuraCrypt toolkit: keyless random-encoder privacy calculus and attacks"};
  app.require_subcommand(1);

  // --- keygen ---
  auto* keygen = app.add_subcommand("keygen", "create a private encoder key file");
  std::string keygen_out;
  std::optional<std::uint64_t> keygen_seed;
  nc::ArchConfig keygen_arch;
  keygen->add_option("--out", keygen_out, "key file path")->required();
  keygen->add_option("--seed", keygen_seed, "64-bit seed (default: OS entropy)");
  keygen->add_option("--height", keygen_arch.image_height, "image height");
  keygen->add_option("--width", keygen_arch.image_width, "image width");
  keygen->add_option("--channels", keygen_arch.channels_in, "input channels");
  keygen->add_option("--patch", keygen_arch.patch_size, "patch size");
  keygen->add_option("--depth", keygen_arch.depth, "encoder depth");
  keygen->add_option("--hidden", keygen_arch.hidden_dim, "hidden dimension");

  // --- encode ---
  auto* encode = app.add_subcommand("encode", "encode a PGM dataset and write the publication");
  std::string enc_key, enc_in, enc_labels, enc_out, enc_owner = "owner-0", enc_task = "task";
  std::size_t enc_threads = 1;
  encode->add_option("--key", enc_key, "key file")->required();
  encode->add_option("--in", enc_in, "input directory of .pgm files")->required();
  encode->add_option("--labels", enc_labels, "labels JSON (file name -> label)")->required();
  encode->add_option("--out", enc_out, "publication directory")->required();
  encode->add_option("--owner", enc_owner, "owner id recorded in the manifest");
  encode->add_option("--task", enc_task, "task name recorded in the manifest");
  encode->add_option("--threads", enc_threads, "parallel encode threads");

  // --- pool ---
  auto* pool = app.add_subcommand("pool", "merge publication manifests from several owners");
  std::string pool_out;
  std::vector<std::string> pool_inputs;
  pool->add_option("--out", pool_out, "pooled manifest path")->required();
  pool->add_option("manifests", pool_inputs, "manifest.json paths")->required()->expected(-1);

  // --- analyze ---
  auto* analyze = app.add_subcommand("analyze", "exact privacy analysis of an instance file");
  std::string an_instance, an_out;
  std::optional<std::uint64_t> an_cap;
  analyze->add_option("--instance", an_instance, "instance JSON")->required();
  analyze->add_option("--out", an_out, "report JSON path (default: stdout)");
  analyze->add_option("--cap", an_cap, "override both enumeration caps");

  // --- synth ---
  auto* synth = app.add_subcommand("synth", "generate the two-class synthetic blob dataset");
  std::string sy_out, sy_labels;
  nc::SyntheticDatasetConfig sy_cfg;
  synth->add_option("--out", sy_out, "output directory for .pgm files")->required();
  synth->add_option("--labels", sy_labels, "labels JSON path")->required();
  synth->add_option("--count", sy_cfg.sample_count, "number of samples");
  synth->add_option("--height", sy_cfg.image_height, "image height");
  synth->add_option("--width", sy_cfg.image_width, "image width");
  synth->add_option("--seed", sy_cfg.seed, "generator seed");

  // --- utility ---
  auto* utility = app.add_subcommand("utility", "downstream-utility proxy (logistic regression)");
  std::vector<std::string> ut_manifests;
  std::string ut_pool, ut_raw, ut_raw_labels, ut_report;
  std::uint64_t ut_seed = 17;
  utility->add_option("--pub", ut_manifests, "publication manifest.json paths");
  utility->add_option("--pool", ut_pool, "pooled manifest path");
  utility->add_option("--raw", ut_raw, "raw PGM directory (raw-pixel oracle mode)");
  utility->add_option("--labels", ut_raw_labels, "labels JSON for --raw");
  utility->add_option("--report", ut_report, "report JSON path (default: stdout)");
  utility->add_option("--split-seed", ut_seed, "60-20-20 split seed");

  // --- report ---
  auto* render = app.add_subcommand("report", "render a report JSON as text or CSV");
  std::string rp_in;
  bool rp_csv = false;
  render->add_option("--in", rp_in, "report JSON")->required();
  render->add_flag("--csv", rp_csv, "CSV output where applicable");

  // --- attack ---
  auto* attack = app.add_subcommand("attack", "attack suite");
  attack->require_subcommand(1);
  std::string at_raw, at_pub, at_report, at_model_out, at_model_in, at_key;
  std::string at_kind = "linear";
  std::string at_perm;
  std::uint32_t at_patch = 0;
  std::size_t at_steps = 200, at_width = 0;
  double at_lr = 0.05, at_momentum = 0.0;
  std::uint64_t at_seed = 1, at_perm_seed = 0;

  auto add_data_opts = [&](CLI::App* cmd, bool needs_pub) {
    cmd->add_option("--raw", at_raw, "raw PGM directory")->required();
    if (needs_pub) cmd->add_option("--pub", at_pub, "publication directory")->required();
    cmd->add_option("--patch", at_patch, "patch size (inferred for square grids)");
    cmd->add_option("--report", at_report, "report JSON path (default: stdout)");
  };

  auto* mmd = attack->add_subcommand("mmd", "unpaired MMD distribution-matching attack");
  add_data_opts(mmd, true);
  mmd->add_option("--attacker", at_kind, "linear | two-layer");
  mmd->add_option("--width", at_width, "two-layer hidden width (default: output dim)");
  mmd->add_option("--steps", at_steps, "gradient steps");
  mmd->add_option("--lr", at_lr, "learning rate");
  mmd->add_option("--momentum", at_momentum, "momentum (0.9 typical)");
  mmd->add_option("--seed", at_seed, "attacker init seed");
  mmd->add_option("--save-model", at_model_out, "write the learned attacker model JSON");

  auto* plaintext = attack->add_subcommand("plaintext", "known-plaintext recovery of the encoder");
  add_data_opts(plaintext, true);
  plaintext->add_option("--attacker", at_kind, "linear (exact least squares) | two-layer");
  plaintext->add_option("--width", at_width, "two-layer hidden width");
  plaintext->add_option("--steps", at_steps, "gradient steps (two-layer)");
  plaintext->add_option("--lr", at_lr, "learning rate (two-layer)");
  plaintext->add_option("--seed", at_seed, "attacker init seed");
  plaintext->add_option("--save-model", at_model_out, "write the learned attacker model JSON");

  auto* transfer = attack->add_subcommand("transfer", "transfer a classifier from T* onto Z");
  add_data_opts(transfer, true);
  transfer->add_option("--model", at_model_in, "attacker model JSON from a prior attack")
      ->required();
  std::string tr_labels;
  transfer->add_option("--labels", tr_labels, "labels JSON for the raw data")->required();
  transfer->add_option("--steps", at_steps, "classifier training steps");

  auto* permfit = attack->add_subcommand("permfit", "fit T_pi onto a permuted encoding");
  add_data_opts(permfit, false);
  permfit->add_option("--key", at_key, "encoder key file")->required();
  permfit->add_option("--perm", at_perm, "comma-separated permutation of sample indices");
  permfit->add_option("--perm-seed", at_perm_seed, "random permutation seed");
  permfit->add_option("--width", at_width, "two-layer hidden width");
  permfit->add_option("--steps", at_steps, "gradient steps");
  permfit->add_option("--lr", at_lr, "learning rate");
  permfit->add_option("--seed", at_seed, "attacker init seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*keygen) {
      std::uint64_t seed;
      if (keygen_seed) {
        seed = *keygen_seed;
      } else {
        std::random_device rd;
        seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      }
      keygen_arch.validate();
      nc::write_key(keygen_out, nc::EncoderKey{seed, keygen_arch, nc::kKeyFormatVersion});
      std::cout << "key written to " << keygen_out << " (public shape: "
                << keygen_arch.num_patches() << " patches x " << keygen_arch.hidden_dim
                << ", ~" << nc::parameter_count(keygen_arch) << " derived weights)\n";
    } else if (*encode) {
      const nc::EncoderKey key = nc::read_key(enc_key);
      const auto result =
          nc::encode_dataset(key, enc_in, enc_labels, enc_out, enc_owner, enc_task, enc_threads);
      nc::Json sidecar = nc::Json::object();
      for (const auto& [file, nonce] : result.nonces) sidecar[file] = nonce;
      nc::write_json(enc_key + ".nonces.json", sidecar);
      std::cout << "encoded " << result.manifest.samples.size() << " samples into " << enc_out
                << " (" << result.manifest.patch_count << " patches x "
                << result.manifest.hidden_dim << ")\n";
    } else if (*pool) {
      std::vector<std::pair<nc::PublicationManifest, fs::path>> shards;
      for (const auto& path : pool_inputs)
        shards.emplace_back(nc::PublicationManifest::from_json(nc::read_json(path)),
                            fs::path(path).parent_path());
      nc::write_json(pool_out, nc::pool_merge(shards).to_json());
      std::cout << "pooled " << shards.size() << " owners into " << pool_out << "\n";
    } else if (*analyze) {
      nc::EnumerationCaps caps = caps_from_env();
      if (an_cap) {
        caps.sym_samples = static_cast<std::size_t>(*an_cap);
        caps.preserving_members = *an_cap;
      }
      emit_report(nc::analyze(nc::read_instance_spec(an_instance, caps)), an_out);
    } else if (*synth) {
      const nc::SyntheticDataset data = nc::synth_generate(sy_cfg);
      fs::create_directories(sy_out);
      nc::Json labels = nc::Json::object();
      for (std::size_t i = 0; i < data.images.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "img_%04zu.pgm", i);
        nc::write_pgm(fs::path(sy_out) / name, data.images[i]);
        labels[name] = std::to_string(data.labels[i]);
      }
      nc::write_json(sy_labels, labels);
      std::cout << "wrote " << data.images.size() << " images to " << sy_out << "\n";
    } else if (*utility) {
      nc::PooledFeatures feats;
      if (!ut_raw.empty()) {
        if (ut_raw_labels.empty())
          nc::fail(nc::errc::missing_label, "--raw mode needs --labels");
        const auto labels = nc::read_labels_file(ut_raw_labels);
        std::vector<std::string> vocab;
        for (const auto& [k, v] : labels) vocab.push_back(v);
        std::sort(vocab.begin(), vocab.end());
        vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
        if (vocab.size() != 2)
          nc::fail(nc::errc::single_class_data, "raw oracle expects exactly two labels");
        feats.vocabulary = vocab;
        for (const auto& path : list_pgms(ut_raw)) {
          const nc::Tensor img = nc::ingest_pgm(path);
          feats.features.emplace_back(img.data(), img.data() + img.size());
          auto it = labels.find(path.filename().string());
          if (it == labels.end())
            nc::fail(nc::errc::missing_label, "no label for " + path.filename().string());
          feats.labels.push_back(it->second == vocab[1] ? 1 : 0);
          feats.owners.push_back("raw");
        }
      } else {
        std::vector<std::pair<nc::PublicationManifest, fs::path>> shards;
        for (const auto& path : ut_manifests)
          shards.emplace_back(nc::PublicationManifest::from_json(nc::read_json(path)),
                              fs::path(path).parent_path());
        nc::PooledManifest pooled;
        if (!ut_pool.empty()) {
          const nc::Json pj = nc::read_json(ut_pool);
          pooled.task = pj.value("task", "");
          pooled.hidden_dim = pj.value("hidden_dim", std::uint64_t{0});
          for (const auto& o : pj.at("owners")) {
            nc::PooledShard shard;
            shard.owner_id = o.value("owner_id", "");
            shard.directory = o.value("dir", "");
            for (const auto& row : o.at("samples"))
              shard.samples.emplace_back(row.at("file").get<std::string>(),
                                         row.at("label").get<std::string>());
            pooled.shards.push_back(std::move(shard));
          }
        } else if (!shards.empty()) {
          pooled = nc::pool_merge(shards);
        } else {
          nc::fail(nc::errc::io_error, "utility needs --pub, --pool or --raw");
        }
        feats = nc::load_pooled_features(pooled);
      }
      const nc::UtilityReport report =
          nc::utility_proxy(feats.features, feats.labels, feats.owners, feats.vocabulary, ut_seed);
      emit_report(report.to_json(), ut_report);
    } else if (*render) {
      std::cout << nc::report_render(nc::read_json(rp_in), rp_csv);
    } else if (*attack) {
      if (*mmd) {
        DatasetOnDisk data = load_attack_data(at_raw, at_pub, at_patch);
        const std::size_t in_dim = data.raw_patches.front().front().size();
        const std::size_t out_dim = data.published.front().front().size();
        nc::AttackerModel attacker =
            at_kind == "two-layer"
                ? nc::AttackerModel::make_two_layer(in_dim, out_dim,
                                                    at_width ? at_width : out_dim, at_seed)
                : nc::AttackerModel::make_linear(in_dim, out_dim, at_seed);
        nc::TrainConfig train{at_steps, at_lr, at_momentum};
        const nc::AttackReport report = nc::train_mmd_attack(
            attacker, pool_vectors(data.raw_patches), pool_vectors(data.published), paired(data),
            train, nc::MMDConfig{});
        if (!at_model_out.empty()) nc::write_json(at_model_out, nc::attacker_to_json(attacker));
        emit_report(nc::attack_report_to_json(report), at_report);
      } else if (*plaintext) {
        DatasetOnDisk data = load_attack_data(at_raw, at_pub, at_patch);
        if (at_kind == "two-layer") {
          const std::size_t in_dim = data.raw_patches.front().front().size();
          const std::size_t out_dim = data.published.front().front().size();
          nc::AttackerModel attacker = nc::AttackerModel::make_two_layer(
              in_dim, out_dim, at_width ? at_width : out_dim, at_seed);
          nc::TrainConfig train{at_steps, at_lr, at_momentum};
          const nc::AttackReport report =
              nc::train_mse_attack(attacker, paired(data), train, /*sorted_alignment=*/true);
          if (!at_model_out.empty()) nc::write_json(at_model_out, nc::attacker_to_json(attacker));
          emit_report(nc::attack_report_to_json(report), at_report);
        } else {
          const nc::PlaintextAttack result = nc::plaintext_attack(paired(data));
          emit_report(nc::attack_report_to_json(result.report), at_report);
        }
      } else if (*transfer) {
        DatasetOnDisk data = load_attack_data(at_raw, at_pub, at_patch);
        const nc::AttackerModel t_star = nc::attacker_from_json(nc::read_json(at_model_in));
        const auto raw_labels = nc::read_labels_file(tr_labels);
        std::vector<std::string> vocab;
        for (const auto& [k, v] : raw_labels) vocab.push_back(v);
        std::sort(vocab.begin(), vocab.end());
        vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
        if (vocab.size() != 2)
          nc::fail(nc::errc::single_class_data, "transfer attack expects two labels");
        std::vector<int> y_raw, y_pub;
        for (const auto& path : data.raw_files) {
          auto it = raw_labels.find(path.filename().string());
          if (it == raw_labels.end())
            nc::fail(nc::errc::missing_label, "no label for " + path.filename().string());
          y_raw.push_back(it->second == vocab[1] ? 1 : 0);
        }
        for (const auto& label : data.published_labels) y_pub.push_back(label == vocab[1] ? 1 : 0);
        const nc::AttackReport report = nc::transfer_attack(
            t_star, data.raw_patches, y_raw, data.published, y_pub, at_steps);
        emit_report(nc::attack_report_to_json(report), at_report);
      } else if (*permfit) {
        const nc::EncoderKey key = nc::read_key(at_key);
        const nc::EncoderWeights weights = nc::sample_encoder(key);
        const auto files = list_pgms(at_raw);
        std::vector<nc::Population> raw_by_sample;
        std::vector<nc::Tensor> images;
        for (const auto& path : files) {
          nc::Tensor img = nc::ingest_pgm(path);
          raw_by_sample.push_back(nc::extract_patches(img, key.arch.patch_size));
          images.push_back(std::move(img));
        }
        std::vector<std::size_t> pi(files.size());
        std::iota(pi.begin(), pi.end(), std::size_t{0});
        if (!at_perm.empty()) {
          pi.clear();
          std::stringstream ss(at_perm);
          std::string tok;
          while (std::getline(ss, tok, ',')) pi.push_back(std::stoull(tok));
        } else if (at_perm_seed) {
          nc::SplitMix64 rng(at_perm_seed);
          for (std::size_t i = pi.size(); i-- > 1;)
            std::swap(pi[i], pi[static_cast<std::size_t>(rng.next() % (i + 1))]);
        }
        const std::size_t in_dim = raw_by_sample.front().front().size();
        nc::AttackerModel attacker = nc::AttackerModel::make_two_layer(
            in_dim, key.arch.hidden_dim, at_width ? at_width : key.arch.hidden_dim, at_seed);
        nc::TrainConfig train{at_steps, at_lr, at_momentum};
        auto target = [&](const nc::Population&, std::size_t i) {
          const nc::PatchSet z = nc::encode(weights, images[i], nc::derive_nonce(key.seed, i));
          nc::Population rows;
          for (const auto& row : z.rows()) rows.emplace_back(row.begin(), row.end());
          return rows;
        };
        const nc::AttackReport report = nc::permutation_fit(target, raw_by_sample, pi, attacker,
                                                            train, /*sorted_alignment=*/true);
        emit_report(nc::attack_report_to_json(report), at_report);
      }
    }
  } catch (const nc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
