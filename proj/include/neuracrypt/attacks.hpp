#ifndef NEURACRYPT_ATTACKS_HPP
#define NEURACRYPT_ATTACKS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "neuracrypt/errors.hpp"
#include "neuracrypt/prng.hpp"

namespace neuracrypt {

using Vec = std::vector<double>;
using Population = std::vector<Vec>;  // set of feature vectors, one per patch

// --- kernels and MMD ---------------------------------------------------------

struct MMDConfig {
  std::vector<double> bandwidth_multipliers{0.5, 1.0, 2.0, 4.0, 8.0};
  double base_bandwidth = 0.0;  // 0 means median heuristic
  // estimator: biased V-statistic with diagonals (the only one implemented;
  // the U-statistic is undefined for the singleton sets unit tests use).

  void validate() const {
    if (bandwidth_multipliers.empty()) fail(errc::invalid_arch, "no kernel bandwidths");
    for (double m : bandwidth_multipliers)
      if (!(m > 0)) fail(errc::invalid_arch, "bandwidth multipliers must be positive");
    if (base_bandwidth < 0) fail(errc::invalid_arch, "negative base bandwidth");
  }
};

namespace detail {

inline double squared_distance(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) fail(errc::dim_mismatch, "vectors of unequal dimension");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

// Median of pairwise squared distances over the pooled populations; falls
// back to 1 when every pair coincides.
inline double median_squared_distance(const Population& a, const Population& b) {
  std::vector<double> dists;
  Population pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  dists.reserve(pooled.size() * (pooled.size() - 1) / 2);
  for (std::size_t i = 0; i < pooled.size(); ++i)
    for (std::size_t j = i + 1; j < pooled.size(); ++j)
      dists.push_back(squared_distance(pooled[i], pooled[j]));
  if (dists.empty()) return 1.0;
  std::sort(dists.begin(), dists.end());
  const double median = dists.size() % 2 ? dists[dists.size() / 2]
                                         : 0.5 * (dists[dists.size() / 2 - 1] +
                                                  dists[dists.size() / 2]);
  return median > 0 ? median : 1.0;
}

}  // namespace detail

// Concrete kernel bandwidths for a run: base (median heuristic unless given)
// times each multiplier.
inline std::vector<double> resolve_bandwidths(const MMDConfig& config, const Population& z,
                                              const Population& z_star) {
  config.validate();
  const double base = config.base_bandwidth > 0
                          ? config.base_bandwidth
                          : detail::median_squared_distance(z, z_star);
  std::vector<double> sigmas;
  sigmas.reserve(config.bandwidth_multipliers.size());
  for (double m : config.bandwidth_multipliers) sigmas.push_back(base * m);
  return sigmas;
}

// kappa(z_i, z_j) = sum_n exp(-|z_i - z_j|^2 / (2 sigma_n)); the standard
// Gaussian mixture kernel.
inline double rbf_kernel(const Vec& a, const Vec& b, const std::vector<double>& sigmas) {
  if (sigmas.empty()) fail(errc::invalid_arch, "no kernel bandwidths");
  const double d2 = detail::squared_distance(a, b);
  double k = 0.0;
  for (double s : sigmas) k += std::exp(-d2 / (2.0 * s));
  return k;
}

// Biased V-statistic MMD^2 with diagonals included.
inline double mmd2(const Population& z, const Population& z_star,
                   const std::vector<double>& sigmas) {
  if (z.empty() || z_star.empty()) fail(errc::empty_set, "mmd2 needs nonempty populations");
  const double m = static_cast<double>(z.size());
  const double n = static_cast<double>(z_star.size());
  double kzz = 0.0, kss = 0.0, kzs = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = 0; j < z.size(); ++j) kzz += rbf_kernel(z[i], z[j], sigmas);
  for (std::size_t i = 0; i < z_star.size(); ++i)
    for (std::size_t j = 0; j < z_star.size(); ++j) kss += rbf_kernel(z_star[i], z_star[j], sigmas);
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = 0; j < z_star.size(); ++j) kzs += rbf_kernel(z[i], z_star[j], sigmas);
  return kzz / (m * m) + kss / (n * n) - 2.0 * kzs / (m * n);
}

inline double mmd2(const Population& z, const Population& z_star, const MMDConfig& config) {
  return mmd2(z, z_star, resolve_bandwidths(config, z, z_star));
}

// --- attacker models ------------------------------------------------------------

// Patchwise map from raw patch pixels to feature vectors: a single matrix, or
// linear-ReLU-linear. Parameters live in one flat vector so gradient code and
// finite differences share a layout.
struct AttackerModel {
  enum class Kind { linear, two_layer };

  Kind kind = Kind::linear;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::size_t width = 0;  // hidden width, two_layer only
  Vec params;

  static AttackerModel make_linear(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed,
                                   double init_scale = 0.1) {
    AttackerModel m;
    m.kind = Kind::linear;
    m.in_dim = in_dim;
    m.out_dim = out_dim;
    m.params.assign(out_dim * in_dim + out_dim, 0.0);
    GaussianStream g(seed);
    for (std::size_t i = 0; i < out_dim * in_dim; ++i)
      m.params[i] = g.next() * init_scale / std::sqrt(static_cast<double>(in_dim));
    return m;
  }

  static AttackerModel make_two_layer(std::size_t in_dim, std::size_t out_dim, std::size_t width,
                                      std::uint64_t seed, double init_scale = 1.0) {
    if (width == 0) fail(errc::unsupported_model, "two-layer attacker needs positive width");
    AttackerModel m;
    m.kind = Kind::two_layer;
    m.in_dim = in_dim;
    m.out_dim = out_dim;
    m.width = width;
    m.params.assign(width * in_dim + width + out_dim * width + out_dim, 0.0);
    GaussianStream g(seed);
    double* w1 = m.params.data();
    for (std::size_t i = 0; i < width * in_dim; ++i)
      w1[i] = g.next() * init_scale * std::sqrt(2.0 / static_cast<double>(in_dim));
    double* w2 = m.params.data() + width * in_dim + width;
    for (std::size_t i = 0; i < out_dim * width; ++i)
      w2[i] = g.next() * init_scale * std::sqrt(2.0 / static_cast<double>(width));
    return m;
  }

  std::size_t param_count() const { return params.size(); }

  // Parameter blocks.
  const double* w1() const { return params.data(); }
  double* w1() { return params.data(); }
  const double* b1() const {
    return params.data() + (kind == Kind::linear ? out_dim * in_dim : width * in_dim);
  }
  double* b1() {
    return params.data() + (kind == Kind::linear ? out_dim * in_dim : width * in_dim);
  }
  const double* w2() const { return params.data() + width * in_dim + width; }
  double* w2() { return params.data() + width * in_dim + width; }
  const double* b2() const { return params.data() + width * in_dim + width + out_dim * width; }
  double* b2() { return params.data() + width * in_dim + width + out_dim * width; }

  Vec apply(const Vec& x) const {
    if (x.size() != in_dim) fail(errc::dim_mismatch, "attacker input dimension mismatch");
    if (kind == Kind::linear) {
      Vec z(out_dim, 0.0);
      for (std::size_t o = 0; o < out_dim; ++o) {
        double acc = b1()[o];
        const double* row = w1() + o * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i) acc += row[i] * x[i];
        z[o] = acc;
      }
      return z;
    }
    Vec h(width, 0.0);
    for (std::size_t o = 0; o < width; ++o) {
      double acc = b1()[o];
      const double* row = w1() + o * in_dim;
      for (std::size_t i = 0; i < in_dim; ++i) acc += row[i] * x[i];
      h[o] = acc > 0 ? acc : 0.0;
    }
    Vec z(out_dim, 0.0);
    for (std::size_t o = 0; o < out_dim; ++o) {
      double acc = b2()[o];
      const double* row = w2() + o * width;
      for (std::size_t i = 0; i < width; ++i) acc += row[i] * h[i];
      z[o] = acc;
    }
    return z;
  }

  Population apply_all(const Population& xs) const {
    Population out;
    out.reserve(xs.size());
    for (const Vec& x : xs) out.push_back(apply(x));
    return out;
  }

  // Accumulates the parameter gradient for one input given dL/d(output).
  void backprop(const Vec& x, const Vec& upstream, Vec& grad) const {
    if (grad.size() != params.size()) grad.assign(params.size(), 0.0);
    if (kind == Kind::linear) {
      double* gw = grad.data();
      double* gb = grad.data() + out_dim * in_dim;
      for (std::size_t o = 0; o < out_dim; ++o) {
        gb[o] += upstream[o];
        double* row = gw + o * in_dim;
        for (std::size_t i = 0; i < in_dim; ++i) row[i] += upstream[o] * x[i];
      }
      return;
    }
    Vec pre(width, 0.0), h(width, 0.0);
    for (std::size_t o = 0; o < width; ++o) {
      double acc = b1()[o];
      const double* row = w1() + o * in_dim;
      for (std::size_t i = 0; i < in_dim; ++i) acc += row[i] * x[i];
      pre[o] = acc;
      h[o] = acc > 0 ? acc : 0.0;
    }
    double* gw1 = grad.data();
    double* gb1 = grad.data() + width * in_dim;
    double* gw2 = grad.data() + width * in_dim + width;
    double* gb2 = grad.data() + width * in_dim + width + out_dim * width;
    Vec dh(width, 0.0);
    for (std::size_t o = 0; o < out_dim; ++o) {
      gb2[o] += upstream[o];
      const double* row = w2() + o * width;
      double* grow = gw2 + o * width;
      for (std::size_t i = 0; i < width; ++i) {
        grow[i] += upstream[o] * h[i];
        dh[i] += upstream[o] * row[i];
      }
    }
    for (std::size_t o = 0; o < width; ++o) {
      if (pre[o] <= 0) continue;
      gb1[o] += dh[o];
      double* row = gw1 + o * in_dim;
      for (std::size_t i = 0; i < in_dim; ++i) row[i] += dh[o] * x[i];
    }
  }
};

// Exact gradient of mmd2(Z, attacker(X)) with respect to attacker parameters,
// via the closed-form RBF derivative and hand-written backprop.
inline Vec mmd2_gradient(const AttackerModel& attacker, const Population& x_batch,
                         const Population& z_batch, const std::vector<double>& sigmas) {
  if (x_batch.empty() || z_batch.empty()) fail(errc::empty_set, "gradient needs nonempty batches");
  const Population z_star = attacker.apply_all(x_batch);
  const double n = static_cast<double>(z_star.size());
  const double m = static_cast<double>(z_batch.size());

  // weight(a, b) = sum_s exp(-|a-b|^2 / (2 s)) / s, so that
  // d kappa / d a = -weight(a,b) * (a - b).
  auto pair_weight = [&sigmas](const Vec& a, const Vec& b) {
    const double d2 = detail::squared_distance(a, b);
    double w = 0.0;
    for (double s : sigmas) w += std::exp(-d2 / (2.0 * s)) / s;
    return w;
  };

  Vec grad(attacker.param_count(), 0.0);
  const std::size_t dim = z_batch.front().size();
  if (z_star.front().size() != dim) fail(errc::dim_mismatch, "attacker output dimension mismatch");
  Vec upstream(dim, 0.0);
  for (std::size_t k = 0; k < z_star.size(); ++k) {
    std::fill(upstream.begin(), upstream.end(), 0.0);
    for (std::size_t j = 0; j < z_star.size(); ++j) {
      if (j == k) continue;  // zero derivative on the diagonal
      const double w = pair_weight(z_star[k], z_star[j]);
      for (std::size_t d = 0; d < dim; ++d)
        upstream[d] += -2.0 / (n * n) * w * (z_star[k][d] - z_star[j][d]);
    }
    for (std::size_t i = 0; i < z_batch.size(); ++i) {
      const double w = pair_weight(z_star[k], z_batch[i]);
      for (std::size_t d = 0; d < dim; ++d)
        upstream[d] += 2.0 / (m * n) * w * (z_star[k][d] - z_batch[i][d]);
    }
    attacker.backprop(x_batch[k], upstream, grad);
  }
  return grad;
}

// --- baselines and scoring -------------------------------------------------------

// T_mu: ignores the input and predicts the mean of Z for every patch.
inline Vec mean_baseline(const Population& z) {
  if (z.empty()) fail(errc::empty_set, "mean baseline of an empty population");
  Vec mean(z.front().size(), 0.0);
  for (const Vec& v : z) {
    if (v.size() != mean.size()) fail(errc::dim_mismatch, "ragged population");
    for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
  }
  for (double& m : mean) m /= static_cast<double>(z.size());
  return mean;
}

// One evaluation sample: the raw patches of an image and its published
// (possibly shuffled) encoded patch set.
struct PairedSample {
  Population raw_patches;
  Population encoded;
};

namespace detail {

// Published patch sets are unordered, so predictions and truth are both
// brought to the canonical lexicographic order before elementwise MSE.
inline double set_mse(Population predicted, Population truth) {
  if (predicted.size() != truth.size() || predicted.empty())
    fail(errc::dim_mismatch, "patch sets of unequal cardinality");
  std::sort(predicted.begin(), predicted.end());
  std::sort(truth.begin(), truth.end());
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    total += squared_distance(predicted[i], truth[i]);
    count += predicted[i].size();
  }
  return total / static_cast<double>(count);
}

}  // namespace detail

template <typename PredictFn>
inline double mean_squared_error(PredictFn&& predict, const std::vector<PairedSample>& pairs) {
  if (pairs.empty()) fail(errc::empty_set, "no evaluation pairs");
  double total = 0.0;
  for (const PairedSample& p : pairs) total += detail::set_mse(predict(p), p.encoded);
  return total / static_cast<double>(pairs.size());
}

inline double attacker_mse(const AttackerModel& attacker, const std::vector<PairedSample>& pairs) {
  return mean_squared_error(
      [&](const PairedSample& p) { return attacker.apply_all(p.raw_patches); }, pairs);
}

inline double baseline_mse(const Vec& mean, const std::vector<PairedSample>& pairs) {
  return mean_squared_error(
      [&](const PairedSample& p) { return Population(p.raw_patches.size(), mean); }, pairs);
}

// 0/0 arises on degenerate evaluation sets (constant targets); treat an
// exact match of a zero-variance target as ratio 0.
inline double safe_mse_ratio(double attacker, double baseline) {
  if (baseline > 0.0) return attacker / baseline;
  return attacker == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

struct AttackReport {
  double mse_ratio = 0.0;  // attacker MSE / mean-baseline MSE
  std::size_t epochs_run = 0;
  double final_loss = 0.0;
  double attacker_mse = 0.0;
  double baseline_mse = 0.0;
  bool rank_deficient = false;                 // plaintext attack only
  double transfer_auc_on_zstar = -1.0;         // transfer attack only
  double transfer_auc_on_z = -1.0;
};

// Ratio of a predictor's MSE to the mean baseline's over a paired eval set;
// the attack succeeds when this drops below 1.
inline double mse_ratio(const AttackerModel& attacker, const Vec& mean,
                        const std::vector<PairedSample>& pairs) {
  return attacker_mse(attacker, pairs) / baseline_mse(mean, pairs);
}

// --- attack drivers -------------------------------------------------------------

struct TrainConfig {
  std::size_t steps = 200;
  double learning_rate = 0.05;
  double momentum = 0.0;  // 0.9 is the usual choice when enabled
};

// Unpaired MMD attack: gradient descent on mmd2(Z, T*(X)). The paired eval
// set is used for scoring only, mirroring the MSE evaluation protocol.
inline AttackReport train_mmd_attack(AttackerModel& attacker, const Population& x_unpaired,
                                     const Population& z_published,
                                     const std::vector<PairedSample>& eval_pairs,
                                     const TrainConfig& train, const MMDConfig& config) {
  const std::vector<double> sigmas =
      resolve_bandwidths(config, z_published, attacker.apply_all(x_unpaired));
  Vec velocity(attacker.param_count(), 0.0);
  double loss = mmd2(z_published, attacker.apply_all(x_unpaired), sigmas);
  std::size_t steps_run = 0;
  for (std::size_t step = 0; step < train.steps; ++step) {
    Vec grad = mmd2_gradient(attacker, x_unpaired, z_published, sigmas);
    for (std::size_t i = 0; i < grad.size(); ++i) {
      velocity[i] = train.momentum * velocity[i] - train.learning_rate * grad[i];
      attacker.params[i] += velocity[i];
    }
    ++steps_run;
    loss = mmd2(z_published, attacker.apply_all(x_unpaired), sigmas);
    if (!std::isfinite(loss)) fail(errc::divergence, "MMD loss became non-finite");
  }
  AttackReport report;
  report.epochs_run = steps_run;
  report.final_loss = loss;
  const Vec mean = mean_baseline(z_published);
  report.attacker_mse = attacker_mse(attacker, eval_pairs);
  report.baseline_mse = baseline_mse(mean, eval_pairs);
  report.mse_ratio = safe_mse_ratio(report.attacker_mse, report.baseline_mse);
  return report;
}

// Supervised MSE descent (plaintext and permutation fits). When the target
// was shuffled the alignment is re-derived each step from the canonical sort.
inline AttackReport train_mse_attack(AttackerModel& attacker,
                                     const std::vector<PairedSample>& pairs,
                                     const TrainConfig& train, bool sorted_alignment) {
  if (pairs.empty()) fail(errc::empty_set, "no training pairs");
  Vec velocity(attacker.param_count(), 0.0);
  double loss = 0.0;
  for (std::size_t step = 0; step < train.steps; ++step) {
    Vec grad(attacker.param_count(), 0.0);
    loss = 0.0;
    std::size_t count = 0;
    for (const PairedSample& p : pairs) {
      Population pred = attacker.apply_all(p.raw_patches);
      std::vector<std::size_t> pred_order(pred.size()), true_order(pred.size());
      std::iota(pred_order.begin(), pred_order.end(), std::size_t{0});
      std::iota(true_order.begin(), true_order.end(), std::size_t{0});
      if (sorted_alignment) {
        std::sort(pred_order.begin(), pred_order.end(),
                  [&](std::size_t a, std::size_t b) { return pred[a] < pred[b]; });
        std::sort(true_order.begin(), true_order.end(),
                  [&](std::size_t a, std::size_t b) { return p.encoded[a] < p.encoded[b]; });
      }
      for (std::size_t r = 0; r < pred.size(); ++r) {
        const Vec& zhat = pred[pred_order[r]];
        const Vec& z = p.encoded[true_order[r]];
        Vec upstream(zhat.size(), 0.0);
        for (std::size_t d = 0; d < zhat.size(); ++d) {
          const double diff = zhat[d] - z[d];
          loss += diff * diff;
          upstream[d] = 2.0 * diff;
        }
        count += zhat.size();
        attacker.backprop(p.raw_patches[pred_order[r]], upstream, grad);
      }
    }
    loss /= static_cast<double>(count);
    if (!std::isfinite(loss)) fail(errc::divergence, "MSE loss became non-finite");
    const double scale = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < grad.size(); ++i) {
      velocity[i] = train.momentum * velocity[i] - train.learning_rate * grad[i] * scale;
      attacker.params[i] += velocity[i];
    }
  }
  AttackReport report;
  report.epochs_run = train.steps;
  report.final_loss = loss;
  Population all_z;
  for (const PairedSample& p : pairs)
    all_z.insert(all_z.end(), p.encoded.begin(), p.encoded.end());
  const Vec mean = mean_baseline(all_z);
  report.attacker_mse = attacker_mse(attacker, pairs);
  report.baseline_mse = baseline_mse(mean, pairs);
  report.mse_ratio = safe_mse_ratio(report.attacker_mse, report.baseline_mse);
  return report;
}

// --- plaintext attack (parallel data) ---------------------------------------------

namespace detail {

// Cyclic Jacobi eigendecomposition of a symmetric matrix; small systems only.
inline void symmetric_eigen(std::vector<double>& a, std::size_t n, std::vector<double>& eigvec,
                            std::vector<double>& eigval) {
  eigvec.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) eigvec[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double app = a[p * n + p], aqq = a[q * n + q];
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = eigvec[k * n + p], vkq = eigvec[k * n + q];
          eigvec[k * n + p] = c * vkp - s * vkq;
          eigvec[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  eigval.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) eigval[i] = a[i * n + i];
}

// Minimum-norm least squares W [out x in] for rows X [N x in] -> Z [N x out]
// via the pseudo-inverse of X^T X. Returns whether the system was rank
// deficient (rank < in).
inline bool least_squares(const Population& xs, const Population& zs, std::size_t in_dim,
                          std::size_t out_dim, std::vector<double>& w_out) {
  std::vector<double> gram(in_dim * in_dim, 0.0);
  std::vector<double> xtz(in_dim * out_dim, 0.0);
  for (std::size_t r = 0; r < xs.size(); ++r) {
    for (std::size_t i = 0; i < in_dim; ++i) {
      for (std::size_t j = 0; j < in_dim; ++j) gram[i * in_dim + j] += xs[r][i] * xs[r][j];
      for (std::size_t o = 0; o < out_dim; ++o) xtz[i * out_dim + o] += xs[r][i] * zs[r][o];
    }
  }
  std::vector<double> eigvec, eigval;
  std::vector<double> gram_copy = gram;
  symmetric_eigen(gram_copy, in_dim, eigvec, eigval);
  double max_ev = 0.0;
  for (double e : eigval) max_ev = std::max(max_ev, std::abs(e));
  const double tol = max_ev * 1e-12;
  bool deficient = false;
  std::vector<double> inv_ev(in_dim, 0.0);
  for (std::size_t i = 0; i < in_dim; ++i) {
    if (std::abs(eigval[i]) <= tol) {
      deficient = true;
      inv_ev[i] = 0.0;
    } else {
      inv_ev[i] = 1.0 / eigval[i];
    }
  }
  // W^T = V diag(1/lambda) V^T X^T Z
  std::vector<double> tmp(in_dim * out_dim, 0.0);
  for (std::size_t i = 0; i < in_dim; ++i)
    for (std::size_t o = 0; o < out_dim; ++o) {
      double acc = 0.0;
      for (std::size_t k = 0; k < in_dim; ++k) acc += eigvec[k * in_dim + i] * xtz[k * out_dim + o];
      tmp[i * out_dim + o] = acc * inv_ev[i];
    }
  w_out.assign(out_dim * in_dim, 0.0);
  for (std::size_t j = 0; j < in_dim; ++j)
    for (std::size_t o = 0; o < out_dim; ++o) {
      double acc = 0.0;
      for (std::size_t i = 0; i < in_dim; ++i) acc += eigvec[j * in_dim + i] * tmp[i * out_dim + o];
      w_out[o * in_dim + j] = acc;
    }
  return deficient;
}

}  // namespace detail

// Per-patch-position linear attackers fit by exact least squares on parallel
// (raw, encoded) pairs. Positions are solved independently; the report flags
// rank deficiency (pseudo-inverse used) when any position has fewer
// independent patches than the input dimension.
struct PlaintextAttack {
  std::vector<std::vector<double>> per_position_w;  // each [out x in]
  std::size_t in_dim = 0, out_dim = 0;
  AttackReport report;

  Population apply(const Population& raw_patches) const {
    Population out;
    out.reserve(raw_patches.size());
    for (std::size_t pos = 0; pos < raw_patches.size(); ++pos) {
      const auto& w = per_position_w[pos % per_position_w.size()];
      Vec z(out_dim, 0.0);
      for (std::size_t o = 0; o < out_dim; ++o) {
        double acc = 0.0;
        for (std::size_t i = 0; i < in_dim; ++i) acc += w[o * in_dim + i] * raw_patches[pos][i];
        z[o] = acc;
      }
      out.push_back(std::move(z));
    }
    return out;
  }
};

inline PlaintextAttack plaintext_attack(const std::vector<PairedSample>& pairs) {
  if (pairs.empty()) fail(errc::empty_set, "plaintext attack needs pairs");
  const std::size_t positions = pairs.front().raw_patches.size();
  PlaintextAttack attack;
  attack.in_dim = pairs.front().raw_patches.front().size();
  attack.out_dim = pairs.front().encoded.front().size();
  attack.per_position_w.resize(positions);
  bool deficient = false;
  for (std::size_t pos = 0; pos < positions; ++pos) {
    Population xs, zs;
    for (const PairedSample& p : pairs) {
      if (p.raw_patches.size() != positions || p.encoded.size() != positions)
        fail(errc::dim_mismatch, "pairs with unequal patch counts");
      xs.push_back(p.raw_patches[pos]);
      zs.push_back(p.encoded[pos]);
    }
    deficient |= detail::least_squares(xs, zs, attack.in_dim, attack.out_dim,
                                       attack.per_position_w[pos]);
  }
  attack.report.rank_deficient = deficient;
  Population all_z;
  for (const PairedSample& p : pairs)
    all_z.insert(all_z.end(), p.encoded.begin(), p.encoded.end());
  const Vec mean = mean_baseline(all_z);
  attack.report.attacker_mse = mean_squared_error(
      [&](const PairedSample& p) { return attack.apply(p.raw_patches); }, pairs);
  attack.report.baseline_mse = baseline_mse(mean, pairs);
  attack.report.mse_ratio = safe_mse_ratio(attack.report.attacker_mse, attack.report.baseline_mse);
  attack.report.epochs_run = 0;
  attack.report.final_loss = attack.report.attacker_mse;
  return attack;
}

// --- ROC AUC and logistic regression ------------------------------------------------

// Mann-Whitney formulation; ties contribute one half.
inline double roc_auc(const Vec& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    fail(errc::dim_mismatch, "scores and labels must parallel");
  std::size_t positives = 0;
  for (int l : labels) positives += l ? 1 : 0;
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0)
    fail(errc::single_class_data, "AUC needs both classes present");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based average
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) rank_sum_pos += avg_rank;
    i = j;
  }
  const double n_pos = static_cast<double>(positives), n_neg = static_cast<double>(negatives);
  return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg);
}

// Plain-GD logistic regression with per-feature standardization. Used by the
// transfer attack and the downstream-utility proxy.
struct LogisticModel {
  Vec weights;  // bias last
  Vec feature_mean, feature_scale;

  double score(const Vec& x) const {
    double z = weights.back();
    for (std::size_t i = 0; i < x.size(); ++i)
      z += weights[i] * (x[i] - feature_mean[i]) / feature_scale[i];
    return 1.0 / (1.0 + std::exp(-z));
  }

  Vec score_all(const Population& xs) const {
    Vec out;
    out.reserve(xs.size());
    for (const Vec& x : xs) out.push_back(score(x));
    return out;
  }
};

inline LogisticModel train_logistic(const Population& features, const std::vector<int>& labels,
                                    std::size_t steps = 500, double lr = 0.5) {
  if (features.empty() || features.size() != labels.size())
    fail(errc::dim_mismatch, "features and labels must parallel");
  bool has0 = false, has1 = false;
  for (int l : labels) (l ? has1 : has0) = true;
  if (!has0 || !has1) fail(errc::single_class_data, "training data has a single class");
  const std::size_t d = features.front().size();
  LogisticModel model;
  model.feature_mean.assign(d, 0.0);
  model.feature_scale.assign(d, 1.0);
  for (const Vec& x : features)
    for (std::size_t i = 0; i < d; ++i) model.feature_mean[i] += x[i];
  for (double& m : model.feature_mean) m /= static_cast<double>(features.size());
  Vec var(d, 0.0);
  for (const Vec& x : features)
    for (std::size_t i = 0; i < d; ++i) {
      const double t = x[i] - model.feature_mean[i];
      var[i] += t * t;
    }
  for (std::size_t i = 0; i < d; ++i) {
    var[i] /= static_cast<double>(features.size());
    model.feature_scale[i] = var[i] > 1e-12 ? std::sqrt(var[i]) : 1.0;
  }
  model.weights.assign(d + 1, 0.0);
  const double inv_n = 1.0 / static_cast<double>(features.size());
  for (std::size_t step = 0; step < steps; ++step) {
    Vec grad(d + 1, 0.0);
    for (std::size_t r = 0; r < features.size(); ++r) {
      const double p = model.score(features[r]);
      const double err = p - static_cast<double>(labels[r]);
      for (std::size_t i = 0; i < d; ++i)
        grad[i] += err * (features[r][i] - model.feature_mean[i]) / model.feature_scale[i];
      grad[d] += err;
    }
    for (std::size_t i = 0; i <= d; ++i) model.weights[i] -= lr * grad[i] * inv_n;
  }
  return model;
}

// --- transfer attack --------------------------------------------------------------

inline Vec mean_pool(const Population& patches) {
  return mean_baseline(patches);  // same arithmetic: the patch-vector mean
}

// Trains a label classifier on mean-pooled T*(X) features, then scores it on
// both the attacker's own encodings and the true published ones.
inline AttackReport transfer_attack(const AttackerModel& t_star,
                                    const std::vector<Population>& raw_by_sample,
                                    const std::vector<int>& labels,
                                    const std::vector<Population>& published_by_sample,
                                    const std::vector<int>& published_labels,
                                    std::size_t steps = 500, double lr = 0.5) {
  if (raw_by_sample.size() != labels.size() || published_by_sample.size() != published_labels.size())
    fail(errc::dim_mismatch, "labels must parallel samples");
  Population zstar_features;
  zstar_features.reserve(raw_by_sample.size());
  for (const Population& patches : raw_by_sample)
    zstar_features.push_back(mean_pool(t_star.apply_all(patches)));
  const LogisticModel clf = train_logistic(zstar_features, labels, steps, lr);

  Population z_features;
  z_features.reserve(published_by_sample.size());
  for (const Population& patches : published_by_sample) z_features.push_back(mean_pool(patches));

  AttackReport report;
  report.transfer_auc_on_zstar = roc_auc(clf.score_all(zstar_features), labels);
  report.transfer_auc_on_z = roc_auc(clf.score_all(z_features), published_labels);
  report.epochs_run = steps;
  return report;
}

// --- permutation-encoding fit --------------------------------------------------------

// Fits T_pi to map x_{pi(i)} onto T(x_i): the training pairs are
// (raw patches of x_{pi(i)}, encoded patches of x_i).
template <typename TargetFn>
inline AttackReport permutation_fit(TargetFn&& target, const std::vector<Population>& raw_by_sample,
                                    const std::vector<std::size_t>& pi, AttackerModel& attacker,
                                    const TrainConfig& train, bool sorted_alignment) {
  if (pi.size() != raw_by_sample.size()) fail(errc::length_mismatch, "permutation length mismatch");
  std::vector<PairedSample> pairs;
  pairs.reserve(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (pi[i] >= raw_by_sample.size()) fail(errc::length_mismatch, "permutation index out of range");
    pairs.push_back(PairedSample{raw_by_sample[pi[i]], target(raw_by_sample[i], i)});
  }
  return train_mse_attack(attacker, pairs, train, sorted_alignment);
}

}  // namespace neuracrypt

#endif
