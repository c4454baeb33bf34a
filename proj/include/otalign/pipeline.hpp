// otalign/pipeline.hpp

// Copyright 2026  OTAlign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OTALIGN_PIPELINE_HPP_
#define OTALIGN_PIPELINE_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "otalign/adam.hpp"
#include "otalign/baselines.hpp"
#include "otalign/dataset.hpp"
#include "otalign/error.hpp"
#include "otalign/metrics.hpp"
#include "otalign/nn.hpp"
#include "otalign/ot.hpp"
#include "otalign/rng.hpp"

namespace otalign {

enum class Method { kNone, kNpot, kNot, kMmd, kCmd, kDann, kWdgrl };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::kNone: return "none";
    case Method::kNpot: return "npot";
    case Method::kNot: return "not";
    case Method::kMmd: return "mmd";
    case Method::kCmd: return "cmd";
    case Method::kDann: return "dann";
    default: return "wdgrl";
  }
}

inline Method method_from_name(const std::string& s) {
  if (s == "none") return Method::kNone;
  if (s == "npot") return Method::kNpot;
  if (s == "not") return Method::kNot;
  if (s == "mmd") return Method::kMmd;
  if (s == "cmd") return Method::kCmd;
  if (s == "dann") return Method::kDann;
  if (s == "wdgrl") return Method::kWdgrl;
  throw ConfigError("method: unknown value '" + s + "'");
}

struct CriticConfig {
  int hidden_dim = 64;
  int steps = 5;  // critic updates per feature step
  double eta = 20.0;

  void validate() const {
    if (hidden_dim < 1) throw ConfigError("critic.hidden_dim: must be >= 1");
    if (steps < 1) throw ConfigError("critic.steps: must be >= 1");
    if (!(eta >= 0)) throw ConfigError("critic.eta: must be >= 0");
  }
};

struct MmdConfig {
  double bandwidth = 0.0;  // <= 0 selects the median heuristic per batch
};

struct CmdConfig {
  int order = 5;
  double bound_min = -1.0;  // length-normalized latents lie in [-1, 1]
  double bound_max = 1.0;

  void validate() const {
    if (order < 1) throw ConfigError("cmd.order: must be >= 1");
    if (!(bound_max > bound_min)) throw ConfigError("cmd: invalid bounds");
  }
};

struct TrainConfig {
  Method method = Method::kNpot;
  // Weight of the alignment term; when unset the per-method default
  // applies (npot/not 1.0, mmd/cmd 5.0, dann 0.5, wdgrl 0.1).
  std::optional<double> lambda_align;
  double entropy_weight = 0.05;
  int batch_size = 128;
  int max_epochs = 100;
  int patience = 10;
  AlignConfig align;
  AdamConfig optimizer;
  double val_fraction = 0.1;
  std::uint64_t seed = 0;
  int latent_dim = 32;
  CriticConfig critic;
  MmdConfig mmd;
  CmdConfig cmd;

  double resolved_lambda() const {
    if (lambda_align.has_value()) return *lambda_align;
    switch (method) {
      case Method::kNone: return 0.0;
      case Method::kNpot:
      case Method::kNot: return 1.0;
      case Method::kMmd:
      case Method::kCmd: return 5.0;
      case Method::kDann: return 0.5;
      default: return 0.1;  // wdgrl
    }
  }

  void validate() const {
    if (batch_size < 1) throw ConfigError("batch_size: must be >= 1");
    if (max_epochs < 0) throw ConfigError("max_epochs: must be >= 0");
    if (patience < 1) throw ConfigError("patience: must be >= 1");
    if (!(val_fraction > 0.0 && val_fraction <= 0.5)) {
      throw ConfigError("val_fraction: must be in (0, 0.5]");
    }
    if (!(entropy_weight >= 0)) {
      throw ConfigError("entropy_weight: must be >= 0");
    }
    if (latent_dim < 1) throw ConfigError("latent_dim: must be >= 1");
    if (lambda_align.has_value() && !std::isfinite(*lambda_align)) {
      throw ConfigError("lambda_align: must be finite");
    }
    align.validate();
    optimizer.validate();
    critic.validate();
    cmd.validate();
  }
};

struct EpochRecord {
  int epoch = 0;
  double source_ce = 0.0;
  double align_loss = 0.0;      // unscaled per-method alignment value
  double target_entropy = 0.0;  // per-sample mean over the epoch
  double val_criterion = 0.0;
  double wall_seconds = 0.0;    // informational; never serialized
};

struct RunHistory {
  std::vector<EpochRecord> records;
  int best_epoch = 0;  // 1-based; 0 when no epoch ran

  int num_epochs() const { return static_cast<int>(records.size()); }
};

struct MetricsReport {
  double eer = 0.0;
  double cavg_min = 0.0;
  double cavg_fixed = 0.0;
  double fixed_threshold = 0.5;
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  int num_trials = 0;
  double mean_target_entropy = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<int> gather_labels(const std::vector<int>& v,
                                      const std::vector<int>& idx) {
  std::vector<int> out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

inline Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m,
                                   const std::vector<int>& idx) {
  Eigen::MatrixXd out(static_cast<int>(idx.size()), m.cols());
  for (int i = 0; i < out.rows(); ++i) out.row(i) = m.row(idx[i]);
  return out;
}

struct Split {
  std::vector<int> train;
  std::vector<int> val;
};

inline Split split_indices(int n, double val_fraction, Rng rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  int n_val = std::max(1, static_cast<int>(std::llround(n * val_fraction)));
  if (n_val >= n) n_val = n - 1;
  Split s;
  s.val.assign(idx.begin(), idx.begin() + n_val);
  s.train.assign(idx.begin() + n_val, idx.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

// Shuffled cyclic batch sampler; reshuffles whenever the index pool wraps.
class BatchCycler {
 public:
  BatchCycler(std::vector<int> indices, int batch_size, Rng rng)
      : indices_(std::move(indices)), batch_(batch_size), rng_(rng) {
    rng_.shuffle(indices_);
  }

  std::vector<int> next() {
    std::vector<int> out;
    out.reserve(batch_);
    while (static_cast<int>(out.size()) < batch_) {
      if (pos_ >= static_cast<int>(indices_.size())) {
        rng_.shuffle(indices_);
        pos_ = 0;
      }
      out.push_back(indices_[pos_++]);
    }
    return out;
  }

 private:
  std::vector<int> indices_;
  int batch_;
  Rng rng_;
  int pos_ = 0;
};

// Per-step alignment outcome, normalized across methods. The d_* members
// are gradients of the lambda-scaled contribution to the total loss;
// `loss` is the raw per-method alignment value and `weighted_loss` the
// contribution itself.
struct StepAlign {
  double loss = 0.0;
  double weighted_loss = 0.0;
  Eigen::MatrixXd d_source_latent;  // empty = zero
  Eigen::MatrixXd d_target_latent;
  Eigen::MatrixXd d_target_probs;
};

// Adversary state threaded through the adaptation loop.
struct Adversaries {
  std::optional<DomainDiscriminator> disc;
  AdamState disc_adam;
  Eigen::VectorXd disc_params;
  std::optional<Critic> critic;
  AdamState critic_adam;
  Eigen::VectorXd critic_params;
  Rng wdgrl_rng{0};
};

inline AlignConfig align_config_for(Method method, const AlignConfig& base) {
  AlignConfig cfg = base;
  if (method == Method::kNot) {
    cfg.weight_mode = WeightMode::kNone;
  } else if (method == Method::kNpot &&
             cfg.weight_mode == WeightMode::kNone) {
    cfg.weight_mode = WeightMode::kSoft;
  }
  return cfg;
}

inline StepAlign compute_alignment(Method method, const TrainConfig& cfg,
                                   double lambda,
                                   const Eigen::MatrixXd& zs,
                                   const Eigen::MatrixXd& ys_onehot,
                                   const Eigen::MatrixXd& zt,
                                   const Eigen::MatrixXd& yt_probs,
                                   Adversaries* adv, bool update_adversary,
                                   bool want_grads) {
  StepAlign out;
  switch (method) {
    case Method::kNone:
      return out;
    case Method::kNpot:
    case Method::kNot: {
      AlignConfig ac = align_config_for(method, cfg.align);
      PotAlignResult res =
          pot_align_loss(zs, ys_onehot, zt, yt_probs, ac);
      out.loss = res.loss;
      out.weighted_loss = lambda * res.loss;
      if (want_grads) {
        PotGradients g =
            pot_align_gradients(zs, ys_onehot, zt, yt_probs, res, ac);
        out.d_source_latent = lambda * g.d_source_latent;
        out.d_target_latent = lambda * g.d_target_latent;
        out.d_target_probs = lambda * g.d_target_probs;
      }
      return out;
    }
    case Method::kMmd: {
      double bw = cfg.mmd.bandwidth > 0.0
                      ? cfg.mmd.bandwidth
                      : median_heuristic_bandwidth(zs, zt);
      out.loss = mmd_loss(zs, zt, bw);
      out.weighted_loss = lambda * out.loss;
      if (want_grads) {
        MmdGradients g = mmd_gradients(zs, zt, bw);
        out.d_source_latent = lambda * g.d_source;
        out.d_target_latent = lambda * g.d_target;
      }
      return out;
    }
    case Method::kCmd: {
      out.loss = cmd_loss(zs, zt, cfg.cmd.order, cfg.cmd.bound_min,
                          cfg.cmd.bound_max);
      out.weighted_loss = lambda * out.loss;
      if (want_grads) {
        CmdGradients g = cmd_gradients(zs, zt, cfg.cmd.order,
                                       cfg.cmd.bound_min, cfg.cmd.bound_max);
        out.d_source_latent = lambda * g.d_source;
        out.d_target_latent = lambda * g.d_target;
      }
      return out;
    }
    case Method::kDann: {
      if (!adv || !adv->disc) {
        throw ConfigError("method dann requires a discriminator");
      }
      if (update_adversary) {
        DannResult r0 = dann_domain_loss(*adv->disc, zs, zt, lambda);
        adv->disc_adam.step(adv->disc_params, r0.disc_grads);
        adv->disc->head.set_params(adv->disc_params);
      }
      DannResult r = dann_domain_loss(*adv->disc, zs, zt, lambda);
      out.loss = r.loss;
      // The feature extractor maximizes the domain loss; its contribution
      // to the minimized total is -lambda * BCE.
      out.weighted_loss = -lambda * r.loss;
      if (want_grads) {
        out.d_source_latent = r.d_source_latent;  // already -lambda scaled
        out.d_target_latent = r.d_target_latent;
      }
      return out;
    }
    case Method::kWdgrl: {
      if (!adv || !adv->critic) {
        throw ConfigError("method wdgrl requires a critic");
      }
      if (update_adversary) {
        for (int k = 0; k < cfg.critic.steps; ++k) {
          WdgrlCriticGrads cg = wdgrl_critic_grads(
              *adv->critic, zs, zt, cfg.critic.eta, adv->wdgrl_rng);
          Eigen::VectorXd descent = -cg.ascent_grads;
          adv->critic_adam.step(adv->critic_params, descent);
          adv->critic->head.set_params(adv->critic_params);
        }
      }
      WdgrlFeatureGrads f = wdgrl_feature_grads(*adv->critic, zs, zt);
      out.loss = f.wd_estimate;
      out.weighted_loss = lambda * f.wd_estimate;
      if (want_grads) {
        out.d_source_latent = lambda * f.d_source;
        out.d_target_latent = lambda * f.d_target;
      }
      return out;
    }
  }
  return out;
}

}  // namespace detail

// Minimizes mean source cross-entropy with Adam; early-stops on held-out
// source validation CE and restores the best snapshot.
inline RunHistory pretrain_source(AdaptationNetwork& net,
                                  const Dataset& source,
                                  const TrainConfig& cfg) {
  cfg.validate();
  source.validate();
  if (!source.fully_labeled()) {
    throw InputError("pretrain_source: source dataset must be fully labeled");
  }
  RunHistory hist;
  if (cfg.max_epochs == 0) return hist;

  Rng root(cfg.seed);
  detail::Split split = detail::split_indices(
      source.num_samples(), cfg.val_fraction, root.fork("split/source"));
  const int batch =
      std::min(cfg.batch_size, static_cast<int>(split.train.size()));
  const int steps =
      (static_cast<int>(split.train.size()) + batch - 1) / batch;
  detail::BatchCycler cycler(split.train, batch, root.fork("batches/source"));

  Eigen::MatrixXd val_x = detail::gather_rows(source.features, split.val);
  Eigen::MatrixXd val_y = one_hot(
      detail::gather_labels(source.labels, split.val), net.num_classes());

  AdamState adam(net.param_count(), cfg.optimizer);
  Eigen::VectorXd params = net.params();
  Eigen::VectorXd best_params = params;
  double best = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    double ce_sum = 0.0;
    for (int s = 0; s < steps; ++s) {
      std::vector<int> idx = cycler.next();
      Eigen::MatrixXd x = detail::gather_rows(source.features, idx);
      Eigen::MatrixXd y =
          one_hot(detail::gather_labels(source.labels, idx),
                  net.num_classes());
      ForwardCache cache = net.forward(x);
      ce_sum += cross_entropy_loss(y, cache.probs);
      NetworkGrads g = net.backward(cache, Eigen::MatrixXd(),
                                    cross_entropy_grad(y, cache.probs));
      adam.step(params, net.flatten(g));
      net.set_params(params);
    }
    double val_ce =
        cross_entropy_loss(val_y, net.forward(val_x).probs);
    double wall = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    hist.records.push_back(
        {epoch, ce_sum / steps, 0.0, 0.0, val_ce, wall});
    if (val_ce < best) {
      best = val_ce;
      best_params = params;
      hist.best_epoch = epoch;
      bad_epochs = 0;
    } else if (++bad_epochs >= cfg.patience) {
      break;
    }
  }
  net.set_params(best_params);
  return hist;
}

// One adaptation run: per step, sample one batch from each domain, solve
// the alignment (coupling first for the transport methods, adversary
// updates first for dann/wdgrl), then take a single Adam step on the
// projection and classifier with the alignment internals frozen.
// Early-stops on source validation CE plus lambda times the alignment loss
// measured between the held-out slices of both domains (label-free).
inline RunHistory adapt(AdaptationNetwork& net, const Dataset& source,
                        const Dataset& target, const TrainConfig& cfg) {
  cfg.validate();
  source.validate();
  target.validate();
  if (!source.fully_labeled()) {
    throw InputError("adapt: source dataset must be fully labeled");
  }
  if (cfg.batch_size >
      std::min(source.num_samples(), target.num_samples())) {
    throw ConfigError(
        "batch_size: exceeds the smaller domain (" +
        std::to_string(std::min(source.num_samples(),
                                target.num_samples())) +
        " samples)");
  }

  RunHistory hist;
  if (cfg.max_epochs == 0) return hist;

  // Method "none" is the no-adaptation control: pure source CE trajectory.
  const double lambda =
      cfg.method == Method::kNone ? 0.0 : cfg.resolved_lambda();
  const double ent_weight =
      cfg.method == Method::kNone ? 0.0 : cfg.entropy_weight;

  Rng root(cfg.seed);
  detail::Split src_split = detail::split_indices(
      source.num_samples(), cfg.val_fraction, root.fork("split/source"));
  detail::Split tgt_split = detail::split_indices(
      target.num_samples(), cfg.val_fraction, root.fork("split/target"));

  const int batch = std::min(
      {cfg.batch_size, static_cast<int>(src_split.train.size()),
       static_cast<int>(tgt_split.train.size())});
  const int larger = static_cast<int>(
      std::max(src_split.train.size(), tgt_split.train.size()));
  const int steps = (larger + batch - 1) / batch;

  detail::BatchCycler src_cycler(src_split.train, batch,
                                 root.fork("batches/source"));
  detail::BatchCycler tgt_cycler(tgt_split.train, batch,
                                 root.fork("batches/target"));

  detail::Adversaries adv;
  adv.wdgrl_rng = root.fork("wdgrl/interpolates");
  if (cfg.method == Method::kDann) {
    Rng r = root.fork("discriminator/init");
    adv.disc.emplace(net.latent_dim(), cfg.critic.hidden_dim, r);
    adv.disc_params = adv.disc->head.params();
    adv.disc_adam = AdamState(adv.disc->head.param_count(), cfg.optimizer);
  } else if (cfg.method == Method::kWdgrl) {
    Rng r = root.fork("critic/init");
    adv.critic.emplace(net.latent_dim(), cfg.critic.hidden_dim, r);
    adv.critic_params = adv.critic->head.params();
    adv.critic_adam =
        AdamState(adv.critic->head.param_count(), cfg.optimizer);
  }

  Eigen::MatrixXd src_val_x =
      detail::gather_rows(source.features, src_split.val);
  Eigen::MatrixXd src_val_y = one_hot(
      detail::gather_labels(source.labels, src_split.val),
      net.num_classes());
  Eigen::MatrixXd tgt_val_x =
      detail::gather_rows(target.features, tgt_split.val);

  AdamState adam(net.param_count(), cfg.optimizer);
  Eigen::VectorXd params = net.params();
  Eigen::VectorXd best_params = params;
  double best = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    double ce_sum = 0.0, align_sum = 0.0, ent_sum = 0.0;
    for (int s = 0; s < steps; ++s) {
      std::vector<int> src_idx = src_cycler.next();
      std::vector<int> tgt_idx = tgt_cycler.next();
      Eigen::MatrixXd xs = detail::gather_rows(source.features, src_idx);
      Eigen::MatrixXd ys = one_hot(
          detail::gather_labels(source.labels, src_idx), net.num_classes());
      Eigen::MatrixXd xt = detail::gather_rows(target.features, tgt_idx);

      ForwardCache cs = net.forward(xs);
      ForwardCache ct = net.forward(xt);

      ce_sum += cross_entropy_loss(ys, cs.probs);
      Eigen::MatrixXd d_probs_s = cross_entropy_grad(ys, cs.probs);

      detail::StepAlign align;
      if (lambda != 0.0) {
        align = detail::compute_alignment(cfg.method, cfg, lambda,
                                          cs.latent, ys, ct.latent,
                                          ct.probs, &adv,
                                          /*update_adversary=*/true,
                                          /*want_grads=*/true);
      } else if (cfg.method != Method::kNone) {
        align = detail::compute_alignment(cfg.method, cfg, 0.0, cs.latent,
                                          ys, ct.latent, ct.probs, &adv,
                                          /*update_adversary=*/true,
                                          /*want_grads=*/false);
      }
      align_sum += align.loss;

      EntropyValue ent = target_entropy(ct.probs);
      ent_sum += ent.mean;

      NetworkGrads gs =
          net.backward(cs, align.d_source_latent, d_probs_s);
      Eigen::VectorXd flat = net.flatten(gs);
      Eigen::MatrixXd d_probs_t;
      if (ent_weight > 0.0) {
        d_probs_t = ent_weight * target_entropy_grad(ct.probs);
      }
      if (align.d_target_probs.size() != 0) {
        if (d_probs_t.size() == 0) {
          d_probs_t = align.d_target_probs;
        } else {
          d_probs_t += align.d_target_probs;
        }
      }
      if (align.d_target_latent.size() != 0 || d_probs_t.size() != 0) {
        NetworkGrads gt =
            net.backward(ct, align.d_target_latent, d_probs_t);
        flat += net.flatten(gt);
      }
      adam.step(params, flat);
      net.set_params(params);
    }

    // Label-free validation criterion.
    ForwardCache cv_s = net.forward(src_val_x);
    double val_ce = cross_entropy_loss(src_val_y, cv_s.probs);
    double criterion = val_ce;
    if (lambda != 0.0) {
      ForwardCache cv_t = net.forward(tgt_val_x);
      detail::StepAlign va = detail::compute_alignment(
          cfg.method, cfg, lambda, cv_s.latent, src_val_y, cv_t.latent,
          cv_t.probs, &adv, /*update_adversary=*/false,
          /*want_grads=*/false);
      criterion += va.weighted_loss;
    }

    double wall = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    hist.records.push_back({epoch, ce_sum / steps, align_sum / steps,
                            ent_sum / steps, criterion, wall});
    if (criterion < best) {
      best = criterion;
      best_params = params;
      hist.best_epoch = epoch;
      bad_epochs = 0;
    } else if (++bad_epochs >= cfg.patience) {
      break;
    }
  }
  net.set_params(best_params);
  return hist;
}

// Scores a labeled evaluation set: pooled EER, Cavg in both threshold
// modes, accuracy and per-class accuracy. Classes outside the model's
// label space are scored as zero-probability columns with a warning.
inline MetricsReport evaluate(const AdaptationNetwork& net,
                              const Dataset& labeled_eval,
                              double fixed_threshold = 0.5,
                              double p_target = 0.5) {
  labeled_eval.validate();
  if (!labeled_eval.fully_labeled()) {
    throw InputError("evaluate: evaluation dataset must be labeled");
  }
  ForwardCache cache = net.forward(labeled_eval.features);

  int max_label = *std::max_element(labeled_eval.labels.begin(),
                                    labeled_eval.labels.end());
  int num_lang = std::max(net.num_classes(), max_label + 1);

  MetricsReport report;
  Eigen::MatrixXd scores =
      Eigen::MatrixXd::Zero(cache.probs.rows(), num_lang);
  scores.leftCols(net.num_classes()) = cache.probs;
  if (num_lang > net.num_classes()) {
    report.warnings.push_back(
        "evaluation classes " + std::to_string(net.num_classes()) + ".." +
        std::to_string(max_label) +
        " are absent from the model label space; scored as zero");
  }

  TrialSet trials{scores, labeled_eval.labels};
  report.eer = equal_error_rate(trials);
  report.cavg_min =
      c_avg(trials, p_target, CavgMode::kMinOverThreshold);
  report.cavg_fixed = c_avg(trials, p_target, CavgMode::kFixedThreshold,
                            fixed_threshold);
  report.fixed_threshold = fixed_threshold;
  report.accuracy = accuracy(scores, labeled_eval.labels);
  report.num_trials = trials.num_utterances() * trials.num_languages();
  report.mean_target_entropy = target_entropy(cache.probs).mean;

  report.per_class_accuracy.assign(num_lang, 0.0);
  std::vector<int> count(num_lang, 0);
  for (int i = 0; i < scores.rows(); ++i) {
    int truth = labeled_eval.labels[i];
    int arg = 0;
    for (int j = 1; j < num_lang; ++j) {
      if (scores(i, j) > scores(i, arg)) arg = j;
    }
    ++count[truth];
    if (arg == truth) report.per_class_accuracy[truth] += 1.0;
  }
  for (int c = 0; c < num_lang; ++c) {
    if (count[c] > 0) report.per_class_accuracy[c] /= count[c];
  }
  return report;
}

inline void write_history_csv(const RunHistory& hist,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "epoch,source_ce,align_loss,target_entropy,val_criterion\n";
  for (const EpochRecord& r : hist.records) {
    out << r.epoch << "," << detail::format_double(r.source_ce) << ","
        << detail::format_double(r.align_loss) << ","
        << detail::format_double(r.target_entropy) << ","
        << detail::format_double(r.val_criterion) << "\n";
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

// One frozen mini-batch aligned through the current model: source rows
// sorted by true label, target columns sorted by predicted label, with the
// cost, weight, plan and weighted mass per pair.
struct CouplingExport {
  std::vector<int> source_indices;  // into the source dataset, sorted
  std::vector<int> target_indices;
  std::vector<int> source_labels;
  std::vector<int> target_pred_labels;
  PotAlignResult align;
};

inline CouplingExport coupling_snapshot(const AdaptationNetwork& net,
                                        const Dataset& source,
                                        const Dataset& target,
                                        const TrainConfig& cfg) {
  if (!source.fully_labeled()) {
    throw InputError("coupling_snapshot: source must be labeled");
  }
  Rng rng = Rng(cfg.seed).fork("export/coupling");
  const int bs = std::min({cfg.batch_size, source.num_samples(),
                           target.num_samples()});
  std::vector<int> src(source.num_samples());
  std::iota(src.begin(), src.end(), 0);
  rng.shuffle(src);
  src.resize(bs);
  std::vector<int> tgt(target.num_samples());
  std::iota(tgt.begin(), tgt.end(), 0);
  rng.shuffle(tgt);
  tgt.resize(bs);

  ForwardCache ct_all =
      net.forward(detail::gather_rows(target.features, tgt));
  std::vector<int> tgt_pred(bs);
  for (int i = 0; i < bs; ++i) {
    int arg = 0;
    for (int j = 1; j < net.num_classes(); ++j) {
      if (ct_all.probs(i, j) > ct_all.probs(i, arg)) arg = j;
    }
    tgt_pred[i] = arg;
  }

  std::vector<int> src_order(bs), tgt_order(bs);
  std::iota(src_order.begin(), src_order.end(), 0);
  std::iota(tgt_order.begin(), tgt_order.end(), 0);
  std::stable_sort(src_order.begin(), src_order.end(), [&](int a, int b) {
    return source.labels[src[a]] < source.labels[src[b]];
  });
  std::stable_sort(tgt_order.begin(), tgt_order.end(),
                   [&](int a, int b) { return tgt_pred[a] < tgt_pred[b]; });

  CouplingExport ex;
  for (int i : src_order) {
    ex.source_indices.push_back(src[i]);
    ex.source_labels.push_back(source.labels[src[i]]);
  }
  for (int j : tgt_order) {
    ex.target_indices.push_back(tgt[j]);
    ex.target_pred_labels.push_back(tgt_pred[j]);
  }

  Eigen::MatrixXd xs = detail::gather_rows(source.features,
                                           ex.source_indices);
  Eigen::MatrixXd xt = detail::gather_rows(target.features,
                                           ex.target_indices);
  ForwardCache cs = net.forward(xs);
  ForwardCache ct = net.forward(xt);
  Eigen::MatrixXd ys = one_hot(ex.source_labels, net.num_classes());
  ex.align = pot_align_loss(cs.latent, ys, ct.latent, ct.probs,
                            detail::align_config_for(cfg.method, cfg.align));
  return ex;
}

inline void write_coupling_csv(const CouplingExport& ex,
                               const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  Eigen::MatrixXd mass = ex.align.effective_mass();
  out << "i,j,source_label,target_pred_label,cost,weight,plan,mass\n";
  for (int i = 0; i < mass.rows(); ++i) {
    for (int j = 0; j < mass.cols(); ++j) {
      out << i << "," << j << "," << ex.source_labels[i] << ","
          << ex.target_pred_labels[j] << ","
          << detail::format_double(ex.align.cost.values(i, j)) << ","
          << detail::format_double(ex.align.weights.values(i, j)) << ","
          << detail::format_double(ex.align.coupling.plan(i, j)) << ","
          << detail::format_double(mass(i, j)) << "\n";
    }
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

inline void write_embeddings_csv(const AdaptationNetwork& net,
                                 const Dataset& source,
                                 const Dataset& target,
                                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "id,domain,label";
  for (int j = 0; j < net.latent_dim(); ++j) out << ",z" << j;
  out << "\n";
  auto dump = [&](const Dataset& d) {
    ForwardCache cache = net.forward(d.features);
    for (int i = 0; i < d.num_samples(); ++i) {
      out << i << "," << domain_name(d.domain) << ","
          << (d.labels.empty() ? -1 : d.labels[i]);
      for (int j = 0; j < net.latent_dim(); ++j) {
        out << "," << detail::format_double(cache.latent(i, j));
      }
      out << "\n";
    }
  };
  dump(source);
  dump(target);
  if (!out) throw IoError("write failure on '" + path + "'");
}

// Writes the run artifacts: loss history, one frozen coupling batch, and
// the latent embeddings of both domains for external projection/plotting.
inline void export_artifacts(const RunHistory& hist,
                             const AdaptationNetwork& net,
                             const Dataset& source, const Dataset& target,
                             const TrainConfig& cfg,
                             const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_history_csv(hist, out_dir + "/history.csv");
  write_coupling_csv(coupling_snapshot(net, source, target, cfg),
                     out_dir + "/coupling.csv");
  write_embeddings_csv(net, source, target, out_dir + "/embeddings.csv");
}

// Fraction of the weighted coupling mass that sits in rows whose source
// class is absent from the target class space.
inline double absent_class_mass_fraction(const CouplingExport& ex,
                                         const std::vector<int>& target_classes) {
  Eigen::MatrixXd mass = ex.align.effective_mass();
  double total = mass.sum();
  if (total <= 0.0) return 0.0;
  double absent = 0.0;
  for (int i = 0; i < mass.rows(); ++i) {
    bool present = std::binary_search(target_classes.begin(),
                                      target_classes.end(),
                                      ex.source_labels[i]);
    if (!present) absent += mass.row(i).sum();
  }
  return absent / total;
}

// Fraction of the weighted coupling mass whose source label matches the
// predicted target label (the same-class block mass of the sorted export).
inline double same_class_mass_fraction(const CouplingExport& ex) {
  Eigen::MatrixXd mass = ex.align.effective_mass();
  double total = mass.sum();
  if (total <= 0.0) return 0.0;
  double same = 0.0;
  for (int i = 0; i < mass.rows(); ++i) {
    for (int j = 0; j < mass.cols(); ++j) {
      if (ex.source_labels[i] == ex.target_pred_labels[j]) {
        same += mass(i, j);
      }
    }
  }
  return same / total;
}

struct SweepRow {
  double alpha = 0.0;
  MetricsReport metrics;
};

// Reruns adaptation from the same pretrained snapshot for every alpha in
// the grid. Points are independent and may fan out to worker threads; the
// returned rows follow the grid order.
inline std::vector<SweepRow> alpha_sweep(
    const TrainConfig& base, const std::vector<double>& grid,
    const AdaptationNetwork& pretrained, const Dataset& source,
    const Dataset& target, const Dataset& eval, int max_threads = 1) {
  if (grid.empty()) throw ConfigError("sweep: empty alpha grid");
  std::vector<SweepRow> rows(grid.size());
  const int threads =
      std::max(1, std::min<int>(max_threads, static_cast<int>(grid.size())));

  auto run_point = [&](size_t k) {
    TrainConfig cfg = base;
    cfg.align.alpha = grid[k];
    AdaptationNetwork net = pretrained;
    adapt(net, source, target, cfg);
    rows[k].alpha = grid[k];
    rows[k].metrics = evaluate(net, eval);
  };

  if (threads == 1) {
    for (size_t k = 0; k < grid.size(); ++k) run_point(k);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&]() {
        for (size_t k = next.fetch_add(1); k < grid.size();
             k = next.fetch_add(1)) {
          run_point(k);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "alpha,eer,cavg,accuracy,mean_target_entropy\n";
  for (const SweepRow& r : rows) {
    out << detail::format_double(r.alpha) << ","
        << detail::format_double(r.metrics.eer) << ","
        << detail::format_double(r.metrics.cavg_min) << ","
        << detail::format_double(r.metrics.accuracy) << ","
        << detail::format_double(r.metrics.mean_target_entropy) << "\n";
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace otalign

#endif  // OTALIGN_PIPELINE_HPP_
