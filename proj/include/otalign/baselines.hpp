// otalign/baselines.hpp

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

#ifndef OTALIGN_BASELINES_HPP_
#define OTALIGN_BASELINES_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "otalign/error.hpp"
#include "otalign/nn.hpp"
#include "otalign/rng.hpp"

namespace otalign {

// ---------------------------------------------------------------------------
// Maximum mean discrepancy (RBF kernel, biased V-statistic)
// ---------------------------------------------------------------------------

// Median of the pooled pairwise Euclidean distances, the usual bandwidth
// heuristic. Zero distances are skipped; falls back to 1 if all collide.
inline double median_heuristic_bandwidth(const Eigen::MatrixXd& zs,
                                         const Eigen::MatrixXd& zt) {
  Eigen::MatrixXd pooled(zs.rows() + zt.rows(), zs.cols());
  pooled << zs, zt;
  std::vector<double> dists;
  dists.reserve(pooled.rows() * (pooled.rows() - 1) / 2);
  for (int i = 0; i < pooled.rows(); ++i) {
    for (int j = i + 1; j < pooled.rows(); ++j) {
      double d = (pooled.row(i) - pooled.row(j)).norm();
      if (d > 0.0) dists.push_back(d);
    }
  }
  if (dists.empty()) return 1.0;
  size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
  return dists[mid];
}

namespace detail {

inline Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a,
                                  const Eigen::MatrixXd& b, double sigma) {
  Eigen::VectorXd a2 = a.rowwise().squaredNorm();
  Eigen::VectorXd b2 = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * a * b.transpose();
  d2.colwise() += a2;
  d2.rowwise() += b2.transpose();
  return (-d2.cwiseMax(0.0) / (2.0 * sigma * sigma)).array().exp().matrix();
}

}  // namespace detail

// Squared MMD: mean k(s,s') + mean k(t,t') - 2 mean k(s,t).
inline double mmd_loss(const Eigen::MatrixXd& zs, const Eigen::MatrixXd& zt,
                       double bandwidth) {
  if (zs.rows() < 1 || zt.rows() < 1) {
    throw InputError("mmd_loss: empty batch");
  }
  if (!(bandwidth > 0)) {
    throw InputError("mmd_loss: bandwidth must be > 0");
  }
  double kss = detail::rbf_kernel(zs, zs, bandwidth).mean();
  double ktt = detail::rbf_kernel(zt, zt, bandwidth).mean();
  double kst = detail::rbf_kernel(zs, zt, bandwidth).mean();
  return kss + ktt - 2.0 * kst;
}

struct MmdGradients {
  Eigen::MatrixXd d_source;
  Eigen::MatrixXd d_target;
};

// Gradient of mmd_loss with the bandwidth held fixed.
inline MmdGradients mmd_gradients(const Eigen::MatrixXd& zs,
                                  const Eigen::MatrixXd& zt,
                                  double bandwidth) {
  const int n = static_cast<int>(zs.rows());
  const int m = static_cast<int>(zt.rows());
  const double inv_sigma2 = 1.0 / (bandwidth * bandwidth);
  Eigen::MatrixXd kss = detail::rbf_kernel(zs, zs, bandwidth);
  Eigen::MatrixXd ktt = detail::rbf_kernel(zt, zt, bandwidth);
  Eigen::MatrixXd kst = detail::rbf_kernel(zs, zt, bandwidth);

  MmdGradients g;
  g.d_source = Eigen::MatrixXd::Zero(n, zs.cols());
  g.d_target = Eigen::MatrixXd::Zero(m, zt.cols());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // d/dz_i of both symmetric occurrences of k(z_i, z_j).
      g.d_source.row(i) += (-2.0 / (n * n)) * inv_sigma2 * kss(i, j) *
                           (zs.row(i) - zs.row(j));
    }
    for (int j = 0; j < m; ++j) {
      g.d_source.row(i) -= (-2.0 / (n * m)) * inv_sigma2 * kst(i, j) *
                           (zs.row(i) - zt.row(j));
    }
  }
  for (int j = 0; j < m; ++j) {
    for (int j2 = 0; j2 < m; ++j2) {
      g.d_target.row(j) += (-2.0 / (m * m)) * inv_sigma2 * ktt(j, j2) *
                           (zt.row(j) - zt.row(j2));
    }
    for (int i = 0; i < n; ++i) {
      g.d_target.row(j) -= (-2.0 / (n * m)) * inv_sigma2 * kst(i, j) *
                           (zt.row(j) - zs.row(i));
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Central moment discrepancy
// ---------------------------------------------------------------------------

namespace detail {

inline void check_cmd_bounds(const Eigen::MatrixXd& z, double lo, double hi,
                             const char* who) {
  double zmin = z.minCoeff(), zmax = z.maxCoeff();
  if (zmin < lo || zmax > hi) {
    throw InputError(std::string(who) + ": features span [" +
                     std::to_string(zmin) + ", " + std::to_string(zmax) +
                     "] outside the bounds [" + std::to_string(lo) + ", " +
                     std::to_string(hi) + "]");
  }
}

// Elementwise central moments 1..order; row k-1 holds the k-th.
inline Eigen::MatrixXd central_moments(const Eigen::MatrixXd& z,
                                       int order) {
  Eigen::RowVectorXd mu = z.colwise().mean();
  Eigen::MatrixXd centered = z.rowwise() - mu;
  Eigen::MatrixXd moments(order, z.cols());
  moments.row(0) = mu;
  Eigen::MatrixXd power = centered;
  for (int k = 2; k <= order; ++k) {
    power = power.cwiseProduct(centered);
    moments.row(k - 1) = power.colwise().mean();
  }
  return moments;
}

}  // namespace detail

// ||mean_s - mean_t|| / span + sum_{k=2..order} ||c_k(s) - c_k(t)|| / span^k
// with c_k the elementwise k-th central moment. Defaults suit
// length-normalized latents, which lie in [-1, 1].
inline double cmd_loss(const Eigen::MatrixXd& zs, const Eigen::MatrixXd& zt,
                       int order = 5, double bound_min = -1.0,
                       double bound_max = 1.0) {
  if (order < 1) throw InputError("cmd_loss: order must be >= 1");
  if (!(bound_max > bound_min)) {
    throw InputError("cmd_loss: invalid bounds");
  }
  detail::check_cmd_bounds(zs, bound_min, bound_max, "cmd_loss(source)");
  detail::check_cmd_bounds(zt, bound_min, bound_max, "cmd_loss(target)");
  const double span = bound_max - bound_min;
  Eigen::MatrixXd ms = detail::central_moments(zs, order);
  Eigen::MatrixXd mt = detail::central_moments(zt, order);
  double total = (ms.row(0) - mt.row(0)).norm() / span;
  double denom = span;
  for (int k = 2; k <= order; ++k) {
    denom *= span;
    total += (ms.row(k - 1) - mt.row(k - 1)).norm() / denom;
  }
  return total;
}

struct CmdGradients {
  Eigen::MatrixXd d_source;
  Eigen::MatrixXd d_target;
};

inline CmdGradients cmd_gradients(const Eigen::MatrixXd& zs,
                                  const Eigen::MatrixXd& zt, int order = 5,
                                  double bound_min = -1.0,
                                  double bound_max = 1.0) {
  const double span = bound_max - bound_min;
  Eigen::MatrixXd ms = detail::central_moments(zs, order);
  Eigen::MatrixXd mt = detail::central_moments(zt, order);

  CmdGradients g;
  g.d_source = Eigen::MatrixXd::Zero(zs.rows(), zs.cols());
  g.d_target = Eigen::MatrixXd::Zero(zt.rows(), zt.cols());

  // One side at a time; `sign` is +1 for the source (diff = ms - mt).
  auto accumulate = [&](const Eigen::MatrixXd& z, const Eigen::MatrixXd& mom,
                        Eigen::MatrixXd& out, double sign) {
    const int n = static_cast<int>(z.rows());
    Eigen::RowVectorXd mu = mom.row(0);
    Eigen::MatrixXd centered = z.rowwise() - mu;

    // Mean term.
    Eigen::RowVectorXd diff1 = ms.row(0) - mt.row(0);
    double norm1 = diff1.norm();
    if (norm1 > 0.0) {
      out += Eigen::MatrixXd::Ones(n, 1) *
             (sign * diff1 / (norm1 * span * n));
    }

    // Central moment terms: d c_k / d z_i = (k/n) (c^{k-1}_i - mean c^{k-1}).
    Eigen::MatrixXd power = Eigen::MatrixXd::Ones(n, z.cols());
    double denom = span;
    for (int k = 2; k <= order; ++k) {
      power = power.cwiseProduct(centered);  // centered^(k-1)
      denom *= span;
      Eigen::RowVectorXd diffk = ms.row(k - 1) - mt.row(k - 1);
      double normk = diffk.norm();
      if (normk == 0.0) continue;
      Eigen::RowVectorXd mean_power = power.colwise().mean();
      Eigen::RowVectorXd coeff = sign * diffk / (normk * denom);
      out += (static_cast<double>(k) / n) *
             ((power.rowwise() - mean_power) *
              coeff.transpose().asDiagonal());
    }
  };
  accumulate(zs, ms, g.d_source, +1.0);
  accumulate(zt, mt, g.d_target, -1.0);
  return g;
}

// ---------------------------------------------------------------------------
// Two-layer scoring heads (domain discriminator, Wasserstein critic)
// ---------------------------------------------------------------------------

// in -> hidden (relu or linear) -> 1 (linear). The discriminator applies a
// sigmoid on top of the linear score; the critic uses it raw.
class TwoLayerHead {
 public:
  TwoLayerHead() = default;

  TwoLayerHead(int in_dim, int hidden_dim, Activation hidden_act, Rng& rng)
      : hidden_(DenseLayer::GlorotInit(in_dim, hidden_dim, hidden_act, rng)),
        output_(DenseLayer::GlorotInit(hidden_dim, 1, Activation::kLinear,
                                       rng)) {}

  struct Cache {
    Eigen::MatrixXd input;
    Eigen::MatrixXd hidden_pre;
    Eigen::MatrixXd hidden;
    Eigen::VectorXd score;  // linear outputs, one per row
    bool valid = false;
  };

  struct Grads {
    Eigen::MatrixXd w1;
    Eigen::RowVectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::RowVectorXd b2;
  };

  int in_dim() const { return hidden_.in_dim(); }
  int hidden_dim() const { return hidden_.out_dim(); }

  Cache forward(const Eigen::MatrixXd& z) const {
    if (z.cols() != hidden_.in_dim()) {
      throw ConfigError("two-layer head: input dimension mismatch");
    }
    Cache c;
    c.input = z;
    c.hidden_pre = hidden_.affine(z);
    c.hidden = hidden_.activation == Activation::kRelu
                   ? c.hidden_pre.cwiseMax(0.0)
                   : c.hidden_pre;
    c.score = output_.affine(c.hidden).col(0);
    c.valid = true;
    return c;
  }

  // Backpropagates d(loss)/d(score); optionally returns d(loss)/d(input).
  Grads backward(const Cache& c, const Eigen::VectorXd& d_score,
                 Eigen::MatrixXd* d_input = nullptr) const {
    if (!c.valid) throw UsageError("two-layer head: no cached forward");
    Grads g;
    g.w2 = c.hidden.transpose() * d_score;
    g.b2 = Eigen::RowVectorXd::Constant(1, d_score.sum());
    Eigen::MatrixXd dh = d_score * output_.weights.transpose();
    if (hidden_.activation == Activation::kRelu) {
      dh = ((c.hidden_pre.array() > 0.0).cast<double>() * dh.array())
               .matrix();
    }
    g.w1 = c.input.transpose() * dh;
    g.b1 = dh.colwise().sum();
    if (d_input != nullptr) {
      *d_input = dh * hidden_.weights.transpose();
    }
    return g;
  }

  // Gradient of the score with respect to each input row.
  Eigen::MatrixXd input_gradients(const Cache& c) const {
    if (!c.valid) throw UsageError("two-layer head: no cached forward");
    Eigen::MatrixXd mask =
        Eigen::MatrixXd::Ones(c.hidden_pre.rows(), c.hidden_pre.cols());
    if (hidden_.activation == Activation::kRelu) {
      mask = (c.hidden_pre.array() > 0.0).cast<double>().matrix();
    }
    // row i: W1 * (mask_i .* w2)
    Eigen::MatrixXd m = mask * output_.weights.col(0).asDiagonal();
    return m * hidden_.weights.transpose();
  }

  // Gradients of the mean gradient penalty (||grad_z score|| - 1)^2 with
  // respect to the head parameters, treating the relu pattern as constant
  // (its derivative vanishes almost everywhere). Biases do not appear.
  Grads penalty_backward(const Cache& c) const {
    if (!c.valid) throw UsageError("two-layer head: no cached forward");
    const int n = static_cast<int>(c.input.rows());
    Grads g;
    g.w1 = Eigen::MatrixXd::Zero(hidden_.in_dim(), hidden_.out_dim());
    g.b1 = Eigen::RowVectorXd::Zero(hidden_.out_dim());
    g.w2 = Eigen::MatrixXd::Zero(hidden_.out_dim(), 1);
    g.b2 = Eigen::RowVectorXd::Zero(1);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd mask = Eigen::VectorXd::Ones(hidden_.out_dim());
      if (hidden_.activation == Activation::kRelu) {
        mask = (c.hidden_pre.row(i).array() > 0.0)
                   .cast<double>()
                   .matrix()
                   .transpose();
      }
      Eigen::VectorXd m = mask.cwiseProduct(output_.weights.col(0));
      Eigen::VectorXd grad_z = hidden_.weights * m;
      double norm = grad_z.norm();
      if (norm < 1e-12) continue;
      Eigen::VectorXd d_gradz = (2.0 * (norm - 1.0) / (norm * n)) * grad_z;
      g.w1 += d_gradz * m.transpose();
      g.w2 += (hidden_.weights.transpose() * d_gradz).cwiseProduct(mask);
    }
    return g;
  }

  int param_count() const {
    return static_cast<int>(hidden_.weights.size() + hidden_.bias.size() +
                            output_.weights.size() + output_.bias.size());
  }

  Eigen::VectorXd params() const {
    Eigen::VectorXd p(param_count());
    int off = 0;
    auto put = [&](const double* d, int s) {
      for (int i = 0; i < s; ++i) p(off++) = d[i];
    };
    put(hidden_.weights.data(), static_cast<int>(hidden_.weights.size()));
    put(hidden_.bias.data(), static_cast<int>(hidden_.bias.size()));
    put(output_.weights.data(), static_cast<int>(output_.weights.size()));
    put(output_.bias.data(), static_cast<int>(output_.bias.size()));
    return p;
  }

  void set_params(const Eigen::VectorXd& p) {
    if (p.size() != param_count()) {
      throw UsageError("two-layer head: parameter size mismatch");
    }
    int off = 0;
    auto take = [&](double* d, int s) {
      for (int i = 0; i < s; ++i) d[i] = p(off++);
    };
    take(hidden_.weights.data(), static_cast<int>(hidden_.weights.size()));
    take(hidden_.bias.data(), static_cast<int>(hidden_.bias.size()));
    take(output_.weights.data(), static_cast<int>(output_.weights.size()));
    take(output_.bias.data(), static_cast<int>(output_.bias.size()));
  }

  Eigen::VectorXd flatten(const Grads& g) const {
    Eigen::VectorXd out(param_count());
    int off = 0;
    auto put = [&](const double* d, int s) {
      for (int i = 0; i < s; ++i) out(off++) = d[i];
    };
    put(g.w1.data(), static_cast<int>(g.w1.size()));
    put(g.b1.data(), static_cast<int>(g.b1.size()));
    put(g.w2.data(), static_cast<int>(g.w2.size()));
    put(g.b2.data(), static_cast<int>(g.b2.size()));
    return out;
  }

  DenseLayer& hidden() { return hidden_; }
  DenseLayer& output() { return output_; }
  const DenseLayer& hidden() const { return hidden_; }
  const DenseLayer& output() const { return output_; }

 private:
  DenseLayer hidden_;
  DenseLayer output_;
};

// Wasserstein critic: latent -> 64 relu -> 1 linear.
struct Critic {
  TwoLayerHead head;

  Critic() = default;
  Critic(int latent_dim, int hidden_dim, Rng& rng)
      : head(latent_dim, hidden_dim, Activation::kRelu, rng) {}
};

// Domain discriminator: latent -> 64 relu -> 1 linear; sigmoid on top.
struct DomainDiscriminator {
  TwoLayerHead head;

  DomainDiscriminator() = default;
  DomainDiscriminator(int latent_dim, int hidden_dim, Rng& rng)
      : head(latent_dim, hidden_dim, Activation::kRelu, rng) {}

  Eigen::VectorXd probabilities(const TwoLayerHead::Cache& c) const {
    return (1.0 / (1.0 + (-c.score.array()).exp())).matrix();
  }
};

// ---------------------------------------------------------------------------
// DANN domain loss with gradient reversal
// ---------------------------------------------------------------------------

struct DannResult {
  double loss = 0.0;                  // domain binary cross-entropy
  Eigen::VectorXd disc_grads;         // descent direction for the
                                      // discriminator (improves it)
  Eigen::MatrixXd d_source_latent;    // reversed, already scaled by -lambda
  Eigen::MatrixXd d_target_latent;
};

// Binary cross-entropy of the discriminator on domain labels (source = 1,
// target = 0). The discriminator descends on the loss; the feature
// extractor receives the gradient scaled by -lambda (gradient reversal),
// closing the min-max loop.
inline DannResult dann_domain_loss(const DomainDiscriminator& disc,
                                   const Eigen::MatrixXd& zs,
                                   const Eigen::MatrixXd& zt,
                                   double lambda) {
  const int n = static_cast<int>(zs.rows());
  const int m = static_cast<int>(zt.rows());
  Eigen::MatrixXd pooled(n + m, zs.cols());
  pooled << zs, zt;
  TwoLayerHead::Cache cache = disc.head.forward(pooled);
  Eigen::VectorXd p = disc.probabilities(cache);

  DannResult res;
  double total = 0.0;
  for (int i = 0; i < n + m; ++i) {
    double d = i < n ? 1.0 : 0.0;
    total -= d * std::log(std::max(p(i), kProbFloor)) +
             (1.0 - d) * std::log(std::max(1.0 - p(i), kProbFloor));
  }
  res.loss = total / (n + m);

  // d(BCE)/d(score) through the sigmoid is (p - d) / (n + m).
  Eigen::VectorXd d_score(n + m);
  for (int i = 0; i < n + m; ++i) {
    d_score(i) = (p(i) - (i < n ? 1.0 : 0.0)) / (n + m);
  }
  Eigen::MatrixXd d_input;
  TwoLayerHead::Grads g = disc.head.backward(cache, d_score, &d_input);
  res.disc_grads = disc.head.flatten(g);
  res.d_source_latent = -lambda * d_input.topRows(n);
  res.d_target_latent = -lambda * d_input.bottomRows(m);
  return res;
}

// ---------------------------------------------------------------------------
// WDGRL critic losses
// ---------------------------------------------------------------------------

struct WdgrlLosses {
  double wd_estimate = 0.0;
  double grad_penalty = 0.0;
};

struct WdgrlCriticGrads {
  WdgrlLosses losses;
  Eigen::VectorXd ascent_grads;  // gradient of (wd - eta * penalty)
};

struct WdgrlFeatureGrads {
  double wd_estimate = 0.0;
  Eigen::MatrixXd d_source;  // gradient of wd w.r.t. source latents
  Eigen::MatrixXd d_target;
};

namespace detail {

inline Eigen::MatrixXd wdgrl_interpolates(const Eigen::MatrixXd& zs,
                                          const Eigen::MatrixXd& zt,
                                          Rng& rng) {
  const int k = static_cast<int>(std::min(zs.rows(), zt.rows()));
  Eigen::MatrixXd mix(k, zs.cols());
  for (int i = 0; i < k; ++i) {
    double u = rng.uniform();
    mix.row(i) = u * zs.row(i) + (1.0 - u) * zt.row(i);
  }
  return mix;
}

inline double wd_estimate_of(const TwoLayerHead& head,
                             const Eigen::MatrixXd& zs,
                             const Eigen::MatrixXd& zt) {
  return head.forward(zs).score.mean() - head.forward(zt).score.mean();
}

}  // namespace detail

// Empirical Wasserstein estimate mean h(z_s) - mean h(z_t) and the gradient
// penalty mean (||grad h(z~)|| - 1)^2 over random interpolates paired by
// batch index.
inline WdgrlLosses wdgrl_losses(const Critic& critic,
                                const Eigen::MatrixXd& zs,
                                const Eigen::MatrixXd& zt, double eta,
                                Rng& rng) {
  if (!(eta >= 0)) throw InputError("wdgrl_losses: eta must be >= 0");
  WdgrlLosses out;
  out.wd_estimate = detail::wd_estimate_of(critic.head, zs, zt);
  Eigen::MatrixXd mix = detail::wdgrl_interpolates(zs, zt, rng);
  TwoLayerHead::Cache c = critic.head.forward(mix);
  Eigen::MatrixXd grads = critic.head.input_gradients(c);
  double penalty = 0.0;
  for (int i = 0; i < grads.rows(); ++i) {
    double d = grads.row(i).norm() - 1.0;
    penalty += d * d;
  }
  out.grad_penalty = penalty / grads.rows();
  return out;
}

// Gradients for one critic ascent step on (wd - eta * penalty).
inline WdgrlCriticGrads wdgrl_critic_grads(const Critic& critic,
                                           const Eigen::MatrixXd& zs,
                                           const Eigen::MatrixXd& zt,
                                           double eta, Rng& rng) {
  const int n = static_cast<int>(zs.rows());
  const int m = static_cast<int>(zt.rows());
  TwoLayerHead::Cache cs = critic.head.forward(zs);
  TwoLayerHead::Cache ct = critic.head.forward(zt);

  WdgrlCriticGrads out;
  out.losses.wd_estimate = cs.score.mean() - ct.score.mean();

  TwoLayerHead::Grads gs = critic.head.backward(
      cs, Eigen::VectorXd::Constant(n, 1.0 / n));
  TwoLayerHead::Grads gt = critic.head.backward(
      ct, Eigen::VectorXd::Constant(m, -1.0 / m));
  Eigen::VectorXd wd_grad =
      critic.head.flatten(gs) + critic.head.flatten(gt);

  Eigen::MatrixXd mix = detail::wdgrl_interpolates(zs, zt, rng);
  TwoLayerHead::Cache cm = critic.head.forward(mix);
  Eigen::MatrixXd grads = critic.head.input_gradients(cm);
  double penalty = 0.0;
  for (int i = 0; i < grads.rows(); ++i) {
    double d = grads.row(i).norm() - 1.0;
    penalty += d * d;
  }
  out.losses.grad_penalty = penalty / grads.rows();
  Eigen::VectorXd pen_grad =
      critic.head.flatten(critic.head.penalty_backward(cm));

  out.ascent_grads = wd_grad - eta * pen_grad;
  return out;
}

// Gradient of the Wasserstein estimate with respect to the latents; the
// feature extractor descends on it.
inline WdgrlFeatureGrads wdgrl_feature_grads(const Critic& critic,
                                             const Eigen::MatrixXd& zs,
                                             const Eigen::MatrixXd& zt) {
  const int n = static_cast<int>(zs.rows());
  const int m = static_cast<int>(zt.rows());
  TwoLayerHead::Cache cs = critic.head.forward(zs);
  TwoLayerHead::Cache ct = critic.head.forward(zt);
  WdgrlFeatureGrads out;
  out.wd_estimate = cs.score.mean() - ct.score.mean();
  out.d_source = critic.head.input_gradients(cs) / n;
  out.d_target = -critic.head.input_gradients(ct) / m;
  return out;
}

}  // namespace otalign

#endif  // OTALIGN_BASELINES_HPP_
