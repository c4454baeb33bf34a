// otalign/nn.hpp

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

#ifndef OTALIGN_NN_HPP_
#define OTALIGN_NN_HPP_

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "otalign/error.hpp"
#include "otalign/rng.hpp"

namespace otalign {

// Guard for length normalization: divide by max(||z||, kNormGuard).
constexpr double kNormGuard = 1e-12;
// Probabilities are clamped below at this floor before every log.
constexpr double kProbFloor = 1e-12;

enum class Activation { kLinear, kRelu };

inline const char* activation_name(Activation a) {
  return a == Activation::kLinear ? "linear" : "relu";
}

inline Activation activation_from_name(const std::string& s) {
  if (s == "linear") return Activation::kLinear;
  if (s == "relu") return Activation::kRelu;
  throw ConfigError("activation: unknown value '" + s + "'");
}

// One fully connected layer; rows of the input are samples, so the layer
// computes X * W + b with W of shape [in_dim x out_dim].
struct DenseLayer {
  Eigen::MatrixXd weights;
  Eigen::RowVectorXd bias;
  Activation activation = Activation::kLinear;

  int in_dim() const { return static_cast<int>(weights.rows()); }
  int out_dim() const { return static_cast<int>(weights.cols()); }

  // Fan-based uniform init in [-sqrt(6/(in+out)), +sqrt(6/(in+out))],
  // zero bias.
  static DenseLayer GlorotInit(int in, int out, Activation act, Rng& rng) {
    if (in < 1 || out < 1) {
      throw ConfigError("dense layer dimensions must be >= 1");
    }
    DenseLayer layer;
    layer.weights.resize(in, out);
    double bound = std::sqrt(6.0 / (in + out));
    for (int i = 0; i < in; ++i) {
      for (int j = 0; j < out; ++j) {
        layer.weights(i, j) = rng.uniform(-bound, bound);
      }
    }
    layer.bias = Eigen::RowVectorXd::Zero(out);
    layer.activation = act;
    return layer;
  }

  Eigen::MatrixXd affine(const Eigen::MatrixXd& x) const {
    return (x * weights).rowwise() + bias;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd out = affine(x);
    if (activation == Activation::kRelu) out = out.cwiseMax(0.0);
    return out;
  }

  void check_finite(const std::string& who) const {
    if (!weights.allFinite() || !bias.allFinite()) {
      throw InputError(who + ": parameters contain non-finite values");
    }
  }
};

// Row-wise softmax with max shift.
inline Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (int i = 0; i < logits.rows(); ++i) {
    double m = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - m).exp().matrix();
    out.row(i) = e / e.sum();
  }
  return out;
}

// Row-wise L2 normalization with the kNormGuard denominator guard.
inline Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& u) {
  Eigen::MatrixXd out(u.rows(), u.cols());
  for (int i = 0; i < u.rows(); ++i) {
    out.row(i) = u.row(i) / std::max(u.row(i).norm(), kNormGuard);
  }
  return out;
}

// Intermediates of one forward pass, kept for the backward pass.
struct ForwardCache {
  Eigen::MatrixXd input;     // n x input_dim
  Eigen::MatrixXd pre_norm;  // n x latent_dim, before length normalization
  Eigen::VectorXd row_norm;  // raw row norms of pre_norm
  Eigen::MatrixXd latent;    // n x latent_dim, length-normalized
  Eigen::MatrixXd probs;     // n x num_classes, softmax outputs
  bool valid = false;

  int num_samples() const { return static_cast<int>(input.rows()); }
};

// Gradients for every trainable parameter of the network.
struct NetworkGrads {
  Eigen::MatrixXd proj_w;
  Eigen::RowVectorXd proj_b;
  Eigen::MatrixXd cls_w;
  Eigen::RowVectorXd cls_b;

  NetworkGrads& operator+=(const NetworkGrads& o) {
    proj_w += o.proj_w;
    proj_b += o.proj_b;
    cls_w += o.cls_w;
    cls_b += o.cls_b;
    return *this;
  }
};

// Projection (linear dense, then L2 length normalization) followed by a
// softmax classifier. The fixed architecture allows exact analytic
// gradients without a general autodiff engine.
class AdaptationNetwork {
 public:
  AdaptationNetwork() = default;

  AdaptationNetwork(int input_dim, int latent_dim, int num_classes,
                    Rng& rng) {
    if (latent_dim < 1 || num_classes < 1) {
      throw ConfigError("latent_dim and num_classes must be >= 1");
    }
    projection_ =
        DenseLayer::GlorotInit(input_dim, latent_dim, Activation::kLinear,
                               rng);
    classifier_ = DenseLayer::GlorotInit(latent_dim, num_classes,
                                         Activation::kLinear, rng);
  }

  int input_dim() const { return projection_.in_dim(); }
  int latent_dim() const { return projection_.out_dim(); }
  int num_classes() const { return classifier_.out_dim(); }

  DenseLayer& projection() { return projection_; }
  DenseLayer& classifier() { return classifier_; }
  const DenseLayer& projection() const { return projection_; }
  const DenseLayer& classifier() const { return classifier_; }

  ForwardCache forward(const Eigen::MatrixXd& x) const {
    if (x.cols() != input_dim()) {
      throw ConfigError("network_forward: input has " +
                        std::to_string(x.cols()) + " columns, expected " +
                        std::to_string(input_dim()));
    }
    if (!x.allFinite()) {
      throw InputError("network_forward: input contains non-finite values");
    }
    ForwardCache c;
    c.input = x;
    c.pre_norm = projection_.affine(x);
    c.row_norm = c.pre_norm.rowwise().norm();
    c.latent.resize(x.rows(), latent_dim());
    for (int i = 0; i < x.rows(); ++i) {
      c.latent.row(i) = c.pre_norm.row(i) / std::max(c.row_norm(i),
                                                     kNormGuard);
    }
    c.probs = softmax_rows(classifier_.affine(c.latent));
    c.valid = true;
    return c;
  }

  // Backpropagates upstream gradients (either may be empty) through the
  // softmax, the classifier, the guarded length normalization and the
  // projection. Gradients from several losses compose by summing upstreams
  // or by summing the returned NetworkGrads.
  NetworkGrads backward(const ForwardCache& cache,
                        const Eigen::MatrixXd& d_latent,
                        const Eigen::MatrixXd& d_probs) const {
    if (!cache.valid) {
      throw UsageError("backward: no cached forward state");
    }
    const int n = cache.num_samples();

    NetworkGrads g;
    g.proj_w = Eigen::MatrixXd::Zero(projection_.in_dim(),
                                     projection_.out_dim());
    g.proj_b = Eigen::RowVectorXd::Zero(projection_.out_dim());
    g.cls_w = Eigen::MatrixXd::Zero(classifier_.in_dim(),
                                    classifier_.out_dim());
    g.cls_b = Eigen::RowVectorXd::Zero(classifier_.out_dim());

    Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(n, latent_dim());
    if (d_latent.size() != 0) {
      if (d_latent.rows() != n || d_latent.cols() != latent_dim()) {
        throw UsageError("backward: latent gradient shape mismatch");
      }
      dz = d_latent;
    }

    if (d_probs.size() != 0) {
      if (d_probs.rows() != n || d_probs.cols() != num_classes()) {
        throw UsageError("backward: probability gradient shape mismatch");
      }
      // Softmax Jacobian: ds = p .* (dp - <dp, p>).
      Eigen::MatrixXd ds(n, num_classes());
      for (int i = 0; i < n; ++i) {
        double inner = d_probs.row(i).dot(cache.probs.row(i));
        ds.row(i) = (cache.probs.row(i).array() *
                     (d_probs.row(i).array() - inner))
                        .matrix();
      }
      g.cls_w = cache.latent.transpose() * ds;
      g.cls_b = ds.colwise().sum();
      dz += ds * classifier_.weights.transpose();
    }

    // Length normalization: z = u / max(||u||, guard). Below the guard the
    // denominator is constant, so the Jacobian is I / guard.
    Eigen::MatrixXd du(n, latent_dim());
    for (int i = 0; i < n; ++i) {
      double r = cache.row_norm(i);
      if (r >= kNormGuard) {
        double inner = cache.pre_norm.row(i).dot(dz.row(i));
        du.row(i) = dz.row(i) / r -
                    cache.pre_norm.row(i) * (inner / (r * r * r));
      } else {
        du.row(i) = dz.row(i) / kNormGuard;
      }
    }
    g.proj_w = cache.input.transpose() * du;
    g.proj_b = du.colwise().sum();
    return g;
  }

  // --- flat parameter view (Adam, checkpoints, gradient checks) ---

  int param_count() const {
    return static_cast<int>(projection_.weights.size() +
                            projection_.bias.size() +
                            classifier_.weights.size() +
                            classifier_.bias.size());
  }

  Eigen::VectorXd params() const {
    Eigen::VectorXd p(param_count());
    int off = 0;
    auto put = [&](const double* data, int size) {
      for (int i = 0; i < size; ++i) p(off++) = data[i];
    };
    put(projection_.weights.data(),
        static_cast<int>(projection_.weights.size()));
    put(projection_.bias.data(), static_cast<int>(projection_.bias.size()));
    put(classifier_.weights.data(),
        static_cast<int>(classifier_.weights.size()));
    put(classifier_.bias.data(),
        static_cast<int>(classifier_.bias.size()));
    return p;
  }

  void set_params(const Eigen::VectorXd& p) {
    if (p.size() != param_count()) {
      throw UsageError("set_params: expected " +
                       std::to_string(param_count()) + " values, got " +
                       std::to_string(p.size()));
    }
    if (!p.allFinite()) {
      throw InputError("set_params: non-finite parameter values");
    }
    int off = 0;
    auto take = [&](double* data, int size) {
      for (int i = 0; i < size; ++i) data[i] = p(off++);
    };
    take(projection_.weights.data(),
         static_cast<int>(projection_.weights.size()));
    take(projection_.bias.data(),
         static_cast<int>(projection_.bias.size()));
    take(classifier_.weights.data(),
         static_cast<int>(classifier_.weights.size()));
    take(classifier_.bias.data(),
         static_cast<int>(classifier_.bias.size()));
  }

  Eigen::VectorXd flatten(const NetworkGrads& g) const {
    Eigen::VectorXd out(param_count());
    int off = 0;
    auto put = [&](const double* data, int size) {
      for (int i = 0; i < size; ++i) out(off++) = data[i];
    };
    put(g.proj_w.data(), static_cast<int>(g.proj_w.size()));
    put(g.proj_b.data(), static_cast<int>(g.proj_b.size()));
    put(g.cls_w.data(), static_cast<int>(g.cls_w.size()));
    put(g.cls_b.data(), static_cast<int>(g.cls_b.size()));
    return out;
  }

 private:
  DenseLayer projection_;
  DenseLayer classifier_;
};

inline Eigen::MatrixXd one_hot(const std::vector<int>& labels,
                               int num_classes) {
  Eigen::MatrixXd y =
      Eigen::MatrixXd::Zero(static_cast<int>(labels.size()), num_classes);
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw InputError("label " + std::to_string(labels[i]) +
                       " outside [0, " + std::to_string(num_classes) + ")");
    }
    y(i, labels[i]) = 1.0;
  }
  return y;
}

namespace detail {

inline void check_one_hot(const Eigen::MatrixXd& y) {
  for (int i = 0; i < y.rows(); ++i) {
    int ones = 0;
    for (int j = 0; j < y.cols(); ++j) {
      if (y(i, j) == 1.0) {
        ++ones;
      } else if (y(i, j) != 0.0) {
        throw InputError("row " + std::to_string(i) + " is not one-hot");
      }
    }
    if (ones != 1) {
      throw InputError("row " + std::to_string(i) + " is not one-hot");
    }
  }
}

inline void check_probability_rows(const Eigen::MatrixXd& p) {
  for (int i = 0; i < p.rows(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < p.cols(); ++j) {
      if (!(p(i, j) >= 0.0) || !std::isfinite(p(i, j))) {
        throw InputError("row " + std::to_string(i) +
                         " is not a probability vector");
      }
      sum += p(i, j);
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw InputError("row " + std::to_string(i) + " sums to " +
                       std::to_string(sum) + ", expected 1");
    }
  }
}

}  // namespace detail

// Mean multiclass cross-entropy over the batch, probabilities clamped at
// kProbFloor before the log.
inline double cross_entropy_loss(const Eigen::MatrixXd& onehot,
                                 const Eigen::MatrixXd& probs) {
  if (onehot.rows() != probs.rows() || onehot.cols() != probs.cols()) {
    throw InputError("cross_entropy_loss: shape mismatch");
  }
  detail::check_one_hot(onehot);
  detail::check_probability_rows(probs);
  double total = 0.0;
  for (int i = 0; i < onehot.rows(); ++i) {
    for (int j = 0; j < onehot.cols(); ++j) {
      if (onehot(i, j) == 1.0) {
        total -= std::log(std::max(probs(i, j), kProbFloor));
      }
    }
  }
  return total / onehot.rows();
}

// d(mean CE)/d(probs); zero where the clamp is active so the gradient
// matches finite differences of the clamped loss.
inline Eigen::MatrixXd cross_entropy_grad(const Eigen::MatrixXd& onehot,
                                          const Eigen::MatrixXd& probs) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(probs.rows(), probs.cols());
  const double inv_n = 1.0 / probs.rows();
  for (int i = 0; i < probs.rows(); ++i) {
    for (int j = 0; j < probs.cols(); ++j) {
      if (onehot(i, j) == 1.0 && probs(i, j) > kProbFloor) {
        g(i, j) = -inv_n / probs(i, j);
      }
    }
  }
  return g;
}

struct EntropyValue {
  double sum;   // total Shannon entropy in nats over the batch
  double mean;  // per-sample mean; this is what training objectives use
};

inline EntropyValue target_entropy(const Eigen::MatrixXd& probs) {
  detail::check_probability_rows(probs);
  double total = 0.0;
  for (int i = 0; i < probs.rows(); ++i) {
    for (int j = 0; j < probs.cols(); ++j) {
      total -= probs(i, j) * std::log(std::max(probs(i, j), kProbFloor));
    }
  }
  return {total, total / probs.rows()};
}

// Gradient of the per-sample mean entropy with respect to probs.
inline Eigen::MatrixXd target_entropy_grad(const Eigen::MatrixXd& probs) {
  Eigen::MatrixXd g(probs.rows(), probs.cols());
  const double inv_n = 1.0 / probs.rows();
  for (int i = 0; i < probs.rows(); ++i) {
    for (int j = 0; j < probs.cols(); ++j) {
      double p = probs(i, j);
      g(i, j) = p > kProbFloor ? -(std::log(p) + 1.0) * inv_n
                               : -std::log(kProbFloor) * inv_n;
    }
  }
  return g;
}

}  // namespace otalign

#endif  // OTALIGN_NN_HPP_
