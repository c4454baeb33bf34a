// otalign/ot.hpp

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

#ifndef OTALIGN_OT_HPP_
#define OTALIGN_OT_HPP_

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "otalign/dataset.hpp"
#include "otalign/error.hpp"
#include "otalign/nn.hpp"

namespace otalign {

// Pairwise ground costs between a source batch (rows) and a target batch
// (columns). Entries are nonnegative and finite.
struct CostMatrix {
  Eigen::MatrixXd values;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

// Per-pair coupling weights in [0, 1].
struct WeightMatrix {
  Eigen::MatrixXd values;
};

// Nonnegative transport plan with prescribed row/column marginals.
struct Coupling {
  Eigen::MatrixXd plan;
  Eigen::VectorXd row_marginal;
  Eigen::VectorXd col_marginal;

  double row_violation() const {
    return (plan.rowwise().sum() - row_marginal).cwiseAbs().maxCoeff();
  }
  double col_violation() const {
    return (plan.colwise().sum().transpose() - col_marginal)
        .cwiseAbs()
        .maxCoeff();
  }
};

enum class WeightMode { kSoft, kHard, kNone };
enum class LossEval { kWeighted, kUnweighted };

inline const char* weight_mode_name(WeightMode m) {
  switch (m) {
    case WeightMode::kSoft: return "soft";
    case WeightMode::kHard: return "hard";
    default: return "none";
  }
}

inline WeightMode weight_mode_from_name(const std::string& s) {
  if (s == "soft") return WeightMode::kSoft;
  if (s == "hard") return WeightMode::kHard;
  if (s == "none") return WeightMode::kNone;
  throw ConfigError("align.weight_mode: unknown value '" + s + "'");
}

struct AlignConfig {
  double alpha = 0.001;  // label-cost weight in the joint ground cost
  double beta = 5.0;     // sigmoid scale of the soft coupling weights
  double tau = 1.0;      // transport-cost threshold, applied to raw costs
  // Entropic regularization, relative to the mean effective cost of the
  // batch being aligned (the solver itself takes an absolute value).
  double epsilon = 0.05;
  int max_iter = 10000;
  double stop_tol = 1e-9;
  WeightMode weight_mode = WeightMode::kSoft;
  LossEval loss_eval = LossEval::kWeighted;

  void validate() const {
    if (!(alpha >= 0)) throw ConfigError("align.alpha: must be >= 0");
    if (!(beta > 0)) throw ConfigError("align.beta: must be > 0");
    if (!std::isfinite(tau)) throw ConfigError("align.tau: must be finite");
    if (!(epsilon > 0)) throw ConfigError("align.epsilon: must be > 0");
    if (max_iter < 1) throw ConfigError("align.max_iter: must be >= 1");
    if (!(stop_tol > 0)) throw ConfigError("align.stop_tol: must be > 0");
  }
};

// Joint ground cost: squared Euclidean distance between latent vectors plus
// alpha times the squared Euclidean distance between the source one-hot
// label and the predicted target label distribution.
inline CostMatrix joint_cost_matrix(const Eigen::MatrixXd& source_latent,
                                    const Eigen::MatrixXd& source_onehot,
                                    const Eigen::MatrixXd& target_latent,
                                    const Eigen::MatrixXd& target_probs,
                                    double alpha) {
  if (source_latent.cols() != target_latent.cols()) {
    throw InputError("joint_cost_matrix: latent dimension mismatch");
  }
  if (source_onehot.cols() != target_probs.cols()) {
    throw InputError("joint_cost_matrix: label dimension mismatch");
  }
  if (source_latent.rows() != source_onehot.rows() ||
      target_latent.rows() != target_probs.rows()) {
    throw InputError("joint_cost_matrix: batch size mismatch");
  }
  if (!(alpha >= 0)) throw InputError("joint_cost_matrix: alpha must be >= 0");
  detail::check_probability_rows(target_probs);

  auto squared_distances = [](const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
    Eigen::VectorXd a2 = a.rowwise().squaredNorm();
    Eigen::VectorXd b2 = b.rowwise().squaredNorm();
    Eigen::MatrixXd d = -2.0 * a * b.transpose();
    d.colwise() += a2;
    d.rowwise() += b2.transpose();
    return d.cwiseMax(0.0).eval();  // clip tiny negative round-off
  };

  CostMatrix c;
  c.values = squared_distances(source_latent, target_latent);
  if (alpha != 0.0) {
    c.values += alpha * squared_distances(source_onehot, target_probs);
  }
  return c;
}

// Soft coupling weights sigmoid(-beta * (C - tau)).
inline WeightMatrix soft_coupling_weights(const CostMatrix& cost,
                                          double beta, double tau) {
  if (!(beta > 0)) throw InputError("soft_coupling_weights: beta must be > 0");
  WeightMatrix w;
  w.values = (1.0 / (1.0 + (beta * (cost.values.array() - tau)).exp()))
                 .matrix();
  return w;
}

// Hard admissibility: 1 where C <= tau, else 0.
inline WeightMatrix hard_coupling_weights(const CostMatrix& cost,
                                          double tau) {
  WeightMatrix w;
  w.values = (cost.values.array() <= tau).cast<double>().matrix();
  return w;
}

struct SinkhornOptions {
  double epsilon = 0.05;  // absolute entropic regularization
  int max_iter = 10000;
  double stop_tol = 1e-9;
};

struct SinkhornResult {
  Coupling coupling;
  bool converged = false;
  int iterations = 0;
  double marginal_violation = 0.0;  // achieved max violation
  double transport_cost = 0.0;      // <C, plan> with the cost given in
};

namespace detail {

// log(sum_j exp(v_j)) with max shift; safe against -inf entries.
inline double log_sum_exp(const Eigen::ArrayXd& v) {
  double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf
  return m + std::log((v - m).exp().sum());
}

}  // namespace detail

// Entropic optimal transport in the log domain. Alternates the dual
// potential updates
//   f_i = eps*log a_i - eps*LSE_j((g_j - C_ij)/eps)
//   g_j = eps*log b_j - eps*LSE_i((f_i - C_ij)/eps)
// until the worst marginal violation of the implied plan is below
// stop_tol or max_iter is reached. Non-convergence is reported in the
// result rather than thrown.
inline SinkhornResult sinkhorn(const CostMatrix& cost,
                               const Eigen::VectorXd& a,
                               const Eigen::VectorXd& b,
                               const SinkhornOptions& opt) {
  const int n = cost.rows();
  const int m = cost.cols();
  if (n < 1 || m < 1) throw InputError("sinkhorn: empty cost matrix");
  if (a.size() != n || b.size() != m) {
    throw InputError("sinkhorn: marginal sizes do not match the cost");
  }
  if (!cost.values.allFinite() || cost.values.minCoeff() < 0.0) {
    throw InputError("sinkhorn: cost must be finite and nonnegative");
  }
  if (a.minCoeff() <= 0.0 || b.minCoeff() <= 0.0) {
    throw InputError("sinkhorn: marginals must be strictly positive");
  }
  if (std::abs(a.sum() - 1.0) > 1e-8 || std::abs(b.sum() - 1.0) > 1e-8) {
    throw InputError("sinkhorn: marginals must each sum to 1");
  }
  if (!(opt.epsilon > 0)) throw InputError("sinkhorn: epsilon must be > 0");

  const double eps = opt.epsilon;
  const Eigen::ArrayXd log_a = a.array().log();
  const Eigen::ArrayXd log_b = b.array().log();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);

  auto plan_from_potentials = [&]() {
    Eigen::MatrixXd log_plan =
        ((-cost.values).colwise() + f).rowwise() + g.transpose();
    return (log_plan / eps).array().exp().matrix().eval();
  };

  SinkhornResult res;
  Eigen::MatrixXd plan;
  double violation = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < opt.max_iter) {
    ++it;
    // Row update: rows of the implied plan match a exactly afterwards.
    for (int i = 0; i < n; ++i) {
      Eigen::ArrayXd v =
          (g.array() - cost.values.row(i).transpose().array()) / eps;
      f(i) = eps * (log_a(i) - detail::log_sum_exp(v));
    }
    // Column update: columns match b exactly afterwards.
    for (int j = 0; j < m; ++j) {
      Eigen::ArrayXd v = (f.array() - cost.values.col(j).array()) / eps;
      g(j) = eps * (log_b(j) - detail::log_sum_exp(v));
    }
    plan = plan_from_potentials();
    double row_err = (plan.rowwise().sum() - a).cwiseAbs().maxCoeff();
    double col_err =
        (plan.colwise().sum().transpose() - b).cwiseAbs().maxCoeff();
    violation = std::max(row_err, col_err);
    if (violation <= opt.stop_tol) break;
  }

  res.coupling.plan = std::move(plan);
  res.coupling.row_marginal = a;
  res.coupling.col_marginal = b;
  res.converged = violation <= opt.stop_tol;
  res.iterations = it;
  res.marginal_violation = violation;
  res.transport_cost =
      (cost.values.array() * res.coupling.plan.array()).sum();
  return res;
}

// Exact optimal transport value for a square cost with uniform marginals
// 1/n: the optimum of the linear program is attained at a permutation
// matrix scaled by 1/n, so full enumeration is exact. Guarded at n <= 8.
inline double exact_ot_oracle(const CostMatrix& cost) {
  const int n = cost.rows();
  if (n != cost.cols()) {
    throw InputError("exact_ot_oracle: cost matrix must be square");
  }
  if (n > 8) {
    throw InputError("exact_ot_oracle: refusing n > 8 (factorial cost)");
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost.values(i, perm[i]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / n;
}

// Result of one weighted partial-transport alignment between two batches.
struct PotAlignResult {
  double loss = 0.0;
  Coupling coupling;
  WeightMatrix weights;
  CostMatrix cost;
  bool converged = false;
  double epsilon_abs = 0.0;

  // Weighted transported mass, the quantity inspected for class structure:
  // in soft/hard modes high-cost pairs carry mass but almost no weight, so
  // they drop out of both the loss and this matrix.
  Eigen::MatrixXd effective_mass() const {
    return (coupling.plan.array() * weights.values.array()).matrix();
  }
};

// Computes the joint cost, the coupling weights for the configured mode,
// solves the entropic transport problem on the effective cost C .* W with
// uniform marginals, and evaluates the alignment loss. The weights and the
// plan are constants with respect to the network: gradients flow only
// through the cost entries (see pot_align_gradients).
inline PotAlignResult pot_align_loss(const Eigen::MatrixXd& source_latent,
                                     const Eigen::MatrixXd& source_onehot,
                                     const Eigen::MatrixXd& target_latent,
                                     const Eigen::MatrixXd& target_probs,
                                     const AlignConfig& cfg) {
  cfg.validate();
  PotAlignResult res;
  res.cost = joint_cost_matrix(source_latent, source_onehot, target_latent,
                               target_probs, cfg.alpha);
  const int n = res.cost.rows();
  const int m = res.cost.cols();

  switch (cfg.weight_mode) {
    case WeightMode::kSoft:
      res.weights = soft_coupling_weights(res.cost, cfg.beta, cfg.tau);
      break;
    case WeightMode::kHard:
      res.weights = hard_coupling_weights(res.cost, cfg.tau);
      if (res.weights.values.maxCoeff() <= 0.0) {
        throw DegenerateAlignmentError(
            "hard coupling weights are all zero: no admissible pair below "
            "tau = " + std::to_string(cfg.tau));
      }
      break;
    case WeightMode::kNone:
      res.weights.values = Eigen::MatrixXd::Ones(n, m);
      break;
  }

  CostMatrix effective;
  effective.values =
      (res.cost.values.array() * res.weights.values.array()).matrix();

  const double mean_cost = effective.values.mean();
  res.epsilon_abs = cfg.epsilon * (mean_cost > 0.0 ? mean_cost : 1.0);

  Eigen::VectorXd a = Eigen::VectorXd::Constant(n, 1.0 / n);
  Eigen::VectorXd b = Eigen::VectorXd::Constant(m, 1.0 / m);
  SinkhornResult sk = sinkhorn(effective, a, b,
                               {res.epsilon_abs, cfg.max_iter, cfg.stop_tol});
  res.coupling = std::move(sk.coupling);
  res.converged = sk.converged;
  res.loss = cfg.loss_eval == LossEval::kWeighted
                 ? sk.transport_cost
                 : (res.cost.values.array() * res.coupling.plan.array()).sum();
  return res;
}

// Gradients of the alignment loss with respect to both latent batches and
// the predicted target label distribution, holding the plan and the weights
// fixed. M is the plan in unweighted evaluation and plan .* weights in
// weighted evaluation, matching d(loss)/d(C).
struct PotGradients {
  Eigen::MatrixXd d_source_latent;
  Eigen::MatrixXd d_target_latent;
  Eigen::MatrixXd d_target_probs;
};

inline PotGradients pot_align_gradients(
    const Eigen::MatrixXd& source_latent,
    const Eigen::MatrixXd& source_onehot,
    const Eigen::MatrixXd& target_latent,
    const Eigen::MatrixXd& target_probs, const PotAlignResult& res,
    const AlignConfig& cfg) {
  const Eigen::MatrixXd mass = cfg.loss_eval == LossEval::kWeighted
                                   ? res.effective_mass()
                                   : res.coupling.plan;
  const Eigen::VectorXd row_mass = mass.rowwise().sum();
  const Eigen::VectorXd col_mass = mass.colwise().sum().transpose();

  PotGradients g;
  g.d_source_latent =
      2.0 * (row_mass.asDiagonal() * source_latent - mass * target_latent);
  g.d_target_latent =
      2.0 * (col_mass.asDiagonal() * target_latent -
             mass.transpose() * source_latent);
  if (cfg.alpha != 0.0) {
    g.d_target_probs =
        2.0 * cfg.alpha *
        (col_mass.asDiagonal() * target_probs -
         mass.transpose() * source_onehot);
  } else {
    g.d_target_probs =
        Eigen::MatrixXd::Zero(target_probs.rows(), target_probs.cols());
  }
  return g;
}

// Writes a matrix as (row index, column index, value) triplets.
inline void write_matrix_csv(const Eigen::MatrixXd& m,
                             const std::string& path,
                             const std::string& value_name = "value") {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "i,j," << value_name << "\n";
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      out << i << "," << j << "," << detail::format_double(m(i, j)) << "\n";
    }
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace otalign

#endif  // OTALIGN_OT_HPP_
