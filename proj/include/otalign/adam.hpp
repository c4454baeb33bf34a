// otalign/adam.hpp

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

#ifndef OTALIGN_ADAM_HPP_
#define OTALIGN_ADAM_HPP_

#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "otalign/error.hpp"

namespace otalign {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const {
    if (!(learning_rate > 0)) throw ConfigError("optimizer.learning_rate: must be > 0");
    if (!(beta1 > 0 && beta1 < 1)) throw ConfigError("optimizer.beta1: must be in (0,1)");
    if (!(beta2 > 0 && beta2 < 1)) throw ConfigError("optimizer.beta2: must be in (0,1)");
    if (!(epsilon > 0)) throw ConfigError("optimizer.epsilon: must be > 0");
  }
};

// Bias-corrected Adam over a flat parameter vector.
class AdamState {
 public:
  AdamState() = default;

  explicit AdamState(int param_count, AdamConfig cfg = {})
      : cfg_(cfg),
        first_moment_(Eigen::VectorXd::Zero(param_count)),
        second_moment_(Eigen::VectorXd::Zero(param_count)) {
    cfg_.validate();
  }

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grads) {
    if (params.size() != first_moment_.size() ||
        grads.size() != first_moment_.size()) {
      throw UsageError("adam_step: parameter/gradient size mismatch (have " +
                       std::to_string(first_moment_.size()) + ", got " +
                       std::to_string(params.size()) + "/" +
                       std::to_string(grads.size()) + ")");
    }
    ++step_count_;
    first_moment_ = cfg_.beta1 * first_moment_ + (1.0 - cfg_.beta1) * grads;
    second_moment_ = cfg_.beta2 * second_moment_.array().matrix() +
                     (1.0 - cfg_.beta2) * grads.array().square().matrix();
    const double bc1 = 1.0 - std::pow(cfg_.beta1, step_count_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, step_count_);
    params.array() -=
        cfg_.learning_rate * (first_moment_.array() / bc1) /
        ((second_moment_.array() / bc2).sqrt() + cfg_.epsilon);
  }

  std::int64_t step_count() const { return step_count_; }
  const Eigen::VectorXd& first_moment() const { return first_moment_; }
  const Eigen::VectorXd& second_moment() const { return second_moment_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  Eigen::VectorXd first_moment_;
  Eigen::VectorXd second_moment_;
  std::int64_t step_count_ = 0;
};

}  // namespace otalign

#endif  // OTALIGN_ADAM_HPP_
