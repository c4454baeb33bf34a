// otalign/grad_check.hpp

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

#ifndef OTALIGN_GRAD_CHECK_HPP_
#define OTALIGN_GRAD_CHECK_HPP_

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace otalign {

struct GradCheckResult {
  double max_rel_error = 0.0;
  int worst_index = -1;
};

// Central finite differences against an analytic gradient. `loss_fn` maps a
// flat parameter vector to a scalar loss and must be deterministic;
// `analytic` is the gradient at `at`. The relative error per parameter is
// |a - n| / max(|a|, |n|, 1e-8).
template <class LossFn>
GradCheckResult gradient_check(LossFn&& loss_fn,
                               const Eigen::VectorXd& analytic,
                               const Eigen::VectorXd& at,
                               double h = 1e-5) {
  GradCheckResult res;
  Eigen::VectorXd p = at;
  for (int i = 0; i < p.size(); ++i) {
    const double saved = p(i);
    p(i) = saved + h;
    const double up = loss_fn(p);
    p(i) = saved - h;
    const double down = loss_fn(p);
    p(i) = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom =
        std::max({std::abs(analytic(i)), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic(i) - numeric) / denom;
    if (rel > res.max_rel_error) {
      res.max_rel_error = rel;
      res.worst_index = i;
    }
  }
  return res;
}

}  // namespace otalign

#endif  // OTALIGN_GRAD_CHECK_HPP_
