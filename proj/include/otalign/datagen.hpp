// otalign/datagen.hpp

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

#ifndef OTALIGN_DATAGEN_HPP_
#define OTALIGN_DATAGEN_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "otalign/dataset.hpp"
#include "otalign/error.hpp"
#include "otalign/rng.hpp"

namespace otalign {

// Synthetic covariate-shift benchmark: Gaussian class blobs in the source
// domain; the target domain reuses a subset of the classes and passes every
// sample through a fixed affine channel (rotation in a 2-plane, scale,
// translation).
struct ShiftConfig {
  int num_classes_source = 10;
  int num_classes_target = 6;
  int dim = 16;
  int samples_per_class = 50;  // per class, per domain
  double class_separation = 6.0;
  double within_class_std = 1.0;
  double shift_rotation_angle = 0.0;  // radians
  double shift_translation_norm = 0.0;
  double shift_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_classes_source < 1) {
      throw ConfigError("num_classes_source: must be >= 1");
    }
    if (num_classes_target < 1 || num_classes_target > num_classes_source) {
      throw ConfigError(
          "num_classes_target: must be in [1, num_classes_source]");
    }
    if (dim < 1) throw ConfigError("dim: must be >= 1");
    if (samples_per_class < 1) {
      throw ConfigError("samples_per_class: must be >= 1");
    }
    if (!(class_separation > 0)) {
      throw ConfigError("class_separation: must be > 0");
    }
    if (!(within_class_std > 0)) {
      throw ConfigError("within_class_std: must be > 0");
    }
    if (!(shift_translation_norm >= 0)) {
      throw ConfigError("shift_translation_norm: must be >= 0");
    }
    if (!(shift_scale > 0)) throw ConfigError("shift_scale: must be > 0");
  }
};

// The affine channel x -> scale * R x + t, with R a rotation by `angle`
// in the plane spanned by the orthonormal pair (u, v).
struct AffineChannel {
  double scale = 1.0;
  double angle = 0.0;
  Eigen::VectorXd u;  // empty when dim < 2: rotation degenerates to identity
  Eigen::VectorXd v;
  Eigen::VectorXd translation;

  Eigen::VectorXd rotate(const Eigen::VectorXd& x, double theta) const {
    if (u.size() == 0) return x;
    double a = u.dot(x);
    double b = v.dot(x);
    double c = std::cos(theta), s = std::sin(theta);
    return x + (a * c - b * s - a) * u + (a * s + b * c - b) * v;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    return scale * rotate(x, angle) + translation;
  }

  Eigen::VectorXd invert(const Eigen::VectorXd& y) const {
    return rotate((y - translation) / scale, -angle);
  }

  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i) {
      out.row(i) = apply(x.row(i).transpose()).transpose();
    }
    return out;
  }

  Eigen::MatrixXd invert_rows(const Eigen::MatrixXd& y) const {
    Eigen::MatrixXd out(y.rows(), y.cols());
    for (int i = 0; i < y.rows(); ++i) {
      out.row(i) = invert(y.row(i).transpose()).transpose();
    }
    return out;
  }
};

struct ShiftBenchmark {
  Dataset source;            // labeled
  Dataset target_unlabeled;  // labels stripped, for adaptation
  Dataset target_eval;       // same samples with labels, for scoring only
  Eigen::MatrixXd target_pre_shift;  // target features before the channel
  AffineChannel channel;
  Eigen::MatrixXd class_means;  // num_classes_source x dim
};

namespace detail {

inline Eigen::VectorXd random_unit_vector(int dim, Rng& rng) {
  Eigen::VectorXd g(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) g(i) = rng.gaussian();
    norm = g.norm();
  } while (norm < 1e-12);
  return g / norm;
}

// Class means on a sphere of radius `separation`, rejected until every pair
// is at least `separation` apart.
inline Eigen::MatrixXd sample_class_means(int num_classes, int dim,
                                          double separation, Rng& rng) {
  Eigen::MatrixXd means(num_classes, dim);
  int placed = 0;
  int attempts = 0;
  const int kMaxAttempts = 100000;
  while (placed < num_classes) {
    if (++attempts > kMaxAttempts) {
      throw ConfigError(
          "class_separation: could not place " +
          std::to_string(num_classes) + " class means at separation " +
          std::to_string(separation) + " in dimension " +
          std::to_string(dim));
    }
    Eigen::VectorXd candidate = separation * random_unit_vector(dim, rng);
    bool ok = true;
    for (int k = 0; k < placed; ++k) {
      if ((means.row(k).transpose() - candidate).norm() < separation) {
        ok = false;
        break;
      }
    }
    if (ok) {
      means.row(placed++) = candidate.transpose();
    }
  }
  return means;
}

}  // namespace detail

inline ShiftBenchmark generate_shift_benchmark(const ShiftConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);

  Eigen::MatrixXd means = detail::sample_class_means(
      cfg.num_classes_source, cfg.dim, cfg.class_separation, rng);

  // The channel parameters are always drawn, even for an identity channel,
  // so that the sample stream below is independent of the shift settings.
  AffineChannel channel;
  channel.scale = cfg.shift_scale;
  channel.angle = cfg.shift_rotation_angle;
  if (cfg.dim >= 2) {
    channel.u = detail::random_unit_vector(cfg.dim, rng);
    Eigen::VectorXd w;
    double norm = 0.0;
    do {
      w = detail::random_unit_vector(cfg.dim, rng);
      w -= channel.u.dot(w) * channel.u;
      norm = w.norm();
    } while (norm < 1e-6);
    channel.v = w / norm;
  }
  Eigen::VectorXd t_dir = detail::random_unit_vector(cfg.dim, rng);
  channel.translation = cfg.shift_translation_norm * t_dir;

  auto draw_class_samples = [&](int class_index, int count,
                                Eigen::MatrixXd& out, int row0) {
    for (int i = 0; i < count; ++i) {
      for (int j = 0; j < cfg.dim; ++j) {
        out(row0 + i, j) =
            means(class_index, j) + cfg.within_class_std * rng.gaussian();
      }
    }
  };

  const int ns = cfg.num_classes_source * cfg.samples_per_class;
  Eigen::MatrixXd xs(ns, cfg.dim);
  std::vector<int> ys(ns);
  for (int k = 0; k < cfg.num_classes_source; ++k) {
    draw_class_samples(k, cfg.samples_per_class, xs,
                       k * cfg.samples_per_class);
    std::fill(ys.begin() + k * cfg.samples_per_class,
              ys.begin() + (k + 1) * cfg.samples_per_class, k);
  }

  const int nt = cfg.num_classes_target * cfg.samples_per_class;
  Eigen::MatrixXd xt_pre(nt, cfg.dim);
  std::vector<int> yt(nt);
  for (int k = 0; k < cfg.num_classes_target; ++k) {
    draw_class_samples(k, cfg.samples_per_class, xt_pre,
                       k * cfg.samples_per_class);
    std::fill(yt.begin() + k * cfg.samples_per_class,
              yt.begin() + (k + 1) * cfg.samples_per_class, k);
  }
  Eigen::MatrixXd xt = channel.apply_rows(xt_pre);

  ShiftBenchmark bench;
  bench.source = Dataset::Labeled(std::move(xs), std::move(ys),
                                  Domain::kSource);
  bench.target_eval = Dataset::Labeled(xt, yt, Domain::kTarget);
  bench.target_unlabeled = bench.target_eval.without_labels();
  bench.target_pre_shift = std::move(xt_pre);
  bench.channel = channel;
  bench.class_means = std::move(means);
  return bench;
}

}  // namespace otalign

#endif  // OTALIGN_DATAGEN_HPP_
