// otalign/metrics.hpp

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

#ifndef OTALIGN_METRICS_HPP_
#define OTALIGN_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "otalign/error.hpp"

namespace otalign {

// Detection scores for a set of utterances: one row per utterance, one
// column per language, higher = more target-like. Each utterance yields one
// target trial (its true language) and num_languages - 1 non-target trials.
struct TrialSet {
  Eigen::MatrixXd scores;
  std::vector<int> true_labels;

  int num_utterances() const { return static_cast<int>(scores.rows()); }
  int num_languages() const { return static_cast<int>(scores.cols()); }

  void validate() const {
    if (scores.rows() < 1 || scores.cols() < 1) {
      throw InputError("trial set is empty");
    }
    if (static_cast<int>(true_labels.size()) != scores.rows()) {
      throw InputError("trial set label count does not match score rows");
    }
    if (!scores.allFinite()) {
      throw InputError("trial scores contain non-finite values");
    }
    for (int l : true_labels) {
      if (l < 0 || l >= num_languages()) {
        throw InputError("trial label " + std::to_string(l) +
                         " outside the score columns");
      }
    }
  }

  void split_scores(std::vector<double>* target,
                    std::vector<double>* nontarget) const {
    validate();
    for (int i = 0; i < num_utterances(); ++i) {
      for (int j = 0; j < num_languages(); ++j) {
        (j == true_labels[i] ? target : nontarget)
            ->push_back(scores(i, j));
      }
    }
  }
};

// Pooled equal error rate. Thresholds sweep the sorted unique scores with
//   FAR(t) = #{nontarget > t} / N,   FRR(t) = #{target < t} / P,
// and the crossing FAR = FRR is located exactly when a sweep point attains
// it, otherwise by linear interpolation between the two adjacent sweep
// points where FAR - FRR changes sign.
inline double equal_error_rate(const std::vector<double>& target_scores,
                               const std::vector<double>& nontarget_scores) {
  if (target_scores.empty() || nontarget_scores.empty()) {
    throw InputError("equal_error_rate: need at least one target and one "
                     "non-target trial");
  }
  std::vector<double> thresholds;
  thresholds.reserve(target_scores.size() + nontarget_scores.size());
  thresholds.insert(thresholds.end(), target_scores.begin(),
                    target_scores.end());
  thresholds.insert(thresholds.end(), nontarget_scores.begin(),
                    nontarget_scores.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  std::vector<double> tgt = target_scores;
  std::vector<double> non = nontarget_scores;
  std::sort(tgt.begin(), tgt.end());
  std::sort(non.begin(), non.end());
  const double np = static_cast<double>(tgt.size());
  const double nn = static_cast<double>(non.size());

  auto far_at = [&](double t) {
    // fraction of non-target scores strictly above t
    return (non.end() - std::upper_bound(non.begin(), non.end(), t)) / nn;
  };
  auto frr_at = [&](double t) {
    // fraction of target scores strictly below t
    return (std::lower_bound(tgt.begin(), tgt.end(), t) - tgt.begin()) / np;
  };

  double prev_far = far_at(thresholds[0]);
  double prev_frr = frr_at(thresholds[0]);
  if (prev_far <= prev_frr) {
    // FAR - FRR starts nonpositive only when they already agree (FRR at the
    // lowest score is 0), so this is an exact crossing.
    return 0.5 * (prev_far + prev_frr);
  }
  for (size_t k = 1; k < thresholds.size(); ++k) {
    double far = far_at(thresholds[k]);
    double frr = frr_at(thresholds[k]);
    if (far == frr) return far;
    if (far < frr) {
      // Sign change between k-1 and k: interpolate both rates linearly.
      double d0 = prev_far - prev_frr;
      double d1 = far - frr;
      double t = d0 / (d0 - d1);
      return prev_far + t * (far - prev_far);
    }
    prev_far = far;
    prev_frr = frr;
  }
  // FAR stayed above FRR through the top threshold; at any point above the
  // maximal score FAR = 0 <= FRR, so interpolate toward (0, 1).
  double d0 = prev_far - prev_frr;
  double d1 = 0.0 - 1.0;
  double t = d0 / (d0 - d1);
  return prev_far + t * (0.0 - prev_far);
}

inline double equal_error_rate(const TrialSet& trials) {
  std::vector<double> target, nontarget;
  trials.split_scores(&target, &nontarget);
  return equal_error_rate(target, nontarget);
}

enum class CavgMode { kMinOverThreshold, kFixedThreshold };

namespace detail {

// Cavg at one global threshold; trials are accepted when score > threshold.
inline double cavg_at_threshold(const TrialSet& trials, double p_target,
                                double threshold) {
  const int num_lang = trials.num_languages();
  std::vector<int> count(num_lang, 0);
  std::vector<int> misses(num_lang, 0);
  // fa(lt, ln): utterances of ln falsely accepted as lt
  Eigen::MatrixXd fa = Eigen::MatrixXd::Zero(num_lang, num_lang);
  for (int i = 0; i < trials.num_utterances(); ++i) {
    int truth = trials.true_labels[i];
    ++count[truth];
    if (!(trials.scores(i, truth) > threshold)) ++misses[truth];
    for (int lt = 0; lt < num_lang; ++lt) {
      if (lt != truth && trials.scores(i, lt) > threshold) {
        fa(lt, truth) += 1.0;
      }
    }
  }
  double total = 0.0;
  for (int lt = 0; lt < num_lang; ++lt) {
    double p_miss =
        count[lt] > 0 ? static_cast<double>(misses[lt]) / count[lt] : 0.0;
    double fa_sum = 0.0;
    for (int ln = 0; ln < num_lang; ++ln) {
      if (ln == lt || count[ln] == 0) continue;
      fa_sum += fa(lt, ln) / count[ln];
    }
    total += p_target * p_miss +
             (1.0 - p_target) / (num_lang - 1) * fa_sum;
  }
  return total / num_lang;
}

}  // namespace detail

// Average detection cost over target/non-target language pairs with unit
// miss and false-alarm costs. The default mode sweeps one global threshold
// over the observed scores and returns the minimum.
inline double c_avg(const TrialSet& trials, double p_target = 0.5,
                    CavgMode mode = CavgMode::kMinOverThreshold,
                    double fixed_threshold = 0.0) {
  trials.validate();
  if (trials.num_languages() < 2) {
    throw InputError("c_avg: need at least two languages");
  }
  if (!(p_target > 0.0 && p_target < 1.0)) {
    throw InputError("c_avg: p_target must be inside (0, 1)");
  }
  if (mode == CavgMode::kFixedThreshold) {
    return detail::cavg_at_threshold(trials, p_target, fixed_threshold);
  }
  std::set<double> candidates(trials.scores.data(),
                              trials.scores.data() + trials.scores.size());
  double best = std::numeric_limits<double>::infinity();
  // Just below the minimum accepts everything; each observed score covers
  // the decision boundary right above it (including reject-everything at
  // the maximum).
  best = std::min(best, detail::cavg_at_threshold(
                            trials, p_target, *candidates.begin() - 1.0));
  for (double t : candidates) {
    best = std::min(best, detail::cavg_at_threshold(trials, p_target, t));
  }
  return best;
}

// Fraction of rows whose argmax matches the label; ties resolve to the
// lowest class index.
inline double accuracy(const Eigen::MatrixXd& probs,
                       const std::vector<int>& labels) {
  if (probs.rows() < 1) throw InputError("accuracy: empty input");
  if (static_cast<int>(labels.size()) != probs.rows()) {
    throw InputError("accuracy: label count mismatch");
  }
  int correct = 0;
  for (int i = 0; i < probs.rows(); ++i) {
    int arg = 0;
    for (int j = 1; j < probs.cols(); ++j) {
      if (probs(i, j) > probs(i, arg)) arg = j;
    }
    if (arg == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / probs.rows();
}

struct DetPoint {
  double threshold;
  double far;
  double frr;
};

// Operating points (threshold, FAR, FRR) over the unique pooled scores,
// with the same strict-inequality convention as equal_error_rate.
inline std::vector<DetPoint> det_curve(const TrialSet& trials) {
  std::vector<double> target, nontarget;
  trials.split_scores(&target, &nontarget);
  std::vector<double> thresholds = target;
  thresholds.insert(thresholds.end(), nontarget.begin(), nontarget.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  std::sort(target.begin(), target.end());
  std::sort(nontarget.begin(), nontarget.end());
  std::vector<DetPoint> points;
  points.reserve(thresholds.size());
  for (double t : thresholds) {
    double far = static_cast<double>(
                     nontarget.end() - std::upper_bound(nontarget.begin(),
                                                        nontarget.end(), t)) /
                 nontarget.size();
    double frr = static_cast<double>(
                     std::lower_bound(target.begin(), target.end(), t) -
                     target.begin()) /
                 target.size();
    points.push_back({t, far, frr});
  }
  return points;
}

}  // namespace otalign

#endif  // OTALIGN_METRICS_HPP_
