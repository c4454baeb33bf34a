// tests/metrics_test.cpp

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

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "otalign/metrics.hpp"
#include "otalign/rng.hpp"

using namespace otalign;

namespace {

// O(n^2) reference sweep written independently of the library path: count
// rates at every unique score, locate the FAR = FRR crossing, interpolate
// between the adjacent sweep points when no threshold attains it.
double eer_reference(const std::vector<double>& target,
                     const std::vector<double>& nontarget) {
  std::set<double> grid(target.begin(), target.end());
  grid.insert(nontarget.begin(), nontarget.end());
  double prev_far = 0.0, prev_frr = 0.0;
  bool have_prev = false;
  for (double t : grid) {
    int fa = 0, miss = 0;
    for (double s : nontarget) {
      if (s > t) ++fa;
    }
    for (double s : target) {
      if (s < t) ++miss;
    }
    double far = static_cast<double>(fa) / nontarget.size();
    double frr = static_cast<double>(miss) / target.size();
    if (far == frr) return far;
    if (far < frr) {
      if (!have_prev) return 0.5 * (far + frr);
      double d0 = prev_far - prev_frr;
      double d1 = far - frr;
      double u = d0 / (d0 - d1);
      return prev_far + u * (far - prev_far);
    }
    prev_far = far;
    prev_frr = frr;
    have_prev = true;
  }
  // above the top score: FAR 0, FRR 1
  double d0 = prev_far - prev_frr;
  double u = d0 / (d0 + 1.0);
  return prev_far * (1.0 - u);
}

// Reference detection cost sweeping every achievable threshold directly.
double cavg_reference_min(const Eigen::MatrixXd& scores,
                          const std::vector<int>& labels, double p_target) {
  std::set<double> grid(scores.data(), scores.data() + scores.size());
  std::vector<double> thresholds(grid.begin(), grid.end());
  thresholds.push_back(*grid.begin() - 1.0);
  const int num_lang = static_cast<int>(scores.cols());
  double best = std::numeric_limits<double>::infinity();
  for (double th : thresholds) {
    double total = 0.0;
    for (int lt = 0; lt < num_lang; ++lt) {
      int n_lt = 0, misses = 0;
      for (int i = 0; i < scores.rows(); ++i) {
        if (labels[i] != lt) continue;
        ++n_lt;
        if (!(scores(i, lt) > th)) ++misses;
      }
      double p_miss = n_lt > 0 ? static_cast<double>(misses) / n_lt : 0.0;
      double fa_sum = 0.0;
      for (int ln = 0; ln < num_lang; ++ln) {
        if (ln == lt) continue;
        int n_ln = 0, fas = 0;
        for (int i = 0; i < scores.rows(); ++i) {
          if (labels[i] != ln) continue;
          ++n_ln;
          if (scores(i, lt) > th) ++fas;
        }
        if (n_ln > 0) fa_sum += static_cast<double>(fas) / n_ln;
      }
      total +=
          p_target * p_miss + (1.0 - p_target) / (num_lang - 1) * fa_sum;
    }
    best = std::min(best, total / num_lang);
  }
  return best;
}

}  // namespace

TEST_CASE("perfect separation gives zero equal error rate") {
  REQUIRE(equal_error_rate({0.9, 0.8}, {0.1, 0.2}) ==
          Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("interleaved scores interpolate to one quarter") {
  REQUIRE(equal_error_rate({0.8, 0.4}, {0.6, 0.2}) ==
          Catch::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("a single inverted pair interpolates to one half") {
  // The sweep sees (FAR, FRR) = (1, 0) at the lower score and (0, 1) at
  // the upper one with no attainable crossing in between, so the linear
  // interpolation lands at 0.5.
  REQUIRE(equal_error_rate({0.1}, {0.9}) ==
          Catch::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("a fully inverted multi-trial set scores near one") {
  std::vector<double> target, nontarget;
  for (int i = 0; i < 20; ++i) {
    target.push_back(0.01 * i);         // all low
    nontarget.push_back(0.9 + 0.001 * i);  // all high
  }
  double eer = equal_error_rate(target, nontarget);
  REQUIRE(eer >= 0.95);
  REQUIRE(eer <= 1.0);
}

TEST_CASE("equal error rate requires both trial classes") {
  REQUIRE_THROWS_AS(equal_error_rate({0.5}, {}), InputError);
  REQUIRE_THROWS_AS(equal_error_rate({}, {0.5}), InputError);
}

TEST_CASE("equal error rate is invariant under monotone score transforms") {
  Rng rng(1);
  std::vector<double> target, nontarget;
  for (int i = 0; i < 15; ++i) target.push_back(rng.uniform(0.0, 1.0));
  for (int i = 0; i < 25; ++i) nontarget.push_back(rng.uniform(0.0, 1.0));
  double base = equal_error_rate(target, nontarget);

  auto transform = [](std::vector<double> v, auto fn) {
    for (double& x : v) x = fn(x);
    return v;
  };
  auto affine = [](double x) { return 2.0 * x + 3.0; };
  auto expfn = [](double x) { return std::exp(x); };
  REQUIRE(equal_error_rate(transform(target, affine),
                           transform(nontarget, affine)) ==
          Catch::Approx(base).margin(1e-12));
  REQUIRE(equal_error_rate(transform(target, expfn),
                           transform(nontarget, expfn)) ==
          Catch::Approx(base).margin(1e-12));
}

TEST_CASE("negating scores and swapping roles preserves the rate") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> target, nontarget;
    for (int i = 0; i < 8; ++i) target.push_back(rng.uniform(0.0, 1.0));
    for (int i = 0; i < 12; ++i) nontarget.push_back(rng.uniform(0.0, 1.0));
    double base = equal_error_rate(target, nontarget);
    std::vector<double> neg_t, neg_n;
    for (double s : nontarget) neg_t.push_back(-s);
    for (double s : target) neg_n.push_back(-s);
    REQUIRE(equal_error_rate(neg_t, neg_n) ==
            Catch::Approx(base).margin(1e-12));
  }
}

TEST_CASE("equal error rate matches the independent reference sweep") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> target, nontarget;
    int nt = 1 + rng.uniform_index(10);
    int nn = 1 + rng.uniform_index(10);
    // quantized scores force ties and interpolation paths
    for (int i = 0; i < nt; ++i) {
      target.push_back(0.1 * rng.uniform_index(11));
    }
    for (int i = 0; i < nn; ++i) {
      nontarget.push_back(0.1 * rng.uniform_index(11));
    }
    double mine = equal_error_rate(target, nontarget);
    double ref = eer_reference(target, nontarget);
    REQUIRE(mine == Catch::Approx(ref).margin(1e-12));
  }
}

TEST_CASE("detection cost is zero for a separable trial set") {
  Eigen::MatrixXd scores(4, 2);
  scores << 0.9, 0.1, 0.8, 0.2, 0.3, 0.7, 0.2, 0.8;
  TrialSet trials{scores, {0, 0, 1, 1}};
  REQUIRE(c_avg(trials) == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(equal_error_rate(trials) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("all-wrong decisions at a fixed threshold cost exactly one") {
  // every target trial misses and every non-target trial false-alarms
  Eigen::MatrixXd scores(4, 2);
  scores << 0.1, 0.9, 0.2, 0.8, 0.9, 0.1, 0.8, 0.2;
  TrialSet trials{scores, {0, 0, 1, 1}};
  double cost =
      c_avg(trials, 0.5, CavgMode::kFixedThreshold, 0.5);
  REQUIRE(cost == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("one miss in four target trials costs an eighth") {
  // two languages, two utterances each; one L0 utterance scores below the
  // threshold on its own language and there are no false alarms
  Eigen::MatrixXd scores(4, 2);
  scores << 0.9, 0.1, 0.3, 0.1, 0.1, 0.8, 0.1, 0.7;
  TrialSet trials{scores, {0, 0, 1, 1}};
  double cost = c_avg(trials, 0.5, CavgMode::kFixedThreshold, 0.5);
  REQUIRE(cost == Catch::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("minimum-cost mode lower-bounds every fixed threshold") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 6 + rng.uniform_index(10);
    Eigen::MatrixXd scores(n, 3);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      labels[i] = rng.uniform_index(3);
      for (int j = 0; j < 3; ++j) scores(i, j) = rng.uniform(0.0, 1.0);
    }
    TrialSet trials{scores, labels};
    double best = c_avg(trials, 0.5, CavgMode::kMinOverThreshold);
    REQUIRE(best >= 0.0);
    REQUIRE(best <= 1.0 + 1e-12);
    for (double th : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      REQUIRE(best <=
              c_avg(trials, 0.5, CavgMode::kFixedThreshold, th) + 1e-12);
    }
    REQUIRE(best ==
            Catch::Approx(cavg_reference_min(scores, labels, 0.5))
                .margin(1e-12));
  }
}

TEST_CASE("detection cost validates the target prior") {
  Eigen::MatrixXd scores(2, 2);
  scores << 0.9, 0.1, 0.1, 0.9;
  TrialSet trials{scores, {0, 1}};
  REQUIRE_THROWS_AS(c_avg(trials, 0.0), InputError);
  REQUIRE_THROWS_AS(c_avg(trials, 1.0), InputError);
}

TEST_CASE("accuracy counts argmax matches with ties to the lowest class") {
  Eigen::MatrixXd exact = Eigen::MatrixXd::Identity(3, 3);
  REQUIRE(accuracy(exact, {0, 1, 2}) == 1.0);
  REQUIRE(accuracy(exact, {1, 2, 0}) == 0.0);

  Eigen::MatrixXd probs(4, 2);
  probs << 0.9, 0.1, 0.8, 0.2, 0.4, 0.6, 0.3, 0.7;
  REQUIRE(accuracy(probs, {0, 0, 1, 0}) == Catch::Approx(0.75));

  Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(4, 2, 0.5);
  REQUIRE(accuracy(uniform, {0, 1, 0, 1}) == Catch::Approx(0.5));
}

TEST_CASE("accuracy is invariant under permuting sample order") {
  Rng rng(9);
  Eigen::MatrixXd probs(6, 3);
  std::vector<int> labels(6);
  for (int i = 0; i < 6; ++i) {
    labels[i] = rng.uniform_index(3);
    Eigen::RowVectorXd r(3);
    for (int j = 0; j < 3; ++j) r(j) = rng.uniform(0.1, 1.0);
    probs.row(i) = r / r.sum();
  }
  double base = accuracy(probs, labels);
  std::vector<int> perm = {4, 0, 5, 2, 1, 3};
  Eigen::MatrixXd pp(6, 3);
  std::vector<int> lp(6);
  for (int i = 0; i < 6; ++i) {
    pp.row(i) = probs.row(perm[i]);
    lp[i] = labels[perm[i]];
  }
  REQUIRE(accuracy(pp, lp) == base);
}

TEST_CASE("det curve rates are monotone in the threshold") {
  Rng rng(11);
  Eigen::MatrixXd scores(12, 2);
  std::vector<int> labels(12);
  for (int i = 0; i < 12; ++i) {
    labels[i] = rng.uniform_index(2);
    for (int j = 0; j < 2; ++j) scores(i, j) = rng.uniform(0.0, 1.0);
  }
  TrialSet trials{scores, labels};
  std::vector<DetPoint> points = det_curve(trials);
  for (size_t k = 1; k < points.size(); ++k) {
    REQUIRE(points[k].threshold > points[k - 1].threshold);
    REQUIRE(points[k].far <= points[k - 1].far + 1e-15);
    REQUIRE(points[k].frr >= points[k - 1].frr - 1e-15);
  }
}

TEST_CASE("trial sets validate labels and shapes") {
  Eigen::MatrixXd scores(2, 2);
  scores << 0.5, 0.5, 0.5, 0.5;
  TrialSet bad_label{scores, {0, 2}};
  REQUIRE_THROWS_AS(bad_label.validate(), InputError);
  TrialSet bad_count{scores, {0}};
  REQUIRE_THROWS_AS(bad_count.validate(), InputError);
}
