// tests/nn_test.cpp

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

#include <cmath>

#include "otalign/adam.hpp"
#include "otalign/baselines.hpp"
#include "otalign/grad_check.hpp"
#include "otalign/net_io.hpp"
#include "otalign/nn.hpp"
#include "otalign/ot.hpp"
#include "otalign/rng.hpp"
#include "testing_util.hpp"

using namespace otalign;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, Rng& rng,
                              double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.gaussian();
  }
  return m;
}

}  // namespace

TEST_CASE("zero network yields uniform class probabilities") {
  Rng rng(1);
  AdaptationNetwork net(3, 4, 5, rng);
  net.set_params(Eigen::VectorXd::Zero(net.param_count()));
  Eigen::MatrixXd x = random_matrix(6, 3, rng);
  ForwardCache c = net.forward(x);
  for (int i = 0; i < c.probs.rows(); ++i) {
    for (int j = 0; j < c.probs.cols(); ++j) {
      REQUIRE(c.probs(i, j) == Catch::Approx(0.2).epsilon(1e-12));
    }
  }
}

TEST_CASE("length normalization follows the 3-4-5 triangle") {
  Eigen::MatrixXd u(1, 2);
  u << 3.0, 4.0;
  Eigen::MatrixXd z = normalize_rows(u);
  REQUIRE(z(0, 0) == Catch::Approx(0.6).margin(1e-15));
  REQUIRE(z(0, 1) == Catch::Approx(0.8).margin(1e-15));
  // exact idempotence on this instance
  Eigen::MatrixXd z2 = normalize_rows(z);
  REQUIRE(z2(0, 0) == z(0, 0));
  REQUIRE(z2(0, 1) == z(0, 1));
}

TEST_CASE("normalization is idempotent up to round-off on random rows") {
  Rng rng(7);
  Eigen::MatrixXd u = random_matrix(20, 6, rng, 3.0);
  Eigen::MatrixXd z = normalize_rows(u);
  Eigen::MatrixXd z2 = normalize_rows(z);
  REQUIRE((z2 - z).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("forward rows are unit-norm latents and probability vectors") {
  Rng rng(13);
  AdaptationNetwork net(8, 5, 7, rng);
  Eigen::MatrixXd x = random_matrix(32, 8, rng);
  ForwardCache c = net.forward(x);
  for (int i = 0; i < 32; ++i) {
    REQUIRE(std::abs(c.latent.row(i).norm() - 1.0) < 1e-9);
    REQUIRE(std::abs(c.probs.row(i).sum() - 1.0) < 1e-9);
    REQUIRE(c.probs.row(i).minCoeff() >= 0.0);
  }
}

TEST_CASE("softmax rows sum to one for extreme logits") {
  Eigen::MatrixXd logits(3, 3);
  logits << 1000.0, -1000.0, 0.0, -700.0, -701.0, -702.0, 0.0, 0.0, 0.0;
  Eigen::MatrixXd p = softmax_rows(logits);
  for (int i = 0; i < 3; ++i) {
    REQUIRE(std::abs(p.row(i).sum() - 1.0) < 1e-9);
  }
  REQUIRE(p(0, 0) == Catch::Approx(1.0));
}

TEST_CASE("forward validates dimensions and finiteness") {
  Rng rng(2);
  AdaptationNetwork net(3, 2, 2, rng);
  REQUIRE_THROWS_AS(net.forward(Eigen::MatrixXd::Zero(2, 4)), ConfigError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 3);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(net.forward(bad), InputError);
}

TEST_CASE("cross entropy matches hand values") {
  SECTION("probability one on the true class") {
    Eigen::MatrixXd y = Eigen::MatrixXd::Identity(3, 3);
    REQUIRE(cross_entropy_loss(y, y) == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("uniform prediction over ten classes") {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(1, 10);
    y(0, 3) = 1.0;
    Eigen::MatrixXd p = Eigen::MatrixXd::Constant(1, 10, 0.1);
    REQUIRE(cross_entropy_loss(y, p) ==
            Catch::Approx(std::log(10.0)).epsilon(1e-12));
  }
  SECTION("two samples with true-class probabilities 0.5 and 0.25") {
    Eigen::MatrixXd y(2, 2), p(2, 2);
    y << 1, 0, 0, 1;
    p << 0.5, 0.5, 0.75, 0.25;
    double expected = (-std::log(0.5) - std::log(0.25)) / 2.0;
    REQUIRE(cross_entropy_loss(y, p) == Catch::Approx(expected).epsilon(1e-12));
    REQUIRE(expected == Catch::Approx(1.039721).margin(1e-6));
  }
}

TEST_CASE("cross entropy rejects rows that are not one-hot") {
  Eigen::MatrixXd y(1, 3), p(1, 3);
  y << 0.5, 0.5, 0.0;
  p << 0.2, 0.3, 0.5;
  REQUIRE_THROWS_AS(cross_entropy_loss(y, p), InputError);
}

TEST_CASE("cross entropy is invariant under permuting sample order") {
  Rng rng(5);
  AdaptationNetwork net(4, 3, 4, rng);
  Eigen::MatrixXd x = random_matrix(8, 4, rng);
  std::vector<int> labels = {0, 1, 2, 3, 0, 1, 2, 3};
  Eigen::MatrixXd y = one_hot(labels, 4);
  Eigen::MatrixXd p = net.forward(x).probs;
  double base = cross_entropy_loss(y, p);

  std::vector<int> perm = {5, 2, 7, 0, 3, 6, 1, 4};
  Eigen::MatrixXd yp(8, 4), pp(8, 4);
  for (int i = 0; i < 8; ++i) {
    yp.row(i) = y.row(perm[i]);
    pp.row(i) = p.row(perm[i]);
  }
  REQUIRE(cross_entropy_loss(yp, pp) == Catch::Approx(base).epsilon(1e-12));
}

TEST_CASE("target entropy matches hand values") {
  SECTION("one-hot rows have zero entropy") {
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(4, 4);
    REQUIRE(target_entropy(p).sum == Catch::Approx(0.0).margin(1e-9));
  }
  SECTION("uniform row over ten classes") {
    Eigen::MatrixXd p = Eigen::MatrixXd::Constant(1, 10, 0.1);
    REQUIRE(target_entropy(p).sum ==
            Catch::Approx(std::log(10.0)).epsilon(1e-12));
  }
  SECTION("three identical binary rows") {
    Eigen::MatrixXd p = Eigen::MatrixXd::Constant(3, 2, 0.5);
    EntropyValue h = target_entropy(p);
    REQUIRE(h.sum == Catch::Approx(3.0 * std::log(2.0)).epsilon(1e-12));
    REQUIRE(h.mean == Catch::Approx(std::log(2.0)).epsilon(1e-12));
    REQUIRE(h.sum == Catch::Approx(2.079442).margin(1e-6));
  }
}

TEST_CASE("zero upstream gradients produce zero parameter gradients") {
  Rng rng(11);
  AdaptationNetwork net(4, 3, 2, rng);
  Eigen::MatrixXd x = random_matrix(5, 4, rng);
  ForwardCache c = net.forward(x);
  NetworkGrads g = net.backward(c, Eigen::MatrixXd::Zero(5, 3),
                                Eigen::MatrixXd::Zero(5, 2));
  REQUIRE(net.flatten(g).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward without a cached forward is a usage error") {
  Rng rng(3);
  AdaptationNetwork net(2, 2, 2, rng);
  ForwardCache empty;
  REQUIRE_THROWS_AS(
      net.backward(empty, Eigen::MatrixXd(), Eigen::MatrixXd()),
      UsageError);
}

TEST_CASE("linear layer gradient identity: loss = sum of outputs") {
  // Two-layer head with linear hidden units and unit output weights makes
  // the loss sum_i sum_j (x W1 + b1)_ij: dW1 = X^T 1, db1 = n.
  Rng rng(17);
  const int n = 6, in = 3, hidden = 4;
  TwoLayerHead head(in, hidden, Activation::kLinear, rng);
  head.output().weights = Eigen::MatrixXd::Ones(hidden, 1);
  head.output().bias = Eigen::RowVectorXd::Zero(1);
  Eigen::MatrixXd x = random_matrix(n, in, rng);
  TwoLayerHead::Cache c = head.forward(x);
  TwoLayerHead::Grads g =
      head.backward(c, Eigen::VectorXd::Ones(n));

  Eigen::MatrixXd expected_w1 =
      x.transpose() * Eigen::MatrixXd::Ones(n, hidden);
  REQUIRE((g.w1 - expected_w1).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE((g.b1.array() - static_cast<double>(n)).abs().maxCoeff() < 1e-12);
}

TEST_CASE("analytic gradients match finite differences for CE loss") {
  Rng rng(23);
  AdaptationNetwork net(3, 2, 2, rng);
  Eigen::MatrixXd x = random_matrix(6, 3, rng);
  Eigen::MatrixXd y = one_hot({0, 1, 0, 1, 1, 0}, 2);

  AdaptationNetwork probe = net;
  auto loss_fn = [&](const Eigen::VectorXd& p) {
    probe.set_params(p);
    return cross_entropy_loss(y, probe.forward(x).probs);
  };
  ForwardCache c = net.forward(x);
  Eigen::VectorXd analytic = net.flatten(
      net.backward(c, Eigen::MatrixXd(), cross_entropy_grad(y, c.probs)));
  GradCheckResult res = gradient_check(loss_fn, analytic, net.params());
  REQUIRE(res.max_rel_error < 1e-4);
}

TEST_CASE("analytic gradients match finite differences for CE plus entropy") {
  Rng rng(29);
  AdaptationNetwork net(4, 3, 3, rng);
  Eigen::MatrixXd xs = random_matrix(5, 4, rng);
  Eigen::MatrixXd xt = random_matrix(7, 4, rng);
  Eigen::MatrixXd y = one_hot({0, 1, 2, 1, 0}, 3);
  const double w = 0.05;

  AdaptationNetwork probe = net;
  auto loss_fn = [&](const Eigen::VectorXd& p) {
    probe.set_params(p);
    double ce = cross_entropy_loss(y, probe.forward(xs).probs);
    double ent = target_entropy(probe.forward(xt).probs).mean;
    return ce + w * ent;
  };
  ForwardCache cs = net.forward(xs);
  ForwardCache ct = net.forward(xt);
  Eigen::VectorXd analytic =
      net.flatten(net.backward(cs, Eigen::MatrixXd(),
                               cross_entropy_grad(y, cs.probs))) +
      net.flatten(net.backward(ct, Eigen::MatrixXd(),
                               w * target_entropy_grad(ct.probs)));
  GradCheckResult res = gradient_check(loss_fn, analytic, net.params());
  REQUIRE(res.max_rel_error < 1e-4);
}

TEST_CASE("analytic gradients match finite differences through the "
          "frozen-coupling alignment loss") {
  Rng rng(31);
  AdaptationNetwork net(3, 2, 3, rng);
  Eigen::MatrixXd xs = random_matrix(5, 3, rng);
  Eigen::MatrixXd xt = random_matrix(4, 3, rng);
  Eigen::MatrixXd ys = one_hot({0, 1, 2, 0, 1}, 3);
  AlignConfig cfg;
  cfg.alpha = 0.5;  // exaggerate the label term so its gradient matters

  // Freeze the plan and the weights at the current parameters.
  ForwardCache cs0 = net.forward(xs);
  ForwardCache ct0 = net.forward(xt);
  PotAlignResult frozen =
      pot_align_loss(cs0.latent, ys, ct0.latent, ct0.probs, cfg);
  Eigen::MatrixXd mass = frozen.effective_mass();

  AdaptationNetwork probe = net;
  auto loss_fn = [&](const Eigen::VectorXd& p) {
    probe.set_params(p);
    ForwardCache cs = probe.forward(xs);
    ForwardCache ct = probe.forward(xt);
    CostMatrix c = joint_cost_matrix(cs.latent, ys, ct.latent, ct.probs,
                                     cfg.alpha);
    return (c.values.array() * mass.array()).sum();
  };

  PotGradients g = pot_align_gradients(cs0.latent, ys, ct0.latent,
                                       ct0.probs, frozen, cfg);
  Eigen::VectorXd analytic =
      net.flatten(net.backward(cs0, g.d_source_latent, Eigen::MatrixXd())) +
      net.flatten(net.backward(ct0, g.d_target_latent, g.d_target_probs));
  GradCheckResult res = gradient_check(loss_fn, analytic, net.params());
  REQUIRE(res.max_rel_error < 1e-4);
}

TEST_CASE("adam leaves parameters unchanged on zero gradients") {
  AdamState adam(3);
  Eigen::VectorXd p(3);
  p << 1.0, -2.0, 0.5;
  Eigen::VectorXd before = p;
  adam.step(p, Eigen::VectorXd::Zero(3));
  adam.step(p, Eigen::VectorXd::Zero(3));
  REQUIRE((p - before).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(adam.step_count() == 2);
}

TEST_CASE("adam first step moves by about minus lr times sign") {
  AdamState adam(1);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd g(1);
  g << 2.0;
  adam.step(p, g);
  REQUIRE(p(0) == Catch::Approx(-0.001).margin(1e-8));
}

TEST_CASE("adam matches the hand-computed recurrence on constant gradients") {
  const double lr = 0.001, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  AdamState adam(1, {lr, b1, b2, eps});
  Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd g = Eigen::VectorXd::Ones(1);

  double m = 0.0, v = 0.0, expected = 0.0;
  for (int t = 1; t <= 2; ++t) {
    adam.step(p, g);
    m = b1 * m + (1 - b1) * 1.0;
    v = b2 * v + (1 - b2) * 1.0;
    double mhat = m / (1 - std::pow(b1, t));
    double vhat = v / (1 - std::pow(b2, t));
    expected -= lr * mhat / (std::sqrt(vhat) + eps);
    REQUIRE(p(0) == Catch::Approx(expected).margin(1e-12));
  }
}

TEST_CASE("adam rejects mismatched shapes") {
  AdamState adam(3);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
  REQUIRE_THROWS_AS(adam.step(p, Eigen::VectorXd::Zero(2)), UsageError);
}

TEST_CASE("gradient check of a linear model with quadratic loss is exact "
          "to truncation order") {
  // loss(p) = sum (p - c)^2 has third derivative zero, so central
  // differences are exact up to round-off.
  Eigen::VectorXd c(3);
  c << 0.3, -1.2, 2.0;
  Eigen::VectorXd at(3);
  at << 1.0, 0.5, -0.25;
  auto loss_fn = [&](const Eigen::VectorXd& p) {
    return (p - c).squaredNorm();
  };
  Eigen::VectorXd analytic = 2.0 * (at - c);
  GradCheckResult res = gradient_check(loss_fn, analytic, at);
  REQUIRE(res.max_rel_error < 1e-7);
}

TEST_CASE("network JSON round trip preserves every parameter") {
  otalign_test::TempDir tmp("netio");
  Rng rng(41);
  AdaptationNetwork net(6, 4, 3, rng);
  save_network(net, tmp.str("net.json"));
  AdaptationNetwork loaded = load_network(tmp.str("net.json"));
  REQUIRE(loaded.input_dim() == 6);
  REQUIRE(loaded.latent_dim() == 4);
  REQUIRE(loaded.num_classes() == 3);
  REQUIRE((loaded.params() - net.params()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("network loader rejects unknown format tags") {
  otalign_test::TempDir tmp("netio_bad");
  otalign_test::write_file(tmp.str("bad.json"), "{\"format\": \"other\"}");
  REQUIRE_THROWS_AS(load_network(tmp.str("bad.json")), ParseError);
}
