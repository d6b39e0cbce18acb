// Copyright 2026, the dualbev project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <vector>

#include "doctest.h"
#include "dualbev/losses.hpp"
#include "dualbev/rng.hpp"
#include "oracles.hpp"

using namespace dualbev;

TEST_SUITE("losses") {

TEST_CASE("l2 regression is the mean of squared differences") {
  const std::vector<double> pred = {0.0, 0.0};
  const std::vector<double> target = {3.0, 4.0};
  CHECK(l2_regression(pred, target) == doctest::Approx(12.5).epsilon(1e-12));
  CHECK(l2_regression(target, target) == 0.0);
}

TEST_CASE("l2 regression rejects mismatched or empty inputs") {
  const std::vector<double> a = {1.0};
  const std::vector<double> b = {1.0, 2.0};
  CHECK_THROWS_AS(l2_regression(a, b), std::invalid_argument);
  const std::vector<double> empty;
  CHECK_THROWS_AS(l2_regression(empty, empty), std::invalid_argument);
}

TEST_CASE("l2 gradient matches central differences") {
  Rng rng(31);
  std::vector<double> pred(6), target(6);
  for (int i = 0; i < 6; ++i) {
    pred[i] = rng.uniform(-2.0, 2.0);
    target[i] = rng.uniform(-2.0, 2.0);
  }
  const std::vector<double> grad = l2_regression_gradient(pred, target);
  for (int i = 0; i < 6; ++i) {
    const double num = oracles::central_diff(
        [&](double x) {
          std::vector<double> p = pred;
          p[i] = x;
          return l2_regression(p, target);
        },
        pred[i]);
    CHECK(grad[i] == doctest::Approx(num).epsilon(1e-7).scale(1.0));
  }
}

TEST_CASE("kl divergence to the standard normal has closed-form pins") {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd logvar = Eigen::VectorXd::Zero(4);
  CHECK(kl_to_standard_normal(mu, logvar) == 0.0);

  Eigen::VectorXd mu1(1), lv1(1);
  mu1 << 1.0;
  lv1 << 0.0;
  CHECK(kl_to_standard_normal(mu1, lv1) == doctest::Approx(0.5).epsilon(1e-12));

  // Doubling the variance: 0.5 * (2 - 1 - ln 2).
  lv1 << std::log(2.0);
  mu1 << 0.0;
  CHECK(kl_to_standard_normal(mu1, lv1) ==
        doctest::Approx(0.5 * (1.0 - std::log(2.0))).epsilon(1e-12));
}

TEST_CASE("kl divergence matches a Monte Carlo estimate") {
  Rng rng(20260401);
  for (int fixture = 0; fixture < 5; ++fixture) {
    const int dim = 1 + fixture;
    Eigen::VectorXd mu(dim), logvar(dim);
    for (int i = 0; i < dim; ++i) {
      mu[i] = rng.uniform(-1.5, 1.5);
      logvar[i] = rng.uniform(-1.0, 1.0);
    }
    const double exact = kl_to_standard_normal(mu, logvar);
    const auto mc = oracles::mc_kl_to_standard_normal(mu, logvar, 200000, rng);
    // 4 standard errors: ~6e-5 false failure rate per fixture.
    CHECK(std::abs(exact - mc.mean) <= 4.0 * mc.std_error + 1e-9);
  }
}

TEST_CASE("kl gradient matches central differences") {
  Rng rng(77);
  const int dim = 5;
  Eigen::VectorXd mu(dim), logvar(dim);
  for (int i = 0; i < dim; ++i) {
    mu[i] = rng.uniform(-2.0, 2.0);
    logvar[i] = rng.uniform(-1.5, 1.5);
  }
  Eigen::VectorXd d_mu, d_logvar;
  kl_to_standard_normal_gradient(mu, logvar, &d_mu, &d_logvar);
  for (int i = 0; i < dim; ++i) {
    const double num_mu = oracles::central_diff(
        [&](double x) {
          Eigen::VectorXd m = mu;
          m[i] = x;
          return kl_to_standard_normal(m, logvar);
        },
        mu[i]);
    const double num_lv = oracles::central_diff(
        [&](double x) {
          Eigen::VectorXd lv = logvar;
          lv[i] = x;
          return kl_to_standard_normal(mu, lv);
        },
        logvar[i]);
    CHECK(d_mu[i] == doctest::Approx(num_mu).epsilon(1e-6).scale(1.0));
    CHECK(d_logvar[i] == doctest::Approx(num_lv).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("focal loss value pins") {
  // Cross entropy at p=0.5 with the modulation disabled.
  CHECK(focal_loss(1.0, 0.0, 0.5) ==
        doctest::Approx(0.6931471805599453).epsilon(1e-9));
  // Easy example is down-weighted by (1-p)^2.
  CHECK(focal_loss(0.25, 2.0, 0.9) ==
        doctest::Approx(0.25 * 0.01 * -std::log(0.9)).epsilon(1e-9));
  CHECK(focal_loss(0.25, 2.0, 0.9) == doctest::Approx(2.634e-4).epsilon(2e-3));
  // Perfectly confident correct prediction costs nothing.
  CHECK(focal_loss(0.25, 2.0, 1.0) == 0.0);
}

TEST_CASE("focal loss rejects out-of-domain probabilities") {
  CHECK_THROWS_AS(focal_loss(0.25, 2.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(focal_loss(0.25, 2.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(focal_loss(0.25, 2.0, 1.1), std::invalid_argument);
  CHECK_THROWS_AS(focal_loss(-1.0, 2.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(focal_loss(0.25, -1.0, 0.5), std::invalid_argument);
}

TEST_CASE("focal loss gradient matches central differences") {
  const double alphas[] = {0.25, 1.0};
  const double gammas[] = {0.0, 1.0, 2.0};
  const double ps[] = {0.1, 0.5, 0.9};
  for (double a : alphas) {
    for (double g : gammas) {
      for (double p : ps) {
        const double grad = focal_loss_gradient(a, g, p);
        const double num = oracles::central_diff(
            [&](double x) { return focal_loss(a, g, x); }, p, 1e-5);
        CHECK(grad == doctest::Approx(num).epsilon(1e-5).scale(1.0));
      }
    }
  }
}

TEST_CASE("batched focal loss averages and clamps") {
  const std::vector<double> probs = {0.9, 0.1};
  const std::vector<uint8_t> labels = {1, 0};
  // label 1 -> p_t = 0.9, label 0 -> p_t = 1 - 0.1 = 0.9.
  const double expected = focal_loss(0.25, 2.0, 0.9);
  CHECK(focal_loss_batch(probs, labels, 0.25, 2.0) ==
        doctest::Approx(expected).epsilon(1e-12));

  // Saturated probabilities stay finite through the clamp.
  const std::vector<double> hard = {1.0, 0.0};
  const std::vector<uint8_t> wrong = {0, 1};
  const double v = focal_loss_batch(hard, wrong, 0.25, 2.0);
  CHECK(std::isfinite(v));
  CHECK(v > 1.0);

  const std::vector<uint8_t> bad_label = {2, 0};
  CHECK_THROWS_AS(focal_loss_batch(probs, bad_label, 0.25, 2.0),
                  std::invalid_argument);
  const std::vector<uint8_t> short_labels = {1};
  CHECK_THROWS_AS(focal_loss_batch(probs, short_labels, 0.25, 2.0),
                  std::invalid_argument);
}

TEST_CASE("latent goal sampling is the reparameterized draw") {
  Rng rng(5);
  Eigen::VectorXd mu(3), logvar(3);
  mu << 0.5, -1.0, 2.0;
  logvar << 0.0, -2.0, 1.0;
  const LatentGoal g = LatentGoal::draw(mu, logvar, rng);
  REQUIRE(g.sample.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(g.sample[i] ==
          doctest::Approx(mu[i] + std::exp(0.5 * logvar[i]) * g.epsilon[i])
              .epsilon(1e-12));
  }
  // Same seed, same draw.
  Rng rng2(5);
  const LatentGoal g2 = LatentGoal::draw(mu, logvar, rng2);
  CHECK(g.sample == g2.sample);
}

TEST_CASE("vib objective is the stated sum of its terms") {
  VibBatch batch;
  batch.pred_dist = 3.0;
  batch.target_dist = 5.0;
  batch.pred_waypoints.resize(3, 2);
  batch.pred_waypoints << 1.0, 0.0, 2.0, 1.0, 3.0, -1.0;
  batch.target_waypoints.resize(3, 2);
  batch.target_waypoints << 1.5, 0.0, 2.0, 0.5, 2.5, -1.0;
  batch.mu = Eigen::VectorXd::Constant(4, 0.3);
  batch.logvar = Eigen::VectorXd::Constant(4, -0.5);
  batch.lambda = 1.5;
  batch.beta = 0.02;

  const VibTerms t = vib_loss(batch);
  CHECK(t.dist_term == doctest::Approx(4.0).epsilon(1e-12));
  const double action =
      (0.25 + 0.0 + 0.0 + 0.25 + 0.25 + 0.0) / 6.0;
  CHECK(t.action_term == doctest::Approx(action).epsilon(1e-12));
  CHECK(t.kl_term ==
        doctest::Approx(kl_to_standard_normal(batch.mu, batch.logvar))
            .epsilon(1e-12));
  CHECK(t.total == doctest::Approx(t.dist_term + 1.5 * t.action_term +
                                   0.02 * t.kl_term)
                       .epsilon(1e-12));

  // With zero errors only the weighted kl term remains.
  batch.pred_dist = batch.target_dist;
  batch.pred_waypoints = batch.target_waypoints;
  const VibTerms zero = vib_loss(batch);
  CHECK(zero.dist_term == 0.0);
  CHECK(zero.action_term == 0.0);
  CHECK(zero.total == doctest::Approx(0.02 * zero.kl_term).epsilon(1e-12));
}

}
