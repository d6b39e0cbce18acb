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

#include "dualbev/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dualbev {

namespace {

void check_pair(size_t a, size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + " size mismatch: " +
                                std::to_string(a) + " vs " + std::to_string(b));
  }
  if (a == 0) {
    throw std::invalid_argument(std::string(what) + " inputs are empty");
  }
}

void check_focal_params(double alpha, double gamma) {
  if (!(alpha >= 0.0) || !(gamma >= 0.0)) {
    throw std::invalid_argument("focal loss parameters must be non-negative, got alpha=" +
                                std::to_string(alpha) + " gamma=" +
                                std::to_string(gamma));
  }
}

}  // namespace

double l2_regression(std::span<const double> pred,
                     std::span<const double> target) {
  check_pair(pred.size(), target.size(), "l2 regression");
  double acc = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

std::vector<double> l2_regression_gradient(std::span<const double> pred,
                                           std::span<const double> target) {
  check_pair(pred.size(), target.size(), "l2 regression");
  std::vector<double> grad(pred.size());
  const double scale = 2.0 / static_cast<double>(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    grad[i] = scale * (pred[i] - target[i]);
  }
  return grad;
}

double kl_to_standard_normal(const Eigen::VectorXd& mu,
                             const Eigen::VectorXd& logvar) {
  check_pair(mu.size(), logvar.size(), "KL");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    acc += mu[i] * mu[i] + std::exp(logvar[i]) - 1.0 - logvar[i];
  }
  return 0.5 * acc;
}

void kl_to_standard_normal_gradient(const Eigen::VectorXd& mu,
                                    const Eigen::VectorXd& logvar,
                                    Eigen::VectorXd* d_mu,
                                    Eigen::VectorXd* d_logvar) {
  check_pair(mu.size(), logvar.size(), "KL");
  *d_mu = mu;
  *d_logvar = 0.5 * (logvar.array().exp() - 1.0);
}

double focal_loss(double alpha, double gamma, double p_t) {
  check_focal_params(alpha, gamma);
  if (!(p_t > 0.0) || p_t > 1.0) {
    throw std::invalid_argument("focal loss p_t must be in (0, 1], got " +
                                std::to_string(p_t));
  }
  return -alpha * std::pow(1.0 - p_t, gamma) * std::log(p_t);
}

double focal_loss_gradient(double alpha, double gamma, double p_t) {
  check_focal_params(alpha, gamma);
  if (!(p_t > 0.0) || p_t > 1.0) {
    throw std::invalid_argument("focal loss p_t must be in (0, 1], got " +
                                std::to_string(p_t));
  }
  const double q = 1.0 - p_t;
  // The modulating term's derivative vanishes as p_t -> 1 for any gamma > 0;
  // computing it naively there would multiply inf by zero.
  double mod_term = 0.0;
  if (gamma > 0.0 && q > 0.0) {
    mod_term = alpha * gamma * std::pow(q, gamma - 1.0) * std::log(p_t);
  }
  const double log_term = -alpha * std::pow(q, gamma) / p_t;
  return mod_term + log_term;
}

double focal_loss_batch(std::span<const double> p_foreground,
                        std::span<const uint8_t> labels, double alpha,
                        double gamma) {
  check_focal_params(alpha, gamma);
  check_pair(p_foreground.size(), labels.size(), "focal batch");
  double acc = 0.0;
  for (size_t i = 0; i < p_foreground.size(); ++i) {
    const double p = p_foreground[i];
    if (!(p >= 0.0) || !(p <= 1.0)) {
      throw std::invalid_argument("focal batch probability at index " +
                                  std::to_string(i) + " is outside [0, 1]: " +
                                  std::to_string(p));
    }
    if (labels[i] > 1) {
      throw std::invalid_argument("focal batch label at index " +
                                  std::to_string(i) + " is not binary");
    }
    const double p_t =
        std::clamp(labels[i] ? p : 1.0 - p, 1e-7, 1.0 - 1e-7);
    acc += focal_loss(alpha, gamma, p_t);
  }
  return acc / static_cast<double>(p_foreground.size());
}

LatentGoal LatentGoal::draw(const Eigen::VectorXd& mu,
                            const Eigen::VectorXd& logvar, Rng& rng) {
  check_pair(mu.size(), logvar.size(), "latent draw");
  LatentGoal g;
  g.mu = mu;
  g.logvar = logvar;
  g.epsilon.resize(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) g.epsilon[i] = rng.normal();
  g.sample = mu.array() + (0.5 * logvar.array()).exp() * g.epsilon.array();
  return g;
}

VibTerms vib_loss(const VibBatch& batch) {
  if (batch.pred_waypoints.rows() != batch.target_waypoints.rows()) {
    throw std::invalid_argument(
        "waypoint count mismatch: " +
        std::to_string(batch.pred_waypoints.rows()) + " vs " +
        std::to_string(batch.target_waypoints.rows()));
  }
  if (!(batch.lambda >= 0.0) || !(batch.beta >= 0.0)) {
    throw std::invalid_argument("loss weights lambda and beta must be non-negative");
  }
  VibTerms t;
  const double dist_pred[1] = {batch.pred_dist};
  const double dist_target[1] = {batch.target_dist};
  t.dist_term = l2_regression(dist_pred, dist_target);
  t.action_term = l2_regression(
      std::span<const double>(batch.pred_waypoints.data(),
                              static_cast<size_t>(batch.pred_waypoints.size())),
      std::span<const double>(
          batch.target_waypoints.data(),
          static_cast<size_t>(batch.target_waypoints.size())));
  t.kl_term = kl_to_standard_normal(batch.mu, batch.logvar);
  t.total = t.dist_term + batch.lambda * t.action_term + batch.beta * t.kl_term;
  return t;
}

}  // namespace dualbev
