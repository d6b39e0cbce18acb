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

#ifndef DUALBEV_LOSSES_HPP
#define DUALBEV_LOSSES_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dualbev/rng.hpp"

namespace dualbev {

/// Mean of elementwise squared differences. Throws std::invalid_argument on
/// a size mismatch or empty inputs.
double l2_regression(std::span<const double> pred,
                     std::span<const double> target);

/// d l2_regression / d pred, elementwise: 2 (pred - target) / N.
std::vector<double> l2_regression_gradient(std::span<const double> pred,
                                           std::span<const double> target);

/// KL( N(mu, diag exp(logvar)) || N(0, I) )
///   = 0.5 * sum( mu^2 + exp(logvar) - 1 - logvar ).
/// Throws std::invalid_argument on a size mismatch or empty inputs.
double kl_to_standard_normal(const Eigen::VectorXd& mu,
                             const Eigen::VectorXd& logvar);

/// Analytic gradients of kl_to_standard_normal:
///   d/dmu = mu,  d/dlogvar = 0.5 (exp(logvar) - 1).
void kl_to_standard_normal_gradient(const Eigen::VectorXd& mu,
                                    const Eigen::VectorXd& logvar,
                                    Eigen::VectorXd* d_mu,
                                    Eigen::VectorXd* d_logvar);

/// Binary focal loss of a single prediction:
///   FL = -alpha * (1 - p_t)^gamma * log(p_t),   p_t in (0, 1].
/// p_t is the probability the model assigns to the true class.
/// Throws std::invalid_argument when p_t is outside (0, 1] or
/// alpha/gamma are negative.
double focal_loss(double alpha, double gamma, double p_t);

/// d focal_loss / d p_t (same preconditions).
double focal_loss_gradient(double alpha, double gamma, double p_t);

/// Mean focal loss over a batch. p_foreground[i] in [0, 1] is the predicted
/// probability of the positive class; labels[i] in {0, 1}. p_t is clamped to
/// [1e-7, 1 - 1e-7] before the scalar kernel so saturated predictions stay
/// finite. Throws std::invalid_argument on size mismatch or out-of-range
/// probabilities.
double focal_loss_batch(std::span<const double> p_foreground,
                        std::span<const uint8_t> labels, double alpha,
                        double gamma);

/// Reparameterized draw from N(mu, diag exp(logvar)).
struct LatentGoal {
  Eigen::VectorXd mu;
  Eigen::VectorXd logvar;
  Eigen::VectorXd epsilon;  ///< the standard-normal noise that was drawn
  Eigen::VectorXd sample;   ///< mu + exp(0.5 * logvar) .* epsilon

  static LatentGoal draw(const Eigen::VectorXd& mu,
                         const Eigen::VectorXd& logvar, Rng& rng);
};

/// One training example for the variational objective.
struct VibBatch {
  double pred_dist = 0.0;
  double target_dist = 0.0;
  Eigen::MatrixX2d pred_waypoints;
  Eigen::MatrixX2d target_waypoints;
  Eigen::VectorXd mu;
  Eigen::VectorXd logvar;
  double lambda = 1.0;
  double beta = 0.01;
};

struct VibTerms {
  double total = 0.0;
  double dist_term = 0.0;
  double action_term = 0.0;
  double kl_term = 0.0;
};

/// total = dist + lambda * action + beta * kl, where dist is the l2 loss on
/// the temporal-distance scalar, action the l2 loss on the flattened
/// waypoints, and kl the divergence of the latent posterior from N(0, I).
VibTerms vib_loss(const VibBatch& batch);

}  // namespace dualbev

#endif  // DUALBEV_LOSSES_HPP
