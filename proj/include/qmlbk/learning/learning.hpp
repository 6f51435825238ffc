// Copyright 2026 The qmlbk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmlbk/models/models.hpp"

namespace qmlbk {

struct Dataset {
    std::vector<std::vector<double>> inputs;
    std::vector<double> labels;
    std::string tag; ///< "train", "validation" or "test"

    std::size_t size() const noexcept { return labels.size(); }
    int arity() const;
    /// Throws std::invalid_argument on length or arity mismatch.
    void validate() const;
};

struct TrainConfig {
    int steps = 500;
    double lr_params = 0.01;
    double lr_weight = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;
    std::uint64_t seed = 0;
    double lambda = 0.0;
    /// theta_k ~ N(0, init_std) when no initial parameters are supplied.
    double init_std = 0.05;
    double init_weight = 1.0;
    bool train_weight = true;
    double divergence_threshold = 1e6;
    unsigned threads = 0;

    void validate() const;
};

double mse(std::span<const double> predictions, std::span<const double> labels);

/// Model outputs on every input (parallel over samples).
std::vector<double> predict(const Model &m, std::span<const double> theta,
                            const std::vector<std::vector<double>> &inputs,
                            unsigned threads = 0);

double mse_loss(const Model &m, std::span<const double> theta,
                const Dataset &data, unsigned threads = 0);

/// Squared Pauli-weight proxy for ||O||_F^2: (scale * w)^2 * sum_k w_k^2.
double observable_penalty(const Observable &o, double weight);

/// mse + lambda * w^2 * sum |weights of O|^2 for explicit models.
double regularized_loss_explicit(const ExplicitModel &m,
                                 std::span<const double> theta,
                                 const Dataset &data, double lambda,
                                 unsigned threads = 0);

/// (1/M) ||K alpha - y||^2 + lambda alpha^T K alpha.
double regularized_loss_implicit(const Eigen::MatrixXd &gram,
                                 const Eigen::VectorXd &alpha,
                                 const Eigen::VectorXd &labels, double lambda);

/**
 * Solves (K + lambda M I) alpha = y. lambda = 0 uses the eigenvalue
 * pseudo-inverse with relative cutoff 1e-10.
 */
Eigen::VectorXd krr_fit(const Eigen::MatrixXd &gram, const Eigen::VectorXd &labels,
                        double lambda);

/// Implicit model fitted by KRR on a training set.
ImplicitModel fit_implicit(const FeatureEncoding &enc, const Dataset &train,
                           double lambda, unsigned threads = 0);

/// One circuit evaluation prepared for differentiation: start from `initial`,
/// apply `circuit` with `data`, measure `observable` (times `weight`).
struct DiffProblem {
    Statevector initial;
    const Circuit *circuit;
    std::vector<double> data;
    const Observable *observable;
    double weight;
};

/// Differentiation view of a model on input x.
DiffProblem diff_problem(const Model &m, std::span<const double> x);

/**
 * df/dtheta by the two-term shift rule applied per gate and chained through
 * the affine angle map. Throws std::invalid_argument when a gate reading a
 * parameter slot is controlled (not a plain Pauli rotation).
 */
std::vector<double> parameter_shift_gradient(const Model &m,
                                             std::span<const double> theta,
                                             std::span<const double> x);

/// df/dtheta by reverse-mode (adjoint) state propagation.
std::vector<double> adjoint_gradient(const Model &m,
                                     std::span<const double> theta,
                                     std::span<const double> x);

/// f(x) together with df/dtheta via adjoint propagation.
double value_and_gradient(const Model &m, std::span<const double> theta,
                          std::span<const double> x, std::vector<double> &grad);

/**
 * Gradient of the mean squared loss of x -> w * f(theta, x) with respect to
 * theta (via the shift rule) and w (analytic). Returns the loss.
 */
struct LossGradient {
    double loss = 0.0;
    std::vector<double> d_theta;
    double d_weight = 0.0;
};
LossGradient parameter_shift_loss_gradient(const Model &m,
                                           std::span<const double> theta,
                                           double weight, const Dataset &data,
                                           unsigned threads = 0);

struct TrainResult {
    std::vector<double> theta;
    double weight = 1.0;
    /// Training loss before each step, plus the final loss (steps + 1 values).
    std::vector<double> loss_trace;
};

/**
 * Full-batch ADAM on (theta, w) for the model x -> w * f(theta, x), where f
 * is the model evaluated with unit observable weight. Gradients come from
 * adjoint propagation. Throws DivergenceError when the loss exceeds
 * cfg.divergence_threshold.
 */
TrainResult train_model(const Model &m, const Dataset &data,
                        const TrainConfig &cfg,
                        std::optional<std::vector<double>> initial_theta = {});

/// train_model for explicit models; the returned weight replaces w.
TrainResult train_explicit(const ExplicitModel &m, const Dataset &data,
                           const TrainConfig &cfg,
                           std::optional<std::vector<double>> initial_theta = {});

// ---------------------------------------------------------------------------
// Parity learner

/// M = ceil(32 ln(2d / delta)).
int parity_sample_count(int d, double delta);

struct ParityLearnResult {
    std::vector<int> support; ///< estimated A, ascending
    std::vector<double> losses; ///< empirical loss of f_i per component
    int samples = 0;
    bool success = false; ///< support equals the true A (when known)
};

/**
 * Threshold learner: draws M labelled samples (x, g(x)) from `sample`, scores
 * each single-slot circuit f_i(x) = x_i (the parity circuit with only theta_i
 * = pi/2) by its empirical squared loss and keeps i when the loss <= 1.5.
 */
ParityLearnResult
parity_learn(const std::function<std::pair<std::vector<double>, double>()> &sample,
             int d, double delta,
             std::optional<std::vector<int>> truth = std::nullopt);

// ---------------------------------------------------------------------------
// Classical baselines

enum class BaselineKind { Linear, Gaussian };

/// C grid shared by both baselines; KRR strength is lambda = 1 / (2 C).
const std::vector<double> &baseline_c_grid();
/// gamma multipliers; gamma = g / (n Var[x]).
const std::vector<double> &baseline_gamma_grid();

struct BaselineEntry {
    double c = 0.0;
    double gamma = 0.0; ///< 0 for the linear kernel
    double validation_loss = 0.0;
};

struct BaselineFit {
    BaselineKind kind = BaselineKind::Linear;
    double c = 0.0;
    double gamma = 0.0;
    double ridge = 0.0; ///< 1 / (2 C), added to the kernel diagonal
    std::vector<std::vector<double>> support;
    Eigen::VectorXd alpha;
    std::vector<BaselineEntry> table;

    double predict(std::span<const double> x) const;
};

double classical_kernel(BaselineKind kind, double gamma,
                        std::span<const double> a, std::span<const double> b);

/// Fits (K + ridge I) alpha = y for every grid point and keeps the point
/// with the smallest validation loss (first one on ties).
BaselineFit baseline_grid_search(BaselineKind kind, const Dataset &train,
                                 const Dataset &validation);

} // namespace qmlbk
