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

#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qmlbk/models/encoding.hpp"
#include "qmlbk/simulator/circuit.hpp"
#include "qmlbk/simulator/observable.hpp"

namespace qmlbk {

/**
 * f(x) = w * <phi(x)| V(theta)^dag O V(theta) |phi(x)>.
 *
 * The variational circuit acts on the encoding register and declares
 * parameter slots only.
 */
class ExplicitModel {
  public:
    ExplicitModel(FeatureEncoding encoding, Circuit variational,
                  Observable observable, double observable_weight = 1.0);

    const FeatureEncoding &encoding() const noexcept { return encoding_; }
    const Circuit &variational() const noexcept { return variational_; }
    const Observable &observable() const noexcept { return observable_; }
    double observable_weight() const noexcept { return weight_; }
    void set_observable_weight(double w) noexcept { weight_ = w; }

    int num_parameters() const noexcept {
        return variational_.num_parameter_slots();
    }
    int arity() const noexcept { return encoding_.arity(); }

  private:
    FeatureEncoding encoding_;
    Circuit variational_;
    Observable observable_;
    double weight_;
};

/// f(x) = <0| U(x, theta)^dag O U(x, theta) |0> for an interleaved circuit.
class ReuploadingModel {
  public:
    ReuploadingModel(Circuit circuit, Observable observable);

    const Circuit &circuit() const noexcept { return circuit_; }
    const Observable &observable() const noexcept { return observable_; }
    int num_parameters() const noexcept { return circuit_.num_parameter_slots(); }
    int arity() const noexcept { return circuit_.num_data_slots(); }

    /// True when no data-encoding gate follows the first parametric gate;
    /// such a model is an explicit model in disguise.
    bool is_degenerate() const noexcept { return degenerate_; }

    /// Number of data-encoding gates (D).
    int num_encoding_gates() const noexcept;

  private:
    Circuit circuit_;
    Observable observable_;
    bool degenerate_;
};

/// f(x) = sum_m alpha_m k(x, x_m).
struct ImplicitModel {
    FeatureEncoding encoding;
    std::vector<std::vector<double>> support;
    std::vector<double> weights;
};

using Model = std::variant<ExplicitModel, ReuploadingModel>;

int model_arity(const Model &m);
int model_num_parameters(const Model &m);
double eval_model(const Model &m, std::span<const double> theta,
                  std::span<const double> x);

Statevector encode(const FeatureEncoding &enc, std::span<const double> x);

double eval_explicit(const ExplicitModel &m, std::span<const double> theta,
                     std::span<const double> x);
/// Same as eval_explicit starting from an already encoded state.
double eval_explicit_encoded(const ExplicitModel &m,
                             std::span<const double> theta,
                             const Statevector &encoded);

double eval_reuploading(const ReuploadingModel &m,
                        std::span<const double> theta,
                        std::span<const double> x);

/// |<phi(x)|phi(x')>|^2 computed by simulation.
double kernel(const FeatureEncoding &enc, std::span<const double> x,
              std::span<const double> xp);

/// Closed form when the encoding has one, otherwise simulation.
double kernel_fast(const FeatureEncoding &enc, std::span<const double> x,
                   std::span<const double> xp);

/// Symmetric Gram matrix; states are encoded once and rows filled in parallel.
Eigen::MatrixXd gram_matrix(const FeatureEncoding &enc,
                            const std::vector<std::vector<double>> &X,
                            unsigned threads = 0);

/// Rectangular kernel matrix K[i][j] = k(A_i, B_j).
Eigen::MatrixXd cross_kernel(const FeatureEncoding &enc,
                             const std::vector<std::vector<double>> &A,
                             const std::vector<std::vector<double>> &B,
                             unsigned threads = 0);

double eval_implicit(const ImplicitModel &m, std::span<const double> x);

/// Evaluates Tr[rho(x) O] with the dense observable
/// O = sum_m alpha_m |phi(x_m)><phi(x_m)|.
double eval_implicit_via_observable(const ImplicitModel &m,
                                    std::span<const double> x);

/// L layers of per-qubit RZ, RY, RX rotations (slots 3(l n + q) + {0,1,2}
/// for RX, RY, RZ) followed by a CZ chain on nearest neighbours.
Circuit build_hardware_efficient_ansatz(int n, int layers);

/**
 * L layers of exp(i t0 Z_j Z_{j+1}) exp(i t1 Y_j Y_{j+1}) exp(i t2 X_j X_{j+1})
 * over circular neighbour pairs (j, j+1 mod n); requires n >= 2.
 */
Circuit build_heisenberg_ansatz(int n, int layers);

/// Layer count giving roughly 90 parameters for 2 <= n <= 12.
int layer_schedule(int n);

/**
 * Single-qubit parity circuit: H, then per component i
 * RY(pi/2 - theta_i) RZ(pi/2 (x_i - 1)) RY(theta_i - pi/2), measured in X.
 * theta_i = 0 hides the phase flip, theta_i = pi/2 lets x_i = -1 flip |+>.
 */
Circuit build_parity_circuit(int d);
ReuploadingModel parity_model(int d);

} // namespace qmlbk
