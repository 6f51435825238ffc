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

#include "qmlbk/models/models.hpp"

#include <array>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qmlbk/common/error.hpp"
#include "qmlbk/common/parallel.hpp"

namespace qmlbk {

namespace {

constexpr double kPi = std::numbers::pi;

// Largest register for which the dense implicit observable is materialized.
constexpr int kDenseObservableMaxQubits = 10;

} // namespace

// ---------------------------------------------------------------------------
// Model types

ExplicitModel::ExplicitModel(FeatureEncoding encoding, Circuit variational,
                             Observable observable, double observable_weight)
    : encoding_(std::move(encoding)), variational_(std::move(variational)),
      observable_(std::move(observable)), weight_(observable_weight) {
    if (variational_.num_data_slots() != 0)
        throw std::invalid_argument(
            "explicit model variational circuit may not read data slots");
    if (variational_.num_qubits() != encoding_.num_qubits())
        throw std::invalid_argument(
            "variational circuit acts on " +
            std::to_string(variational_.num_qubits()) +
            " qubits, encoding prepares " +
            std::to_string(encoding_.num_qubits()));
    if (observable_.num_qubits() != encoding_.num_qubits())
        throw std::invalid_argument("observable register does not match encoding");
}

ReuploadingModel::ReuploadingModel(Circuit circuit, Observable observable)
    : circuit_(std::move(circuit)), observable_(std::move(observable)),
      degenerate_(true) {
    if (observable_.num_qubits() != circuit_.num_qubits())
        throw std::invalid_argument("observable register does not match circuit");
    bool seen_parameter = false;
    for (const auto &g : circuit_.gates()) {
        if (g.uses_parameter())
            seen_parameter = true;
        else if (g.uses_data() && seen_parameter)
            degenerate_ = false;
    }
}

int ReuploadingModel::num_encoding_gates() const noexcept {
    int d = 0;
    for (const auto &g : circuit_.gates())
        if (g.uses_data())
            ++d;
    return d;
}

int model_arity(const Model &m) {
    return std::visit([](const auto &v) { return v.arity(); }, m);
}

int model_num_parameters(const Model &m) {
    return std::visit([](const auto &v) { return v.num_parameters(); }, m);
}

double eval_model(const Model &m, std::span<const double> theta,
                  std::span<const double> x) {
    if (const auto *e = std::get_if<ExplicitModel>(&m))
        return eval_explicit(*e, theta, x);
    return eval_reuploading(std::get<ReuploadingModel>(m), theta, x);
}

// ---------------------------------------------------------------------------
// Evaluation

Statevector encode(const FeatureEncoding &enc, std::span<const double> x) {
    return enc.encode(x);
}

double eval_explicit_encoded(const ExplicitModel &m,
                             std::span<const double> theta,
                             const Statevector &encoded) {
    Statevector state = encoded;
    apply_circuit(state, m.variational(), theta, {});
    return m.observable_weight() * m.observable().expectation(state);
}

double eval_explicit(const ExplicitModel &m, std::span<const double> theta,
                     std::span<const double> x) {
    if (theta.size() != static_cast<std::size_t>(m.num_parameters()))
        throw std::invalid_argument(
            "theta has " + std::to_string(theta.size()) +
            " entries, model declares " + std::to_string(m.num_parameters()));
    Statevector state = m.encoding().encode(x);
    apply_circuit(state, m.variational(), theta, {});
    return m.observable_weight() * m.observable().expectation(state);
}

double eval_reuploading(const ReuploadingModel &m,
                        std::span<const double> theta,
                        std::span<const double> x) {
    const Statevector state = run_circuit(m.circuit(), theta, x);
    return m.observable().expectation(state);
}

double kernel(const FeatureEncoding &enc, std::span<const double> x,
              std::span<const double> xp) {
    return fidelity(enc.encode(x), enc.encode(xp));
}

double kernel_fast(const FeatureEncoding &enc, std::span<const double> x,
                   std::span<const double> xp) {
    if (auto k = enc.analytic_kernel(x, xp))
        return *k;
    return kernel(enc, x, xp);
}

namespace {

std::vector<Statevector> encode_all(const FeatureEncoding &enc,
                                    const std::vector<std::vector<double>> &X,
                                    unsigned threads) {
    std::vector<Statevector> states(X.size(), Statevector(0));
    parallel_for(
        X.size(), [&](std::size_t i) { states[i] = enc.encode(X[i]); },
        threads);
    return states;
}

} // namespace

Eigen::MatrixXd gram_matrix(const FeatureEncoding &enc,
                            const std::vector<std::vector<double>> &X,
                            unsigned threads) {
    if (X.empty())
        throw std::invalid_argument("Gram matrix of an empty dataset");
    const auto states = encode_all(enc, X, threads);
    const std::size_t n = X.size();
    Eigen::MatrixXd K(n, n);
    parallel_for(
        n,
        [&](std::size_t i) {
            K(i, i) = fidelity(states[i], states[i]);
            for (std::size_t j = 0; j < i; ++j)
                K(i, j) = fidelity(states[i], states[j]);
        },
        threads);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            K(j, i) = K(i, j);
    return K;
}

Eigen::MatrixXd cross_kernel(const FeatureEncoding &enc,
                             const std::vector<std::vector<double>> &A,
                             const std::vector<std::vector<double>> &B,
                             unsigned threads) {
    const auto sa = encode_all(enc, A, threads);
    const auto sb = encode_all(enc, B, threads);
    Eigen::MatrixXd K(A.size(), B.size());
    parallel_for(
        A.size(),
        [&](std::size_t i) {
            for (std::size_t j = 0; j < B.size(); ++j)
                K(i, j) = fidelity(sa[i], sb[j]);
        },
        threads);
    return K;
}

double eval_implicit(const ImplicitModel &m, std::span<const double> x) {
    if (m.weights.size() != m.support.size())
        throw std::invalid_argument("implicit model has " +
                                    std::to_string(m.weights.size()) +
                                    " weights for " +
                                    std::to_string(m.support.size()) +
                                    " support points");
    const Statevector phi = m.encoding.encode(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < m.support.size(); ++i)
        acc += m.weights[i] * fidelity(phi, m.encoding.encode(m.support[i]));
    return acc;
}

double eval_implicit_via_observable(const ImplicitModel &m,
                                    std::span<const double> x) {
    if (m.weights.size() != m.support.size())
        throw std::invalid_argument("implicit model weight/support mismatch");
    const int n = m.encoding.num_qubits();
    if (n > kDenseObservableMaxQubits)
        throw BudgetError("dense implicit observable limited to " +
                          std::to_string(kDenseObservableMaxQubits) + " qubits");
    const Eigen::Index dim = Eigen::Index{1} << n;
    Eigen::MatrixXcd O = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t i = 0; i < m.support.size(); ++i) {
        const Statevector s = m.encoding.encode(m.support[i]);
        const Eigen::Map<const Eigen::VectorXcd> v(s.amplitudes().data(), dim);
        O.noalias() += m.weights[i] * (v * v.adjoint());
    }
    const Statevector phi = m.encoding.encode(x);
    const Eigen::Map<const Eigen::VectorXcd> p(phi.amplitudes().data(), dim);
    return (p.adjoint() * O * p)(0, 0).real();
}

// ---------------------------------------------------------------------------
// Ansatz builders

Circuit build_hardware_efficient_ansatz(int n, int layers) {
    if (n < 1 || layers < 1)
        throw std::invalid_argument("hardware-efficient ansatz needs n, L >= 1");
    Circuit c(n, 3 * n * layers, 0);
    for (int l = 0; l < layers; ++l) {
        for (int q = 0; q < n; ++q) {
            const int base = 3 * (l * n + q);
            // R = RX RY RZ as an operator product: RZ acts first.
            c.add(Gate::rz(q, AngleSource::parameter(base + 2)));
            c.add(Gate::ry(q, AngleSource::parameter(base + 1)));
            c.add(Gate::rx(q, AngleSource::parameter(base + 0)));
        }
        for (int q = 0; q + 1 < n; ++q)
            c.add(Gate::cz(q, q + 1));
    }
    return c;
}

Circuit build_heisenberg_ansatz(int n, int layers) {
    if (n < 2 || layers < 1)
        throw std::invalid_argument("Heisenberg ansatz needs n >= 2, L >= 1");
    Circuit c(n, 3 * n * layers, 0);
    for (int l = 0; l < layers; ++l) {
        for (int j = 0; j < n; ++j) {
            const int k = (j + 1) % n;
            const int base = 3 * (l * n + j);
            // exp(i t P) = exp(-i (-2 t) P / 2); XX acts first.
            c.add(Gate::pauli_rotation({j, k}, "XX",
                                       AngleSource::parameter(base + 2, -2.0)));
            c.add(Gate::pauli_rotation({j, k}, "YY",
                                       AngleSource::parameter(base + 1, -2.0)));
            c.add(Gate::pauli_rotation({j, k}, "ZZ",
                                       AngleSource::parameter(base + 0, -2.0)));
        }
    }
    return c;
}

int layer_schedule(int n) {
    static constexpr std::array<int, 11> kLayers = {15, 10, 7, 6, 5, 4,
                                                    4,  3,  3, 3, 3};
    if (n < 2 || n > 12)
        throw std::out_of_range("layer schedule defined for 2 <= n <= 12, got " +
                                std::to_string(n));
    return kLayers[static_cast<std::size_t>(n - 2)];
}

Circuit build_parity_circuit(int d) {
    if (d < 1)
        throw std::invalid_argument("parity circuit needs d >= 1");
    Circuit c(1, d, d);
    c.add(Gate::h(0));
    for (int i = 0; i < d; ++i) {
        c.add(Gate::ry(0, AngleSource::parameter(i, -1.0, kPi / 2)));
        c.add(Gate::rz(0, AngleSource::data(i, kPi / 2, -kPi / 2)));
        c.add(Gate::ry(0, AngleSource::parameter(i, 1.0, -kPi / 2)));
    }
    return c;
}

ReuploadingModel parity_model(int d) {
    return ReuploadingModel(build_parity_circuit(d), Observable::single(1, 'X', 0));
}

} // namespace qmlbk
