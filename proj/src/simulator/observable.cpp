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

#include "qmlbk/simulator/observable.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qmlbk {

Observable::Observable(int num_qubits, std::vector<PauliTerm> terms,
                       std::vector<ProjectorFactor> projector, double scale)
    : num_qubits_(num_qubits), terms_(std::move(terms)),
      projector_(std::move(projector)), scale_(scale) {
    if (num_qubits < 1 || num_qubits > kMaxQubits)
        throw std::invalid_argument("observable qubit count " +
                                    std::to_string(num_qubits) +
                                    " out of range");
    for (const auto &p : projector_) {
        if (p.qubit < 0 || p.qubit >= num_qubits)
            throw std::out_of_range("projector qubit " +
                                    std::to_string(p.qubit) + " out of range");
        if (p.value != 0 && p.value != 1)
            throw std::invalid_argument("projector value must be 0 or 1");
        const std::uint64_t bit = std::uint64_t{1} << p.qubit;
        if (projector_mask_ & bit)
            throw std::invalid_argument("qubit " + std::to_string(p.qubit) +
                                        " projected twice");
        projector_mask_ |= bit;
        if (p.value)
            projector_values_ |= bit;
    }
    masks_.reserve(terms_.size());
    for (const auto &t : terms_) {
        if (t.paulis.size() != static_cast<std::size_t>(num_qubits))
            throw std::invalid_argument("Pauli string '" + t.paulis +
                                        "' does not have length " +
                                        std::to_string(num_qubits));
        Masks m;
        for (int q = 0; q < num_qubits; ++q) {
            const char c = t.paulis[static_cast<std::size_t>(q)];
            const std::uint64_t bit = std::uint64_t{1} << q;
            switch (c) {
            case 'I':
                break;
            case 'X':
                m.x |= bit;
                break;
            case 'Y':
                m.x |= bit;
                m.z |= bit;
                break;
            case 'Z':
                m.z |= bit;
                break;
            default:
                throw std::invalid_argument(std::string("invalid Pauli letter '") +
                                            c + "'");
            }
        }
        if ((m.x | m.z) & projector_mask_)
            throw std::invalid_argument("Pauli term '" + t.paulis +
                                        "' acts on a projected qubit");
        masks_.push_back(m);
    }
}

Observable Observable::single(int num_qubits, char p, int q) {
    std::string s(static_cast<std::size_t>(num_qubits), 'I');
    if (q < 0 || q >= num_qubits)
        throw std::out_of_range("observable qubit out of range");
    s[static_cast<std::size_t>(q)] = p;
    return Observable(num_qubits, {PauliTerm{1.0, s}});
}

double Observable::norm_bound() const noexcept {
    double acc = 0.0;
    for (const auto &t : terms_)
        acc += std::abs(t.weight);
    return std::abs(scale_) * acc;
}

Observable Observable::widened(int num_qubits) const {
    if (num_qubits < num_qubits_)
        throw std::invalid_argument("cannot shrink an observable");
    std::vector<PauliTerm> terms = terms_;
    for (auto &t : terms)
        t.paulis.resize(static_cast<std::size_t>(num_qubits), 'I');
    return Observable(num_qubits, std::move(terms), projector_, scale_);
}

Observable Observable::with_projector(std::vector<ProjectorFactor> extra) const {
    std::vector<ProjectorFactor> p = projector_;
    p.insert(p.end(), extra.begin(), extra.end());
    return Observable(num_qubits_, terms_, std::move(p), scale_);
}

Observable Observable::with_scale(double scale) const {
    return Observable(num_qubits_, terms_, projector_, scale);
}

void Observable::check_state(const Statevector &state) const {
    if (state.num_qubits() != num_qubits_)
        throw std::invalid_argument(
            "observable on " + std::to_string(num_qubits_) +
            " qubits applied to state on " + std::to_string(state.num_qubits()));
}

Statevector Observable::projected(const Statevector &state) const {
    Statevector scratch = state;
    if (projector_mask_ != 0)
        scratch.project(projector_mask_, projector_values_);
    return scratch;
}

double Observable::expectation(const Statevector &state) const {
    check_state(state);
    const Statevector *psi = &state;
    Statevector scratch(0);
    if (projector_mask_ != 0) {
        scratch = projected(state);
        psi = &scratch;
    }
    const auto a = psi->amplitudes();
    double total = 0.0;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        const Masks &m = masks_[k];
        complex_t acc{0.0, 0.0};
        // <psi|P|psi> = sum_b conj(psi[b ^ x]) phase(b) psi[b]
        for (std::uint64_t b = 0; b < a.size(); ++b) {
            if (a[b] == complex_t{0.0, 0.0})
                continue;
            acc += std::conj(a[b ^ m.x]) * pauli_phase(b, m.x, m.z) * a[b];
        }
        total += terms_[k].weight * acc.real();
    }
    return scale_ * total;
}

Statevector Observable::apply(const Statevector &state) const {
    check_state(state);
    const Statevector psi = projected(state);
    std::vector<complex_t> out(psi.dim(), complex_t{0.0, 0.0});
    const auto a = psi.amplitudes();
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        const Masks &m = masks_[k];
        const double w = scale_ * terms_[k].weight;
        for (std::uint64_t b = 0; b < a.size(); ++b)
            out[b ^ m.x] += w * pauli_phase(b, m.x, m.z) * a[b];
    }
    // Pauli terms leave projector qubits untouched, so `out` is already
    // inside the accepted subspace.
    return Statevector::from_amplitudes(num_qubits_, std::move(out));
}

double expectation(const Statevector &state, const Observable &obs) {
    return obs.expectation(state);
}

} // namespace qmlbk
