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
#include <string>
#include <utility>
#include <vector>

#include "qmlbk/simulator/statevector.hpp"

namespace qmlbk {

struct PauliTerm {
    double weight = 1.0;
    /// One letter of {I,X,Y,Z} per qubit; character q acts on qubit q.
    std::string paulis;

    bool operator==(const PauliTerm &) const = default;
};

/// Qubit that must read `value` for a basis state to be accepted.
struct ProjectorFactor {
    int qubit = 0;
    int value = 0;

    bool operator==(const ProjectorFactor &) const = default;
};

/**
 * scale * (sum_k w_k P_k) (x) prod_j |b_j><b_j|_{q_j}.
 *
 * Pauli terms must act as the identity on every projector qubit, so the
 * projector commutes with the Pauli sum and the expectation is
 * scale * <Pi psi| sum_k w_k P_k |Pi psi>.
 */
class Observable {
  public:
    Observable(int num_qubits, std::vector<PauliTerm> terms,
               std::vector<ProjectorFactor> projector = {}, double scale = 1.0);

    /// Single Pauli letter `p` on qubit `q`, weight 1.
    static Observable single(int num_qubits, char p, int q);

    int num_qubits() const noexcept { return num_qubits_; }
    const std::vector<PauliTerm> &terms() const noexcept { return terms_; }
    const std::vector<ProjectorFactor> &projector() const noexcept {
        return projector_;
    }
    double scale() const noexcept { return scale_; }

    /// scale * sum |w_k|, an upper bound on the spectral norm.
    double norm_bound() const noexcept;

    /// Same observable on a larger register (identity on the new qubits).
    Observable widened(int num_qubits) const;
    Observable with_projector(std::vector<ProjectorFactor> extra) const;
    Observable with_scale(double scale) const;

    /// Real expectation value; the imaginary residue is discarded.
    double expectation(const Statevector &state) const;

    /// Returns scale * Pi (sum_k w_k P_k) Pi |state>.
    Statevector apply(const Statevector &state) const;

    bool operator==(const Observable &) const = default;

  private:
    struct Masks {
        std::uint64_t x = 0;
        std::uint64_t z = 0;
    };

    void check_state(const Statevector &state) const;
    Statevector projected(const Statevector &state) const;

    int num_qubits_;
    std::vector<PauliTerm> terms_;
    std::vector<ProjectorFactor> projector_;
    double scale_;
    std::vector<Masks> masks_;
    std::uint64_t projector_mask_ = 0;
    std::uint64_t projector_values_ = 0;
};

/// Free-function form of Observable::expectation.
double expectation(const Statevector &state, const Observable &obs);

} // namespace qmlbk
