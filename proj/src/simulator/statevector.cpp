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

#include "qmlbk/simulator/statevector.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qmlbk/common/error.hpp"

namespace qmlbk {

namespace {

constexpr complex_t kI{0.0, 1.0};
constexpr complex_t kZero{0.0, 0.0};

void check_qubit(int q, int n) {
    if (q < 0 || q >= n)
        throw std::out_of_range("qubit index " + std::to_string(q) +
                                " outside register of " + std::to_string(n) +
                                " qubits");
}

// Index of the i-th basis state with a zero inserted at bit `t`.
inline std::uint64_t insert_zero(std::uint64_t i, int t) {
    const std::uint64_t low = i & ((std::uint64_t{1} << t) - 1);
    return ((i >> t) << (t + 1)) | low;
}

} // namespace

Statevector::Statevector(int num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits < 0)
        throw std::invalid_argument("negative qubit count");
    if (num_qubits > kMaxQubits)
        throw BudgetError("circuit needs " + std::to_string(num_qubits) +
                          " qubits, simulator limit is " +
                          std::to_string(kMaxQubits));
    amplitudes_.assign(std::size_t{1} << num_qubits, complex_t{0.0, 0.0});
    amplitudes_[0] = 1.0;
}

Statevector::Statevector(int num_qubits, std::vector<complex_t> amplitudes)
    : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {}

Statevector Statevector::from_amplitudes(int num_qubits,
                                         std::vector<complex_t> amplitudes) {
    if (num_qubits < 0 || num_qubits > kMaxQubits)
        throw BudgetError("qubit count " + std::to_string(num_qubits) +
                          " outside [0, " + std::to_string(kMaxQubits) + "]");
    if (amplitudes.size() != (std::size_t{1} << num_qubits))
        throw std::invalid_argument("amplitude vector length " +
                                    std::to_string(amplitudes.size()) +
                                    " != 2^" + std::to_string(num_qubits));
    return Statevector(num_qubits, std::move(amplitudes));
}

Statevector Statevector::basis(int num_qubits, std::uint64_t index) {
    Statevector s(num_qubits);
    if (index >= s.dim())
        throw std::out_of_range("basis index outside register");
    s.amplitudes_[0] = 0.0;
    s.amplitudes_[index] = 1.0;
    return s;
}

double Statevector::squared_norm() const noexcept {
    double acc = 0.0;
    for (const auto &a : amplitudes_)
        acc += std::norm(a);
    return acc;
}

double Statevector::norm() const noexcept { return std::sqrt(squared_norm()); }

void Statevector::normalize() {
    const double n = norm();
    if (n == 0.0)
        throw std::domain_error("cannot normalize the zero vector");
    for (auto &a : amplitudes_)
        a /= n;
}

void Statevector::apply_matrix(int target, const Matrix2 &m,
                               std::uint64_t control_mask) {
    check_qubit(target, num_qubits_);
    const std::uint64_t bit = std::uint64_t{1} << target;
    const std::uint64_t half = amplitudes_.size() >> 1;
    for (std::uint64_t i = 0; i < half; ++i) {
        const std::uint64_t i0 = insert_zero(i, target);
        if ((i0 & control_mask) != control_mask)
            continue;
        const std::uint64_t i1 = i0 | bit;
        const complex_t a0 = amplitudes_[i0];
        const complex_t a1 = amplitudes_[i1];
        if (a0 == kZero && a1 == kZero)
            continue;
        amplitudes_[i0] = m[0] * a0 + m[1] * a1;
        amplitudes_[i1] = m[2] * a0 + m[3] * a1;
    }
}

void Statevector::apply_x(int target, std::uint64_t control_mask) {
    check_qubit(target, num_qubits_);
    const std::uint64_t bit = std::uint64_t{1} << target;
    const std::uint64_t half = amplitudes_.size() >> 1;
    for (std::uint64_t i = 0; i < half; ++i) {
        const std::uint64_t i0 = insert_zero(i, target);
        if ((i0 & control_mask) != control_mask)
            continue;
        std::swap(amplitudes_[i0], amplitudes_[i0 | bit]);
    }
}

void Statevector::apply_h(int target, std::uint64_t control_mask) {
    const double r = 1.0 / std::sqrt(2.0);
    apply_matrix(target, {r, r, r, -r}, control_mask);
}

void Statevector::apply_rx(int target, double angle,
                           std::uint64_t control_mask) {
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    apply_matrix(target, {c, -kI * s, -kI * s, c}, control_mask);
}

void Statevector::apply_ry(int target, double angle,
                           std::uint64_t control_mask) {
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    apply_matrix(target, {c, -s, s, c}, control_mask);
}

void Statevector::apply_rz(int target, double angle,
                           std::uint64_t control_mask) {
    check_qubit(target, num_qubits_);
    const std::uint64_t bit = std::uint64_t{1} << target;
    const complex_t p0 = std::polar(1.0, -angle / 2);
    const complex_t p1 = std::polar(1.0, angle / 2);
    for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
        if ((i & control_mask) != control_mask)
            continue;
        amplitudes_[i] *= (i & bit) ? p1 : p0;
    }
}

void Statevector::apply_cz(int a, int b, std::uint64_t control_mask) {
    check_qubit(a, num_qubits_);
    check_qubit(b, num_qubits_);
    const std::uint64_t mask =
        control_mask | (std::uint64_t{1} << a) | (std::uint64_t{1} << b);
    for (std::uint64_t i = 0; i < amplitudes_.size(); ++i)
        if ((i & mask) == mask)
            amplitudes_[i] = -amplitudes_[i];
}

complex_t pauli_phase(std::uint64_t index, std::uint64_t x_mask,
                      std::uint64_t z_mask) {
    static constexpr complex_t kPowI[4] = {
        {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const int num_y = std::popcount(x_mask & z_mask);
    const int z_parity = std::popcount(index & z_mask) & 1;
    return kPowI[(num_y + 2 * z_parity) & 3];
}

void Statevector::apply_pauli_rotation(std::uint64_t x_mask,
                                       std::uint64_t z_mask, double angle,
                                       std::uint64_t control_mask) {
    const std::uint64_t limit = amplitudes_.size();
    if (((x_mask | z_mask | control_mask) >> num_qubits_) != 0)
        throw std::out_of_range("Pauli rotation mask outside register");
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    if (x_mask == 0) {
        // Diagonal: P|b> = (-1)^{|b & z|} |b>.
        const complex_t even = {c, -s}, odd = {c, s};
        for (std::uint64_t i = 0; i < limit; ++i) {
            if ((i & control_mask) != control_mask)
                continue;
            amplitudes_[i] *= (std::popcount(i & z_mask) & 1) ? odd : even;
        }
        return;
    }
    // Pair b with b ^ x_mask; visit each pair once through its member whose
    // lowest x bit is clear.
    const std::uint64_t pivot = x_mask & (~x_mask + 1);
    for (std::uint64_t i = 0; i < limit; ++i) {
        if ((i & pivot) || (i & control_mask) != control_mask)
            continue;
        const std::uint64_t j = i ^ x_mask;
        const complex_t ai = amplitudes_[i];
        const complex_t aj = amplitudes_[j];
        // (P a)[i] = phase(j) a[j], (P a)[j] = phase(i) a[i].
        amplitudes_[i] = c * ai - kI * s * pauli_phase(j, x_mask, z_mask) * aj;
        amplitudes_[j] = c * aj - kI * s * pauli_phase(i, x_mask, z_mask) * ai;
    }
}

void Statevector::apply_diagonal(std::span<const DiagonalFactor> factors) {
    for (const auto &f : factors)
        if (((f.control | f.z) >> num_qubits_) != 0)
            throw std::out_of_range("diagonal factor mask outside register");
    for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
        if (amplitudes_[i] == kZero)
            continue;
        complex_t phase{1.0, 0.0};
        for (const auto &f : factors) {
            if ((i & f.control) != f.control)
                continue;
            phase *= (std::popcount(i & f.z) & 1) ? f.odd : f.even;
        }
        amplitudes_[i] *= phase;
    }
}

void Statevector::apply_pauli(std::uint64_t x_mask, std::uint64_t z_mask) {
    if (((x_mask | z_mask) >> num_qubits_) != 0)
        throw std::out_of_range("Pauli mask outside register");
    if (x_mask == 0) {
        for (std::uint64_t i = 0; i < amplitudes_.size(); ++i)
            if (std::popcount(i & z_mask) & 1)
                amplitudes_[i] = -amplitudes_[i];
        return;
    }
    const std::uint64_t pivot = x_mask & (~x_mask + 1);
    for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
        if (i & pivot)
            continue;
        const std::uint64_t j = i ^ x_mask;
        const complex_t ai = amplitudes_[i];
        amplitudes_[i] = pauli_phase(j, x_mask, z_mask) * amplitudes_[j];
        amplitudes_[j] = pauli_phase(i, x_mask, z_mask) * ai;
    }
}

void Statevector::project(std::uint64_t mask, std::uint64_t values) {
    for (std::uint64_t i = 0; i < amplitudes_.size(); ++i)
        if ((i & mask) != (values & mask))
            amplitudes_[i] = 0.0;
}

complex_t inner_product(const Statevector &a, const Statevector &b) {
    if (a.num_qubits() != b.num_qubits())
        throw std::invalid_argument("inner product of states on " +
                                    std::to_string(a.num_qubits()) + " and " +
                                    std::to_string(b.num_qubits()) +
                                    " qubits");
    complex_t acc{0.0, 0.0};
    const auto x = a.amplitudes();
    const auto y = b.amplitudes();
    for (std::size_t i = 0; i < x.size(); ++i)
        acc += std::conj(x[i]) * y[i];
    return acc;
}

double fidelity(const Statevector &a, const Statevector &b) {
    return std::norm(inner_product(a, b));
}

} // namespace qmlbk
