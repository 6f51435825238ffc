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

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace qmlbk {

using complex_t = std::complex<double>;

/// Largest register the simulator accepts (2^22 amplitudes, 64 MiB).
inline constexpr int kMaxQubits = 22;

/// Row-major 2x2 complex matrix.
using Matrix2 = std::array<complex_t, 4>;

/**
 * Diagonal factor of a fused gate run: on indices i with all `control` bits
 * set, multiply by `odd` when popcount(i & z) is odd and `even` otherwise.
 */
struct DiagonalFactor {
    std::uint64_t control = 0;
    std::uint64_t z = 0;
    complex_t even{1.0, 0.0};
    complex_t odd{1.0, 0.0};
};

/**
 * Dense n-qubit state.
 *
 * Amplitude index bit q is the computational-basis value of qubit q, so
 * qubit 0 is the least significant bit of the index. In ket notation we
 * write qubit 0 first: |10> means qubit 0 = 1, qubit 1 = 0, i.e. index 1.
 *
 * All gate kernels act in place with bit-masked strides; `control_mask`
 * restricts the action to indices whose masked bits are all 1.
 */
class Statevector {
  public:
    /// |0...0> on num_qubits qubits. Throws BudgetError above kMaxQubits.
    explicit Statevector(int num_qubits);

    /// Takes ownership of raw amplitudes; the length must be 2^num_qubits.
    /// No normalization is applied.
    static Statevector from_amplitudes(int num_qubits,
                                       std::vector<complex_t> amplitudes);

    /// Basis state |index>.
    static Statevector basis(int num_qubits, std::uint64_t index);

    int num_qubits() const noexcept { return num_qubits_; }
    std::size_t dim() const noexcept { return amplitudes_.size(); }

    std::span<const complex_t> amplitudes() const noexcept {
        return amplitudes_;
    }
    std::span<complex_t> amplitudes() noexcept { return amplitudes_; }
    complex_t operator[](std::size_t i) const { return amplitudes_[i]; }
    complex_t &operator[](std::size_t i) { return amplitudes_[i]; }

    double squared_norm() const noexcept;
    double norm() const noexcept;
    void normalize();

    void apply_matrix(int target, const Matrix2 &m,
                      std::uint64_t control_mask = 0);
    void apply_x(int target, std::uint64_t control_mask = 0);
    void apply_h(int target, std::uint64_t control_mask = 0);
    void apply_rx(int target, double angle, std::uint64_t control_mask = 0);
    void apply_ry(int target, double angle, std::uint64_t control_mask = 0);
    void apply_rz(int target, double angle, std::uint64_t control_mask = 0);
    void apply_cz(int a, int b, std::uint64_t control_mask = 0);

    /// exp(-i angle P / 2) for the Pauli string described by its X and Z
    /// support masks (Y sets both bits).
    void apply_pauli_rotation(std::uint64_t x_mask, std::uint64_t z_mask,
                              double angle, std::uint64_t control_mask = 0);

    /// Applies a product of diagonal factors in one sweep.
    void apply_diagonal(std::span<const DiagonalFactor> factors);

    /// Applies the Pauli string itself (not a rotation).
    void apply_pauli(std::uint64_t x_mask, std::uint64_t z_mask);

    /// Zeroes every amplitude whose bits under `mask` differ from `values`.
    void project(std::uint64_t mask, std::uint64_t values);

  private:
    Statevector(int num_qubits, std::vector<complex_t> amplitudes);

    int num_qubits_;
    std::vector<complex_t> amplitudes_;
};

/// <a|b>. Throws std::invalid_argument on qubit-count mismatch.
complex_t inner_product(const Statevector &a, const Statevector &b);

/// |<a|b>|^2.
double fidelity(const Statevector &a, const Statevector &b);

/// Phase of P|b> = phase * |b ^ x_mask> for Pauli masks (Y = i X Z).
complex_t pauli_phase(std::uint64_t index, std::uint64_t x_mask,
                      std::uint64_t z_mask);

} // namespace qmlbk
