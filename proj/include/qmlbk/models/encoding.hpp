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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qmlbk/simulator/circuit.hpp"
#include "qmlbk/simulator/statevector.hpp"

namespace qmlbk {

enum class EncodingKind {
    Havlicek,
    BitString,
    GadgetProduct,
    ParityAngles,
    /// Any fixed circuit whose angles come from data slots only.
    Circuit,
};

std::string_view encoding_kind_name(EncodingKind kind);

/**
 * A fixed feature map x -> |phi(x)>.
 *
 * Circuit-backed kinds (Havlicek, GadgetProduct, ParityAngles, Circuit) keep
 * a data-slot circuit that is run from |0...0>. BitString has no such
 * circuit: the fixed-point bits are a nonlinear function of x, so a concrete
 * X-gate circuit is produced per input by bound_circuit().
 */
class FeatureEncoding {
  public:
    /// U_z(x) H U_z(x) H |0> with
    /// U_z(x) = exp(-i pi [sum_i x_i Z_i + sum_{i<j} x_i x_j Z_i Z_j]).
    static FeatureEncoding havlicek(int num_qubits);

    /**
     * Fixed-point bit registers.
     *
     * Register r (p qubits, starting at leading_qubits + r*p) holds the p
     * most significant bits of v_r / range, where v_r = components[r](x)
     * wrapped into [0, range) and rounded to the nearest multiple of
     * range / 2^p (modulo 2^p). The first bit is the most significant.
     */
    static FeatureEncoding bit_string(std::vector<AngleSource> components,
                                      int arity, int bits, double range,
                                      int leading_qubits);
    /// d components x_i, p bits each, values in [0, range).
    static FeatureEncoding bit_string(int d, int bits, double range = 1.0);

    /**
     * Product of phase-kicked ancillas
     * |0^{leading}> (x)_{i,j} RZ(2^{j} h_i(x)) |+>,  j = 0..N-1,
     * with ancilla (i, j) on qubit leading + i*N + j.
     */
    static FeatureEncoding gadget_product(std::vector<AngleSource> angles,
                                          int arity, int repetitions,
                                          int leading_qubits);

    /// Encoding block of the single-qubit parity circuit with all variational
    /// angles at zero; see build_parity_circuit().
    static FeatureEncoding parity_angles(int d);

    static FeatureEncoding from_circuit(Circuit circuit);

    EncodingKind kind() const noexcept { return kind_; }
    int num_qubits() const noexcept { return num_qubits_; }
    int arity() const noexcept { return arity_; }
    int bits() const noexcept { return bits_; }
    int repetitions() const noexcept { return repetitions_; }
    double range() const noexcept { return range_; }
    int leading_qubits() const noexcept { return leading_qubits_; }
    const std::vector<AngleSource> &components() const noexcept {
        return components_;
    }
    /// Data-slot circuit for circuit-backed kinds; throws for BitString.
    const Circuit &circuit() const;

    Statevector encode(std::span<const double> x) const;

    /// Fully concrete circuit preparing encode(x) from |0...0>.
    Circuit bound_circuit(std::span<const double> x) const;

    /// Register values (one integer per component) of a BitString encoding.
    std::vector<std::uint64_t> bit_values(std::span<const double> x) const;

    /// Closed-form kernel when one exists (BitString: Kronecker delta of the
    /// bit registers; GadgetProduct: prod cos^2(2^j (h_i(x) - h_i(x')) / 2)).
    std::optional<double> analytic_kernel(std::span<const double> x,
                                          std::span<const double> xp) const;

  private:
    FeatureEncoding(EncodingKind kind, int num_qubits, int arity);
    void check_arity(std::span<const double> x) const;

    EncodingKind kind_;
    int num_qubits_;
    int arity_;
    int bits_ = 0;
    int repetitions_ = 0;
    double range_ = 1.0;
    int leading_qubits_ = 0;
    std::vector<AngleSource> components_;
    std::optional<Circuit> circuit_;
};

/// Havlicek U_z(x) block appended to `c` on qubits [0, n) using data slots
/// [0, n).
void append_havlicek_uz(Circuit &c, int n);

} // namespace qmlbk
