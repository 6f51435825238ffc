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
#include <string>
#include <string_view>
#include <vector>

#include "qmlbk/simulator/statevector.hpp"

namespace qmlbk {

enum class GateKind {
    H,
    X,
    RX,
    RY,
    RZ,
    CZ,
    CNOT,
    PauliRotation,
    /// X on targets[0] controlled on every qubit in `controls`.
    MultiControlled,
};

std::string_view gate_kind_name(GateKind kind);
GateKind gate_kind_from_name(std::string_view name);

/**
 * Where a parametric gate takes its rotation angle from.
 *
 *   Constant:  angle = offset
 *   Parameter: angle = factor * params[slot] + offset
 *   Data:      angle = factor * data[slot] + offset, or
 *              factor * data[slot] * data[slot2] + offset when slot2 >= 0
 */
struct AngleSource {
    enum class Kind { Constant, Parameter, Data };

    Kind kind = Kind::Constant;
    int slot = -1;
    int slot2 = -1;
    double factor = 1.0;
    double offset = 0.0;

    static AngleSource constant(double radians);
    static AngleSource parameter(int slot, double factor = 1.0,
                                 double offset = 0.0);
    static AngleSource data(int slot, double factor = 1.0, double offset = 0.0);
    static AngleSource data_product(int slot, int slot2, double factor = 1.0);

    double evaluate(std::span<const double> params,
                    std::span<const double> data) const;

    /// Same source with the resulting angle negated.
    AngleSource negated() const;
    /// Same source with the resulting angle multiplied by `k`.
    AngleSource scaled(double k) const;

    bool operator==(const AngleSource &) const = default;
};

struct Gate {
    GateKind kind = GateKind::H;
    std::vector<int> targets;
    std::vector<int> controls;
    AngleSource angle;
    /// PauliRotation only: one letter of {I,X,Y,Z} per target.
    std::string pauli;

    static Gate h(int q);
    static Gate x(int q);
    static Gate rx(int q, AngleSource angle);
    static Gate ry(int q, AngleSource angle);
    static Gate rz(int q, AngleSource angle);
    static Gate cz(int a, int b);
    static Gate cnot(int control, int target);
    static Gate pauli_rotation(std::vector<int> targets, std::string pauli,
                               AngleSource angle);
    static Gate multi_controlled_x(std::vector<int> controls, int target);

    /// RX, RY, RZ and PauliRotation carry an angle.
    bool is_parametric() const noexcept;
    bool uses_parameter() const noexcept;
    bool uses_data() const noexcept;

    /// Adds control qubits (any kind may be controlled).
    Gate with_controls(std::vector<int> extra) const;

    Gate inverse() const;

    std::uint64_t control_mask() const;

    /// Throws std::out_of_range / std::invalid_argument when the gate is not
    /// well formed on a register of `num_qubits`.
    void validate(int num_qubits) const;

    bool operator==(const Gate &) const = default;
};

/**
 * Generator Pauli masks of a parametric gate: the gate equals
 * exp(-i angle P / 2) on its (controlled) subspace.
 */
struct PauliMasks {
    std::uint64_t x = 0;
    std::uint64_t z = 0;
};
PauliMasks generator_masks(const Gate &gate);

/// Applies `gate` in place. `bound_angle` is ignored for fixed gates.
void apply_gate(Statevector &state, const Gate &gate, double bound_angle = 0.0);

/// apply_gate without re-validating indices against the register.
void apply_gate_unchecked(Statevector &state, const Gate &gate,
                          double bound_angle);

/**
 * Ordered gate list with declared parameter and data slot counts.
 *
 * Built incrementally with add(); every gate is validated on insertion so a
 * fully built circuit only references valid qubits and slots.
 */
class Circuit {
  public:
    explicit Circuit(int num_qubits, int num_parameter_slots = 0,
                     int num_data_slots = 0);

    Circuit &add(Gate gate);
    Circuit &append(const Circuit &other);

    int num_qubits() const noexcept { return num_qubits_; }
    int num_parameter_slots() const noexcept { return num_parameter_slots_; }
    int num_data_slots() const noexcept { return num_data_slots_; }
    const std::vector<Gate> &gates() const noexcept { return gates_; }
    std::size_t size() const noexcept { return gates_.size(); }

    /// Angle of every gate (0 for fixed gates). Throws on slot mismatch.
    std::vector<double> bind_angles(std::span<const double> params,
                                    std::span<const double> data) const;

    /// Gate-wise inverse in reverse order.
    Circuit inverse() const;

    /// Copy on a larger register (qubit indices unchanged).
    Circuit widened(int num_qubits) const;

    bool operator==(const Circuit &) const = default;

  private:
    int num_qubits_;
    int num_parameter_slots_;
    int num_data_slots_;
    std::vector<Gate> gates_;
};

/// Applies all gates of `circuit` to `state` using pre-bound angles.
void apply_bound(Statevector &state, const Circuit &circuit,
                 std::span<const double> angles);

/// Applies `circuit` to `state` in place.
void apply_circuit(Statevector &state, const Circuit &circuit,
                   std::span<const double> params,
                   std::span<const double> data);

/// Runs `circuit` from |0...0>.
Statevector run_circuit(const Circuit &circuit, std::span<const double> params,
                        std::span<const double> data);

} // namespace qmlbk
