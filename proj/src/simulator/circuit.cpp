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

#include "qmlbk/simulator/circuit.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <stdexcept>
#include <string>

namespace qmlbk {

namespace {

struct KindName {
    GateKind kind;
    std::string_view name;
};

constexpr std::array<KindName, 9> kKindNames = {{
    {GateKind::H, "H"},
    {GateKind::X, "X"},
    {GateKind::RX, "RX"},
    {GateKind::RY, "RY"},
    {GateKind::RZ, "RZ"},
    {GateKind::CZ, "CZ"},
    {GateKind::CNOT, "CNOT"},
    {GateKind::PauliRotation, "PauliRotation"},
    {GateKind::MultiControlled, "MultiControlled"},
}};

std::size_t expected_targets(GateKind kind) {
    switch (kind) {
    case GateKind::CZ:
        return 2;
    case GateKind::PauliRotation:
        return 0; // any positive count
    default:
        return 1;
    }
}

} // namespace

std::string_view gate_kind_name(GateKind kind) {
    for (const auto &k : kKindNames)
        if (k.kind == kind)
            return k.name;
    return "?";
}

GateKind gate_kind_from_name(std::string_view name) {
    for (const auto &k : kKindNames)
        if (k.name == name)
            return k.kind;
    throw std::invalid_argument("unknown gate kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// AngleSource

AngleSource AngleSource::constant(double radians) {
    AngleSource a;
    a.kind = Kind::Constant;
    a.factor = 0.0;
    a.offset = radians;
    return a;
}

AngleSource AngleSource::parameter(int slot, double factor, double offset) {
    AngleSource a;
    a.kind = Kind::Parameter;
    a.slot = slot;
    a.factor = factor;
    a.offset = offset;
    return a;
}

AngleSource AngleSource::data(int slot, double factor, double offset) {
    AngleSource a;
    a.kind = Kind::Data;
    a.slot = slot;
    a.factor = factor;
    a.offset = offset;
    return a;
}

AngleSource AngleSource::data_product(int slot, int slot2, double factor) {
    AngleSource a = data(slot, factor);
    a.slot2 = slot2;
    return a;
}

double AngleSource::evaluate(std::span<const double> params,
                             std::span<const double> data) const {
    switch (kind) {
    case Kind::Constant:
        return offset;
    case Kind::Parameter:
        return factor * params[static_cast<std::size_t>(slot)] + offset;
    case Kind::Data: {
        double v = data[static_cast<std::size_t>(slot)];
        if (slot2 >= 0)
            v *= data[static_cast<std::size_t>(slot2)];
        return factor * v + offset;
    }
    }
    return 0.0;
}

AngleSource AngleSource::negated() const { return scaled(-1.0); }

AngleSource AngleSource::scaled(double k) const {
    AngleSource a = *this;
    a.factor *= k;
    a.offset *= k;
    if (a.kind == Kind::Constant)
        a.factor = 0.0;
    return a;
}

// ---------------------------------------------------------------------------
// Gate

Gate Gate::h(int q) { return Gate{GateKind::H, {q}, {}, {}, {}}; }
Gate Gate::x(int q) { return Gate{GateKind::X, {q}, {}, {}, {}}; }
Gate Gate::rx(int q, AngleSource a) { return Gate{GateKind::RX, {q}, {}, a, {}}; }
Gate Gate::ry(int q, AngleSource a) { return Gate{GateKind::RY, {q}, {}, a, {}}; }
Gate Gate::rz(int q, AngleSource a) { return Gate{GateKind::RZ, {q}, {}, a, {}}; }
Gate Gate::cz(int a, int b) { return Gate{GateKind::CZ, {a, b}, {}, {}, {}}; }
Gate Gate::cnot(int c, int t) { return Gate{GateKind::CNOT, {t}, {c}, {}, {}}; }

Gate Gate::pauli_rotation(std::vector<int> targets, std::string pauli,
                          AngleSource a) {
    return Gate{GateKind::PauliRotation, std::move(targets), {}, a,
                std::move(pauli)};
}

Gate Gate::multi_controlled_x(std::vector<int> controls, int target) {
    return Gate{GateKind::MultiControlled, {target}, std::move(controls), {}, {}};
}

bool Gate::is_parametric() const noexcept {
    return kind == GateKind::RX || kind == GateKind::RY ||
           kind == GateKind::RZ || kind == GateKind::PauliRotation;
}

bool Gate::uses_parameter() const noexcept {
    return is_parametric() && angle.kind == AngleSource::Kind::Parameter;
}

bool Gate::uses_data() const noexcept {
    return is_parametric() && angle.kind == AngleSource::Kind::Data;
}

Gate Gate::with_controls(std::vector<int> extra) const {
    Gate g = *this;
    g.controls.insert(g.controls.end(), extra.begin(), extra.end());
    return g;
}

Gate Gate::inverse() const {
    Gate g = *this;
    if (is_parametric())
        g.angle = angle.negated();
    return g;
}

std::uint64_t Gate::control_mask() const {
    std::uint64_t m = 0;
    for (int c : controls)
        m |= std::uint64_t{1} << c;
    return m;
}

void Gate::validate(int num_qubits) const {
    const auto name = std::string(gate_kind_name(kind));
    const std::size_t want = expected_targets(kind);
    if (want != 0 && targets.size() != want)
        throw std::invalid_argument(name + " expects " + std::to_string(want) +
                                    " target(s), got " +
                                    std::to_string(targets.size()));
    if (targets.empty())
        throw std::invalid_argument(name + " has no targets");
    if (kind == GateKind::CNOT && controls.size() != 1)
        throw std::invalid_argument("CNOT expects exactly one control");
    if (kind == GateKind::MultiControlled && controls.empty())
        throw std::invalid_argument("MultiControlled expects >= 1 control");
    if (kind == GateKind::PauliRotation) {
        if (pauli.size() != targets.size())
            throw std::invalid_argument(
                "PauliRotation label length differs from target count");
        for (char c : pauli)
            if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
                throw std::invalid_argument(
                    std::string("invalid Pauli letter '") + c + "'");
    }
    std::vector<int> all = targets;
    all.insert(all.end(), controls.begin(), controls.end());
    for (int q : all)
        if (q < 0 || q >= num_qubits)
            throw std::out_of_range(name + " references qubit " +
                                    std::to_string(q) + " outside register of " +
                                    std::to_string(num_qubits));
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw std::invalid_argument(name +
                                    " targets and controls must be distinct");
}

PauliMasks generator_masks(const Gate &gate) {
    PauliMasks m;
    auto add = [&m](int q, char p) {
        const std::uint64_t b = std::uint64_t{1} << q;
        if (p == 'X' || p == 'Y')
            m.x |= b;
        if (p == 'Z' || p == 'Y')
            m.z |= b;
    };
    switch (gate.kind) {
    case GateKind::RX:
        add(gate.targets[0], 'X');
        break;
    case GateKind::RY:
        add(gate.targets[0], 'Y');
        break;
    case GateKind::RZ:
        add(gate.targets[0], 'Z');
        break;
    case GateKind::PauliRotation:
        for (std::size_t i = 0; i < gate.targets.size(); ++i)
            add(gate.targets[i], gate.pauli[i]);
        break;
    default:
        throw std::invalid_argument("gate " +
                                    std::string(gate_kind_name(gate.kind)) +
                                    " has no rotation generator");
    }
    return m;
}

void apply_gate_unchecked(Statevector &state, const Gate &gate,
                          double bound_angle) {
    const std::uint64_t ctrl = gate.control_mask();
    switch (gate.kind) {
    case GateKind::H:
        state.apply_h(gate.targets[0], ctrl);
        break;
    case GateKind::X:
    case GateKind::CNOT:
    case GateKind::MultiControlled:
        state.apply_x(gate.targets[0], ctrl);
        break;
    case GateKind::RX:
        state.apply_rx(gate.targets[0], bound_angle, ctrl);
        break;
    case GateKind::RY:
        state.apply_ry(gate.targets[0], bound_angle, ctrl);
        break;
    case GateKind::RZ:
        state.apply_rz(gate.targets[0], bound_angle, ctrl);
        break;
    case GateKind::CZ:
        state.apply_cz(gate.targets[0], gate.targets[1], ctrl);
        break;
    case GateKind::PauliRotation: {
        const PauliMasks m = generator_masks(gate);
        state.apply_pauli_rotation(m.x, m.z, bound_angle, ctrl);
        break;
    }
    }
}

void apply_gate(Statevector &state, const Gate &gate, double bound_angle) {
    gate.validate(state.num_qubits());
    apply_gate_unchecked(state, gate, bound_angle);
}

// ---------------------------------------------------------------------------
// Circuit

Circuit::Circuit(int num_qubits, int num_parameter_slots, int num_data_slots)
    : num_qubits_(num_qubits), num_parameter_slots_(num_parameter_slots),
      num_data_slots_(num_data_slots) {
    if (num_qubits < 1)
        throw std::invalid_argument("circuit needs at least one qubit");
    if (num_parameter_slots < 0 || num_data_slots < 0)
        throw std::invalid_argument("negative slot count");
}

Circuit &Circuit::add(Gate gate) {
    gate.validate(num_qubits_);
    if (gate.is_parametric()) {
        const AngleSource &a = gate.angle;
        if (a.kind == AngleSource::Kind::Parameter &&
            (a.slot < 0 || a.slot >= num_parameter_slots_))
            throw std::out_of_range("parameter slot " + std::to_string(a.slot) +
                                    " >= declared " +
                                    std::to_string(num_parameter_slots_));
        if (a.kind == AngleSource::Kind::Data &&
            (a.slot < 0 || a.slot >= num_data_slots_ ||
             a.slot2 >= num_data_slots_))
            throw std::out_of_range("data slot " + std::to_string(a.slot) +
                                    " >= declared " +
                                    std::to_string(num_data_slots_));
    }
    gates_.push_back(std::move(gate));
    return *this;
}

Circuit &Circuit::append(const Circuit &other) {
    for (const auto &g : other.gates())
        add(g);
    return *this;
}

std::vector<double> Circuit::bind_angles(std::span<const double> params,
                                         std::span<const double> data) const {
    if (params.size() != static_cast<std::size_t>(num_parameter_slots_))
        throw std::invalid_argument(
            "parameter vector has " + std::to_string(params.size()) +
            " entries, circuit declares " + std::to_string(num_parameter_slots_));
    if (data.size() != static_cast<std::size_t>(num_data_slots_))
        throw std::invalid_argument(
            "data vector has " + std::to_string(data.size()) +
            " entries, circuit declares " + std::to_string(num_data_slots_));
    std::vector<double> angles(gates_.size(), 0.0);
    for (std::size_t i = 0; i < gates_.size(); ++i)
        if (gates_[i].is_parametric())
            angles[i] = gates_[i].angle.evaluate(params, data);
    return angles;
}

Circuit Circuit::inverse() const {
    Circuit inv(num_qubits_, num_parameter_slots_, num_data_slots_);
    for (auto it = gates_.rbegin(); it != gates_.rend(); ++it)
        inv.gates_.push_back(it->inverse());
    return inv;
}

Circuit Circuit::widened(int num_qubits) const {
    if (num_qubits < num_qubits_)
        throw std::invalid_argument("cannot shrink a circuit register");
    Circuit c(num_qubits, num_parameter_slots_, num_data_slots_);
    c.gates_ = gates_;
    return c;
}

namespace {

// Diagonal form of RZ, CZ and Z-type Pauli rotations; nullopt otherwise.
std::optional<DiagonalFactor> diagonal_factor(const Gate &g, double angle) {
    DiagonalFactor f;
    f.control = g.control_mask();
    switch (g.kind) {
    case GateKind::RZ:
    case GateKind::PauliRotation: {
        const PauliMasks m = generator_masks(g);
        if (m.x != 0)
            return std::nullopt;
        f.z = m.z;
        f.even = std::polar(1.0, -angle / 2);
        f.odd = std::polar(1.0, angle / 2);
        return f;
    }
    case GateKind::CZ:
        f.control |= (std::uint64_t{1} << g.targets[0]) |
                     (std::uint64_t{1} << g.targets[1]);
        f.even = -1.0;
        return f;
    default:
        return std::nullopt;
    }
}

} // namespace

void apply_bound(Statevector &state, const Circuit &circuit,
                 std::span<const double> angles) {
    if (state.num_qubits() != circuit.num_qubits())
        throw std::invalid_argument(
            "state has " + std::to_string(state.num_qubits()) +
            " qubits, circuit has " + std::to_string(circuit.num_qubits()));
    const auto &gates = circuit.gates();
    // Gates were validated against this register size by Circuit::add.
    // Consecutive diagonal gates commute and are applied in one sweep.
    std::vector<DiagonalFactor> run;
    auto flush = [&] {
        if (!run.empty())
            state.apply_diagonal(run);
        run.clear();
    };
    for (std::size_t i = 0; i < gates.size(); ++i) {
        if (auto f = diagonal_factor(gates[i], angles[i])) {
            run.push_back(*f);
            continue;
        }
        flush();
        apply_gate_unchecked(state, gates[i], angles[i]);
    }
    flush();
}

void apply_circuit(Statevector &state, const Circuit &circuit,
                   std::span<const double> params,
                   std::span<const double> data) {
    const auto angles = circuit.bind_angles(params, data);
    apply_bound(state, circuit, angles);
}

Statevector run_circuit(const Circuit &circuit, std::span<const double> params,
                        std::span<const double> data) {
    Statevector state(circuit.num_qubits());
    apply_circuit(state, circuit, params, data);
    return state;
}

} // namespace qmlbk
