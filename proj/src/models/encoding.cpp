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

#include "qmlbk/models/encoding.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qmlbk/common/error.hpp"

namespace qmlbk {

namespace {

constexpr double kPi = std::numbers::pi;

void check_data_source(const AngleSource &a, int arity) {
    if (a.kind == AngleSource::Kind::Parameter)
        throw std::invalid_argument(
            "encoding angle functions may not reference parameter slots");
    if (a.kind == AngleSource::Kind::Data &&
        (a.slot < 0 || a.slot >= arity || a.slot2 >= arity))
        throw std::out_of_range("encoding angle references data slot " +
                                std::to_string(a.slot) + " outside arity " +
                                std::to_string(arity));
}

void check_register(int qubits) {
    if (qubits > kMaxQubits)
        throw BudgetError("encoding needs " + std::to_string(qubits) +
                          " qubits, simulator limit is " +
                          std::to_string(kMaxQubits));
}

} // namespace

std::string_view encoding_kind_name(EncodingKind kind) {
    switch (kind) {
    case EncodingKind::Havlicek:
        return "Havlicek";
    case EncodingKind::BitString:
        return "BitString";
    case EncodingKind::GadgetProduct:
        return "GadgetProduct";
    case EncodingKind::ParityAngles:
        return "ParityAngles";
    case EncodingKind::Circuit:
        return "Circuit";
    }
    return "?";
}

FeatureEncoding::FeatureEncoding(EncodingKind kind, int num_qubits, int arity)
    : kind_(kind), num_qubits_(num_qubits), arity_(arity) {}

void append_havlicek_uz(Circuit &c, int n) {
    for (int i = 0; i < n; ++i)
        c.add(Gate::rz(i, AngleSource::data(i, 2 * kPi)));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            c.add(Gate::pauli_rotation({i, j}, "ZZ",
                                       AngleSource::data_product(i, j, 2 * kPi)));
}

FeatureEncoding FeatureEncoding::havlicek(int num_qubits) {
    if (num_qubits < 1)
        throw std::invalid_argument("Havlicek encoding needs n >= 1");
    check_register(num_qubits);
    FeatureEncoding e(EncodingKind::Havlicek, num_qubits, num_qubits);
    Circuit c(num_qubits, 0, num_qubits);
    for (int rep = 0; rep < 2; ++rep) {
        for (int q = 0; q < num_qubits; ++q)
            c.add(Gate::h(q));
        append_havlicek_uz(c, num_qubits);
    }
    e.circuit_ = std::move(c);
    return e;
}

FeatureEncoding FeatureEncoding::bit_string(std::vector<AngleSource> components,
                                            int arity, int bits, double range,
                                            int leading_qubits) {
    if (bits < 1 || bits > 62)
        throw std::invalid_argument("bit precision must be in [1, 62]");
    if (!(range > 0.0))
        throw std::invalid_argument("bit-string range must be positive");
    if (components.empty())
        throw std::invalid_argument("bit-string encoding needs >= 1 component");
    if (leading_qubits < 0)
        throw std::invalid_argument("negative leading qubit count");
    for (const auto &a : components)
        check_data_source(a, arity);
    const long long total =
        leading_qubits + static_cast<long long>(components.size()) * bits;
    check_register(static_cast<int>(std::min<long long>(total, 1 << 20)));
    FeatureEncoding e(EncodingKind::BitString, static_cast<int>(total), arity);
    e.bits_ = bits;
    e.range_ = range;
    e.leading_qubits_ = leading_qubits;
    e.components_ = std::move(components);
    return e;
}

FeatureEncoding FeatureEncoding::bit_string(int d, int bits, double range) {
    std::vector<AngleSource> comps;
    for (int i = 0; i < d; ++i)
        comps.push_back(AngleSource::data(i));
    return bit_string(std::move(comps), d, bits, range, 0);
}

FeatureEncoding FeatureEncoding::gadget_product(std::vector<AngleSource> angles,
                                                int arity, int repetitions,
                                                int leading_qubits) {
    if (repetitions < 1)
        throw std::invalid_argument("gadget product needs N >= 1");
    if (angles.empty())
        throw std::invalid_argument("gadget product needs >= 1 angle");
    if (leading_qubits < 0)
        throw std::invalid_argument("negative leading qubit count");
    for (const auto &a : angles)
        check_data_source(a, arity);
    const long long total =
        leading_qubits + static_cast<long long>(angles.size()) * repetitions;
    check_register(static_cast<int>(std::min<long long>(total, 1 << 20)));
    FeatureEncoding e(EncodingKind::GadgetProduct, static_cast<int>(total),
                      arity);
    e.repetitions_ = repetitions;
    e.leading_qubits_ = leading_qubits;
    e.components_ = angles;
    Circuit c(e.num_qubits_, 0, arity);
    for (std::size_t i = 0; i < angles.size(); ++i) {
        for (int j = 0; j < repetitions; ++j) {
            const int q = leading_qubits + static_cast<int>(i) * repetitions + j;
            c.add(Gate::h(q));
            c.add(Gate::rz(q, angles[i].scaled(std::ldexp(1.0, j))));
        }
    }
    e.circuit_ = std::move(c);
    return e;
}

FeatureEncoding FeatureEncoding::parity_angles(int d) {
    if (d < 1)
        throw std::invalid_argument("parity encoding needs d >= 1");
    FeatureEncoding e(EncodingKind::ParityAngles, 1, d);
    Circuit c(1, 0, d);
    c.add(Gate::h(0));
    for (int i = 0; i < d; ++i) {
        c.add(Gate::ry(0, AngleSource::constant(kPi / 2)));
        c.add(Gate::rz(0, AngleSource::data(i, kPi / 2, -kPi / 2)));
        c.add(Gate::ry(0, AngleSource::constant(-kPi / 2)));
    }
    e.circuit_ = std::move(c);
    return e;
}

FeatureEncoding FeatureEncoding::from_circuit(Circuit circuit) {
    if (circuit.num_parameter_slots() != 0)
        throw std::invalid_argument(
            "a feature encoding circuit may not declare parameter slots");
    FeatureEncoding e(EncodingKind::Circuit, circuit.num_qubits(),
                      circuit.num_data_slots());
    e.circuit_ = std::move(circuit);
    return e;
}

const Circuit &FeatureEncoding::circuit() const {
    if (!circuit_)
        throw std::logic_error(std::string(encoding_kind_name(kind_)) +
                               " encoding has no data-slot circuit");
    return *circuit_;
}

void FeatureEncoding::check_arity(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(arity_))
        throw std::invalid_argument("input has " + std::to_string(x.size()) +
                                    " components, encoding expects " +
                                    std::to_string(arity_));
}

std::vector<std::uint64_t>
FeatureEncoding::bit_values(std::span<const double> x) const {
    if (kind_ != EncodingKind::BitString)
        throw std::logic_error("bit_values() requires a BitString encoding");
    check_arity(x);
    const double levels = std::ldexp(1.0, bits_);
    const std::uint64_t modulus = std::uint64_t{1} << bits_;
    std::vector<std::uint64_t> out;
    out.reserve(components_.size());
    for (const auto &a : components_) {
        const double v = a.evaluate({}, x);
        double wrapped = v - range_ * std::floor(v / range_);
        if (wrapped >= range_)
            wrapped = 0.0;
        const auto q = static_cast<std::uint64_t>(
            std::llround(wrapped / range_ * levels));
        out.push_back(q % modulus);
    }
    return out;
}

Circuit FeatureEncoding::bound_circuit(std::span<const double> x) const {
    check_arity(x);
    Circuit c(num_qubits_);
    if (kind_ == EncodingKind::BitString) {
        const auto values = bit_values(x);
        for (std::size_t r = 0; r < values.size(); ++r)
            for (int j = 0; j < bits_; ++j)
                if ((values[r] >> (bits_ - 1 - j)) & 1)
                    c.add(Gate::x(leading_qubits_ +
                                  static_cast<int>(r) * bits_ + j));
        return c;
    }
    const auto angles = circuit_->bind_angles({}, x);
    const auto &gates = circuit_->gates();
    for (std::size_t i = 0; i < gates.size(); ++i) {
        Gate g = gates[i];
        if (g.is_parametric())
            g.angle = AngleSource::constant(angles[i]);
        c.add(std::move(g));
    }
    return c;
}

Statevector FeatureEncoding::encode(std::span<const double> x) const {
    check_arity(x);
    if (kind_ == EncodingKind::BitString) {
        const auto values = bit_values(x);
        std::uint64_t index = 0;
        for (std::size_t r = 0; r < values.size(); ++r)
            for (int j = 0; j < bits_; ++j)
                if ((values[r] >> (bits_ - 1 - j)) & 1)
                    index |= std::uint64_t{1}
                             << (leading_qubits_ + static_cast<int>(r) * bits_ + j);
        return Statevector::basis(num_qubits_, index);
    }
    return run_circuit(*circuit_, {}, x);
}

std::optional<double>
FeatureEncoding::analytic_kernel(std::span<const double> x,
                                 std::span<const double> xp) const {
    check_arity(x);
    check_arity(xp);
    if (kind_ == EncodingKind::BitString)
        return bit_values(x) == bit_values(xp) ? 1.0 : 0.0;
    if (kind_ == EncodingKind::GadgetProduct) {
        double k = 1.0;
        for (const auto &a : components_) {
            const double delta = a.evaluate({}, x) - a.evaluate({}, xp);
            for (int j = 0; j < repetitions_; ++j) {
                const double c = std::cos(std::ldexp(delta, j) / 2);
                k *= c * c;
            }
        }
        return k;
    }
    return std::nullopt;
}

} // namespace qmlbk
