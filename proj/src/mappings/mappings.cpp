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

#include "qmlbk/mappings/mappings.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "qmlbk/common/error.hpp"
#include "qmlbk/common/parallel.hpp"

namespace qmlbk {

namespace {

constexpr double kPi = std::numbers::pi;

// Guards ceil() against values that are integral up to rounding noise.
constexpr double kCeilSlack = 1e-12;

int ceil_log2(double v) {
    return static_cast<int>(std::ceil(std::log2(v) - kCeilSlack));
}

void check_budget(int total_qubits) {
    if (total_qubits > kMaxQubits)
        throw BudgetError("mapped model needs " + std::to_string(total_qubits) +
                          " qubits, simulator limit is " +
                          std::to_string(kMaxQubits));
}

/// Source circuit with every encoding gate reduced to RZ on a pivot.
struct ReducedCircuit {
    // Each entry is either a fixed/parametric gate (encoding < 0) or the
    // index of an encoding RZ placeholder.
    struct Item {
        Gate gate;
        int encoding = -1;
    };
    std::vector<Item> items;
    std::vector<AngleSource> angles; // h_i
    std::vector<int> pivots;
};

ReducedCircuit reduce(const ReuploadingModel &src) {
    ReducedCircuit r;
    for (const auto &g : src.circuit().gates()) {
        if (!g.uses_data()) {
            r.items.push_back({g, -1});
            continue;
        }
        const ReducedEncodingGate red = reduce_encoding_gate(g);
        for (const auto &pg : red.pre)
            r.items.push_back({pg, -1});
        r.items.push_back({Gate::rz(red.pivot, red.angle),
                           static_cast<int>(r.angles.size())});
        r.angles.push_back(red.angle);
        r.pivots.push_back(red.pivot);
        for (const auto &pg : red.post)
            r.items.push_back({pg, -1});
    }
    if (r.angles.empty())
        throw std::invalid_argument(
            "source model has no data-encoding gates to map");
    return r;
}

int added_gate_count(const Circuit &encoding_gates, std::size_t bitstring_gates,
                     const Circuit &variational, const Circuit &source) {
    return static_cast<int>(encoding_gates.size() + bitstring_gates +
                            variational.size()) -
           static_cast<int>(source.size());
}

} // namespace

std::string_view mapping_kind_name(MappingKind kind) {
    switch (kind) {
    case MappingKind::Approximate:
        return "approx";
    case MappingKind::ExactSimple:
        return "simple";
    case MappingKind::ExactNested:
        return "nested";
    }
    return "?";
}

ReducedEncodingGate reduce_encoding_gate(const Gate &gate) {
    if (!gate.controls.empty())
        throw std::invalid_argument(
            "controlled data-encoding gates cannot be reduced to RZ");
    ReducedEncodingGate r;
    r.angle = gate.angle;
    switch (gate.kind) {
    case GateKind::RZ:
        r.pivot = gate.targets[0];
        return r;
    case GateKind::RX:
        r.pivot = gate.targets[0];
        r.pre = {Gate::h(r.pivot)};
        r.post = {Gate::h(r.pivot)};
        return r;
    case GateKind::RY:
        r.pivot = gate.targets[0];
        r.pre = {Gate::rx(r.pivot, AngleSource::constant(kPi / 2))};
        r.post = {Gate::rx(r.pivot, AngleSource::constant(-kPi / 2))};
        return r;
    case GateKind::PauliRotation: {
        std::vector<int> support;
        std::vector<Gate> basis;
        for (std::size_t k = 0; k < gate.targets.size(); ++k) {
            const int q = gate.targets[k];
            switch (gate.pauli[k]) {
            case 'X':
                basis.push_back(Gate::h(q));
                break;
            case 'Y':
                basis.push_back(Gate::rx(q, AngleSource::constant(kPi / 2)));
                break;
            case 'Z':
                break;
            default:
                continue;
            }
            support.push_back(q);
        }
        if (support.empty())
            throw std::invalid_argument(
                "identity PauliRotation encodes only a global phase");
        r.pivot = support.back();
        std::vector<Gate> ladder;
        for (std::size_t k = 0; k + 1 < support.size(); ++k)
            ladder.push_back(Gate::cnot(support[k], r.pivot));
        r.pre = basis;
        r.pre.insert(r.pre.end(), ladder.begin(), ladder.end());
        for (auto it = ladder.rbegin(); it != ladder.rend(); ++it)
            r.post.push_back(*it);
        for (auto it = basis.rbegin(); it != basis.rend(); ++it)
            r.post.push_back(it->inverse());
        return r;
    }
    default:
        throw std::invalid_argument(
            std::string(gate_kind_name(gate.kind)) +
            " data-encoding gate cannot be reduced to RZ");
    }
}

int approx_precision_bits(int num_encoding_gates, double observable_norm,
                          double delta) {
    if (!(delta > 0.0))
        throw std::invalid_argument("delta must be positive");
    if (num_encoding_gates < 1)
        throw std::invalid_argument("need at least one encoding gate");
    if (!(observable_norm > 0.0))
        throw std::invalid_argument("observable norm bound must be positive");
    const double v =
        2.0 * std::numbers::sqrt2 * num_encoding_gates * observable_norm / delta;
    return std::max(1, ceil_log2(v));
}

int nested_repetitions(int num_encoding_gates, double delta_prime) {
    if (!(delta_prime > 0.0 && delta_prime < 1.0))
        throw std::invalid_argument("delta' must lie in (0, 1)");
    if (num_encoding_gates < 1)
        throw std::invalid_argument("need at least one encoding gate");
    const double root =
        std::pow(1.0 - delta_prime, 1.0 / num_encoding_gates);
    return std::max(1, ceil_log2(1.0 / (1.0 - root)));
}

double nested_acceptance(int repetitions, int num_encoding_gates) {
    return std::pow(1.0 - std::ldexp(1.0, -repetitions), num_encoding_gates);
}

std::pair<ExplicitModel, MappingReport>
map_approximate(const ReuploadingModel &src, double delta) {
    if (!(delta > 0.0))
        throw std::invalid_argument("delta must be positive");
    const ReducedCircuit red = reduce(src);
    const int n = src.circuit().num_qubits();
    const int D = static_cast<int>(red.angles.size());
    const double norm = src.observable().norm_bound();
    const int p = approx_precision_bits(D, norm, delta);
    const int total = n + D * p;
    check_budget(total);

    FeatureEncoding enc = FeatureEncoding::bit_string(
        red.angles, src.arity(), p, 2 * kPi, n);
    Circuit var(total, src.num_parameters(), 0);
    for (const auto &item : red.items) {
        if (item.encoding < 0) {
            var.add(item.gate);
            continue;
        }
        const int base = n + item.encoding * p;
        for (int j = 1; j <= p; ++j)
            var.add(Gate::rz(item.gate.targets[0],
                             AngleSource::constant(2 * kPi * std::ldexp(1.0, -j)))
                        .with_controls({base + j - 1}));
    }

    MappingReport rep;
    rep.kind = MappingKind::Approximate;
    rep.num_encoding_gates = D;
    rep.added_qubits = D * p;
    rep.added_gates = added_gate_count(Circuit(total), static_cast<std::size_t>(D * p),
                                       var, src.circuit());
    rep.precision_bits = p;
    rep.guaranteed_error = delta;
    rep.observable_norm = norm;
    ExplicitModel m(std::move(enc), std::move(var),
                    src.observable().widened(total));
    return {std::move(m), rep};
}

std::pair<ExplicitModel, MappingReport>
map_exact_simple(const ReuploadingModel &src) {
    const ReducedCircuit red = reduce(src);
    const int n = src.circuit().num_qubits();
    const int D = static_cast<int>(red.angles.size());
    const int total = n + D;
    check_budget(total);

    FeatureEncoding enc =
        FeatureEncoding::gadget_product(red.angles, src.arity(), 1, n);
    Circuit var(total, src.num_parameters(), 0);
    for (const auto &item : red.items) {
        if (item.encoding < 0)
            var.add(item.gate);
        else
            var.add(Gate::cnot(item.gate.targets[0], n + item.encoding));
    }
    std::vector<ProjectorFactor> proj;
    for (int i = 0; i < D; ++i)
        proj.push_back({n + i, 0});
    const double rescale = std::ldexp(1.0, D);
    const Observable &o = src.observable();

    MappingReport rep;
    rep.kind = MappingKind::ExactSimple;
    rep.num_encoding_gates = D;
    rep.added_qubits = D;
    rep.added_gates = added_gate_count(enc.circuit(), 0, var, src.circuit());
    rep.repetitions = 1;
    rep.acceptance_probability = std::ldexp(1.0, -D);
    rep.observable_rescale = rescale;
    rep.observable_norm = o.norm_bound();
    Observable mapped =
        o.widened(total).with_projector(proj).with_scale(o.scale() * rescale);
    ExplicitModel m(std::move(enc), std::move(var), std::move(mapped));
    return {std::move(m), rep};
}

std::pair<ExplicitModel, MappingReport>
map_exact_nested_with(const ReuploadingModel &src, int N) {
    if (N < 1)
        throw std::invalid_argument("nested mapping needs N >= 1");
    const ReducedCircuit red = reduce(src);
    const int n = src.circuit().num_qubits();
    const int D = static_cast<int>(red.angles.size());
    const long long total_ll = n + D + static_cast<long long>(N) * D;
    check_budget(static_cast<int>(std::min<long long>(total_ll, 1 << 20)));
    const int total = static_cast<int>(total_ll);
    const int anc0 = n + D;

    FeatureEncoding enc =
        FeatureEncoding::gadget_product(red.angles, src.arity(), N, anc0);
    Circuit var(total, src.num_parameters(), 0);
    for (const auto &item : red.items) {
        if (item.encoding < 0) {
            var.add(item.gate);
            continue;
        }
        const int q = item.gate.targets[0];
        const int first = anc0 + item.encoding * N;
        std::vector<int> ancillas;
        for (int j = 0; j < N; ++j) {
            // Gadget j fires only if gadgets 0..j-1 all read 1.
            std::vector<int> controls{q};
            controls.insert(controls.end(), ancillas.begin(), ancillas.end());
            var.add(Gate::multi_controlled_x(controls, first + j));
            ancillas.push_back(first + j);
        }
        var.add(Gate::multi_controlled_x(ancillas, n + item.encoding));
    }
    std::vector<ProjectorFactor> proj;
    for (int i = 0; i < D; ++i)
        proj.push_back({n + i, 0});
    const double p_acc = nested_acceptance(N, D);
    const Observable &o = src.observable();

    MappingReport rep;
    rep.kind = MappingKind::ExactNested;
    rep.num_encoding_gates = D;
    rep.added_qubits = N * D + D;
    rep.added_gates = added_gate_count(enc.circuit(), 0, var, src.circuit());
    rep.repetitions = N;
    rep.acceptance_probability = p_acc;
    rep.observable_rescale = 1.0 / p_acc;
    rep.observable_norm = o.norm_bound();
    Observable mapped =
        o.widened(total).with_projector(proj).with_scale(o.scale() / p_acc);
    ExplicitModel m(std::move(enc), std::move(var), std::move(mapped));
    return {std::move(m), rep};
}

std::pair<ExplicitModel, MappingReport>
map_exact_nested(const ReuploadingModel &src, double delta_prime) {
    int D = src.num_encoding_gates();
    return map_exact_nested_with(src, nested_repetitions(D, delta_prime));
}

VerifyReport verify_equivalence(const Model &a, const Model &b,
                                const VerifyOptions &opts) {
    const int d = model_arity(a);
    const int P = model_num_parameters(a);
    if (d != model_arity(b))
        throw std::invalid_argument("models disagree on data arity (" +
                                    std::to_string(d) + " vs " +
                                    std::to_string(model_arity(b)) + ")");
    if (P != model_num_parameters(b))
        throw std::invalid_argument("models disagree on parameter count (" +
                                    std::to_string(P) + " vs " +
                                    std::to_string(model_num_parameters(b)) +
                                    ")");
    if (opts.trials < 1)
        throw std::invalid_argument("verification needs >= 1 trial");

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> ux(opts.x_low, opts.x_high);
    std::uniform_real_distribution<double> ut(0.0, 2 * kPi);
    std::vector<std::vector<double>> xs(opts.trials), ts(opts.trials);
    for (int t = 0; t < opts.trials; ++t) {
        for (int i = 0; i < d; ++i)
            xs[t].push_back(ux(rng));
        for (int k = 0; k < P; ++k)
            ts[t].push_back(ut(rng));
    }
    std::vector<double> diff(opts.trials);
    parallel_for(
        static_cast<std::size_t>(opts.trials),
        [&](std::size_t t) {
            diff[t] = std::abs(eval_model(a, ts[t], xs[t]) -
                               eval_model(b, ts[t], xs[t]));
        },
        opts.threads);
    VerifyReport r;
    r.trials = opts.trials;
    r.max_abs_diff = *std::max_element(diff.begin(), diff.end());
    r.pass = r.max_abs_diff <= opts.tolerance;
    return r;
}

} // namespace qmlbk
