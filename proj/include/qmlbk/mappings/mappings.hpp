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

#include "qmlbk/models/models.hpp"

namespace qmlbk {

enum class MappingKind { Approximate, ExactSimple, ExactNested };

std::string_view mapping_kind_name(MappingKind kind);

struct MappingReport {
    MappingKind kind = MappingKind::Approximate;
    int num_encoding_gates = 0; ///< D
    int added_qubits = 0;
    int added_gates = 0;
    int precision_bits = 0; ///< p (approximate only)
    int repetitions = 0;    ///< N (exact; 1 for the simple mapping)
    double acceptance_probability = 1.0;
    double observable_rescale = 1.0;
    double guaranteed_error = 0.0;
    double observable_norm = 0.0; ///< norm bound of the source observable
};

/**
 * One data-encoding gate rewritten as  post * RZ(h) * pre  with RZ acting on
 * `pivot`. `pre` is applied first.
 */
struct ReducedEncodingGate {
    std::vector<Gate> pre;
    int pivot = 0;
    AngleSource angle;
    std::vector<Gate> post;
};

/**
 * Rewrites a data-encoding gate (RX, RY, RZ or an uncontrolled
 * PauliRotation) into a basis change, a CNOT ladder and a single RZ.
 * Throws std::invalid_argument for anything else.
 */
ReducedEncodingGate reduce_encoding_gate(const Gate &gate);

/// p = ceil(log2(2 sqrt(2) D norm / delta)).
int approx_precision_bits(int num_encoding_gates, double observable_norm,
                          double delta);

/// N = ceil(log2(1 / (1 - (1 - delta')^{1/D}))).
int nested_repetitions(int num_encoding_gates, double delta_prime);

/// (1 - 2^{-N})^D.
double nested_acceptance(int repetitions, int num_encoding_gates);

/**
 * Bit-string mapping. Every encoding gate RZ(h_i) gets a p-bit register
 * holding h_i / (2 pi) (rounded, modulo 1) and is replaced by p RZ(2 pi 2^-j)
 * rotations controlled on bit j. |f_mapped - f| <= delta for all x, theta.
 */
std::pair<ExplicitModel, MappingReport>
map_approximate(const ReuploadingModel &src, double delta);

/**
 * Single-gadget teleportation mapping: ancilla i holds RZ(h_i)|+>, each
 * encoding gate becomes CNOT(pivot -> ancilla i), and the observable gains
 * |0><0| on every ancilla with scale 2^D.
 */
std::pair<ExplicitModel, MappingReport>
map_exact_simple(const ReuploadingModel &src);

/**
 * Nested-gadget mapping. Gate i uses N ancillas RZ(2^j h_i)|+> (j = 0..N-1)
 * consumed by a cascade of multi-controlled CNOTs, plus one witness qubit
 * that flags the all-ones failure pattern. The observable projects every
 * witness onto |0> and is rescaled by 1 / p_acc.
 *
 * Layout: working qubits [0, n), witnesses [n, n + D), ancilla (i, j) on
 * n + D + i N + j.
 */
std::pair<ExplicitModel, MappingReport>
map_exact_nested(const ReuploadingModel &src, double delta_prime);

/// Nested mapping with an explicit repetition count.
std::pair<ExplicitModel, MappingReport>
map_exact_nested_with(const ReuploadingModel &src, int repetitions);

struct VerifyOptions {
    int trials = 50;
    double tolerance = 1e-9;
    std::uint64_t seed = 0;
    double x_low = -3.14159265358979323846;
    double x_high = 3.14159265358979323846;
    unsigned threads = 0;
};

struct VerifyReport {
    double max_abs_diff = 0.0;
    bool pass = false;
    int trials = 0;
};

/// Evaluates both models on the same random (x, theta) draws.
VerifyReport verify_equivalence(const Model &a, const Model &b,
                                const VerifyOptions &opts);

} // namespace qmlbk
