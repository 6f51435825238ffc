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

// Independent dense-matrix reference used by the tests. Everything here is
// built from Kronecker products and matrix exponentials of the textbook gate
// matrices and shares no code with the library's kernels.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "qmlbk/models/models.hpp"

namespace qmlbk::oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;

inline Mat pauli(char p) {
    Mat m(2, 2);
    const cd i(0, 1);
    switch (p) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m << 1, 0, 0, 1;
    }
    return m;
}

/// Embeds one-qubit matrices (index = qubit) into the full register.
/// Qubit 0 is the least significant index bit, so it is the rightmost factor.
inline Mat kron_all(const std::vector<Mat> &per_qubit) {
    Mat out = Mat::Identity(1, 1);
    for (const auto &m : per_qubit)
        out = Eigen::kroneckerProduct(m, out).eval();
    return out;
}

inline Mat pauli_string(int n, const std::vector<int> &targets, const std::string &p) {
    std::vector<Mat> f(static_cast<std::size_t>(n), Mat::Identity(2, 2));
    for (std::size_t k = 0; k < targets.size(); ++k)
        f[static_cast<std::size_t>(targets[k])] = pauli(p[k]);
    return kron_all(f);
}

inline Mat rotation(const Mat &P, double angle) {
    return (cd(0, -angle / 2) * P).exp();
}

/// Full 2^n x 2^n unitary of a gate with the given bound angle.
inline Mat gate_matrix(int n, const Gate &g, double angle) {
    const Mat I2 = Mat::Identity(2, 2);
    Mat U;
    auto single = [&](const Mat &m) {
        std::vector<Mat> f(static_cast<std::size_t>(n), I2);
        f[static_cast<std::size_t>(g.targets[0])] = m;
        return kron_all(f);
    };
    switch (g.kind) {
    case GateKind::H: {
        Mat h(2, 2);
        h << 1, 1, 1, -1;
        U = single(h / std::sqrt(2.0));
        break;
    }
    case GateKind::X:
    case GateKind::CNOT:
    case GateKind::MultiControlled:
        U = single(pauli('X'));
        break;
    case GateKind::RX: U = rotation(pauli_string(n, g.targets, "X"), angle); break;
    case GateKind::RY: U = rotation(pauli_string(n, g.targets, "Y"), angle); break;
    case GateKind::RZ: U = rotation(pauli_string(n, g.targets, "Z"), angle); break;
    case GateKind::CZ: {
        const Mat Z = pauli_string(n, {g.targets[0]}, "Z");
        const Mat Z2 = pauli_string(n, {g.targets[1]}, "Z");
        const Mat Id = Mat::Identity(Z.rows(), Z.cols());
        // CZ = (I + Z_a + Z_b - Z_a Z_b) / 2
        U = (Id + Z + Z2 - Z * Z2) / 2.0;
        break;
    }
    case GateKind::PauliRotation: U = rotation(pauli_string(n, g.targets, g.pauli), angle); break;
    }
    std::uint64_t cmask = 0;
    for (int c : g.controls)
        cmask |= std::uint64_t{1} << c;
    if (cmask) {
        for (Eigen::Index b = 0; b < U.cols(); ++b)
            if ((static_cast<std::uint64_t>(b) & cmask) != cmask) {
                U.col(b).setZero();
                U(b, b) = 1.0;
            }
    }
    return U;
}

inline Vec run(const Circuit &c, std::span<const double> params, std::span<const double> data,
               Vec psi) {
    for (const auto &g : c.gates()) {
        const double a = g.is_parametric() ? g.angle.evaluate(params, data) : 0.0;
        psi = gate_matrix(c.num_qubits(), g, a) * psi;
    }
    return psi;
}

inline Vec zero_state(int n) {
    Vec v = Vec::Zero(Eigen::Index{1} << n);
    v[0] = 1.0;
    return v;
}

inline Vec to_vec(const Statevector &s) {
    Vec v(static_cast<Eigen::Index>(s.dim()));
    for (std::size_t i = 0; i < s.dim(); ++i)
        v[static_cast<Eigen::Index>(i)] = s.amplitudes()[i];
    return v;
}

inline Mat observable_matrix(const Observable &o) {
    const int n = o.num_qubits();
    const Eigen::Index dim = Eigen::Index{1} << n;
    Mat O = Mat::Zero(dim, dim);
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q)
        all[static_cast<std::size_t>(q)] = q;
    for (const auto &t : o.terms())
        O += t.weight * pauli_string(n, all, t.paulis);
    Mat Pi = Mat::Identity(dim, dim);
    for (const auto &f : o.projector()) {
        std::vector<Mat> fac(static_cast<std::size_t>(n), Mat::Identity(2, 2));
        Mat proj = Mat::Zero(2, 2);
        proj(f.value, f.value) = 1.0;
        fac[static_cast<std::size_t>(f.qubit)] = proj;
        Pi = kron_all(fac) * Pi;
    }
    return o.scale() * Pi * O * Pi;
}

inline double expectation(const Vec &psi, const Observable &o) {
    return (psi.adjoint() * observable_matrix(o) * psi)(0, 0).real();
}

/// f(x) by dense simulation for either model type (observable weight included).
inline double eval(const Model &m, std::span<const double> theta, std::span<const double> x) {
    if (const auto *r = std::get_if<ReuploadingModel>(&m))
        return expectation(run(r->circuit(), theta, x, zero_state(r->circuit().num_qubits())),
                           r->observable());
    const auto &e = std::get<ExplicitModel>(m);
    const Vec phi = to_vec(e.encoding().encode(x));
    const Vec psi = run(e.variational(), theta, {}, phi);
    return e.observable_weight() * expectation(psi, e.observable());
}

inline std::vector<double> uniform(std::mt19937_64 &rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto &x : v)
        x = u(rng);
    return v;
}

/**
 * Random re-uploading model on n qubits with D data-encoding gates drawn from
 * RX, RY, RZ and a two-qubit Pauli rotation, interleaved with parametrized
 * layers and CZ entanglers. Observable: random Pauli sum with weights in
 * [-1, 1].
 */
inline ReuploadingModel random_reuploading(int n, int D, std::mt19937_64 &rng,
                                           bool product_angles = true) {
    std::uniform_int_distribution<int> kind(0, n > 1 ? 3 : 2), q(0, n - 1);
    std::uniform_real_distribution<double> fac(0.5, 1.5), w(-1, 1);
    int params = 0;
    const int arity = std::max(1, n);
    Circuit c(n, 2 * n * (D + 1), arity);
    auto layer = [&] {
        for (int i = 0; i < n; ++i) {
            c.add(Gate::ry(i, AngleSource::parameter(params++)));
            c.add(Gate::rz(i, AngleSource::parameter(params++)));
        }
        for (int i = 0; i + 1 < n; ++i)
            c.add(Gate::cz(i, i + 1));
    };
    layer();
    for (int d = 0; d < D; ++d) {
        const int slot = d % arity, a = q(rng);
        switch (kind(rng)) {
        case 0: c.add(Gate::rx(a, AngleSource::data(slot, fac(rng)))); break;
        case 1: c.add(Gate::ry(a, AngleSource::data(slot, fac(rng)))); break;
        case 2: c.add(Gate::rz(a, AngleSource::data(slot, fac(rng), 0.3))); break;
        default: {
            const AngleSource s = product_angles && arity > 1
                                      ? AngleSource::data_product(0, 1, fac(rng))
                                      : AngleSource::data(slot, fac(rng));
            c.add(Gate::pauli_rotation({0, 1}, d % 2 ? "XY" : "ZX", s));
        }
        }
        layer();
    }
    const char letters[] = {'I', 'X', 'Y', 'Z'};
    std::vector<PauliTerm> terms;
    for (int t = 0; t < 2; ++t) {
        std::string p;
        for (int i = 0; i < n; ++i)
            p += letters[1 + (q(rng) + t + i) % 3];
        terms.push_back({w(rng) / 2, p});
    }
    return ReuploadingModel(std::move(c), Observable(n, std::move(terms)));
}

} // namespace qmlbk::oracle
