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

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "qmlbk/common/error.hpp"
#include "qmlbk/models/models.hpp"
#include "qmlbk/models/serialize.hpp"

namespace qmlbk {
namespace {

using oracle::kPi;

// Dense Havlicek state U_z H U_z H |0>.
oracle::Vec havlicek_dense(const std::vector<double> &x) {
    const int n = static_cast<int>(x.size());
    const Eigen::Index dim = Eigen::Index{1} << n;
    oracle::Mat H(2, 2);
    H << 1, 1, 1, -1;
    H /= std::sqrt(2.0);
    const oracle::Mat Hn = oracle::kron_all(std::vector<oracle::Mat>(static_cast<std::size_t>(n), H));
    oracle::Mat gen = oracle::Mat::Zero(dim, dim);
    for (int i = 0; i < n; ++i) {
        gen += x[static_cast<std::size_t>(i)] * oracle::pauli_string(n, {i}, "Z");
        for (int j = i + 1; j < n; ++j)
            gen += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)] *
                   oracle::pauli_string(n, {i, j}, "ZZ");
    }
    const oracle::Mat Uz = (oracle::cd(0, -kPi) * gen).exp();
    return Uz * Hn * Uz * Hn * oracle::zero_state(n);
}

std::vector<FeatureEncoding> all_encodings() {
    return {
        FeatureEncoding::havlicek(3),
        FeatureEncoding::bit_string(2, 2, 2 * kPi),
        FeatureEncoding::gadget_product({AngleSource::data(0), AngleSource::data(1, 0.5)}, 2, 2, 1),
        FeatureEncoding::parity_angles(3),
        FeatureEncoding::from_circuit([] {
            Circuit c(2, 0, 2);
            c.add(Gate::ry(0, AngleSource::data(0)));
            c.add(Gate::pauli_rotation({0, 1}, "XY", AngleSource::data_product(0, 1)));
            return c;
        }()),
    };
}

TEST(Encoding, HavlicekMatchesDenseDefinition) {
    std::mt19937_64 rng(21);
    for (int n = 1; n <= 4; ++n) {
        const auto x = oracle::uniform(rng, n, -1, 1);
        const oracle::Vec want = havlicek_dense(x);
        const oracle::Vec got = oracle::to_vec(FeatureEncoding::havlicek(n).encode(x));
        EXPECT_LT((want - got).cwiseAbs().maxCoeff(), 1e-12) << "n=" << n;
    }
}

TEST(Encoding, ArityChecked) {
    const std::vector<double> x{0.1};
    EXPECT_THROW(FeatureEncoding::havlicek(2).encode(x), std::invalid_argument);
}

TEST(Encoding, BitStringRegisters) {
    const auto e = FeatureEncoding::bit_string(2, 3, 1.0);
    const std::vector<double> x{0.25, 0.875};
    const auto v = e.bit_values(x);
    EXPECT_EQ(v[0], 2u); // 0.25 * 8
    EXPECT_EQ(v[1], 7u);
    const Statevector s = e.encode(x);
    // register 0 on qubits 0..2 (MSB first), register 1 on qubits 3..5
    // bits: 010 -> qubit 1 set; 111 -> qubits 3, 4, 5 set
    EXPECT_NEAR(std::abs(s.amplitudes()[0b111010]), 1.0, 1e-15);
}

TEST(Encoding, BoundCircuitReproducesState) {
    std::mt19937_64 rng(22);
    for (const auto &e : all_encodings()) {
        const auto x = oracle::uniform(rng, e.arity(), -kPi, kPi);
        const Statevector a = e.encode(x);
        const Statevector b = run_circuit(e.bound_circuit(x), {}, {});
        EXPECT_NEAR(fidelity(a, b), 1.0, 1e-12) << encoding_kind_name(e.kind());
    }
}

TEST(Kernel, EqualsDenseFidelityAndAnalyticForm) {
    std::mt19937_64 rng(23);
    for (const auto &e : all_encodings()) {
        for (int t = 0; t < 5; ++t) {
            const auto x = oracle::uniform(rng, e.arity(), -kPi, kPi);
            const auto y = oracle::uniform(rng, e.arity(), -kPi, kPi);
            const oracle::Vec a = oracle::to_vec(e.encode(x)), b = oracle::to_vec(e.encode(y));
            const double want = std::norm(a.dot(b));
            EXPECT_NEAR(kernel(e, x, y), want, 1e-12);
            EXPECT_NEAR(kernel_fast(e, x, y), want, 1e-12);
        }
    }
}

TEST(Kernel, GadgetProductClosedForm) {
    const auto e = FeatureEncoding::gadget_product({AngleSource::data(0)}, 1, 3, 0);
    const std::vector<double> x{0.7}, y{-0.4};
    double want = 1;
    for (int j = 0; j < 3; ++j)
        want *= std::pow(std::cos(std::ldexp(1.0, j) * (0.7 + 0.4) / 2), 2);
    EXPECT_NEAR(kernel(e, x, y), want, 1e-12);
}

TEST(Gram, PropertiesForEveryEncoding) {
    std::mt19937_64 rng(24);
    for (const auto &e : all_encodings()) {
        std::vector<std::vector<double>> X;
        for (int i = 0; i < 20; ++i)
            X.push_back(oracle::uniform(rng, e.arity(), -kPi, kPi));
        const Eigen::MatrixXd K = gram_matrix(e, X);
        EXPECT_LE((K - K.transpose()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((K.diagonal().array() - 1).abs().maxCoeff(), 1e-12);
        EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues().minCoeff(), -1e-9);
        EXPECT_NEAR(K(2, 5), kernel(e, X[2], X[5]), 1e-12);
        const Eigen::MatrixXd C = cross_kernel(e, X, X);
        EXPECT_LE((C - K).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(ExplicitModel, MatchesDenseOracle) {
    std::mt19937_64 rng(25);
    const int n = 3;
    ExplicitModel m(FeatureEncoding::havlicek(n), build_hardware_efficient_ansatz(n, 2),
                    Observable(n, {{0.6, "ZXI"}, {-0.3, "IYY"}}), 1.7);
    for (int t = 0; t < 5; ++t) {
        const auto theta = oracle::uniform(rng, m.num_parameters(), 0, 2 * kPi);
        const auto x = oracle::uniform(rng, n, -1, 1);
        EXPECT_NEAR(eval_explicit(m, theta, x), oracle::eval(Model(m), theta, x), 1e-12);
    }
}

TEST(ExplicitModel, RejectsDataSlotsInVariational) {
    Circuit v(1, 0, 1);
    v.add(Gate::rx(0, AngleSource::data(0)));
    EXPECT_THROW(ExplicitModel(FeatureEncoding::havlicek(1), v, Observable::single(1, 'Z', 0)),
                 std::invalid_argument);
}

TEST(ReuploadingModel, MatchesDenseOracleAndCountsGates) {
    std::mt19937_64 rng(26);
    const ReuploadingModel m = oracle::random_reuploading(2, 3, rng);
    EXPECT_EQ(m.num_encoding_gates(), 3);
    EXPECT_FALSE(m.is_degenerate());
    const auto theta = oracle::uniform(rng, m.num_parameters(), 0, 2 * kPi);
    const auto x = oracle::uniform(rng, m.arity(), -kPi, kPi);
    EXPECT_NEAR(eval_reuploading(m, theta, x), oracle::eval(Model(m), theta, x), 1e-12);
}

TEST(ReuploadingModel, DegenerateFlag) {
    Circuit c(1, 1, 1);
    c.add(Gate::rx(0, AngleSource::data(0)));
    c.add(Gate::ry(0, AngleSource::parameter(0)));
    EXPECT_TRUE(ReuploadingModel(c, Observable::single(1, 'Z', 0)).is_degenerate());
}

TEST(ImplicitModel, KernelSumEqualsDenseObservable) {
    std::mt19937_64 rng(27);
    ImplicitModel m{FeatureEncoding::havlicek(2), {}, {}};
    for (int i = 0; i < 5; ++i) {
        m.support.push_back(oracle::uniform(rng, 2, -1, 1));
        m.weights.push_back(oracle::uniform(rng, 1, -1, 1)[0]);
    }
    const auto x = oracle::uniform(rng, 2, -1, 1);
    double want = 0;
    for (std::size_t i = 0; i < m.support.size(); ++i)
        want += m.weights[i] * std::norm(havlicek_dense(m.support[i]).dot(havlicek_dense(x)));
    EXPECT_NEAR(eval_implicit(m, x), want, 1e-12);
    EXPECT_NEAR(eval_implicit_via_observable(m, x), want, 1e-12);
}

TEST(ImplicitModel, DeltaKernelOverfits) {
    const auto e = FeatureEncoding::bit_string(1, 4, 1.0);
    ImplicitModel m{e, {{0.0}, {0.25}, {0.5}}, {0.3, -1.2, 2.0}};
    EXPECT_EQ(eval_implicit(m, std::vector<double>{0.25}), -1.2);
    EXPECT_EQ(eval_implicit(m, std::vector<double>{0.75}), 0.0);
}

TEST(Ansatz, HardwareEfficientShape) {
    const Circuit c = build_hardware_efficient_ansatz(4, 3);
    EXPECT_EQ(c.num_parameter_slots(), 3 * 4 * 3);
    EXPECT_EQ(c.num_data_slots(), 0);
    EXPECT_EQ(c.num_qubits(), 4);
}

TEST(Ansatz, HeisenbergShapeAndGenerator) {
    const Circuit c = build_heisenberg_ansatz(3, 2);
    EXPECT_EQ(c.num_parameter_slots(), 3 * 3 * 2);
    EXPECT_THROW(build_heisenberg_ansatz(1, 1), std::invalid_argument);
    // One layer on two qubits with theta = (t, 0, 0) is exp(i t ZZ) on the
    // first pair only; compare against the dense exponential.
    const Circuit one = build_heisenberg_ansatz(2, 1);
    std::vector<double> theta(static_cast<std::size_t>(one.num_parameter_slots()), 0.0);
    theta[0] = 0.37;
    Statevector s(2);
    apply_gate(s, Gate::h(0));
    apply_gate(s, Gate::h(1));
    const oracle::Vec start = oracle::to_vec(s);
    apply_circuit(s, one, theta, {});
    const oracle::Mat ZZ = oracle::pauli_string(2, {0, 1}, "ZZ");
    oracle::Vec want = start;
    want = (oracle::cd(0, 0.37) * ZZ).exp() * want;
    EXPECT_LT((want - oracle::to_vec(s)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ansatz, LayerScheduleNearNinetyParameters) {
    for (int n = 2; n <= 12; ++n) {
        const int params = 3 * n * layer_schedule(n);
        EXPECT_GE(params, 72) << n;
        EXPECT_LE(params, 126) << n;
    }
    EXPECT_THROW(layer_schedule(1), std::out_of_range);
}

TEST(ParityCircuit, ThetaSelectsComponents) {
    const ReuploadingModel m = parity_model(3);
    const std::vector<double> theta{kPi / 2, 0.0, kPi / 2};
    for (int b = 0; b < 8; ++b) {
        std::vector<double> x{b & 1 ? -1.0 : 1.0, b & 2 ? -1.0 : 1.0, b & 4 ? -1.0 : 1.0};
        EXPECT_NEAR(eval_reuploading(m, theta, x), x[0] * x[2], 1e-12);
    }
}

TEST(Serialize, ModelRoundTrip) {
    std::mt19937_64 rng(28);
    const Model r = oracle::random_reuploading(2, 2, rng);
    const json j = model_to_json(r);
    EXPECT_EQ(model_to_json(model_from_json(j)), j);
    const Model e = ExplicitModel(FeatureEncoding::bit_string(2, 3, 2.0),
                                  build_hardware_efficient_ansatz(6, 1),
                                  Observable(6, {{0.5, "ZIIIII"}}, {{5, 1}}, 3.0), 0.25);
    const json k = model_to_json(e);
    EXPECT_EQ(model_to_json(model_from_json(k)), k);
}

TEST(Serialize, UnknownKeyReportsPath) {
    json j = model_to_json(Model(parity_model(2)));
    j["circuit"]["gates"][1]["colour"] = "red";
    try {
        model_from_json(j);
        FAIL() << "expected SchemaError";
    } catch (const SchemaError &e) {
        EXPECT_EQ(e.path(), "$.circuit.gates[1]");
    }
}

TEST(Serialize, SyntaxErrorReportsLineAndColumn) {
    try {
        parse_json_text("{\n  \"a\": 1,\n  oops\n}", "cfg.json");
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_NE(std::string(e.what()).find("cfg.json:3:"), std::string::npos) << e.what();
    }
}

} // namespace
} // namespace qmlbk
