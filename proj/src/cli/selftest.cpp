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

// Invariant suite behind `qmlbk selftest`. Each property is small enough to
// run in well under a second.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "qmlbk/cli/cli.hpp"
#include "qmlbk/data/pipeline.hpp"
#include "qmlbk/learning/learning.hpp"
#include "qmlbk/mappings/mappings.hpp"
#include "qmlbk/separation/separation.hpp"

#ifndef QMLBK_FIXTURE_DIR
#define QMLBK_FIXTURE_DIR "tests/fixtures"
#endif

namespace qmlbk::cli {

namespace {

constexpr double kPi = std::numbers::pi;

struct Check {
    std::string module;
    std::string property;
    std::function<std::string()> run; ///< empty string: pass; else failure detail
};

std::string fail_if(bool bad, const std::string &what, double value) {
    if (!bad)
        return {};
    std::ostringstream s;
    s << what << " (got " << value << ")";
    return s.str();
}

std::vector<double> uniform(std::mt19937_64 &rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto &x : v)
        x = u(rng);
    return v;
}

Circuit random_circuit(int n, int depth, std::mt19937_64 &rng) {
    Circuit c(n, 0, 0);
    std::uniform_int_distribution<int> kind(0, 4), qubit(0, n - 1);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    for (int i = 0; i < depth; ++i) {
        const int q = qubit(rng);
        const int r = (q + 1) % n;
        switch (kind(rng)) {
        case 0: c.add(Gate::h(q)); break;
        case 1: c.add(Gate::rx(q, AngleSource::constant(angle(rng)))); break;
        case 2: c.add(Gate::ry(q, AngleSource::constant(angle(rng)))); break;
        case 3: c.add(Gate::rz(q, AngleSource::constant(angle(rng)))); break;
        default:
            if (n > 1)
                c.add(Gate::cz(q, r));
        }
    }
    return c;
}

ReuploadingModel fixture_model(const std::filesystem::path &dir) {
    const Model m = model_from_json(read_json_file((dir / "reuploading_d1.json").string()));
    const auto *r = std::get_if<ReuploadingModel>(&m);
    if (!r)
        throw std::runtime_error("fixture is not a reuploading model");
    return *r;
}

std::vector<Check> build_checks(const std::filesystem::path &fixtures) {
    std::vector<Check> c;

    // simulator ------------------------------------------------------------
    c.push_back({"simulator", "norm_preserved", [] {
                     std::mt19937_64 rng(1);
                     const Statevector s = run_circuit(random_circuit(5, 80, rng), {}, {});
                     return fail_if(std::abs(s.norm() - 1) > 1e-12, "norm drift", s.norm());
                 }});
    c.push_back({"simulator", "inverse_roundtrip", [] {
                     std::mt19937_64 rng(2);
                     const Circuit circ = random_circuit(4, 60, rng);
                     Statevector s = run_circuit(circ, {}, {});
                     apply_circuit(s, circ.inverse(), {}, {});
                     const double f = fidelity(s, Statevector(4));
                     return fail_if(std::abs(f - 1) > 1e-12, "U^dag U != I", f);
                 }});
    c.push_back({"simulator", "pauli_expectation_bounded", [] {
                     std::mt19937_64 rng(3);
                     const Statevector s = run_circuit(random_circuit(3, 40, rng), {}, {});
                     const Observable o(3, {{1.0, "XYZ"}});
                     const double e = o.expectation(s);
                     return fail_if(std::abs(e) > 1 + 1e-12, "|<P>| > 1", e);
                 }});

    // models ---------------------------------------------------------------
    c.push_back({"models", "gram_properties", [] {
                     std::mt19937_64 rng(4);
                     std::vector<std::vector<double>> X;
                     for (int i = 0; i < 20; ++i)
                         X.push_back(uniform(rng, 3, -kPi, kPi));
                     const Eigen::MatrixXd K = gram_matrix(FeatureEncoding::havlicek(3), X);
                     const double asym = (K - K.transpose()).cwiseAbs().maxCoeff();
                     const double diag = (K.diagonal().array() - 1).abs().maxCoeff();
                     const double mineig =
                         Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues().minCoeff();
                     if (auto f = fail_if(asym > 1e-12, "asymmetric", asym); !f.empty())
                         return f;
                     if (auto f = fail_if(diag > 1e-12, "diagonal != 1", diag); !f.empty())
                         return f;
                     return fail_if(mineig < -1e-9, "not PSD", mineig);
                 }});
    c.push_back({"models", "implicit_observable_equivalence", [] {
                     std::mt19937_64 rng(5);
                     ImplicitModel m{FeatureEncoding::havlicek(2), {}, {}};
                     for (int i = 0; i < 6; ++i) {
                         m.support.push_back(uniform(rng, 2, -kPi, kPi));
                         m.weights.push_back(uniform(rng, 1, -1, 1)[0]);
                     }
                     const auto x = uniform(rng, 2, -kPi, kPi);
                     const double d = std::abs(eval_implicit(m, x) - eval_implicit_via_observable(m, x));
                     return fail_if(d > 1e-12, "kernel sum != Tr[rho O]", d);
                 }});

    // mappings -------------------------------------------------------------
    c.push_back({"mappings", "nested_constants", [] {
                     const int N = nested_repetitions(1, 0.1);
                     if (N != 4)
                         return fail_if(true, "N != 4", N);
                     const double p = nested_acceptance(N, 1);
                     return fail_if(std::abs(p - 0.9375) > 1e-15, "p_acc != 0.9375", p);
                 }});
    c.push_back({"mappings", "approx_precision_bits", [] {
                     const int p = approx_precision_bits(1, 1.0, 0.1);
                     return fail_if(p != 5, "p != 5", p);
                 }});
    for (std::string kind : {"simple", "nested", "approx"}) {
        c.push_back({"mappings", kind + "_fixture_equivalence", [fixtures, kind] {
                         const ReuploadingModel src = fixture_model(fixtures);
                         auto mapped = kind == "simple" ? map_exact_simple(src)
                                       : kind == "nested" ? map_exact_nested(src, 0.1)
                                                          : map_approximate(src, 0.1);
                         VerifyOptions vo;
                         vo.trials = 30;
                         vo.tolerance = kind == "approx" ? 0.1 : 1e-9;
                         const VerifyReport r = verify_equivalence(src, Model(mapped.first), vo);
                         return fail_if(!r.pass, "max |f_mapped - f| too large", r.max_abs_diff);
                     }});
    }

    // learning -------------------------------------------------------------
    c.push_back({"learning", "shift_matches_finite_difference", [fixtures] {
                     const Model m = fixture_model(fixtures);
                     std::mt19937_64 rng(6);
                     const auto theta = uniform(rng, model_num_parameters(m), 0, 2 * kPi);
                     const auto x = uniform(rng, model_arity(m), -kPi, kPi);
                     const auto g = parameter_shift_gradient(m, theta, x);
                     double worst = 0;
                     for (std::size_t k = 0; k < theta.size(); ++k) {
                         auto tp = theta, tm = theta;
                         tp[k] += 1e-5;
                         tm[k] -= 1e-5;
                         const double fd = (eval_model(m, tp, x) - eval_model(m, tm, x)) / 2e-5;
                         worst = std::max(worst, std::abs(fd - g[k]));
                     }
                     return fail_if(worst > 1e-6, "shift vs finite difference", worst);
                 }});
    c.push_back({"learning", "shift_matches_adjoint", [fixtures] {
                     const Model m = fixture_model(fixtures);
                     std::mt19937_64 rng(7);
                     const auto theta = uniform(rng, model_num_parameters(m), 0, 2 * kPi);
                     const auto x = uniform(rng, model_arity(m), -kPi, kPi);
                     const auto a = parameter_shift_gradient(m, theta, x);
                     const auto b = adjoint_gradient(m, theta, x);
                     double worst = 0;
                     for (std::size_t k = 0; k < a.size(); ++k)
                         worst = std::max(worst, std::abs(a[k] - b[k]));
                     return fail_if(worst > 1e-10, "shift vs adjoint", worst);
                 }});
    c.push_back({"learning", "krr_interpolates", [] {
                     std::mt19937_64 rng(8);
                     std::vector<std::vector<double>> X;
                     for (int i = 0; i < 12; ++i)
                         X.push_back(uniform(rng, 3, -kPi, kPi));
                     const Eigen::MatrixXd K = gram_matrix(FeatureEncoding::havlicek(3), X);
                     Eigen::VectorXd y(12);
                     for (int i = 0; i < 12; ++i)
                         y[i] = uniform(rng, 1, -1, 1)[0];
                     const double r = (K * krr_fit(K, y, 0.0) - y).norm();
                     return fail_if(r > 1e-8, "lambda = 0 residual", r);
                 }});

    // separation -----------------------------------------------------------
    c.push_back({"separation", "parity_orthogonality", [] {
                     const int d = 6, k = schedule_k(d);
                     const auto subsets = all_subsets(d, k);
                     const auto cube = hypercube(d);
                     long long worst = 0;
                     for (std::size_t a = 0; a < subsets.size(); ++a)
                         for (std::size_t b = 0; b < subsets.size(); ++b) {
                             const ParityConcept ga(d, subsets[a]), gb(d, subsets[b]);
                             long long s = 0;
                             for (const auto &x : cube)
                                 s += static_cast<long long>(ga(x) * gb(x));
                             const long long want = a == b ? static_cast<long long>(cube.size()) : 0;
                             worst = std::max(worst, std::llabs(s - want));
                         }
                     return fail_if(worst != 0, "parities not orthogonal", static_cast<double>(worst));
                 }});
    c.push_back({"separation", "parity_circuit_exact", [] {
                     double worst = 0;
                     for (int d = 1; d <= 8; ++d)
                         worst = std::max(worst, parity_circuit_max_error(
                                                     ParityConcept(d, all_subsets(d, schedule_k(d))[0])));
                     return fail_if(worst > 1e-9, "parity circuit error", worst);
                 }});
    c.push_back({"separation", "linear_oracle_bound", [] {
                     const int d = 6, k = schedule_k(d);
                     const OracleResult r = best_linear_mse(
                         encoding_feature_map(folded_havlicek(1, d, kPi / 4)), 1, d, k);
                     if (auto f = fail_if(r.epsilon_avg < r.bound - 1e-9, "below 1 - 4^n / C(d,k)",
                                          r.epsilon_avg);
                         !f.empty())
                         return f;
                     return fail_if(r.epsilon_avg + r.span_dim / binomial(d, k) < 1 - 1e-9,
                                    "span certificate", r.epsilon_avg);
                 }});
    c.push_back({"separation", "mixture_half_bound", [] {
                     const int d = 5, k = schedule_k(d);
                     const auto rows = best_linear_mse_mixture(
                         encoding_feature_map(folded_havlicek(2, d, kPi / 4)), 2, d, k);
                     double worst = 1e300;
                     for (const auto &r : rows)
                         worst = std::min(worst, r.epsilon_mixture - 0.5 * r.epsilon_uniform);
                     return fail_if(worst < -1e-9, "mixture error below half the uniform error", worst);
                 }});

    // data -----------------------------------------------------------------
    c.push_back({"data", "idx_fixture_parses", [fixtures] {
                     const ImageSet s = load_idx(fixtures / "two_images.idx");
                     if (s.count != 2 || s.rows != 28 || s.cols != 28)
                         return std::string("unexpected header");
                     const auto bytes = serialize_idx(s);
                     const ImageSet t = parse_idx(bytes);
                     return t.pixels == s.pixels ? std::string() : std::string("round trip differs");
                 }});
    c.push_back({"data", "pca_orthonormal", [] {
                     const PcaModel p = fit_pca(synthetic_pool(200, 12, 9), 5);
                     const Eigen::MatrixXd G = p.components * p.components.transpose();
                     const double off = (G - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff();
                     if (auto f = fail_if(off > 1e-8, "components not orthonormal", off); !f.empty())
                         return f;
                     for (int i = 1; i < 5; ++i)
                         if (p.variances[i] > p.variances[i - 1])
                             return std::string("variances increase");
                     return std::string();
                 }});
    c.push_back({"data", "label_unit_std", [] {
                     RegressionDataConfig cfg;
                     cfg.n = 2;
                     cfg.sizes = {60, 10, 10};
                     cfg.synthetic_train_pool = 100;
                     cfg.synthetic_test_pool = 40;
                     cfg.synthetic_dim = 8;
                     const RegressionData d = prepare_regression_data(cfg);
                     double m = 0, v = 0;
                     for (double y : d.train.labels)
                         m += y;
                     m /= d.train.size();
                     for (double y : d.train.labels)
                         v += (y - m) * (y - m);
                     const double sd = std::sqrt(v / d.train.size());
                     return fail_if(std::abs(sd - 1) > 1e-10, "train label std", sd);
                 }});
    return c;
}

} // namespace

std::filesystem::path default_fixture_dir() { return QMLBK_FIXTURE_DIR; }

std::vector<SelftestResult> run_selftest(const std::string &filter,
                                         const std::filesystem::path &fixture_dir) {
    std::vector<SelftestResult> out;
    for (const auto &check : build_checks(fixture_dir)) {
        if (!filter.empty() && check.module != filter)
            continue;
        SelftestResult r{check.module, check.property, false, {}};
        try {
            r.detail = check.run();
            r.pass = r.detail.empty();
        } catch (const std::exception &e) {
            r.detail = e.what();
        }
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace qmlbk::cli
