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

#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "qmlbk/common/error.hpp"
#include "qmlbk/learning/learning.hpp"
#include "qmlbk/separation/separation.hpp"

namespace qmlbk {
namespace {

using oracle::kPi;

// Dense rho(x) for every hypercube point.
std::vector<oracle::Mat> densities(const FeatureEncoding &enc, int d) {
    std::vector<oracle::Mat> out;
    for (const auto &x : hypercube(d)) {
        const oracle::Vec v = oracle::to_vec(enc.encode(x));
        out.push_back(v * v.adjoint());
    }
    return out;
}

Eigen::VectorXd parity_vector(int d, const std::vector<int> &A) {
    const auto pts = hypercube(d);
    Eigen::VectorXd g(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double p = 1;
        for (int a : A)
            p *= pts[i][static_cast<std::size_t>(a)];
        g[static_cast<Eigen::Index>(i)] = p;
    }
    return g;
}

// Weighted least squares residual sum_x w(x) (F c - g)^2 with F arbitrary columns.
double ls_residual(const Eigen::MatrixXd &F, const Eigen::VectorXd &g, const Eigen::VectorXd &w) {
    const Eigen::VectorXd s = w.cwiseSqrt();
    const Eigen::MatrixXd A = s.asDiagonal() * F;
    const Eigen::VectorXd b = s.cwiseProduct(g);
    const Eigen::VectorXd c = A.completeOrthogonalDecomposition().solve(b);
    return (A * c - b).squaredNorm();
}

// Columns Re/Im of every density-matrix entry: spans {Tr[rho(x) O]}.
Eigen::MatrixXd linear_columns(const std::vector<oracle::Mat> &rho) {
    const Eigen::Index D = rho[0].rows();
    Eigen::MatrixXd F(static_cast<Eigen::Index>(rho.size()), 2 * D * D);
    for (std::size_t r = 0; r < rho.size(); ++r)
        for (Eigen::Index i = 0; i < D; ++i)
            for (Eigen::Index j = 0; j < D; ++j) {
                F(static_cast<Eigen::Index>(r), i * D + j) = rho[r](i, j).real();
                F(static_cast<Eigen::Index>(r), D * D + i * D + j) = rho[r](i, j).imag();
            }
    return F;
}

TEST(Schedule, KAndCombinatorics) {
    const std::map<int, int> want{{4, 3}, {5, 3}, {6, 3}, {8, 5}, {9, 5}, {12, 7}, {2, 1}};
    for (const auto &[d, k] : want)
        EXPECT_EQ(schedule_k(d), k) << d;
    EXPECT_DOUBLE_EQ(binomial(6, 3), 20);
    EXPECT_DOUBLE_EQ(binomial(12, 7), 792);
    const auto s = all_subsets(5, 2);
    ASSERT_EQ(s.size(), 10u);
    EXPECT_EQ(s.front(), (std::vector<int>{0, 1}));
    EXPECT_EQ(s.back(), (std::vector<int>{3, 4}));
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    const auto h = hypercube(3);
    ASSERT_EQ(h.size(), 8u);
    EXPECT_EQ(h[5], (std::vector<double>{-1, 1, -1}));
}

TEST(Parity, OrthonormalUnderUniform) {
    const int d = 5;
    const auto subsets = all_subsets(d, 2);
    for (std::size_t a = 0; a < subsets.size(); ++a)
        for (std::size_t b = 0; b < subsets.size(); ++b) {
            const double ip = parity_vector(d, subsets[a]).dot(parity_vector(d, subsets[b])) / 32;
            EXPECT_DOUBLE_EQ(ip, a == b ? 1.0 : 0.0);
        }
}

TEST(Parity, CircuitIsExact) {
    std::mt19937_64 rng(41);
    for (int d : {3, 6, 10}) {
        for (int t = 0; t < 5; ++t) {
            std::vector<int> idx(static_cast<std::size_t>(d));
            std::iota(idx.begin(), idx.end(), 0);
            std::shuffle(idx.begin(), idx.end(), rng);
            std::vector<int> A(idx.begin(), idx.begin() + schedule_k(d));
            std::sort(A.begin(), A.end());
            EXPECT_LT(parity_circuit_max_error(ParityConcept(d, A)), 1e-9);
        }
    }
}

TEST(Mixture, ProbabilityNormalizedAndSampled) {
    const ParityConcept g(5, {0, 2, 3});
    const MixtureDistribution dist(g);
    double total = 0;
    std::map<std::vector<double>, int> counts;
    for (const auto &x : hypercube(5))
        total += dist.probability(x);
    EXPECT_NEAR(total, 1.0, 1e-15);
    std::mt19937_64 rng(42);
    const int draws = 200000;
    for (int i = 0; i < draws; ++i)
        ++counts[dist.sample(rng)];
    for (const auto &x : hypercube(5)) {
        const double p = dist.probability(x);
        const double sigma = std::sqrt(p * (1 - p) / draws);
        EXPECT_NEAR(counts[x] / double(draws), p, 5 * sigma + 1e-12);
    }
}

TEST(Features, DensityFeaturesSpanMatchesDense) {
    const int d = 4, n = 2;
    const FeatureEncoding enc = folded_havlicek(n, d, kPi / 4);
    const auto pts = hypercube(d);
    const Eigen::MatrixXd F = density_features(encoding_feature_map(enc), n, pts);
    EXPECT_EQ(F.cols(), 16);
    const Eigen::MatrixXd G = linear_columns(densities(enc, d));
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(F.rows());
    // Same column span: each projects the other without residual.
    for (Eigen::Index c = 0; c < G.cols(); ++c)
        EXPECT_LT(ls_residual(F, G.col(c), w), 1e-18);
}

TEST(Features, FoldedEqualsHavlicekWhenUnfolded) {
    // n = d, scale 2 pi reproduces the Havlicek encoding
    std::mt19937_64 rng(43);
    const FeatureEncoding a = folded_havlicek(3, 3, 2 * kPi);
    const FeatureEncoding b = FeatureEncoding::havlicek(3);
    const auto x = oracle::uniform(rng, 3, -1, 1);
    EXPECT_NEAR(std::abs(inner_product(a.encode(x), b.encode(x))), 1.0, 1e-12);
}

struct OracleCase {
    int d, n;
};

class Oracles : public ::testing::TestWithParam<OracleCase> {};

TEST_P(Oracles, LinearAndImplicitMatchDenseLeastSquares) {
    const auto [d, n] = GetParam();
    const int k = schedule_k(d);
    const FeatureEncoding enc = folded_havlicek(n, d, kPi / 4);
    const FeatureMap phi = encoding_feature_map(enc);
    const auto rho = densities(enc, d);
    const double size = std::ldexp(1.0, d);
    const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(size), 1 / size);
    const auto subsets = all_subsets(d, k);

    // linear
    const Eigen::MatrixXd F = linear_columns(rho);
    double lin = 0;
    for (const auto &A : subsets)
        lin += ls_residual(F, parity_vector(d, A), uniform);
    lin /= static_cast<double>(subsets.size());
    const OracleResult r = best_linear_mse(phi, n, d, k);
    EXPECT_NEAR(r.epsilon_avg, lin, 1e-9);
    EXPECT_NEAR(r.bound, 1 - std::pow(4.0, n) / binomial(d, k), 1e-15);
    EXPECT_GE(r.epsilon_avg, r.bound - 1e-9);
    EXPECT_TRUE(r.exact);
    EXPECT_EQ(r.concepts, static_cast<int>(subsets.size()));

    // implicit, nested in M
    double previous = 2;
    for (int M : {2, 4, 8}) {
        const auto idx = implicit_support_indices(d, M, 0);
        ASSERT_EQ(idx.size(), static_cast<std::size_t>(M));
        Eigen::MatrixXd K(static_cast<Eigen::Index>(size), M);
        for (Eigen::Index x = 0; x < K.rows(); ++x)
            for (int m = 0; m < M; ++m)
                K(x, m) = (rho[static_cast<std::size_t>(x)] * rho[static_cast<std::size_t>(idx[static_cast<std::size_t>(m)])])
                              .trace()
                              .real();
        double imp = 0;
        for (const auto &A : subsets)
            imp += ls_residual(K, parity_vector(d, A), uniform);
        imp /= static_cast<double>(subsets.size());
        const OracleResult ri = best_implicit_mse(phi, n, M, d, k);
        EXPECT_NEAR(ri.epsilon_avg, imp, 1e-9) << M;
        EXPECT_GE(ri.epsilon_avg, ri.bound - 1e-9);
        EXPECT_LE(ri.epsilon_avg, previous + 1e-12);
        previous = ri.epsilon_avg;
    }
    const auto small = implicit_support_indices(d, 4, 0), big = implicit_support_indices(d, 8, 0);
    EXPECT_TRUE(std::equal(small.begin(), small.end(), big.begin()));

    // mixture
    for (const auto &e : best_linear_mse_mixture(phi, n, d, k)) {
        const MixtureDistribution dist(ParityConcept(d, e.support));
        const auto pts = hypercube(d);
        Eigen::VectorXd w(static_cast<Eigen::Index>(size));
        for (std::size_t i = 0; i < pts.size(); ++i)
            w[static_cast<Eigen::Index>(i)] = dist.probability(pts[i]);
        EXPECT_NEAR(e.epsilon_mixture, ls_residual(F, parity_vector(d, e.support), w), 1e-9);
        EXPECT_GE(e.epsilon_mixture, e.epsilon_uniform / 2 - 1e-9);
    }
}

INSTANTIATE_TEST_SUITE_P(Small, Oracles,
                         ::testing::Values(OracleCase{4, 1}, OracleCase{5, 2}, OracleCase{6, 1},
                                           OracleCase{6, 2}));

TEST(Oracles, SixBitCertificate) {
    // d = 6, k = 3: C(6, 3) = 20 and 4^1 = 4 gives 1 - 4 / 20
    const FeatureMap phi = encoding_feature_map(folded_havlicek(1, 6, kPi / 4));
    const OracleResult lin = best_linear_mse(phi, 1, 6, 3);
    EXPECT_NEAR(lin.bound, 0.8, 1e-15);
    EXPECT_GE(lin.epsilon_avg, 0.8 - 1e-9);
    const OracleResult imp = best_implicit_mse(phi, 1, 4, 6, 3);
    EXPECT_NEAR(imp.bound, 0.8, 1e-15);
    EXPECT_GE(imp.epsilon_avg, 0.8 - 1e-9);
}

TEST(Oracles, SubsampledAboveExactLimit) {
    OracleOptions o;
    o.exact_max_d = 4;
    o.subsample = 7;
    const FeatureMap phi = encoding_feature_map(folded_havlicek(1, 5, kPi / 4));
    const OracleResult r = best_linear_mse(phi, 1, 5, 3, o);
    EXPECT_FALSE(r.exact);
    EXPECT_EQ(r.concepts, 7);
    EXPECT_GE(r.epsilon_min, r.bound - 1e-9);
    EXPECT_EQ(best_linear_mse(phi, 1, 5, 3, o).epsilon_avg, r.epsilon_avg);
}

TEST(Oracles, RefusesLargeDimension) {
    OracleOptions o;
    o.max_d = 6;
    const FeatureMap phi = encoding_feature_map(folded_havlicek(1, 7, kPi / 4));
    EXPECT_THROW(best_linear_mse(phi, 1, 7, 3, o), BudgetError);
}

TEST(Experiment, RowsAndCsv) {
    SeparationConfig cfg;
    cfg.d_list = {4, 6};
    cfg.trials = 20;
    cfg.seed = 5;
    const SeparationReport rep = run_separation_experiment(cfg);
    std::ostringstream csv;
    write_separation_csv(rep, csv);
    std::istringstream in(csv.str());
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "model,d,k,n,M,epsilon_avg,bound,learner_success_rate,samples_used");
    int learner = 0;
    for (const auto &row : rep.rows) {
        if (row.model == "reuploading") {
            ++learner;
            ASSERT_TRUE(row.learner_success_rate.has_value());
            EXPECT_GE(*row.learner_success_rate, 0.9);
            EXPECT_EQ(row.samples_used, parity_sample_count(row.d, 0.1));
        } else {
            ASSERT_TRUE(row.bound.has_value());
            EXPECT_GE(row.epsilon_avg, *row.bound - 1e-9) << row.model << row.d << row.n;
        }
    }
    EXPECT_EQ(learner, 2);
    ASSERT_EQ(rep.exactness.size(), 2u);
    for (const auto &[d, err] : rep.exactness)
        EXPECT_LT(err, 1e-9);
    // deterministic
    std::ostringstream again;
    write_separation_csv(run_separation_experiment(cfg), again);
    EXPECT_EQ(csv.str(), again.str());
}

} // namespace
} // namespace qmlbk
