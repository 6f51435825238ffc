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
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmlbk/models/encoding.hpp"

namespace qmlbk {

/// g_A(x) = prod_{i in A} x_i over x in {-1, 1}^d.
struct ParityConcept {
    int d = 0;
    std::vector<int> support; ///< A, ascending, 0-based

    ParityConcept(int d, std::vector<int> support);
    int k() const noexcept { return static_cast<int>(support.size()); }
    double operator()(std::span<const double> x) const;
};

/**
 * D_A: with probability 1/2 a uniform point, otherwise components outside A
 * are uniform and the components in A share a single uniform sign.
 */
class MixtureDistribution {
  public:
    explicit MixtureDistribution(ParityConcept parity);

    const ParityConcept &parity() const noexcept { return parity_; }
    std::vector<double> sample(std::mt19937_64 &rng) const;
    std::vector<double> sample_uniform(std::mt19937_64 &rng) const;
    std::vector<double> sample_correlated(std::mt19937_64 &rng) const;
    /// Probability mass of x under D_A.
    double probability(std::span<const double> x) const;

  private:
    ParityConcept parity_;
};

/// floor(d / 2), plus one when that is even.
int schedule_k(int d);

/// All k-subsets of [0, d) in lexicographic order.
std::vector<std::vector<int>> all_subsets(int d, int k);

/// C(d, k) as a double.
double binomial(int d, int k);

/// The 2^d points of {-1, 1}^d; bit i of the index set means x_i = -1.
std::vector<std::vector<double>> hypercube(int d);

using FeatureMap = std::function<Statevector(std::span<const double>)>;

FeatureMap encoding_feature_map(const FeatureEncoding &enc);

/**
 * Havlicek-style map of d inputs onto n qubits: two rounds of H on every
 * qubit followed by RZ(s x_i) on qubit i mod n and exp(-i s x_i x_j Z Z / 2)
 * for pairs landing on distinct qubits. With n = d and s = 2 pi this is the
 * Havlicek encoding.
 */
FeatureEncoding folded_havlicek(int n, int d, double angle_scale);

/// Rows: flattened real coordinates of rho(x) (Re rho_ij for i <= j and
/// Im rho_ij for i < j; 4^n columns).
Eigen::MatrixXd density_features(const FeatureMap &phi, int num_qubits,
                                 const std::vector<std::vector<double>> &inputs);

struct OracleOptions {
    /// Exact average over all C(d, k) supports up to this d.
    int exact_max_d = 10;
    int subsample = 1000;
    std::uint64_t seed = 0;
    double rank_cutoff = 1e-10;
    unsigned threads = 0;
    /// Memory cap on 2^d x 2^d matrices.
    int max_d = 12;
};

struct OracleResult {
    double epsilon_avg = 0.0;
    double epsilon_min = 0.0;
    double epsilon_max = 0.0;
    /// Dimension of the function span (rank of the restricted kernel).
    int span_dim = 0;
    int concepts = 0;
    bool exact = true;
    /// 1 - span_bound / C(d, k), where span_bound = 4^n or M.
    double bound = 0.0;
};

/**
 * Best achievable uniform-measure MSE 1 - ||Q^T g_A||^2 / 2^d of any linear
 * model Tr[rho(x) O], averaged over k-sparse parities. Q is an orthonormal
 * basis of span{x -> Tr[rho(x) rho(y)]}, which coincides with the span of
 * the density-matrix features.
 */
OracleResult best_linear_mse(const FeatureMap &phi, int num_qubits, int d, int k,
                             const OracleOptions &opts = {});

/**
 * Same with the observable restricted to span{rho(x_m)} for M distinct
 * uniformly sampled points (nested in M for a fixed seed).
 */
OracleResult best_implicit_mse(const FeatureMap &phi, int num_qubits, int M, int d,
                               int k, const OracleOptions &opts = {});

/// The M training points best_implicit_mse uses.
std::vector<int> implicit_support_indices(int d, int M, std::uint64_t seed);

/// Best linear MSE under D_A for each support, paired with the uniform value.
struct MixtureOracleEntry {
    std::vector<int> support;
    double epsilon_uniform = 0.0;
    double epsilon_mixture = 0.0;
};
std::vector<MixtureOracleEntry>
best_linear_mse_mixture(const FeatureMap &phi, int num_qubits, int d, int k,
                        const OracleOptions &opts = {});

/// Max |f(x) - g_A(x)| of the parity circuit with theta_i = pi/2 on A over
/// all 2^d inputs.
double parity_circuit_max_error(const ParityConcept &parity);

struct SeparationConfig {
    std::vector<int> d_list;
    double delta = 0.1;
    int trials = 200;
    std::vector<int> n_list{1, 2};
    std::vector<int> m_list{4};
    double angle_scale = 0.7853981633974483; ///< pi / 4
    std::uint64_t seed = 0;
    int oracle_max_d = 10;
    unsigned threads = 0;
};

struct SeparationRow {
    std::string model; ///< reuploading, explicit or implicit
    int d = 0;
    int k = 0;
    int n = 0;
    std::optional<int> M;
    double epsilon_avg = 0.0;
    std::optional<double> bound;
    std::optional<double> learner_success_rate;
    std::optional<int> samples_used;
};

struct SeparationReport {
    std::vector<SeparationRow> rows;
    /// Per d: max parity-circuit error over the exactness check.
    std::vector<std::pair<int, double>> exactness;
};

SeparationReport run_separation_experiment(const SeparationConfig &cfg);

void write_separation_csv(const SeparationReport &report, std::ostream &out);

} // namespace qmlbk
