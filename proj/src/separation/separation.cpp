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

#include "qmlbk/separation/separation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "qmlbk/common/error.hpp"
#include "qmlbk/common/parallel.hpp"
#include "qmlbk/learning/learning.hpp"
#include "qmlbk/models/models.hpp"

namespace qmlbk {

namespace {

constexpr double kPi = std::numbers::pi;

// Largest d for which the parity circuit is checked on every input.
constexpr int kExactnessMaxD = 20;

void check_oracle_size(int d, int k, const OracleOptions &opts) {
    if (d < 1)
        throw std::invalid_argument("parity dimension must be >= 1");
    if (k < 0 || k > d)
        throw std::invalid_argument("sparsity k must lie in [0, d]");
    if (d > opts.max_d)
        throw BudgetError("oracle needs 2^" + std::to_string(d) + " x 2^" +
                          std::to_string(d) + " matrices; limit is d <= " +
                          std::to_string(opts.max_d));
}

// x_i = -1 when bit i of b is set.
double parity_of_index(std::uint64_t b, const std::vector<int> &support) {
    int ones = 0;
    for (int i : support)
        ones += static_cast<int>((b >> i) & 1);
    return (ones & 1) ? -1.0 : 1.0;
}

// K(x, y) = |<phi(x)|phi(y)>|^2 over the whole hypercube.
Eigen::MatrixXd hypercube_kernel(const FeatureMap &phi, int num_qubits, int d,
                                 unsigned threads) {
    const auto points = hypercube(d);
    const Eigen::Index N = static_cast<Eigen::Index>(points.size());
    const Eigen::Index dim = Eigen::Index{1} << num_qubits;
    Eigen::MatrixXcd S(N, dim);
    parallel_for(
        points.size(),
        [&](std::size_t i) {
            const Statevector s = phi(points[i]);
            if (s.num_qubits() != num_qubits)
                throw std::invalid_argument("feature map returned a state on " +
                                            std::to_string(s.num_qubits()) +
                                            " qubits, expected " +
                                            std::to_string(num_qubits));
            for (Eigen::Index j = 0; j < dim; ++j)
                S(static_cast<Eigen::Index>(i), j) = s[static_cast<std::size_t>(j)];
        },
        threads);
    const Eigen::MatrixXcd G = S.conjugate() * S.transpose();
    return G.cwiseAbs2();
}

// Orthonormal basis of the column space of a symmetric PSD matrix.
Eigen::MatrixXd psd_range(const Eigen::MatrixXd &K, double cutoff) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
    const Eigen::VectorXd &ev = es.eigenvalues();
    const double thr = cutoff * std::max(ev.cwiseAbs().maxCoeff(), 0.0);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] > thr)
            keep.push_back(i);
    Eigen::MatrixXd Q(K.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c)
        Q.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]);
    return Q;
}

// Orthonormal basis of the column space of a rectangular matrix.
Eigen::MatrixXd column_range(const Eigen::MatrixXd &A, double cutoff) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU);
    const Eigen::VectorXd &sv = svd.singularValues();
    const double thr = sv.size() > 0 ? cutoff * sv[0] : 0.0;
    Eigen::Index r = 0;
    while (r < sv.size() && sv[r] > thr)
        ++r;
    return svd.matrixU().leftCols(r);
}

std::vector<std::vector<int>> concept_supports(int d, int k, const OracleOptions &opts,
                                               bool &exact) {
    exact = d <= opts.exact_max_d;
    if (exact)
        return all_subsets(d, k);
    std::mt19937_64 rng(opts.seed);
    std::vector<std::vector<int>> out;
    std::vector<int> idx(static_cast<std::size_t>(d));
    for (int s = 0; s < opts.subsample; ++s) {
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = 0; i < k; ++i) {
            std::uniform_int_distribution<int> pick(i, d - 1);
            std::swap(idx[static_cast<std::size_t>(i)],
                      idx[static_cast<std::size_t>(pick(rng))]);
        }
        std::vector<int> A(idx.begin(), idx.begin() + k);
        std::sort(A.begin(), A.end());
        out.push_back(std::move(A));
    }
    return out;
}

OracleResult average_residual(const Eigen::MatrixXd &Q, int d, int k,
                              const OracleOptions &opts) {
    bool exact = true;
    const auto supports = concept_supports(d, k, opts, exact);
    const std::uint64_t N = std::uint64_t{1} << d;
    std::vector<double> eps(supports.size());
    parallel_for(
        supports.size(),
        [&](std::size_t a) {
            Eigen::VectorXd g(static_cast<Eigen::Index>(N));
            for (std::uint64_t b = 0; b < N; ++b)
                g[static_cast<Eigen::Index>(b)] = parity_of_index(b, supports[a]);
            const double captured =
                Q.cols() > 0 ? (Q.transpose() * g).squaredNorm() : 0.0;
            eps[a] = 1.0 - captured / static_cast<double>(N);
        },
        opts.threads);
    OracleResult r;
    r.concepts = static_cast<int>(supports.size());
    r.exact = exact;
    r.span_dim = static_cast<int>(Q.cols());
    r.epsilon_avg = std::accumulate(eps.begin(), eps.end(), 0.0) /
                    static_cast<double>(eps.size());
    r.epsilon_min = *std::min_element(eps.begin(), eps.end());
    r.epsilon_max = *std::max_element(eps.begin(), eps.end());
    return r;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------

ParityConcept::ParityConcept(int d_, std::vector<int> support_)
    : d(d_), support(std::move(support_)) {
    if (d < 1)
        throw std::invalid_argument("parity dimension must be >= 1");
    std::sort(support.begin(), support.end());
    if (std::adjacent_find(support.begin(), support.end()) != support.end())
        throw std::invalid_argument("parity support has repeated indices");
    for (int i : support)
        if (i < 0 || i >= d)
            throw std::out_of_range("parity support index " + std::to_string(i) +
                                    " outside [0, " + std::to_string(d) + ")");
}

double ParityConcept::operator()(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(d))
        throw std::invalid_argument("parity input has wrong dimension");
    double g = 1.0;
    for (int i : support)
        g *= x[static_cast<std::size_t>(i)];
    return g;
}

MixtureDistribution::MixtureDistribution(ParityConcept parity)
    : parity_(std::move(parity)) {}

std::vector<double> MixtureDistribution::sample_uniform(std::mt19937_64 &rng) const {
    std::bernoulli_distribution coin(0.5);
    std::vector<double> x(static_cast<std::size_t>(parity_.d));
    for (auto &v : x)
        v = coin(rng) ? -1.0 : 1.0;
    return x;
}

std::vector<double>
MixtureDistribution::sample_correlated(std::mt19937_64 &rng) const {
    std::vector<double> x = sample_uniform(rng);
    std::bernoulli_distribution coin(0.5);
    const double shared = coin(rng) ? -1.0 : 1.0;
    for (int i : parity_.support)
        x[static_cast<std::size_t>(i)] = shared;
    return x;
}

std::vector<double> MixtureDistribution::sample(std::mt19937_64 &rng) const {
    std::bernoulli_distribution coin(0.5);
    return coin(rng) ? sample_correlated(rng) : sample_uniform(rng);
}

double MixtureDistribution::probability(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(parity_.d))
        throw std::invalid_argument("input has wrong dimension");
    const double uniform = std::ldexp(1.0, -parity_.d);
    if (parity_.support.empty())
        return uniform;
    const double first = x[static_cast<std::size_t>(parity_.support.front())];
    bool aligned = true;
    for (int i : parity_.support)
        aligned = aligned && x[static_cast<std::size_t>(i)] == first;
    const double correlated =
        aligned ? std::ldexp(1.0, -(parity_.d - parity_.k() + 1)) : 0.0;
    return 0.5 * uniform + 0.5 * correlated;
}

int schedule_k(int d) {
    if (d < 1)
        throw std::invalid_argument("parity dimension must be >= 1");
    const int k = d / 2;
    return (k % 2 == 0) ? k + 1 : k;
}

std::vector<std::vector<int>> all_subsets(int d, int k) {
    if (k < 0 || k > d)
        throw std::invalid_argument("subset size outside [0, d]");
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(k));
    std::iota(cur.begin(), cur.end(), 0);
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == d - k + i)
            --i;
        if (i < 0)
            break;
        ++cur[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

double binomial(int d, int k) {
    if (k < 0 || k > d)
        return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i)
        r = r * (d - k + i) / i;
    return std::round(r);
}

std::vector<std::vector<double>> hypercube(int d) {
    if (d < 0 || d > 24)
        throw BudgetError("hypercube enumeration limited to d <= 24");
    const std::uint64_t N = std::uint64_t{1} << d;
    std::vector<std::vector<double>> out(N, std::vector<double>(static_cast<std::size_t>(d)));
    for (std::uint64_t b = 0; b < N; ++b)
        for (int i = 0; i < d; ++i)
            out[b][static_cast<std::size_t>(i)] = ((b >> i) & 1) ? -1.0 : 1.0;
    return out;
}

FeatureMap encoding_feature_map(const FeatureEncoding &enc) {
    return [enc](std::span<const double> x) { return enc.encode(x); };
}

FeatureEncoding folded_havlicek(int n, int d, double s) {
    if (n < 1 || d < 1)
        throw std::invalid_argument("folded encoding needs n, d >= 1");
    Circuit c(n, 0, d);
    for (int rep = 0; rep < 2; ++rep) {
        for (int q = 0; q < n; ++q)
            c.add(Gate::h(q));
        for (int i = 0; i < d; ++i)
            c.add(Gate::rz(i % n, AngleSource::data(i, s)));
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                if (i % n != j % n)
                    c.add(Gate::pauli_rotation({i % n, j % n}, "ZZ",
                                               AngleSource::data_product(i, j, s)));
    }
    return FeatureEncoding::from_circuit(std::move(c));
}

Eigen::MatrixXd density_features(const FeatureMap &phi, int num_qubits,
                                 const std::vector<std::vector<double>> &inputs) {
    const std::size_t dim = std::size_t{1} << num_qubits;
    Eigen::MatrixXd F(static_cast<Eigen::Index>(inputs.size()),
                      static_cast<Eigen::Index>(dim * dim));
    for (std::size_t r = 0; r < inputs.size(); ++r) {
        const Statevector s = phi(inputs[r]);
        Eigen::Index c = 0;
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i; j < dim; ++j) {
                const complex_t rho = s[i] * std::conj(s[j]);
                F(static_cast<Eigen::Index>(r), c++) = rho.real();
                if (j > i)
                    F(static_cast<Eigen::Index>(r), c++) = rho.imag();
            }
    }
    return F;
}

OracleResult best_linear_mse(const FeatureMap &phi, int num_qubits, int d, int k,
                             const OracleOptions &opts) {
    check_oracle_size(d, k, opts);
    const Eigen::MatrixXd K = hypercube_kernel(phi, num_qubits, d, opts.threads);
    const Eigen::MatrixXd Q = psd_range(K, opts.rank_cutoff);
    OracleResult r = average_residual(Q, d, k, opts);
    r.bound = 1.0 - std::ldexp(1.0, 2 * num_qubits) / binomial(d, k);
    return r;
}

std::vector<int> implicit_support_indices(int d, int M, std::uint64_t seed) {
    const int N = 1 << d;
    if (M < 1 || M > N)
        throw std::invalid_argument("M must lie in [1, 2^d]");
    std::vector<int> idx(static_cast<std::size_t>(N));
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < M; ++i) {
        std::uniform_int_distribution<int> pick(i, N - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    idx.resize(static_cast<std::size_t>(M));
    return idx;
}

OracleResult best_implicit_mse(const FeatureMap &phi, int num_qubits, int M, int d,
                               int k, const OracleOptions &opts) {
    check_oracle_size(d, k, opts);
    const auto idx = implicit_support_indices(d, M, opts.seed);
    const Eigen::MatrixXd K = hypercube_kernel(phi, num_qubits, d, opts.threads);
    Eigen::MatrixXd cols(K.rows(), M);
    for (int m = 0; m < M; ++m)
        cols.col(m) = K.col(idx[static_cast<std::size_t>(m)]);
    const Eigen::MatrixXd Q = column_range(cols, opts.rank_cutoff);
    OracleResult r = average_residual(Q, d, k, opts);
    r.bound = 1.0 - static_cast<double>(M) / binomial(d, k);
    return r;
}

std::vector<MixtureOracleEntry>
best_linear_mse_mixture(const FeatureMap &phi, int num_qubits, int d, int k,
                        const OracleOptions &opts) {
    check_oracle_size(d, k, opts);
    const Eigen::MatrixXd K = hypercube_kernel(phi, num_qubits, d, opts.threads);
    const Eigen::MatrixXd Q = psd_range(K, opts.rank_cutoff);
    bool exact = true;
    const auto supports = concept_supports(d, k, opts, exact);
    const auto points = hypercube(d);
    const Eigen::Index N = static_cast<Eigen::Index>(points.size());
    std::vector<MixtureOracleEntry> out(supports.size());
    parallel_for(
        supports.size(),
        [&](std::size_t a) {
            const ParityConcept parity(d, supports[a]);
            const MixtureDistribution dist(parity);
            Eigen::VectorXd g(N), sw(N);
            for (Eigen::Index b = 0; b < N; ++b) {
                const auto &x = points[static_cast<std::size_t>(b)];
                g[b] = parity(x);
                sw[b] = std::sqrt(dist.probability(x));
            }
            const double captured =
                Q.cols() > 0 ? (Q.transpose() * g).squaredNorm() : 0.0;
            // Weighted least squares: min_c || sqrt(mu) (Q c - g) ||^2.
            const Eigen::VectorXd target = sw.cwiseProduct(g);
            double residual = target.squaredNorm();
            if (Q.cols() > 0) {
                const Eigen::MatrixXd B = sw.asDiagonal() * Q;
                const Eigen::VectorXd c = B.colPivHouseholderQr().solve(target);
                residual = (B * c - target).squaredNorm();
            }
            out[a] = {supports[a], 1.0 - captured / static_cast<double>(N), residual};
        },
        opts.threads);
    return out;
}

double parity_circuit_max_error(const ParityConcept &parity) {
    if (parity.d > kExactnessMaxD)
        throw BudgetError("parity exactness check limited to d <= " +
                          std::to_string(kExactnessMaxD));
    const ReuploadingModel model = parity_model(parity.d);
    std::vector<double> theta(static_cast<std::size_t>(parity.d), 0.0);
    for (int i : parity.support)
        theta[static_cast<std::size_t>(i)] = kPi / 2;
    const std::uint64_t N = std::uint64_t{1} << parity.d;
    std::vector<double> x(static_cast<std::size_t>(parity.d));
    double worst = 0.0;
    for (std::uint64_t b = 0; b < N; ++b) {
        for (int i = 0; i < parity.d; ++i)
            x[static_cast<std::size_t>(i)] = ((b >> i) & 1) ? -1.0 : 1.0;
        worst = std::max(worst, std::abs(eval_reuploading(model, theta, x) - parity(x)));
    }
    return worst;
}

SeparationReport run_separation_experiment(const SeparationConfig &cfg) {
    if (cfg.d_list.empty())
        throw std::invalid_argument("separation experiment needs a non-empty d list");
    if (cfg.trials < 1)
        throw std::invalid_argument("separation experiment needs >= 1 trial");
    SeparationReport rep;
    for (int d : cfg.d_list) {
        if (d < 1 || d > kExactnessMaxD)
            throw BudgetError("learner dimension d = " + std::to_string(d) +
                              " outside [1, " + std::to_string(kExactnessMaxD) + "]");
        const int k = schedule_k(d);
        const int samples = parity_sample_count(d, cfg.delta);

        // (a) threshold learner over independent trials.
        std::vector<int> ok(static_cast<std::size_t>(cfg.trials), 0);
        parallel_for(
            static_cast<std::size_t>(cfg.trials),
            [&](std::size_t t) {
                std::seed_seq seq{static_cast<std::uint64_t>(cfg.seed),
                                  static_cast<std::uint64_t>(d),
                                  static_cast<std::uint64_t>(t)};
                std::mt19937_64 rng(seq);
                OracleOptions draw;
                draw.exact_max_d = 0;
                draw.subsample = 1;
                draw.seed = rng();
                bool exact = false;
                const auto A = concept_supports(d, k, draw, exact).front();
                const MixtureDistribution dist(ParityConcept(d, A));
                auto sampler = [&] {
                    auto x = dist.sample(rng);
                    const double y = dist.parity()(x);
                    return std::make_pair(std::move(x), y);
                };
                ok[t] = parity_learn(sampler, d, cfg.delta, A).success ? 1 : 0;
            },
            cfg.threads);
        const int successes = std::accumulate(ok.begin(), ok.end(), 0);
        SeparationRow learner;
        learner.model = "reuploading";
        learner.d = d;
        learner.k = k;
        learner.n = 1;
        learner.M = samples;
        // Distinct parities are orthonormal under the uniform measure, so the
        // learned circuit has MSE 0 on success and 2 otherwise.
        learner.epsilon_avg = 2.0 * (cfg.trials - successes) / cfg.trials;
        learner.learner_success_rate = static_cast<double>(successes) / cfg.trials;
        learner.samples_used = samples;
        rep.rows.push_back(learner);

        // (c) exactness of the parity circuit on a seeded support.
        {
            OracleOptions draw;
            draw.exact_max_d = 0;
            draw.subsample = 1;
            draw.seed = cfg.seed + static_cast<std::uint64_t>(d);
            bool exact = false;
            const auto A = concept_supports(d, k, draw, exact).front();
            rep.exactness.emplace_back(d, parity_circuit_max_error(ParityConcept(d, A)));
        }

        // (b) dimension oracles.
        if (d > cfg.oracle_max_d)
            continue;
        OracleOptions oo;
        oo.seed = cfg.seed;
        oo.threads = cfg.threads;
        for (int n : cfg.n_list) {
            const FeatureMap phi = encoding_feature_map(folded_havlicek(n, d, cfg.angle_scale));
            const OracleResult lin = best_linear_mse(phi, n, d, k, oo);
            SeparationRow row;
            row.model = "explicit";
            row.d = d;
            row.k = k;
            row.n = n;
            row.epsilon_avg = lin.epsilon_avg;
            row.bound = lin.bound;
            rep.rows.push_back(row);
            for (int M : cfg.m_list) {
                if (M > (1 << d))
                    continue;
                const OracleResult imp = best_implicit_mse(phi, n, M, d, k, oo);
                SeparationRow irow;
                irow.model = "implicit";
                irow.d = d;
                irow.k = k;
                irow.n = n;
                irow.M = M;
                irow.epsilon_avg = imp.epsilon_avg;
                irow.bound = imp.bound;
                rep.rows.push_back(irow);
            }
        }
    }
    return rep;
}

void write_separation_csv(const SeparationReport &report, std::ostream &out) {
    out << "model,d,k,n,M,epsilon_avg,bound,learner_success_rate,samples_used\n";
    for (const auto &r : report.rows) {
        out << r.model << ',' << r.d << ',' << r.k << ',' << r.n << ',';
        if (r.M)
            out << *r.M;
        out << ',' << format_double(r.epsilon_avg) << ',';
        if (r.bound)
            out << format_double(*r.bound);
        out << ',';
        if (r.learner_success_rate)
            out << format_double(*r.learner_success_rate);
        out << ',';
        if (r.samples_used)
            out << *r.samples_used;
        out << '\n';
    }
}

} // namespace qmlbk
