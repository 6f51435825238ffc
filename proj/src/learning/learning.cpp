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

#include "qmlbk/learning/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qmlbk/common/error.hpp"
#include "qmlbk/common/parallel.hpp"

namespace qmlbk {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPinvCutoff = 1e-10;

Model with_unit_weight(const Model &m) {
    if (const auto *e = std::get_if<ExplicitModel>(&m)) {
        ExplicitModel copy = *e;
        copy.set_observable_weight(1.0);
        return copy;
    }
    return m;
}

double evaluate_bound(const DiffProblem &p, std::span<const double> angles) {
    Statevector s = p.initial;
    apply_bound(s, *p.circuit, angles);
    return p.weight * p.observable->expectation(s);
}

void check_theta(const Model &m, std::span<const double> theta) {
    if (theta.size() != static_cast<std::size_t>(model_num_parameters(m)))
        throw std::invalid_argument(
            "theta has " + std::to_string(theta.size()) +
            " entries, model declares " +
            std::to_string(model_num_parameters(m)));
}

} // namespace

// ---------------------------------------------------------------------------
// Dataset / config

int Dataset::arity() const {
    return inputs.empty() ? 0 : static_cast<int>(inputs.front().size());
}

void Dataset::validate() const {
    if (inputs.size() != labels.size())
        throw std::invalid_argument("dataset has " + std::to_string(inputs.size()) +
                                    " inputs but " + std::to_string(labels.size()) +
                                    " labels");
    for (std::size_t i = 0; i < inputs.size(); ++i)
        if (inputs[i].size() != inputs.front().size())
            throw std::invalid_argument("input " + std::to_string(i) +
                                        " has a different arity");
}

void TrainConfig::validate() const {
    if (steps < 0)
        throw std::invalid_argument("steps must be non-negative");
    if (!(lr_params > 0.0) || !(lr_weight > 0.0))
        throw std::invalid_argument("learning rates must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw std::invalid_argument("ADAM betas must lie in [0, 1)");
    if (!(eps_adam > 0.0))
        throw std::invalid_argument("ADAM epsilon must be positive");
    if (!(lambda >= 0.0))
        throw std::invalid_argument("regularization lambda must be >= 0");
    if (!(init_std >= 0.0))
        throw std::invalid_argument("init_std must be >= 0");
}

// ---------------------------------------------------------------------------
// Losses

double mse(std::span<const double> predictions, std::span<const double> labels) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("prediction/label length mismatch");
    if (labels.empty())
        throw std::invalid_argument("mean squared error of an empty dataset");
    double acc = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double r = predictions[i] - labels[i];
        acc += r * r;
    }
    return acc / static_cast<double>(labels.size());
}

std::vector<double> predict(const Model &m, std::span<const double> theta,
                            const std::vector<std::vector<double>> &inputs,
                            unsigned threads) {
    check_theta(m, theta);
    std::vector<double> out(inputs.size());
    parallel_for(
        inputs.size(), [&](std::size_t i) { out[i] = eval_model(m, theta, inputs[i]); },
        threads);
    return out;
}

double mse_loss(const Model &m, std::span<const double> theta,
                const Dataset &data, unsigned threads) {
    data.validate();
    if (data.size() == 0)
        throw std::invalid_argument("mean squared error of an empty dataset");
    return mse(predict(m, theta, data.inputs, threads), data.labels);
}

double observable_penalty(const Observable &o, double weight) {
    double acc = 0.0;
    for (const auto &t : o.terms())
        acc += t.weight * t.weight;
    const double s = o.scale() * weight;
    return s * s * acc;
}

double regularized_loss_explicit(const ExplicitModel &m,
                                 std::span<const double> theta,
                                 const Dataset &data, double lambda,
                                 unsigned threads) {
    if (!(lambda >= 0.0))
        throw std::invalid_argument("regularization lambda must be >= 0");
    return mse_loss(m, theta, data, threads) +
           lambda * observable_penalty(m.observable(), m.observable_weight());
}

double regularized_loss_implicit(const Eigen::MatrixXd &gram,
                                 const Eigen::VectorXd &alpha,
                                 const Eigen::VectorXd &labels, double lambda) {
    if (gram.rows() != alpha.size() || gram.rows() != labels.size())
        throw std::invalid_argument("Gram/alpha/label dimension mismatch");
    const Eigen::VectorXd r = gram * alpha - labels;
    return r.squaredNorm() / static_cast<double>(labels.size()) +
           lambda * alpha.dot(gram * alpha);
}

Eigen::VectorXd krr_fit(const Eigen::MatrixXd &gram, const Eigen::VectorXd &labels,
                        double lambda) {
    if (gram.rows() != gram.cols())
        throw std::invalid_argument("Gram matrix must be square");
    if (gram.rows() != labels.size())
        throw std::invalid_argument("Gram matrix has " + std::to_string(gram.rows()) +
                                    " rows, labels have " +
                                    std::to_string(labels.size()) + " entries");
    if (!(lambda >= 0.0))
        throw std::invalid_argument("regularization lambda must be >= 0");
    const Eigen::Index M = gram.rows();
    if (lambda > 0.0) {
        Eigen::MatrixXd A = gram;
        A.diagonal().array() += lambda * static_cast<double>(M);
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() == Eigen::Success)
            return llt.solve(labels);
        return A.completeOrthogonalDecomposition().solve(labels);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const Eigen::VectorXd &ev = es.eigenvalues();
    const double cutoff = kPinvCutoff * ev.cwiseAbs().maxCoeff();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(M);
    for (Eigen::Index i = 0; i < M; ++i)
        if (std::abs(ev[i]) > cutoff)
            inv[i] = 1.0 / ev[i];
    const Eigen::MatrixXd &V = es.eigenvectors();
    return V * inv.asDiagonal() * (V.transpose() * labels);
}

ImplicitModel fit_implicit(const FeatureEncoding &enc, const Dataset &train,
                           double lambda, unsigned threads) {
    train.validate();
    const Eigen::MatrixXd K = gram_matrix(enc, train.inputs, threads);
    const Eigen::VectorXd y =
        Eigen::Map<const Eigen::VectorXd>(train.labels.data(),
                                          static_cast<Eigen::Index>(train.size()));
    const Eigen::VectorXd alpha = krr_fit(K, y, lambda);
    return ImplicitModel{enc, train.inputs,
                         std::vector<double>(alpha.data(), alpha.data() + alpha.size())};
}

// ---------------------------------------------------------------------------
// Gradients

DiffProblem diff_problem(const Model &m, std::span<const double> x) {
    if (const auto *e = std::get_if<ExplicitModel>(&m))
        return DiffProblem{e->encoding().encode(x), &e->variational(), {},
                           &e->observable(), e->observable_weight()};
    const auto &r = std::get<ReuploadingModel>(m);
    if (x.size() != static_cast<std::size_t>(r.arity()))
        throw std::invalid_argument("input has " + std::to_string(x.size()) +
                                    " components, model expects " +
                                    std::to_string(r.arity()));
    return DiffProblem{Statevector(r.circuit().num_qubits()), &r.circuit(),
                       std::vector<double>(x.begin(), x.end()), &r.observable(),
                       1.0};
}

std::vector<double> parameter_shift_gradient(const Model &m,
                                             std::span<const double> theta,
                                             std::span<const double> x) {
    check_theta(m, theta);
    const DiffProblem p = diff_problem(m, x);
    const auto &gates = p.circuit->gates();
    std::vector<double> angles = p.circuit->bind_angles(theta, p.data);
    std::vector<double> grad(theta.size(), 0.0);
    for (std::size_t i = 0; i < gates.size(); ++i) {
        const Gate &g = gates[i];
        if (!g.uses_parameter())
            continue;
        if (!g.controls.empty())
            throw std::invalid_argument(
                "controlled " + std::string(gate_kind_name(g.kind)) +
                " on a parameter slot is not shiftable");
        const double a = angles[i];
        angles[i] = a + kPi / 2;
        const double fp = evaluate_bound(p, angles);
        angles[i] = a - kPi / 2;
        const double fm = evaluate_bound(p, angles);
        angles[i] = a;
        grad[static_cast<std::size_t>(g.angle.slot)] += g.angle.factor * (fp - fm) / 2;
    }
    return grad;
}

double value_and_gradient(const Model &m, std::span<const double> theta,
                          std::span<const double> x, std::vector<double> &grad) {
    check_theta(m, theta);
    const DiffProblem p = diff_problem(m, x);
    const auto &gates = p.circuit->gates();
    const std::vector<double> angles = p.circuit->bind_angles(theta, p.data);
    Statevector psi = p.initial;
    apply_bound(psi, *p.circuit, angles);
    Statevector lam = p.observable->apply(psi);
    const double f = p.weight * inner_product(psi, lam).real();
    grad.assign(theta.size(), 0.0);
    for (std::size_t k = gates.size(); k-- > 0;) {
        const Gate &g = gates[k];
        if (g.uses_parameter()) {
            // df/da = Im <lambda| Pi_c P |psi> with psi the state after g.
            const PauliMasks pm = generator_masks(g);
            Statevector mu = psi;
            mu.apply_pauli(pm.x, pm.z);
            const std::uint64_t ctrl = g.control_mask();
            if (ctrl != 0)
                mu.project(ctrl, ctrl);
            grad[static_cast<std::size_t>(g.angle.slot)] +=
                p.weight * g.angle.factor * inner_product(lam, mu).imag();
        }
        apply_gate_unchecked(psi, g, -angles[k]);
        apply_gate_unchecked(lam, g, -angles[k]);
    }
    return f;
}

std::vector<double> adjoint_gradient(const Model &m, std::span<const double> theta,
                                     std::span<const double> x) {
    std::vector<double> grad;
    value_and_gradient(m, theta, x, grad);
    return grad;
}

LossGradient parameter_shift_loss_gradient(const Model &m,
                                           std::span<const double> theta,
                                           double weight, const Dataset &data,
                                           unsigned threads) {
    data.validate();
    if (data.size() == 0)
        throw std::invalid_argument("loss gradient of an empty dataset");
    const Model unit = with_unit_weight(m);
    const std::size_t M = data.size();
    std::vector<double> values(M);
    std::vector<std::vector<double>> grads(M);
    parallel_for(
        M,
        [&](std::size_t i) {
            values[i] = eval_model(unit, theta, data.inputs[i]);
            grads[i] = parameter_shift_gradient(unit, theta, data.inputs[i]);
        },
        threads);
    LossGradient out;
    out.d_theta.assign(theta.size(), 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        const double r = weight * values[i] - data.labels[i];
        out.loss += r * r;
        out.d_weight += 2.0 * r * values[i];
        for (std::size_t k = 0; k < theta.size(); ++k)
            out.d_theta[k] += 2.0 * r * weight * grads[i][k];
    }
    const double inv = 1.0 / static_cast<double>(M);
    out.loss *= inv;
    out.d_weight *= inv;
    for (auto &g : out.d_theta)
        g *= inv;
    return out;
}

// ---------------------------------------------------------------------------
// Training

TrainResult train_model(const Model &m, const Dataset &data, const TrainConfig &cfg,
                        std::optional<std::vector<double>> initial_theta) {
    cfg.validate();
    data.validate();
    if (data.size() == 0)
        throw std::invalid_argument("cannot train on an empty dataset");
    const Model unit = with_unit_weight(m);
    const std::size_t P = static_cast<std::size_t>(model_num_parameters(unit));

    TrainResult res;
    if (initial_theta) {
        if (initial_theta->size() != P)
            throw std::invalid_argument("initial theta has " +
                                        std::to_string(initial_theta->size()) +
                                        " entries, model declares " +
                                        std::to_string(P));
        res.theta = *initial_theta;
    } else {
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> normal(0.0, cfg.init_std);
        res.theta.resize(P);
        for (auto &t : res.theta)
            t = cfg.init_std > 0.0 ? normal(rng) : 0.0;
    }
    res.weight = cfg.init_weight;

    const Observable &obs = std::holds_alternative<ExplicitModel>(unit)
                                ? std::get<ExplicitModel>(unit).observable()
                                : std::get<ReuploadingModel>(unit).observable();
    const double penalty = cfg.lambda > 0.0 ? observable_penalty(obs, 1.0) : 0.0;

    const std::size_t M = data.size();
    std::vector<double> values(M);
    std::vector<std::vector<double>> grads(M);
    std::vector<double> m_theta(P, 0.0), v_theta(P, 0.0);
    double m_w = 0.0, v_w = 0.0;
    double b1t = 1.0, b2t = 1.0;

    auto evaluate = [&](std::vector<double> *d_theta, double *d_w) {
        parallel_for(
            M,
            [&](std::size_t i) {
                values[i] = value_and_gradient(unit, res.theta, data.inputs[i], grads[i]);
            },
            cfg.threads);
        double loss = 0.0, gw = 0.0;
        std::vector<double> gt(P, 0.0);
        for (std::size_t i = 0; i < M; ++i) {
            const double r = res.weight * values[i] - data.labels[i];
            loss += r * r;
            gw += 2.0 * r * values[i];
            for (std::size_t k = 0; k < P; ++k)
                gt[k] += 2.0 * r * res.weight * grads[i][k];
        }
        const double inv = 1.0 / static_cast<double>(M);
        loss = loss * inv + cfg.lambda * res.weight * res.weight * penalty;
        if (d_theta) {
            for (auto &g : gt)
                g *= inv;
            *d_theta = std::move(gt);
            *d_w = gw * inv + 2.0 * cfg.lambda * res.weight * penalty;
        }
        return loss;
    };

    std::vector<double> g_theta;
    double g_w = 0.0;
    for (int step = 0; step < cfg.steps; ++step) {
        const double loss = evaluate(&g_theta, &g_w);
        res.loss_trace.push_back(loss);
        if (!std::isfinite(loss) || loss > cfg.divergence_threshold) {
            std::ostringstream msg;
            msg << "training diverged at step " << step << ": loss " << loss
                << " exceeds " << cfg.divergence_threshold;
            throw DivergenceError(msg.str());
        }
        b1t *= cfg.beta1;
        b2t *= cfg.beta2;
        for (std::size_t k = 0; k < P; ++k) {
            m_theta[k] = cfg.beta1 * m_theta[k] + (1 - cfg.beta1) * g_theta[k];
            v_theta[k] = cfg.beta2 * v_theta[k] + (1 - cfg.beta2) * g_theta[k] * g_theta[k];
            const double mh = m_theta[k] / (1 - b1t);
            const double vh = v_theta[k] / (1 - b2t);
            res.theta[k] -= cfg.lr_params * mh / (std::sqrt(vh) + cfg.eps_adam);
        }
        if (cfg.train_weight) {
            m_w = cfg.beta1 * m_w + (1 - cfg.beta1) * g_w;
            v_w = cfg.beta2 * v_w + (1 - cfg.beta2) * g_w * g_w;
            const double mh = m_w / (1 - b1t);
            const double vh = v_w / (1 - b2t);
            res.weight -= cfg.lr_weight * mh / (std::sqrt(vh) + cfg.eps_adam);
        }
    }
    res.loss_trace.push_back(evaluate(nullptr, nullptr));
    return res;
}

TrainResult train_explicit(const ExplicitModel &m, const Dataset &data,
                           const TrainConfig &cfg,
                           std::optional<std::vector<double>> initial_theta) {
    return train_model(m, data, cfg, std::move(initial_theta));
}

// ---------------------------------------------------------------------------
// Parity learner

int parity_sample_count(int d, double delta) {
    if (d < 1)
        throw std::invalid_argument("parity dimension must be >= 1");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("delta must lie in (0, 1)");
    return static_cast<int>(std::ceil(32.0 * std::log(2.0 * d / delta) - 1e-12));
}

ParityLearnResult
parity_learn(const std::function<std::pair<std::vector<double>, double>()> &sample,
             int d, double delta, std::optional<std::vector<int>> truth) {
    ParityLearnResult res;
    res.samples = parity_sample_count(d, delta);
    const ReuploadingModel model = parity_model(d);
    res.losses.assign(static_cast<std::size_t>(d), 0.0);
    std::vector<std::vector<double>> thetas(static_cast<std::size_t>(d),
                                            std::vector<double>(d, 0.0));
    for (int i = 0; i < d; ++i)
        thetas[i][i] = kPi / 2;
    for (int s = 0; s < res.samples; ++s) {
        const auto [x, y] = sample();
        if (x.size() != static_cast<std::size_t>(d))
            throw std::invalid_argument("sampler returned a point of wrong arity");
        for (int i = 0; i < d; ++i) {
            const double r = eval_reuploading(model, thetas[i], x) - y;
            res.losses[i] += r * r;
        }
    }
    for (int i = 0; i < d; ++i) {
        res.losses[i] /= res.samples;
        if (res.losses[i] <= 1.5)
            res.support.push_back(i);
    }
    if (truth) {
        std::vector<int> t = *truth;
        std::sort(t.begin(), t.end());
        res.success = t == res.support;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Classical baselines

const std::vector<double> &baseline_c_grid() {
    static const std::vector<double> grid = {0.006, 0.015, 0.03, 0.0625, 0.125, 0.25,
                                             0.5,   1.0,   2.0,  4.0,    8.0,   16.0,
                                             32.0,  64.0,  128.0, 256.0, 512.0, 1024.0};
    return grid;
}

const std::vector<double> &baseline_gamma_grid() {
    static const std::vector<double> grid = {0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 20.0};
    return grid;
}

double classical_kernel(BaselineKind kind, double gamma, std::span<const double> a,
                        std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("kernel arguments differ in length");
    double acc = 0.0;
    if (kind == BaselineKind::Linear) {
        for (std::size_t i = 0; i < a.size(); ++i)
            acc += a[i] * b[i];
        return acc;
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::exp(-gamma * acc);
}

double BaselineFit::predict(std::span<const double> x) const {
    double acc = 0.0;
    for (std::size_t m = 0; m < support.size(); ++m)
        acc += alpha[static_cast<Eigen::Index>(m)] *
               classical_kernel(kind, gamma, x, support[m]);
    return acc;
}

BaselineFit baseline_grid_search(BaselineKind kind, const Dataset &train,
                                 const Dataset &validation) {
    train.validate();
    validation.validate();
    if (train.size() == 0 || validation.size() == 0)
        throw std::invalid_argument("baseline search needs non-empty splits");
    const std::size_t M = train.size();
    const int n = train.arity();

    std::vector<double> gammas{0.0};
    if (kind == BaselineKind::Gaussian) {
        double mean = 0.0, sq = 0.0;
        std::size_t count = 0;
        for (const auto &x : train.inputs)
            for (double v : x) {
                mean += v;
                sq += v * v;
                ++count;
            }
        mean /= static_cast<double>(count);
        const double var = sq / static_cast<double>(count) - mean * mean;
        if (!(var > 0.0))
            throw std::invalid_argument("training inputs have zero variance");
        gammas.clear();
        for (double g : baseline_gamma_grid())
            gammas.push_back(g / (n * var));
    }

    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
        train.labels.data(), static_cast<Eigen::Index>(M));
    BaselineFit best;
    best.kind = kind;
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<BaselineEntry> table;
    for (double gamma : gammas) {
        Eigen::MatrixXd K(M, M);
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                K(i, j) = K(j, i) = classical_kernel(kind, gamma, train.inputs[i],
                                                     train.inputs[j]);
        Eigen::MatrixXd Kv(validation.size(), M);
        for (std::size_t i = 0; i < validation.size(); ++i)
            for (std::size_t j = 0; j < M; ++j)
                Kv(i, j) = classical_kernel(kind, gamma, validation.inputs[i],
                                            train.inputs[j]);
        for (double c : baseline_c_grid()) {
            const double ridge = 1.0 / (2.0 * c);
            const Eigen::VectorXd alpha = krr_fit(K, y, ridge / static_cast<double>(M));
            const Eigen::VectorXd pred = Kv * alpha;
            const double loss =
                mse(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())),
                    validation.labels);
            table.push_back({c, gamma, loss});
            if (loss < best_loss) {
                best_loss = loss;
                best.c = c;
                best.gamma = gamma;
                best.ridge = ridge;
                best.alpha = alpha;
            }
        }
    }
    best.support = train.inputs;
    best.table = std::move(table);
    return best;
}

} // namespace qmlbk
