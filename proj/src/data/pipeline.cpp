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

#include "qmlbk/data/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <zlib.h>

#include "qmlbk/common/error.hpp"
#include "qmlbk/common/parallel.hpp"

namespace qmlbk {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t at) {
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
           (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

void put_be32(std::vector<std::uint8_t> &out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

// gzread passes uncompressed files through unchanged.
std::vector<std::uint8_t> read_maybe_gzip(const std::filesystem::path &path) {
    gzFile f = gzopen(path.string().c_str(), "rb");
    if (!f)
        throw std::runtime_error("cannot open " + path.string());
    std::vector<std::uint8_t> out;
    std::uint8_t buf[1 << 16];
    while (true) {
        const int got = gzread(f, buf, sizeof buf);
        if (got < 0) {
            int code = 0;
            const std::string msg = gzerror(f, &code);
            gzclose(f);
            throw ParseError(path.string() + ": gzip stream error: " + msg, out.size());
        }
        if (got == 0)
            break;
        out.insert(out.end(), buf, buf + got);
    }
    gzclose(f);
    return out;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------

std::span<const std::uint8_t> ImageSet::image(std::size_t i) const {
    if (i >= count)
        throw std::out_of_range("image index out of range");
    return {pixels.data() + i * image_size(), image_size()};
}

ImageSet parse_idx(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 16)
        throw ParseError("truncated IDX header: need 16 bytes, have " +
                             std::to_string(bytes.size()),
                         bytes.size());
    const std::uint32_t magic = read_be32(bytes, 0);
    if (magic != kIdxImageMagic) {
        char hex[16];
        std::snprintf(hex, sizeof hex, "0x%08x", magic);
        throw ParseError(std::string("bad IDX magic ") + hex + ", expected 0x00000803", 0);
    }
    ImageSet s;
    s.count = read_be32(bytes, 4);
    s.rows = read_be32(bytes, 8);
    s.cols = read_be32(bytes, 12);
    const std::uint64_t need =
        std::uint64_t{s.count} * s.rows * s.cols;
    if (bytes.size() - 16 < need)
        throw ParseError("truncated IDX payload: header declares " +
                             std::to_string(need) + " pixel bytes, have " +
                             std::to_string(bytes.size() - 16),
                         bytes.size());
    s.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(need));
    return s;
}

ImageSet load_idx(const std::filesystem::path &path) {
    const auto bytes = read_maybe_gzip(path);
    try {
        return parse_idx(bytes);
    } catch (const ParseError &e) {
        throw ParseError(path.string() + ": " + e.what(), e.offset());
    }
}

std::vector<std::uint8_t> serialize_idx(const ImageSet &images) {
    if (images.pixels.size() != images.count * images.image_size())
        throw std::invalid_argument("image set pixel count does not match its header");
    std::vector<std::uint8_t> out;
    out.reserve(16 + images.pixels.size());
    put_be32(out, kIdxImageMagic);
    put_be32(out, images.count);
    put_be32(out, images.rows);
    put_be32(out, images.cols);
    out.insert(out.end(), images.pixels.begin(), images.pixels.end());
    return out;
}

void write_idx(const std::filesystem::path &path, const ImageSet &images, bool gzip) {
    const auto bytes = serialize_idx(images);
    if (gzip) {
        gzFile f = gzopen(path.string().c_str(), "wb");
        if (!f || gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size())) !=
                      static_cast<int>(bytes.size())) {
            if (f)
                gzclose(f);
            throw std::runtime_error("cannot write " + path.string());
        }
        gzclose(f);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char *>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
}

Eigen::MatrixXd images_to_matrix(const ImageSet &images) {
    const auto dim = static_cast<Eigen::Index>(images.image_size());
    Eigen::MatrixXd X(images.count, dim);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < dim; ++j)
            X(i, j) = images.pixels[static_cast<std::size_t>(i * dim + j)] / 255.0;
    return X;
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi with the classical rotation (Golub & Van Loan 8.5).

JacobiResult jacobi_eigen(const Eigen::MatrixXd &a_in, double tol, int max_sweeps) {
    if (a_in.rows() != a_in.cols())
        throw std::invalid_argument("jacobi_eigen needs a square matrix");
    const Eigen::Index n = a_in.rows();
    Eigen::MatrixXd a = 0.5 * (a_in + a_in.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double total = a.norm();
    auto off = [&] {
        double s = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                if (i != j)
                    s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };
    JacobiResult r;
    while (total > 0.0 && off() > tol * total) {
        if (r.sweeps >= max_sweeps)
            throw std::runtime_error("Jacobi eigensolver did not converge");
        ++r.sweeps;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0)
                    continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // A <- J^T A J. Update columns p, q, mirror them into the
                // rows and set the 2x2 pivot block in closed form.
                const double app = a(p, p), aqq = a(q, q);
                double *colp = a.col(p).data(), *colq = a.col(q).data();
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double x = colp[k], y = colq[k];
                    colp[k] = c * x - s * y;
                    colq[k] = s * x + c * y;
                    a(p, k) = colp[k];
                    a(q, k) = colq[k];
                }
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = a(q, p) = 0.0;
                double *vp = v.col(p).data(), *vq = v.col(q).data();
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double x = vp[k], y = vq[k];
                    vp[k] = c * x - s * y;
                    vq[k] = s * x + c * y;
                }
            }
        }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
    r.eigenvalues.resize(n);
    r.eigenvectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        r.eigenvalues[i] = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        r.eigenvectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
    }
    return r;
}

PcaModel fit_pca(const Eigen::MatrixXd &X, int n) {
    const Eigen::Index m = X.rows(), dim = X.cols();
    if (n < 1 || n > dim)
        throw std::invalid_argument("PCA component count " + std::to_string(n) +
                                    " outside [1, " + std::to_string(dim) + "]");
    if (m < 2 || m < n)
        throw std::invalid_argument("PCA needs at least max(2, n) samples, got " +
                                    std::to_string(m));
    PcaModel p;
    p.mean = X.colwise().mean().transpose();
    const Eigen::MatrixXd centered = X.rowwise() - p.mean.transpose();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= static_cast<double>(m - 1);
    const JacobiResult eig = jacobi_eigen(cov);
    p.components.resize(n, dim);
    p.variances = eig.eigenvalues.head(n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd u = eig.eigenvectors.col(i).normalized();
        Eigen::Index arg = 0;
        u.cwiseAbs().maxCoeff(&arg);
        if (u[arg] < 0)
            u = -u;
        p.components.row(i) = u.transpose();
    }
    return p;
}

Eigen::VectorXd project(const PcaModel &pca, std::span<const double> x) {
    if (static_cast<Eigen::Index>(x.size()) != pca.mean.size())
        throw std::invalid_argument("PCA input has wrong dimension");
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    return pca.components * (v - pca.mean);
}

Eigen::MatrixXd project_rows(const PcaModel &pca, const Eigen::MatrixXd &X) {
    if (X.cols() != pca.mean.size())
        throw std::invalid_argument("PCA input has wrong dimension");
    return (X.rowwise() - pca.mean.transpose()) * pca.components.transpose();
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd ComponentNormalizer::apply(const Eigen::MatrixXd &X) const {
    if (X.cols() != mean.size())
        throw std::invalid_argument("normalizer input has wrong dimension");
    return (X.rowwise() - mean.transpose()).array().rowwise() /
           stddev.transpose().array();
}

ComponentNormalizer fit_normalizer(const Eigen::MatrixXd &X) {
    if (X.rows() == 0 || X.cols() == 0)
        throw std::invalid_argument("cannot normalize an empty matrix");
    ComponentNormalizer c;
    c.mean = X.colwise().mean().transpose();
    c.stddev.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double var =
            (X.col(j).array() - c.mean[j]).square().sum() / static_cast<double>(X.rows());
        if (!(var > 0.0))
            throw std::invalid_argument("component " + std::to_string(j) +
                                        " has zero variance");
        c.stddev[j] = std::sqrt(var);
    }
    return c;
}

Eigen::MatrixXd normalize_components(const Eigen::MatrixXd &X, ComponentNormalizer *fitted) {
    ComponentNormalizer c = fit_normalizer(X);
    Eigen::MatrixXd out = c.apply(X);
    if (fitted)
        *fitted = std::move(c);
    return out;
}

// ---------------------------------------------------------------------------

double LabelFunction::raw(std::span<const double> x) const {
    return eval_explicit(model, theta, x) / model.observable_weight();
}

std::vector<double> LabelFunction::operator()(const std::vector<std::vector<double>> &inputs,
                                              unsigned threads) const {
    std::vector<double> y(inputs.size());
    parallel_for(
        inputs.size(), [&](std::size_t i) { y[i] = w_norm * raw(inputs[i]); }, threads);
    return y;
}

LabelFunction generate_labels(const std::vector<std::vector<double>> &train_inputs,
                              int n, int layers, std::uint64_t seed, unsigned threads) {
    if (train_inputs.size() < 2)
        throw std::invalid_argument("label generation needs at least two training inputs");
    if (layers < 1)
        throw std::invalid_argument("label generation needs at least one layer");
    LabelFunction f{ExplicitModel(FeatureEncoding::havlicek(n),
                                  build_hardware_efficient_ansatz(n, layers),
                                  Observable::single(n, 'Z', 0)),
                    {}, 1.0};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    f.theta.resize(static_cast<std::size_t>(3 * n * layers));
    for (auto &t : f.theta)
        t = angle(rng);
    const std::vector<double> raw = f(train_inputs, threads);
    const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / raw.size();
    double var = 0.0;
    for (double r : raw)
        var += (r - mean) * (r - mean);
    var /= static_cast<double>(raw.size());
    if (!(var > 1e-28))
        throw std::runtime_error("generated raw labels are all equal");
    f.w_norm = 1.0 / std::sqrt(var);
    return f;
}

std::string theta_digest(std::span<const double> theta) {
    const uLong crc = crc32(0L, reinterpret_cast<const Bytef *>(theta.data()),
                            static_cast<uInt>(theta.size_bytes()));
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
    return buf;
}

// ---------------------------------------------------------------------------

SplitIndices make_splits(int train_pool, int test_pool, const SplitSizes &sizes,
                         std::uint64_t seed) {
    if (sizes.train < 1 || sizes.validation < 0 || sizes.test < 0)
        throw std::invalid_argument("split sizes must be positive");
    if (sizes.train > train_pool)
        throw std::invalid_argument("train pool exhausted: need " +
                                    std::to_string(sizes.train) + ", have " +
                                    std::to_string(train_pool));
    if (sizes.validation + sizes.test > test_pool)
        throw std::invalid_argument("test pool exhausted: need " +
                                    std::to_string(sizes.validation + sizes.test) +
                                    ", have " + std::to_string(test_pool));
    std::mt19937_64 rng(seed);
    auto draw = [&](int pool, int count) {
        std::vector<int> idx(static_cast<std::size_t>(pool));
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = 0; i < count; ++i) {
            std::uniform_int_distribution<int> pick(i, pool - 1);
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
        }
        idx.resize(static_cast<std::size_t>(count));
        return idx;
    };
    SplitIndices s;
    s.train = draw(train_pool, sizes.train);
    auto rest = draw(test_pool, sizes.validation + sizes.test);
    s.validation.assign(rest.begin(), rest.begin() + sizes.validation);
    s.test.assign(rest.begin() + sizes.validation, rest.end());
    return s;
}

Eigen::MatrixXd synthetic_pool(int rows, int dim, std::uint64_t seed) {
    if (rows < 1 || dim < 1)
        throw std::invalid_argument("synthetic pool needs positive shape");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd X(rows, dim);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j)
            X(i, j) = g(rng) / std::sqrt(1.0 + static_cast<double>(j));
    return X;
}

namespace {

std::vector<std::vector<double>> rows_of(const Eigen::MatrixXd &X) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(X.rows()),
                                         std::vector<double>(static_cast<std::size_t>(X.cols())));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j)
            out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = X(i, j);
    return out;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd &X, const std::vector<int> &idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
    return out;
}

} // namespace

RegressionData prepare_regression_data(const RegressionDataConfig &cfg) {
    if (cfg.n < 1)
        throw std::invalid_argument("qubit count n must be >= 1");
    const int layers = cfg.layers > 0 ? cfg.layers : layer_schedule(cfg.n);

    Eigen::MatrixXd train_pool, test_pool;
    bool synthetic = false;
    if (cfg.train_images && cfg.test_images) {
        train_pool = images_to_matrix(load_idx(*cfg.train_images));
        test_pool = images_to_matrix(load_idx(*cfg.test_images));
        if (train_pool.cols() != test_pool.cols())
            throw std::invalid_argument("train and test images differ in size");
    } else if (cfg.synthetic_fallback) {
        synthetic = true;
        train_pool = synthetic_pool(cfg.synthetic_train_pool, cfg.synthetic_dim, cfg.seed);
        test_pool = synthetic_pool(cfg.synthetic_test_pool, cfg.synthetic_dim, cfg.seed + 1);
    } else {
        throw std::runtime_error("no image files given and synthetic fallback disabled");
    }

    const SplitIndices idx = make_splits(static_cast<int>(train_pool.rows()),
                                         static_cast<int>(test_pool.rows()), cfg.sizes,
                                         cfg.seed);
    const PcaModel pca = fit_pca(train_pool, cfg.n);
    const Eigen::MatrixXd tr = project_rows(pca, select_rows(train_pool, idx.train));
    const Eigen::MatrixXd va = project_rows(pca, select_rows(test_pool, idx.validation));
    const Eigen::MatrixXd te = project_rows(pca, select_rows(test_pool, idx.test));
    const ComponentNormalizer norm = fit_normalizer(tr);

    auto train_rows = rows_of(norm.apply(tr));
    LabelFunction labels =
        generate_labels(train_rows, cfg.n, layers, cfg.label_seed, cfg.threads);
    RegressionData out{Dataset{std::move(train_rows), {}, "train"},
                       Dataset{rows_of(norm.apply(va)), {}, "validation"},
                       Dataset{rows_of(norm.apply(te)), {}, "test"},
                       std::move(labels),
                       cfg.n,
                       layers,
                       synthetic,
                       cfg.seed,
                       cfg.label_seed};
    out.train.labels = out.labels(out.train.inputs, cfg.threads);
    out.validation.labels = out.labels(out.validation.inputs, cfg.threads);
    out.test.labels = out.labels(out.test.inputs, cfg.threads);
    return out;
}

// ---------------------------------------------------------------------------

void write_dataset_csv(const std::filesystem::path &path, const Dataset &data) {
    data.validate();
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    const int n = data.size() ? data.arity() : 0;
    for (int j = 0; j < n; ++j)
        out << "x_" << (j + 1) << ',';
    out << "y\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double v : data.inputs[i])
            out << fmt17(v) << ',';
        out << fmt17(data.labels[i]) << '\n';
    }
}

Dataset read_dataset_csv(const std::filesystem::path &path, std::string tag) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path.string() + ": empty CSV", 0);
    const auto cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',') + 1);
    std::size_t offset = line.size() + 1;
    Dataset d;
    d.tag = std::move(tag);
    while (std::getline(in, line)) {
        if (line.empty()) {
            offset += 1;
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (used != cell.size())
                    throw std::invalid_argument(cell);
            } catch (const std::exception &) {
                throw ParseError(path.string() + ": bad number '" + cell + "'", offset);
            }
        }
        if (row.size() != cols)
            throw ParseError(path.string() + ": expected " + std::to_string(cols) +
                                 " fields, got " + std::to_string(row.size()),
                             offset);
        d.labels.push_back(row.back());
        row.pop_back();
        d.inputs.push_back(std::move(row));
        offset += line.size() + 1;
    }
    return d;
}

json dataset_sidecar(const RegressionData &data) {
    json j;
    j["seed"] = data.seed;
    j["label_seed"] = data.label_seed;
    j["n"] = data.n;
    j["L"] = data.layers;
    j["theta_digest"] = theta_digest(data.labels.theta);
    j["w_norm"] = data.labels.w_norm;
    j["synthetic"] = data.synthetic;
    j["pca_fit"] = "train_pool";
    j["normalization_fit"] = "train_split";
    j["sizes"] = {{"train", data.train.size()},
                  {"validation", data.validation.size()},
                  {"test", data.test.size()}};
    return j;
}

void save_regression_data(const std::filesystem::path &dir, const RegressionData &data) {
    std::filesystem::create_directories(dir);
    write_dataset_csv(dir / "train.csv", data.train);
    write_dataset_csv(dir / "validation.csv", data.validation);
    write_dataset_csv(dir / "test.csv", data.test);
    std::ofstream out(dir / "dataset.json");
    out << dataset_sidecar(data).dump(2) << '\n';
}

} // namespace qmlbk
