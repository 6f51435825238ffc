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

#include <cstdlib>
#include <filesystem>
#include <set>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "qmlbk/common/error.hpp"
#include "qmlbk/data/pipeline.hpp"

namespace qmlbk {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("qmlbk_test_data_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ImageSet tiny_images() {
    ImageSet s;
    s.count = 3;
    s.rows = 2;
    s.cols = 4;
    for (int i = 0; i < 24; ++i)
        s.pixels.push_back(static_cast<std::uint8_t>(i * 11));
    return s;
}

TEST(Idx, RoundTripPlainAndGzip) {
    const ImageSet s = tiny_images();
    const auto bytes = serialize_idx(s);
    ASSERT_EQ(bytes.size(), 16u + 24u);
    EXPECT_EQ(bytes[2], 0x08);
    EXPECT_EQ(bytes[3], 0x03);
    const ImageSet back = parse_idx(bytes);
    EXPECT_EQ(back.count, 3u);
    EXPECT_EQ(back.pixels, s.pixels);
    const fs::path dir = scratch("idx");
    for (bool gz : {false, true}) {
        const fs::path p = dir / (gz ? "a.idx.gz" : "a.idx");
        write_idx(p, s, gz);
        const ImageSet r = load_idx(p);
        EXPECT_EQ(r.rows, 2u);
        EXPECT_EQ(r.cols, 4u);
        EXPECT_EQ(r.pixels, s.pixels);
    }
}

TEST(Idx, Fixture) {
    const ImageSet s = load_idx(fs::path(QMLBK_FIXTURE_DIR) / "two_images.idx");
    EXPECT_EQ(s.count, 2u);
    EXPECT_EQ(s.image_size(), 784u);
    for (std::size_t i = 0; i < s.pixels.size(); ++i)
        ASSERT_EQ(s.pixels[i], static_cast<std::uint8_t>((i * 7) % 256));
    const Eigen::MatrixXd X = images_to_matrix(s);
    EXPECT_DOUBLE_EQ(X(1, 0), ((784 * 7) % 256) / 255.0);
}

TEST(Idx, CorruptInputsReportOffsets) {
    auto bytes = serialize_idx(tiny_images());
    auto bad = bytes;
    bad[3] = 0x01;
    try {
        parse_idx(bad);
        FAIL();
    } catch (const ParseError &e) {
        EXPECT_EQ(e.offset(), 0u);
    }
    auto cut = bytes;
    cut.resize(30);
    try {
        parse_idx(cut);
        FAIL();
    } catch (const ParseError &e) {
        EXPECT_EQ(e.offset(), 30u);
    }
    const std::vector<std::uint8_t> header(bytes.begin(), bytes.begin() + 10);
    EXPECT_THROW(parse_idx(header), ParseError);
    EXPECT_THROW(load_idx("/nonexistent/file.idx"), std::runtime_error);
}

TEST(Idx, RealTrainingImagesWhenAvailable) {
    const char *dir = std::getenv("QMLBK_MNIST_DIR");
    if (!dir)
        GTEST_SKIP() << "QMLBK_MNIST_DIR not set";
    for (const char *name : {"train-images-idx3-ubyte.gz", "train-images-idx3-ubyte"}) {
        const fs::path p = fs::path(dir) / name;
        if (fs::exists(p)) {
            const ImageSet s = load_idx(p);
            EXPECT_EQ(s.count, 60000u);
            EXPECT_EQ(s.rows, 28u);
            return;
        }
    }
    GTEST_SKIP() << "no training images in " << dir;
}

TEST(Jacobi, MatchesEigenSolver) {
    std::mt19937_64 rng(51);
    for (int dim : {2, 5, 12, 30}) {
        Eigen::MatrixXd A(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                A(i, j) = oracle::uniform(rng, 1, -1, 1)[0];
        A = (A + A.transpose()).eval();
        const JacobiResult r = jacobi_eigen(A);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        for (int i = 0; i < dim; ++i)
            EXPECT_NEAR(r.eigenvalues[i], es.eigenvalues()[dim - 1 - i], 1e-8);
        EXPECT_LT((A * r.eigenvectors - r.eigenvectors * r.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff(),
                  1e-8);
        EXPECT_LT((r.eigenvectors.transpose() * r.eigenvectors -
                   Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff(),
                  1e-10);
    }
}

TEST(Pca, RecoversLineDirection) {
    // points along u plus tiny noise
    std::mt19937_64 rng(52);
    Eigen::VectorXd u(4);
    u << 1, -2, 0.5, 3;
    u.normalize();
    Eigen::MatrixXd X(200, 4);
    std::normal_distribution<double> g(0, 1), noise(0, 1e-9);
    for (int i = 0; i < 200; ++i) {
        const double t = g(rng);
        for (int j = 0; j < 4; ++j)
            X(i, j) = 2 + t * u[j] + noise(rng);
    }
    const PcaModel p = fit_pca(X, 2);
    const double cosine = std::abs(p.components.row(0).dot(u));
    EXPECT_NEAR(cosine, 1.0, 1e-6);
    // sign convention: largest-magnitude entry positive
    Eigen::Index arg;
    p.components.row(0).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(p.components(0, arg), 0);
    EXPECT_NEAR(p.mean[0], 2 + (X.col(0).mean() - 2), 1e-12);
}

TEST(Pca, OrthonormalAndReconstructionNonIncreasing) {
    const Eigen::MatrixXd X = synthetic_pool(300, 10, 7);
    double previous = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= 10; ++n) {
        const PcaModel p = fit_pca(X, n);
        EXPECT_LT((p.components * p.components.transpose() - Eigen::MatrixXd::Identity(n, n))
                      .cwiseAbs()
                      .maxCoeff(),
                  1e-10);
        for (int i = 1; i < n; ++i)
            EXPECT_GE(p.variances[i - 1], p.variances[i]);
        const Eigen::MatrixXd Z = project_rows(p, X);
        const Eigen::MatrixXd centred = X.rowwise() - p.mean.transpose();
        const double err = (centred - Z * p.components).squaredNorm();
        EXPECT_LE(err, previous + 1e-9);
        previous = err;
        if (n == 10)
            EXPECT_LT(err, 1e-18 * X.size() + 1e-12);
        // projections of a single row agree
        Eigen::VectorXd row = X.row(3).transpose();
        EXPECT_LT((project(p, std::span<const double>(row.data(), 10)) - Z.row(3).transpose())
                      .cwiseAbs()
                      .maxCoeff(),
                  1e-12);
    }
    EXPECT_THROW(fit_pca(X, 11), std::invalid_argument);
}

TEST(Normalize, StatisticsFromTrainOnly) {
    const Eigen::MatrixXd X = synthetic_pool(100, 3, 9) * 4.0;
    const ComponentNormalizer f = fit_normalizer(X);
    const Eigen::MatrixXd Y = f.apply(X);
    for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(Y.col(j).mean(), 0.0, 1e-12);
        EXPECT_NEAR(std::sqrt(Y.col(j).array().square().mean()), 1.0, 1e-12);
    }
    // applying again is the identity on already-normalized data
    const ComponentNormalizer g = fit_normalizer(Y);
    EXPECT_LT((g.apply(Y) - Y).cwiseAbs().maxCoeff(), 1e-12);
    // other data keeps its own offset
    const Eigen::MatrixXd T = f.apply(synthetic_pool(50, 3, 10) * 4.0);
    EXPECT_GT(std::abs(T.col(0).mean()) + std::abs(std::sqrt(T.col(0).array().square().mean()) - 1), 1e-3);
    Eigen::MatrixXd C = X;
    C.col(1).setConstant(2.0);
    EXPECT_THROW(fit_normalizer(C), std::invalid_argument);
    ComponentNormalizer out;
    normalize_components(X, &out);
    EXPECT_LT((out.mean - f.mean).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Labels, UnitStdAndBounded) {
    std::vector<std::vector<double>> xs;
    const Eigen::MatrixXd X = synthetic_pool(200, 4, 11);
    for (int i = 0; i < 200; ++i)
        xs.push_back({X(i, 0), X(i, 1), X(i, 2), X(i, 3)});
    const LabelFunction f = generate_labels(xs, 4, layer_schedule(4), 3);
    const auto y = f(xs);
    double mean = 0, sq = 0;
    for (double v : y)
        mean += v;
    mean /= 200;
    for (double v : y)
        sq += (v - mean) * (v - mean);
    EXPECT_NEAR(std::sqrt(sq / 200), 1.0, 1e-10);
    for (const auto &x : xs) {
        const double r = f.raw(x);
        EXPECT_LE(std::abs(r), 1.0 + 1e-12);
        EXPECT_NEAR(oracle::eval(Model(f.model), f.theta, x), r, 1e-10);
    }
    for (double t : f.theta) {
        EXPECT_GE(t, 0.0);
        EXPECT_LT(t, 2 * oracle::kPi);
    }
    const LabelFunction g = generate_labels(xs, 4, layer_schedule(4), 3);
    EXPECT_EQ(f.theta, g.theta);
    EXPECT_EQ(theta_digest(f.theta), theta_digest(g.theta));
    EXPECT_NE(theta_digest(f.theta), theta_digest(generate_labels(xs, 4, layer_schedule(4), 4).theta));
}

TEST(Splits, SizesDisjointDeterministic) {
    for (const SplitSizes sz : {SplitSizes{1000, 100, 100}, SplitSizes{200, 50, 50}}) {
        const SplitIndices s = make_splits(2000, 500, sz, 4);
        EXPECT_EQ(s.train.size(), static_cast<std::size_t>(sz.train));
        EXPECT_EQ(s.validation.size(), static_cast<std::size_t>(sz.validation));
        EXPECT_EQ(s.test.size(), static_cast<std::size_t>(sz.test));
        std::set<int> tr(s.train.begin(), s.train.end());
        EXPECT_EQ(tr.size(), s.train.size());
        std::set<int> held(s.validation.begin(), s.validation.end());
        held.insert(s.test.begin(), s.test.end());
        EXPECT_EQ(held.size(), s.validation.size() + s.test.size());
        const SplitIndices t = make_splits(2000, 500, sz, 4);
        EXPECT_EQ(s.train, t.train);
        EXPECT_EQ(s.test, t.test);
    }
    EXPECT_THROW(make_splits(10, 500, SplitSizes{20, 1, 1}, 0), std::invalid_argument);
    EXPECT_THROW(make_splits(100, 10, SplitSizes{20, 6, 6}, 0), std::invalid_argument);
}

TEST(Pipeline, SyntheticEndToEndAndCsv) {
    RegressionDataConfig cfg;
    cfg.n = 2;
    cfg.sizes = {60, 20, 20};
    cfg.seed = 1;
    cfg.label_seed = 2;
    const RegressionData d = prepare_regression_data(cfg);
    EXPECT_TRUE(d.synthetic);
    EXPECT_EQ(d.train.size(), 60u);
    EXPECT_EQ(d.train.arity(), 2);
    for (int j = 0; j < 2; ++j) {
        double m = 0;
        for (const auto &x : d.train.inputs)
            m += x[static_cast<std::size_t>(j)];
        EXPECT_NEAR(m / 60, 0.0, 1e-12);
    }
    const fs::path dir = scratch("pipeline");
    save_regression_data(dir, d);
    for (const char *f : {"train.csv", "validation.csv", "test.csv", "dataset.json"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    const Dataset back = read_dataset_csv(dir / "test.csv", "test");
    ASSERT_EQ(back.size(), d.test.size());
    EXPECT_EQ(back.inputs, d.test.inputs);
    EXPECT_EQ(back.labels, d.test.labels);
    const json side = dataset_sidecar(d);
    EXPECT_EQ(side.at("theta_digest").get<std::string>(), theta_digest(d.labels.theta));
    const RegressionData again = prepare_regression_data(cfg);
    EXPECT_EQ(again.train.labels, d.train.labels);

    RegressionDataConfig missing = cfg;
    missing.train_images = "/nonexistent/train.idx";
    missing.test_images = "/nonexistent/test.idx";
    missing.synthetic_fallback = false;
    EXPECT_THROW(prepare_regression_data(missing), std::runtime_error);
}

} // namespace
} // namespace qmlbk
