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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmlbk/learning/learning.hpp"
#include "qmlbk/models/serialize.hpp"

namespace qmlbk {

// ---------------------------------------------------------------------------
// IDX images

/// Unsigned-byte image stack, row-major per image.
struct ImageSet {
    std::uint32_t count = 0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::uint8_t> pixels; ///< count * rows * cols

    std::size_t image_size() const noexcept {
        return static_cast<std::size_t>(rows) * cols;
    }
    std::span<const std::uint8_t> image(std::size_t i) const;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;

/// Parses an in-memory IDX3 byte stream. Offsets in ParseError refer to
/// this buffer.
ImageSet parse_idx(std::span<const std::uint8_t> bytes);

/// Reads a plain or gzip-compressed IDX3 file.
ImageSet load_idx(const std::filesystem::path &path);

std::vector<std::uint8_t> serialize_idx(const ImageSet &images);
void write_idx(const std::filesystem::path &path, const ImageSet &images,
               bool gzip = false);

/// Pixels scaled to [0, 1], one row per image.
Eigen::MatrixXd images_to_matrix(const ImageSet &images);

// ---------------------------------------------------------------------------
// PCA

struct JacobiResult {
    Eigen::VectorXd eigenvalues;  ///< descending
    Eigen::MatrixXd eigenvectors; ///< columns, matching eigenvalues
    int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for symmetric matrices. Iterates until the
/// off-diagonal Frobenius norm is <= tol times the full norm.
JacobiResult jacobi_eigen(const Eigen::MatrixXd &a, double tol = 1e-10,
                          int max_sweeps = 100);

struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components; ///< n rows, unit length
    Eigen::VectorXd variances;  ///< non-increasing

    int num_components() const noexcept { return static_cast<int>(components.rows()); }
};

/// Top-n principal directions of the rows of X (sample covariance with
/// 1 / (m - 1)). Each direction has its largest-magnitude entry positive.
PcaModel fit_pca(const Eigen::MatrixXd &X, int n);

Eigen::VectorXd project(const PcaModel &pca, std::span<const double> x);
Eigen::MatrixXd project_rows(const PcaModel &pca, const Eigen::MatrixXd &X);

// ---------------------------------------------------------------------------
// Normalization

/// Per-component affine map x -> (x - mean) / std, std with 1 / m.
struct ComponentNormalizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;

    Eigen::MatrixXd apply(const Eigen::MatrixXd &X) const;
};

/// Fits on X. Throws std::invalid_argument naming the first constant column.
ComponentNormalizer fit_normalizer(const Eigen::MatrixXd &X);

/// fit_normalizer followed by apply on the same data.
Eigen::MatrixXd normalize_components(const Eigen::MatrixXd &X,
                                     ComponentNormalizer *fitted = nullptr);

// ---------------------------------------------------------------------------
// Labels

/// Labelling function y(x) = w_norm Tr[rho(x) V(theta)^dag Z_0 V(theta)]
/// with the Havlicek encoding and a hardware-efficient ansatz.
struct LabelFunction {
    ExplicitModel model;
    std::vector<double> theta;
    double w_norm = 1.0;

    double raw(std::span<const double> x) const;
    std::vector<double> operator()(const std::vector<std::vector<double>> &inputs,
                                   unsigned threads = 0) const;
};

/// theta ~ U[0, 2 pi]^{3 n L}; w_norm is set so the labels of
/// `train_inputs` have unit (population) standard deviation.
LabelFunction generate_labels(const std::vector<std::vector<double>> &train_inputs,
                              int n, int layers, std::uint64_t seed,
                              unsigned threads = 0);

/// Order-sensitive CRC-32 of the raw bytes of theta, as 8 hex digits.
std::string theta_digest(std::span<const double> theta);

// ---------------------------------------------------------------------------
// Splits

struct SplitSizes {
    int train = 1000;
    int validation = 100;
    int test = 100;
};

struct SplitIndices {
    std::vector<int> train;      ///< into the train pool
    std::vector<int> validation; ///< into the test pool
    std::vector<int> test;       ///< into the test pool, disjoint from validation
};

/// Samples without replacement. Throws std::invalid_argument when a pool is
/// too small.
SplitIndices make_splits(int train_pool, int test_pool, const SplitSizes &sizes,
                         std::uint64_t seed);

/// Synthetic stand-in for image pools: rows ~ N(0, diag(s_j^2)) with
/// s_j = 1 / sqrt(1 + j).
Eigen::MatrixXd synthetic_pool(int rows, int dim, std::uint64_t seed);

struct RegressionDataConfig {
    std::optional<std::filesystem::path> train_images;
    std::optional<std::filesystem::path> test_images;
    bool synthetic_fallback = true;
    int synthetic_dim = 64;
    int synthetic_train_pool = 2000;
    int synthetic_test_pool = 500;
    int n = 2;
    int layers = 0; ///< 0: layer_schedule(n)
    SplitSizes sizes;
    std::uint64_t seed = 0;       ///< split sampling
    std::uint64_t label_seed = 0; ///< labelling function
    unsigned threads = 0;
};

struct RegressionData {
    Dataset train;
    Dataset validation;
    Dataset test;
    LabelFunction labels;
    int n = 0;
    int layers = 0;
    bool synthetic = false;
    std::uint64_t seed = 0;
    std::uint64_t label_seed = 0;
};

/**
 * Full preprocessing: load pools (or synthesize them), draw splits, fit PCA
 * on the train pool, project, fit normalization on the training split, apply
 * it to all splits and attach quantum labels.
 */
RegressionData prepare_regression_data(const RegressionDataConfig &cfg);

/// Header x_1..x_n,y; values printed with 17 significant digits.
void write_dataset_csv(const std::filesystem::path &path, const Dataset &data);
Dataset read_dataset_csv(const std::filesystem::path &path, std::string tag = "");

json dataset_sidecar(const RegressionData &data);

/// Writes train.csv, validation.csv, test.csv and dataset.json into dir.
void save_regression_data(const std::filesystem::path &dir, const RegressionData &data);

} // namespace qmlbk
