#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vizrec/tfidf.hpp"

namespace vizrec::models {

struct LsiModel {
    int k = 0;
    Eigen::MatrixXd projection;          // k x |V|, orthonormal rows (top right singular vectors)
    std::vector<double> singular_values;  // descending
};

struct LsiOptions {
    int k = 150;
    std::uint64_t seed = 0;
    int oversampling = 10;
    int min_power_iterations = 4;
    /// Subspace iteration continues past the minimum until the leading k
    /// singular values stop moving (relative change <= tolerance) or this cap.
    int max_power_iterations = 100;
    double tolerance = 1e-13;
};

struct LsiFit {
    LsiModel model;
    Eigen::MatrixXd document_embedding;  // n_docs x k; row i == lsi_project(model, rows[i])
    int power_iterations = 0;
};

/// Rank-k truncated SVD of the (documents x terms) matrix by seeded randomized
/// range finding with power iterations. Throws InvalidK for k < 1 and
/// RankTooLarge when k > min(#rows, n_columns).
LsiFit fit_lsi(std::span<const SparseVector> rows, std::size_t n_columns, const LsiOptions& options);

std::vector<double> lsi_project(const LsiModel& model, const SparseVector& v);

}  // namespace vizrec::models
