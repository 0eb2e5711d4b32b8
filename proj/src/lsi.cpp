#include "vizrec/lsi.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>
#include <Eigen/Sparse>

#include "vizrec/error.hpp"
#include "vizrec/hashing.hpp"

namespace vizrec::models {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

SparseMatrix assemble(std::span<const SparseVector> rows, std::size_t n_columns) {
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t i = 0; i < rows[r].indices.size(); ++i) {
            if (rows[r].indices[i] >= n_columns) {
                throw Error(ErrorCode::DimensionMismatch, "row index exceeds column count");
            }
            triplets.emplace_back(static_cast<int>(r), static_cast<int>(rows[r].indices[i]), rows[r].values[i]);
        }
    }
    SparseMatrix a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_columns));
    a.setFromTriplets(triplets.begin(), triplets.end());
    return a;
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& m) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

struct SmallSvd {
    Eigen::MatrixXd right;  // n x l, right singular vectors of B = Bt^T
    Eigen::MatrixXd left;   // l x l, left singular vectors of B
    Eigen::VectorXd values;
};

// SVD of B given Bt = B^T (n x l, n >= l): Bt = Qb R, R = Ur S Vr^T, so
// B = Vr S (Qb Ur)^T.
SmallSvd small_svd(const Eigen::MatrixXd& bt) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(bt);
    const Eigen::Index l = bt.cols();
    const Eigen::Index r = std::min(bt.rows(), l);
    Eigen::MatrixXd qb = qr.householderQ() * Eigen::MatrixXd::Identity(bt.rows(), r);
    Eigen::MatrixXd upper = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(upper, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {qb * svd.matrixU(), svd.matrixV(), svd.singularValues()};
}

}  // namespace

LsiFit fit_lsi(std::span<const SparseVector> rows, std::size_t n_columns, const LsiOptions& options) {
    if (options.k < 1) throw Error(ErrorCode::InvalidK, "LSI rank must be at least 1");
    const auto m = static_cast<Eigen::Index>(rows.size());
    const auto n = static_cast<Eigen::Index>(n_columns);
    const Eigen::Index k = options.k;
    if (k > std::min(m, n)) {
        throw Error(ErrorCode::RankTooLarge, "k=" + std::to_string(k) + " exceeds min(#docs, |V|)=" +
                                                 std::to_string(std::min(m, n)));
    }
    const SparseMatrix a = assemble(rows, n_columns);
    const Eigen::SparseMatrix<double, Eigen::RowMajor> at = a.transpose();
    const Eigen::Index l = std::min<Eigen::Index>(k + options.oversampling, std::min(m, n));

    Rng rng(options.seed);
    Eigen::MatrixXd omega(n, l);
    for (Eigen::Index j = 0; j < l; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) omega(i, j) = rng.normal();
    }

    Eigen::MatrixXd q = orthonormalize(a * omega);
    Eigen::VectorXd previous;
    int iterations = 0;
    Eigen::MatrixXd bt;
    for (;;) {
        bt = at * q;  // B^T for the current range basis
        if (iterations >= options.min_power_iterations) {
            const Eigen::VectorXd current = small_svd(bt).values.head(k);
            if (previous.size() == k) {
                const double change = (current - previous).cwiseAbs().maxCoeff();
                if (change <= options.tolerance * std::max(current(0), 1e-300)) break;
            }
            previous = current;
            if (iterations >= options.max_power_iterations) break;
        }
        q = orthonormalize(a * orthonormalize(bt));
        ++iterations;
    }

    const SmallSvd svd = small_svd(bt);
    Eigen::MatrixXd right = svd.right.leftCols(k);  // n x k

    // Sign convention: largest-magnitude component of each right vector is positive.
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::Index arg = 0;
        right.col(j).cwiseAbs().maxCoeff(&arg);
        if (right(arg, j) < 0) right.col(j) *= -1.0;
    }

    LsiFit fit;
    fit.model.k = static_cast<int>(k);
    fit.model.projection = right.transpose();
    fit.model.singular_values.assign(svd.values.data(), svd.values.data() + k);
    fit.document_embedding = a * right;
    fit.power_iterations = iterations;
    return fit;
}

std::vector<double> lsi_project(const LsiModel& model, const SparseVector& v) {
    std::vector<double> out(static_cast<std::size_t>(model.k), 0.0);
    for (std::size_t i = 0; i < v.indices.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(v.indices[i]);
        if (col >= model.projection.cols()) continue;  // out-of-vocabulary
        for (int r = 0; r < model.k; ++r) out[static_cast<std::size_t>(r)] += model.projection(r, col) * v.values[i];
    }
    return out;
}

}  // namespace vizrec::models
