#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "cfrec/scoring.hpp"

namespace cfrec {

namespace detail {

inline Matrix sparse_times_dense(const InteractionMatrix& m, const Matrix& dense) {
    Matrix out = Matrix::Zero(m.num_rows(), dense.cols());
    for (Index r = 0; r < m.num_rows(); ++r)
        for (Index c : m.row(r)) out.row(r) += dense.row(c);
    return out;
}

inline Matrix sparse_transpose_times_dense(const InteractionMatrix& m, const Matrix& dense) {
    Matrix out = Matrix::Zero(m.num_cols(), dense.cols());
    for (Index r = 0; r < m.num_rows(); ++r)
        for (Index c : m.row(r)) out.row(c) += dense.row(r);
    return out;
}

}  // namespace detail

class PureSvdModel final : public ScoringModel {
public:
    PureSvdModel(Matrix user_factors, Matrix item_factors)
        : user_factors_(std::move(user_factors)), item_factors_(std::move(item_factors)) {}

    // score(u) = (U_k S_k V_k^T) row u
    Vector score(Index user) const override { return item_factors_ * user_factors_.row(user).transpose(); }
    std::string kind() const override { return "puresvd"; }

    const Matrix& user_factors() const { return user_factors_; }  // U_k S_k
    const Matrix& item_factors() const { return item_factors_; }  // V_k
    Vector singular_values() const {
        Vector s(user_factors_.cols());
        for (Eigen::Index k = 0; k < s.size(); ++k) s[k] = user_factors_.col(k).norm();
        return s;
    }

private:
    Matrix user_factors_;
    Matrix item_factors_;
};

// Rank-k truncated SVD of the binary matrix. Small problems use a dense
// divide-and-conquer SVD; larger ones use seeded randomized subspace
// iteration on the sparse matrix.
inline std::unique_ptr<PureSvdModel> fit_puresvd(const InteractionMatrix& train, int rank,
                                                 std::uint64_t seed = 42) {
    const Index min_dim = std::min(train.num_rows(), train.num_cols());
    if (rank < 1 || rank > min_dim) throw std::invalid_argument("fit_puresvd: rank out of range");

    if (min_dim <= 512) {
        Matrix dense = Matrix::Zero(train.num_rows(), train.num_cols());
        for (Index r = 0; r < train.num_rows(); ++r)
            for (Index c : train.row(r)) dense(r, c) = 1.0;
        Eigen::BDCSVD<Matrix> svd(dense, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Matrix u = svd.matrixU().leftCols(rank);
        const Vector s = svd.singularValues().head(rank);
        const Matrix v = svd.matrixV().leftCols(rank);
        return std::make_unique<PureSvdModel>(u * s.asDiagonal(), v);
    }

    const int oversample = std::min<int>(rank + 10, min_dim) - rank;
    const int width = rank + oversample;
    Rng rng = make_rng(seed, 0x5d);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix omega(train.num_cols(), width);
    for (Eigen::Index i = 0; i < omega.rows(); ++i)
        for (Eigen::Index j = 0; j < omega.cols(); ++j) omega(i, j) = normal(rng);

    Matrix q = detail::sparse_times_dense(train, omega);
    q = Eigen::HouseholderQR<Matrix>(q).householderQ() * Matrix::Identity(q.rows(), width);
    for (int it = 0; it < 7; ++it) {
        Matrix z = detail::sparse_transpose_times_dense(train, q);
        z = Eigen::HouseholderQR<Matrix>(z).householderQ() * Matrix::Identity(z.rows(), width);
        q = detail::sparse_times_dense(train, z);
        q = Eigen::HouseholderQR<Matrix>(q).householderQ() * Matrix::Identity(q.rows(), width);
    }

    const Matrix b = detail::sparse_transpose_times_dense(train, q).transpose();  // width x cols
    Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Matrix u = (q * svd.matrixU()).leftCols(rank);
    const Vector s = svd.singularValues().head(rank);
    const Matrix v = svd.matrixV().leftCols(rank);
    return std::make_unique<PureSvdModel>(u * s.asDiagonal(), v);
}

class MfBprModel final : public ScoringModel {
public:
    MfBprModel(Matrix user_factors, Matrix item_factors)
        : user_factors_(std::move(user_factors)), item_factors_(std::move(item_factors)) {}

    Vector score(Index user) const override { return item_factors_ * user_factors_.row(user).transpose(); }
    std::string kind() const override { return "mfbpr"; }

    const Matrix& user_factors() const { return user_factors_; }
    const Matrix& item_factors() const { return item_factors_; }

private:
    Matrix user_factors_;
    Matrix item_factors_;
};

// SGD over sampled (user, positive, negative) triples on the pairwise BPR
// objective with l2 regularization; one epoch draws nnz triples.
inline std::unique_ptr<MfBprModel> fit_mf_bpr(const InteractionMatrix& train, int factors,
                                              double learning_rate, double reg, int epochs,
                                              std::uint64_t seed) {
    if (factors < 1) throw std::invalid_argument("fit_mf_bpr: factors must be >= 1");
    if (epochs < 0) throw std::invalid_argument("fit_mf_bpr: negative epochs");

    Rng rng = make_rng(seed, 0xb9);
    std::normal_distribution<double> normal(0.0, 0.1);
    Matrix p = Matrix::NullaryExpr(train.num_rows(), factors, [&]() { return normal(rng); });
    Matrix q = Matrix::NullaryExpr(train.num_cols(), factors, [&]() { return normal(rng); });

    const auto entries = train.entries();
    if (entries.empty()) return std::make_unique<MfBprModel>(std::move(p), std::move(q));

    std::uniform_int_distribution<std::size_t> pick_entry(0, entries.size() - 1);
    std::uniform_int_distribution<Index> pick_item(0, train.num_cols() - 1);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t s = 0; s < entries.size(); ++s) {
            const auto [u, i] = entries[pick_entry(rng)];
            Index j = pick_item(rng);
            int guard = 0;
            while (train.has(u, j) && ++guard < 100) j = pick_item(rng);
            if (train.has(u, j)) continue;  // row interacts with every item

            const double x = (p.row(u) * (q.row(i) - q.row(j)).transpose())(0);
            const double g = 1.0 / (1.0 + std::exp(x));

            const Vector pu = p.row(u).transpose();
            const Vector qi = q.row(i).transpose();
            const Vector qj = q.row(j).transpose();
            p.row(u) += learning_rate * (g * (qi - qj) - reg * pu).transpose();
            q.row(i) += learning_rate * (g * pu - reg * qi).transpose();
            q.row(j) += learning_rate * (-g * pu - reg * qj).transpose();
        }
        if (!p.allFinite() || !q.allFinite())
            throw std::runtime_error("fit_mf_bpr: diverged at epoch " + std::to_string(epoch + 1));
    }
    return std::make_unique<MfBprModel>(std::move(p), std::move(q));
}

}  // namespace cfrec
