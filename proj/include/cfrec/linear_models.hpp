#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "cfrec/scoring.hpp"
#include "cfrec/similarity.hpp"

namespace cfrec {

namespace detail {

// Dense Gram matrix X^T X of a binary CSR matrix.
inline Matrix gram_matrix(const InteractionMatrix& m) {
    Matrix g = Matrix::Zero(m.num_cols(), m.num_cols());
    for (Index u = 0; u < m.num_rows(); ++u) {
        const auto cols = m.row(u);
        for (std::size_t a = 0; a < cols.size(); ++a)
            for (std::size_t b = 0; b < cols.size(); ++b) g(cols[a], cols[b]) += 1.0;
    }
    return g;
}

}  // namespace detail

class EaseRModel final : public ScoringModel {
public:
    EaseRModel(Matrix weights, const InteractionMatrix& train)
        : weights_(std::move(weights)), train_(&train) {}

    Vector score(Index user) const override {
        Vector s = Vector::Zero(train_->num_cols());
        for (Index i : train_->row(user)) s += weights_.row(i).transpose();
        return s;
    }

    std::string kind() const override { return "easer"; }
    const Matrix& weights() const { return weights_; }

private:
    Matrix weights_;
    const InteractionMatrix* train_;
};

// Closed form: P = (X^T X + l2 I)^-1, B = I - P diag(1/diag(P)), diag(B) = 0.
inline std::unique_ptr<EaseRModel> fit_ease_r(const InteractionMatrix& train, double l2) {
    if (!(l2 > 0)) throw std::invalid_argument("fit_ease_r: l2 must be positive");
    Matrix g = detail::gram_matrix(train);
    g.diagonal().array() += l2;

    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("fit_ease_r: Cholesky factorization failed");
    const Matrix p = llt.solve(Matrix::Identity(g.rows(), g.cols()));

    Matrix b = -p * p.diagonal().cwiseInverse().asDiagonal();
    b.diagonal().setZero();
    return std::make_unique<EaseRModel>(std::move(b), train);
}

// Sparse item-weight matrix: weights[k] holds (target item j, w_kj) pairs,
// so a user's scores accumulate the rows of their profile items.
class SlimModel final : public ScoringModel {
public:
    SlimModel(std::vector<std::vector<std::pair<Index, double>>> weights,
              const InteractionMatrix& train, bool converged)
        : weights_(std::move(weights)), train_(&train), converged_(converged) {}

    Vector score(Index user) const override {
        Vector s = Vector::Zero(train_->num_cols());
        for (Index i : train_->row(user))
            for (const auto& [j, w] : weights_[static_cast<std::size_t>(i)]) s[j] += w;
        return s;
    }

    std::string kind() const override { return "slim"; }
    bool converged() const { return converged_; }

    // Column view: the learned regression weights for target item j.
    std::vector<std::pair<Index, double>> column(Index j) const {
        std::vector<std::pair<Index, double>> out;
        for (Index k = 0; k < static_cast<Index>(weights_.size()); ++k)
            for (const auto& [jj, w] : weights_[static_cast<std::size_t>(k)])
                if (jj == j) out.emplace_back(k, w);
        return out;
    }

private:
    std::vector<std::vector<std::pair<Index, double>>> weights_;
    const InteractionMatrix* train_;
    bool converged_;
};

// Per-item elastic-net regression of column j on all other columns by
// cyclic coordinate descent with covariance updates. Non-negative weights,
// zero self-weight, top_k kept per target column. Follows the sklearn
// objective 1/(2n) ||y - Xw||^2 + a*r*||w||_1 + a*(1-r)/2 ||w||^2.
inline std::unique_ptr<SlimModel> fit_slim_elasticnet(const InteractionMatrix& train,
                                                      double l1_ratio, double alpha, int top_k,
                                                      int max_sweeps = 100, double tol = 1e-4) {
    if (!(alpha > 0)) throw std::invalid_argument("fit_slim_elasticnet: alpha must be positive");
    if (l1_ratio < 0 || l1_ratio > 1)
        throw std::invalid_argument("fit_slim_elasticnet: l1_ratio outside [0,1]");
    if (top_k < 1) throw std::invalid_argument("fit_slim_elasticnet: top_k must be >= 1");

    const Index n_items = train.num_cols();
    const auto n_samples = static_cast<double>(train.num_rows());
    const double lambda1 = alpha * l1_ratio * n_samples;
    const double lambda2 = alpha * (1.0 - l1_ratio) * n_samples;

    const Matrix gram = detail::gram_matrix(train);

    // per-column results, transposed to per-predictor rows afterwards
    std::vector<std::vector<std::pair<Index, double>>> columns(static_cast<std::size_t>(n_items));
    bool all_converged = true;

#pragma omp parallel reduction(&& : all_converged)
    {
        std::vector<double> w(static_cast<std::size_t>(n_items));
        std::vector<double> gw(static_cast<std::size_t>(n_items));  // (G w)_k maintained incrementally
        std::vector<Index> active;
#pragma omp for schedule(dynamic, 8)
        for (Index j = 0; j < n_items; ++j) {
            std::fill(w.begin(), w.end(), 0.0);
            std::fill(gw.begin(), gw.end(), 0.0);
            active.clear();

            bool converged = false;
            for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
                double max_delta = 0;
                for (Index k = 0; k < n_items; ++k) {
                    if (k == j) continue;
                    const double gkk = gram(k, k);
                    if (gkk <= 0) continue;
                    const double rho = gram(k, j) - gw[static_cast<std::size_t>(k)] +
                                       gkk * w[static_cast<std::size_t>(k)];
                    const double updated = std::max(0.0, rho - lambda1) / (gkk + lambda2);
                    const double delta = updated - w[static_cast<std::size_t>(k)];
                    if (delta != 0.0) {
                        if (w[static_cast<std::size_t>(k)] == 0.0) active.push_back(k);
                        w[static_cast<std::size_t>(k)] = updated;
                        for (Index l = 0; l < n_items; ++l)
                            gw[static_cast<std::size_t>(l)] += delta * gram(l, k);
                        max_delta = std::max(max_delta, std::abs(delta));
                    }
                }
                converged = max_delta < tol;
            }
            if (!converged) all_converged = false;

            std::vector<std::pair<Index, double>> entries;
            for (Index k : active)
                if (w[static_cast<std::size_t>(k)] > 0) entries.emplace_back(k, w[static_cast<std::size_t>(k)]);
            std::sort(entries.begin(), entries.end());
            entries.erase(std::unique(entries.begin(), entries.end(),
                                      [](const auto& a, const auto& b) { return a.first == b.first; }),
                          entries.end());
            columns[static_cast<std::size_t>(j)] = detail::keep_top_k(std::move(entries), top_k);
        }
    }

    std::vector<std::vector<std::pair<Index, double>>> rows(static_cast<std::size_t>(n_items));
    for (Index j = 0; j < n_items; ++j)
        for (const auto& [k, wv] : columns[static_cast<std::size_t>(j)])
            rows[static_cast<std::size_t>(k)].emplace_back(j, wv);
    for (auto& r : rows) std::sort(r.begin(), r.end());
    return std::make_unique<SlimModel>(std::move(rows), train, all_converged);
}

}  // namespace cfrec
