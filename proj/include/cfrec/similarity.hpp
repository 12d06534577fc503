#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfrec/scoring.hpp"

namespace cfrec {

enum class SimilarityKind { cosine, dice, jaccard, asymmetric_cosine, tversky };

inline const char* to_string(SimilarityKind k) {
    switch (k) {
        case SimilarityKind::cosine: return "cosine";
        case SimilarityKind::dice: return "dice";
        case SimilarityKind::jaccard: return "jaccard";
        case SimilarityKind::asymmetric_cosine: return "asymmetric";
        default: return "tversky";
    }
}

struct SimilarityConfig {
    SimilarityKind kind = SimilarityKind::cosine;
    double shrink = 0.0;
    int top_k = 100;
    double alpha = 0.5;  // asymmetric-cosine / tversky
    double beta = 0.5;   // tversky

    void validate(Index dimension) const {
        if (shrink < 0) throw std::invalid_argument("SimilarityConfig: negative shrink");
        if (top_k < 1) throw std::invalid_argument("SimilarityConfig: top_k must be >= 1");
        if (top_k > dimension) throw std::invalid_argument("SimilarityConfig: top_k exceeds dimension");
        if (alpha < 0 || alpha > 2) throw std::invalid_argument("SimilarityConfig: alpha outside [0,2]");
        if (beta < 0 || beta > 2) throw std::invalid_argument("SimilarityConfig: beta outside [0,2]");
    }
};

// Row-truncated sparse similarity matrix: per row, up to top_k (index, value)
// pairs sorted by index.
struct SimilarityMatrix {
    Index dimension = 0;
    std::vector<std::vector<std::pair<Index, double>>> rows;
};

namespace detail {

// For binary vectors the dot product is the co-occurrence count. norms holds
// per-entity interaction counts.
inline double similarity_value(const SimilarityConfig& cfg, double co, double n_i, double n_j) {
    switch (cfg.kind) {
        case SimilarityKind::cosine:
            return co / (std::sqrt(n_i) * std::sqrt(n_j) + cfg.shrink + 1e-12);
        case SimilarityKind::dice:
            return 2.0 * co / (n_i + n_j + cfg.shrink + 1e-12);
        case SimilarityKind::jaccard:
            return co / (n_i + n_j - co + cfg.shrink + 1e-12);
        case SimilarityKind::asymmetric_cosine:
            return co / (std::pow(n_i, cfg.alpha) * std::pow(n_j, 1.0 - cfg.alpha) + cfg.shrink + 1e-12);
        case SimilarityKind::tversky:
            return co / (co + cfg.alpha * (n_i - co) + cfg.beta * (n_j - co) + cfg.shrink + 1e-12);
    }
    return 0.0;
}

inline std::vector<std::pair<Index, double>> keep_top_k(std::vector<std::pair<Index, double>> entries,
                                                        int top_k) {
    const auto keep = std::min<std::size_t>(entries.size(), static_cast<std::size_t>(top_k));
    std::partial_sort(entries.begin(), entries.begin() + keep, entries.end(),
                      [](const auto& a, const auto& b) {
                          if (a.second != b.second) return a.second > b.second;
                          return a.first < b.first;
                      });
    entries.resize(keep);
    std::sort(entries.begin(), entries.end());
    return entries;
}

}  // namespace detail

// Pairwise similarities between the ROWS of `m`, zero diagonal, top_k kept
// per row. For item-item similarities pass the transposed user-item matrix.
inline SimilarityMatrix compute_similarity(const InteractionMatrix& m, const SimilarityConfig& cfg) {
    cfg.validate(m.num_rows());
    const InteractionMatrix mt = transpose(m);  // cols -> row lists

    std::vector<double> norms(static_cast<std::size_t>(m.num_rows()));
    for (Index i = 0; i < m.num_rows(); ++i) norms[static_cast<std::size_t>(i)] = static_cast<double>(m.row_nnz(i));

    SimilarityMatrix sim;
    sim.dimension = m.num_rows();
    sim.rows.resize(static_cast<std::size_t>(m.num_rows()));

#pragma omp parallel
    {
        std::vector<double> acc(static_cast<std::size_t>(m.num_rows()), 0.0);
        std::vector<Index> touched;
#pragma omp for schedule(dynamic, 16)
        for (Index i = 0; i < m.num_rows(); ++i) {
            touched.clear();
            for (Index shared : m.row(i)) {
                for (Index other : mt.row(shared)) {
                    if (acc[static_cast<std::size_t>(other)] == 0.0) touched.push_back(other);
                    acc[static_cast<std::size_t>(other)] += 1.0;
                }
            }
            std::vector<std::pair<Index, double>> entries;
            entries.reserve(touched.size());
            for (Index other : touched) {
                const double co = acc[static_cast<std::size_t>(other)];
                acc[static_cast<std::size_t>(other)] = 0.0;
                if (other == i) continue;
                const double value = detail::similarity_value(cfg, co, norms[static_cast<std::size_t>(i)],
                                                              norms[static_cast<std::size_t>(other)]);
                if (value > 0) entries.emplace_back(other, value);
            }
            sim.rows[static_cast<std::size_t>(i)] = detail::keep_top_k(std::move(entries), cfg.top_k);
        }
    }
    return sim;
}

enum class KnnDirection { user, item };

class KnnModel final : public ScoringModel {
public:
    KnnModel(SimilarityMatrix sim, const InteractionMatrix& train, KnnDirection direction,
             SimilarityConfig cfg)
        : sim_(std::move(sim)), train_(&train), direction_(direction), cfg_(cfg) {}

    Vector score(Index user) const override {
        Vector s = Vector::Zero(train_->num_cols());
        if (direction_ == KnnDirection::item) {
            // score_j = sum over profile items i of sim(i, j)
            for (Index i : train_->row(user))
                for (const auto& [j, v] : sim_.rows[static_cast<std::size_t>(i)]) s[j] += v;
        } else {
            // score_j = sum over neighbor users v of sim(u, v) * profile_v(j)
            for (const auto& [v, w] : sim_.rows[static_cast<std::size_t>(user)])
                for (Index j : train_->row(v)) s[j] += w;
        }
        return s;
    }

    std::string kind() const override {
        return std::string(direction_ == KnnDirection::item ? "itemknn-" : "userknn-") +
               to_string(cfg_.kind);
    }

    const SimilarityMatrix& similarity() const { return sim_; }

private:
    SimilarityMatrix sim_;
    const InteractionMatrix* train_;
    KnnDirection direction_;
    SimilarityConfig cfg_;
};

inline std::unique_ptr<KnnModel> fit_knn(const InteractionMatrix& train, const SimilarityConfig& cfg,
                                         KnnDirection direction) {
    const SimilarityMatrix sim = (direction == KnnDirection::item)
                                     ? compute_similarity(transpose(train), cfg)
                                     : compute_similarity(train, cfg);
    return std::make_unique<KnnModel>(sim, train, direction, cfg);
}

class Rp3BetaModel final : public ScoringModel {
public:
    Rp3BetaModel(SimilarityMatrix sim, const InteractionMatrix& train)
        : sim_(std::move(sim)), train_(&train) {}

    Vector score(Index user) const override {
        Vector s = Vector::Zero(train_->num_cols());
        for (Index i : train_->row(user))
            for (const auto& [j, v] : sim_.rows[static_cast<std::size_t>(i)]) s[j] += v;
        return s;
    }

    std::string kind() const override { return "rp3beta"; }
    const SimilarityMatrix& similarity() const { return sim_; }

private:
    SimilarityMatrix sim_;
    const InteractionMatrix* train_;
};

// 3-step random-walk item-item transitions: S_ij = sum_u piu(i,u)^alpha *
// pui(u,j)^alpha, divided by pop_j^beta, rows L1-normalized, then top_k.
inline std::unique_ptr<Rp3BetaModel> fit_rp3beta(const InteractionMatrix& train, int top_k,
                                                 double alpha, double beta) {
    if (alpha < 0 || beta < 0) throw std::invalid_argument("fit_rp3beta: negative exponent");
    if (top_k < 1 || top_k > train.num_cols())
        throw std::invalid_argument("fit_rp3beta: top_k out of range");

    const InteractionMatrix items = transpose(train);  // item -> users
    const Index n_items = train.num_cols();

    std::vector<double> item_pop(static_cast<std::size_t>(n_items));
    for (Index i = 0; i < n_items; ++i) item_pop[static_cast<std::size_t>(i)] = static_cast<double>(items.row_nnz(i));

    SimilarityMatrix sim;
    sim.dimension = n_items;
    sim.rows.resize(static_cast<std::size_t>(n_items));

#pragma omp parallel
    {
        std::vector<double> acc(static_cast<std::size_t>(n_items), 0.0);
        std::vector<Index> touched;
#pragma omp for schedule(dynamic, 16)
        for (Index i = 0; i < n_items; ++i) {
            touched.clear();
            const double piu = item_pop[static_cast<std::size_t>(i)] > 0
                                   ? std::pow(1.0 / item_pop[static_cast<std::size_t>(i)], alpha)
                                   : 0.0;
            for (Index u : items.row(i)) {
                const double pui = std::pow(1.0 / static_cast<double>(train.row_nnz(u)), alpha);
                const double w = piu * pui;
                for (Index j : train.row(u)) {
                    if (acc[static_cast<std::size_t>(j)] == 0.0) touched.push_back(j);
                    acc[static_cast<std::size_t>(j)] += w;
                }
            }
            std::vector<std::pair<Index, double>> entries;
            entries.reserve(touched.size());
            double row_sum = 0;
            for (Index j : touched) {
                double v = acc[static_cast<std::size_t>(j)];
                acc[static_cast<std::size_t>(j)] = 0.0;
                if (j == i) continue;
                if (beta > 0 && item_pop[static_cast<std::size_t>(j)] > 0)
                    v /= std::pow(item_pop[static_cast<std::size_t>(j)], beta);
                if (v > 0) {
                    entries.emplace_back(j, v);
                    row_sum += v;
                }
            }
            if (row_sum > 0)
                for (auto& [j, v] : entries) v /= row_sum;
            sim.rows[static_cast<std::size_t>(i)] = detail::keep_top_k(std::move(entries), top_k);
        }
    }
    return std::make_unique<Rp3BetaModel>(std::move(sim), train);
}

}  // namespace cfrec
