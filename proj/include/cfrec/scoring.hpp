#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cfrec/interactions.hpp"
#include "cfrec/metrics.hpp"
#include "cfrec/mlp.hpp"
#include "cfrec/ranking.hpp"
#include "cfrec/rng.hpp"

namespace cfrec {

// A fitted recommender exposing per-user scores over all items. Fitting never
// excludes anything; seen-item exclusion happens at ranking time.
class ScoringModel {
public:
    virtual ~ScoringModel() = default;
    virtual Vector score(Index row) const = 0;
    virtual std::string kind() const = 0;
};

inline RowRanker make_ranker(const ScoringModel& model, const InteractionMatrix& train) {
    return [&model, &train](Index row, int n) {
        const Vector s = model.score(row);
        std::vector<double> scores(s.data(), s.data() + s.size());
        return rank_top_n(row, scores, train.row(row), n);
    };
}

class TopPopModel final : public ScoringModel {
public:
    explicit TopPopModel(Vector popularity) : popularity_(std::move(popularity)) {}
    Vector score(Index) const override { return popularity_; }
    std::string kind() const override { return "toppop"; }
    const Vector& popularity() const { return popularity_; }

private:
    Vector popularity_;
};

// score_j = interaction count of item j, identical for every row.
inline std::unique_ptr<TopPopModel> fit_toppop(const InteractionMatrix& train) {
    const auto counts = train.col_counts();
    Vector pop(train.num_cols());
    for (Index j = 0; j < train.num_cols(); ++j) pop[j] = static_cast<double>(counts[static_cast<std::size_t>(j)]);
    return std::make_unique<TopPopModel>(std::move(pop));
}

class RandomModel final : public ScoringModel {
public:
    RandomModel(Index num_cols, std::uint64_t seed) : num_cols_(num_cols), seed_(seed) {}
    Vector score(Index row) const override {
        Rng rng = make_rng(seed_, static_cast<std::uint64_t>(row));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Vector s(num_cols_);
        for (Index j = 0; j < num_cols_; ++j) s[j] = unit(rng);
        return s;
    }
    std::string kind() const override { return "random"; }
    std::uint64_t seed() const { return seed_; }

private:
    Index num_cols_;
    std::uint64_t seed_;
};

inline std::unique_ptr<RandomModel> fit_random(const InteractionMatrix& train, std::uint64_t seed) {
    return std::make_unique<RandomModel>(train.num_cols(), seed);
}

}  // namespace cfrec
