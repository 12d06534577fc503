#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfrec/interactions.hpp"
#include "cfrec/ranking.hpp"
#include "cfrec/rng.hpp"

namespace cfrec {

// Per-cutoff accuracy metrics, averaged over evaluated rows:
//   PREC  = hits / n
//   REC   = hits / |relevant|
//   F1    = 2 * PREC * REC / (PREC + REC)
//   MRR   = 1 / rank of first hit (0 without hits)
//   ARHR  = sum over hits of 1 / rank
//   MAP   = sum over hits of precision-at-hit / min(|relevant|, n)
//   NDCG  = DCG / IDCG with gain 1 and discount 1 / log2(rank + 1)
struct AccuracyScores {
    double prec = 0, rec = 0, f1 = 0, map = 0, mrr = 0, arhr = 0, ndcg = 0;
};

// Corpus-level metrics over the whole set of recommendation lists:
//   Novelty     = mean over lists of sum_{j in list} -log2(pop_j / total_pop) / n
//                 (zero-popularity items contribute nothing)
//   CovItem     = |distinct recommended items| / #items
//   DivGini     = 1 - Gini coefficient of recommendation frequencies over all
//                 items (1 = perfectly uniform exposure)
//   DivShannon  = entropy in bits of the recommendation-frequency distribution
//   DivMIL      = mean pairwise 1 - cosine(list indicator vectors), full
//                 enumeration below 500 lists, else a seeded 10000-pair sample
struct BeyondAccuracyScores {
    double novelty = 0, cov_item = 0, div_mil = 0, div_gini = 0, div_shannon = 0;
};

struct CutoffReport {
    AccuracyScores accuracy;
    BeyondAccuracyScores beyond;
};

struct MetricReport {
    std::map<int, CutoffReport> per_cutoff;
    std::size_t evaluated_rows = 0;
};

inline AccuracyScores accuracy_at(const RankedList& rec, const std::set<Index>& relevant, int n) {
    if (n <= 0) throw std::invalid_argument("accuracy_at: cutoff must be positive");
    if (relevant.empty()) throw std::invalid_argument("accuracy_at: empty relevant set");

    AccuracyScores s;
    const std::size_t len = std::min<std::size_t>(rec.items.size(), static_cast<std::size_t>(n));
    int hits = 0;
    double dcg = 0, precision_sum = 0;
    for (std::size_t k = 0; k < len; ++k) {
        if (!relevant.count(rec.items[k])) continue;
        ++hits;
        const double rank = static_cast<double>(k + 1);
        if (s.mrr == 0) s.mrr = 1.0 / rank;
        s.arhr += 1.0 / rank;
        dcg += 1.0 / std::log2(rank + 1.0);
        precision_sum += static_cast<double>(hits) / rank;
    }
    const auto n_rel = static_cast<double>(relevant.size());
    s.prec = static_cast<double>(hits) / static_cast<double>(n);
    s.rec = static_cast<double>(hits) / n_rel;
    s.f1 = (s.prec + s.rec > 0) ? 2.0 * s.prec * s.rec / (s.prec + s.rec) : 0.0;
    s.map = precision_sum / std::min<double>(n_rel, static_cast<double>(n));

    const auto ideal_len = std::min<std::size_t>(relevant.size(), static_cast<std::size_t>(n));
    double idcg = 0;
    for (std::size_t k = 0; k < ideal_len; ++k)
        idcg += 1.0 / std::log2(static_cast<double>(k + 2));
    s.ndcg = (idcg > 0) ? dcg / idcg : 0.0;
    return s;
}

namespace detail {

inline double gini_diversity(const std::vector<double>& frequencies) {
    // 1 - Gini coefficient, with p sorted ascending over ALL items:
    // G = sum_k (2k - n - 1) p_k / (n - 1), k in 1..n.
    const std::size_t n = frequencies.size();
    if (n <= 1) return 1.0;
    double total = 0;
    for (double f : frequencies) total += f;
    if (total <= 0) return 1.0;
    std::vector<double> p = frequencies;
    std::sort(p.begin(), p.end());
    double g = 0;
    for (std::size_t k = 1; k <= n; ++k)
        g += (2.0 * static_cast<double>(k) - static_cast<double>(n) - 1.0) * p[k - 1] / total;
    g /= static_cast<double>(n - 1);
    return 1.0 - g;
}

inline double shannon_entropy_bits(const std::vector<double>& frequencies) {
    double total = 0;
    for (double f : frequencies) total += f;
    if (total <= 0) return 0.0;
    double h = 0;
    for (double f : frequencies) {
        if (f <= 0) continue;
        const double p = f / total;
        h -= p * std::log2(p);
    }
    return h;
}

inline double mean_inter_list_diversity(const std::vector<RankedList>& lists,
                                        std::size_t pair_cap, std::uint64_t seed) {
    const std::size_t m = lists.size();
    if (m < 2) return 0.0;

    const auto dissimilarity = [&](const RankedList& a, const RankedList& b) {
        if (a.items.empty() || b.items.empty()) return 1.0;
        std::size_t inter = 0;
        std::set<Index> sa(a.items.begin(), a.items.end());
        for (Index j : b.items) inter += sa.count(j);
        const double denom = std::sqrt(static_cast<double>(a.items.size())) *
                             std::sqrt(static_cast<double>(b.items.size()));
        return 1.0 - static_cast<double>(inter) / denom;
    };

    double sum = 0;
    std::size_t pairs = 0;
    if (m < 500) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                sum += dissimilarity(lists[i], lists[j]);
                ++pairs;
            }
    } else {
        Rng rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, m - 1);
        while (pairs < pair_cap) {
            const std::size_t i = pick(rng);
            const std::size_t j = pick(rng);
            if (i == j) continue;
            sum += dissimilarity(lists[i], lists[j]);
            ++pairs;
        }
    }
    return pairs ? sum / static_cast<double>(pairs) : 0.0;
}

}  // namespace detail

inline BeyondAccuracyScores beyond_accuracy(const std::vector<RankedList>& all_recs,
                                            const InteractionMatrix& train, int n,
                                            std::size_t mil_pair_cap = 10000,
                                            std::uint64_t mil_seed = 1234) {
    if (all_recs.empty()) return {};
    BeyondAccuracyScores s;

    const auto pop = train.col_counts();
    double total_pop = 0;
    for (auto c : pop) total_pop += static_cast<double>(c);

    std::vector<double> frequencies(static_cast<std::size_t>(train.num_cols()), 0.0);
    double novelty_sum = 0;
    for (const auto& rec : all_recs) {
        double self_information = 0;
        for (Index j : rec.items) {
            frequencies[static_cast<std::size_t>(j)] += 1.0;
            const auto p = static_cast<double>(pop[static_cast<std::size_t>(j)]);
            if (p > 0 && total_pop > 0) self_information += -std::log2(p / total_pop);
        }
        novelty_sum += self_information / static_cast<double>(n);
    }
    s.novelty = novelty_sum / static_cast<double>(all_recs.size());

    std::size_t distinct = 0;
    for (double f : frequencies) distinct += (f > 0);
    s.cov_item = static_cast<double>(distinct) / static_cast<double>(train.num_cols());

    s.div_gini = detail::gini_diversity(frequencies);
    s.div_shannon = detail::shannon_entropy_bits(frequencies);
    s.div_mil = detail::mean_inter_list_diversity(all_recs, mil_pair_cap, mil_seed);
    return s;
}

// A ranker produces, for one user row, scores over all items with training
// items already excluded from the returned top-n list.
using RowRanker = std::function<RankedList(Index row, int n)>;

// Averages per-row accuracy over rows with non-empty test profiles; rows with
// empty test profiles still contribute their lists to the beyond-accuracy
// aggregates.
inline MetricReport evaluate(const RowRanker& ranker, const DatasetSplit& split,
                             const std::vector<int>& cutoffs) {
    const auto& test = split.test;
    MetricReport report;
    int max_cutoff = 0;
    for (int n : cutoffs) {
        if (n <= 0) throw std::invalid_argument("evaluate: cutoffs must be positive");
        max_cutoff = std::max(max_cutoff, n);
    }

    std::vector<RankedList> lists(static_cast<std::size_t>(test.num_rows()));
    for (Index r = 0; r < test.num_rows(); ++r) lists[static_cast<std::size_t>(r)] = ranker(r, max_cutoff);

    std::size_t evaluated = 0;
    for (Index r = 0; r < test.num_rows(); ++r) evaluated += !test.row(r).empty();
    if (evaluated == 0) throw std::runtime_error("evaluate: no rows with test interactions");
    report.evaluated_rows = evaluated;

    for (int n : cutoffs) {
        CutoffReport cr;
        AccuracyScores acc;
        for (Index r = 0; r < test.num_rows(); ++r) {
            const auto rel_span = test.row(r);
            if (rel_span.empty()) continue;
            std::set<Index> relevant(rel_span.begin(), rel_span.end());
            RankedList truncated = lists[static_cast<std::size_t>(r)];
            if (truncated.items.size() > static_cast<std::size_t>(n)) {
                truncated.items.resize(static_cast<std::size_t>(n));
                truncated.scores.resize(static_cast<std::size_t>(n));
            }
            const auto s = accuracy_at(truncated, relevant, n);
            acc.prec += s.prec;
            acc.rec += s.rec;
            acc.f1 += s.f1;
            acc.map += s.map;
            acc.mrr += s.mrr;
            acc.arhr += s.arhr;
            acc.ndcg += s.ndcg;
        }
        const auto denom = static_cast<double>(evaluated);
        acc.prec /= denom;
        acc.rec /= denom;
        acc.f1 /= denom;
        acc.map /= denom;
        acc.mrr /= denom;
        acc.arhr /= denom;
        acc.ndcg /= denom;
        cr.accuracy = acc;

        std::vector<RankedList> truncated_lists = lists;
        for (auto& l : truncated_lists)
            if (l.items.size() > static_cast<std::size_t>(n)) {
                l.items.resize(static_cast<std::size_t>(n));
                l.scores.resize(static_cast<std::size_t>(n));
            }
        cr.beyond = beyond_accuracy(truncated_lists, split.train, n);
        report.per_cutoff[n] = cr;
    }
    return report;
}

}  // namespace cfrec
