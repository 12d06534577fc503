#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "cfrec/interactions.hpp"

namespace cfrec {

// One row's top-N recommendation. Items are ordered by descending score with
// ties broken by ascending item index; items from the row's training profile
// never appear.
struct RankedList {
    Index row = 0;
    std::vector<Index> items;
    std::vector<double> scores;
};

// Shared ranking step for every model: scores over all columns, the row's
// seen columns excluded, top n kept.
inline RankedList rank_top_n(Index row, std::span<const double> scores,
                             std::span<const Index> exclude, int n) {
    std::vector<char> excluded(scores.size(), 0);
    for (Index c : exclude) excluded[static_cast<std::size_t>(c)] = 1;

    std::vector<Index> order;
    order.reserve(scores.size());
    for (std::size_t j = 0; j < scores.size(); ++j)
        if (!excluded[j]) order.push_back(static_cast<Index>(j));

    const auto better = [&](Index a, Index b) {
        const double sa = scores[static_cast<std::size_t>(a)];
        const double sb = scores[static_cast<std::size_t>(b)];
        if (sa != sb) return sa > sb;
        return a < b;
    };
    const auto keep = std::min<std::size_t>(static_cast<std::size_t>(n), order.size());
    std::partial_sort(order.begin(), order.begin() + keep, order.end(), better);
    order.resize(keep);

    RankedList out;
    out.row = row;
    out.items = std::move(order);
    out.scores.reserve(out.items.size());
    for (Index j : out.items) out.scores.push_back(scores[static_cast<std::size_t>(j)]);
    return out;
}

}  // namespace cfrec
