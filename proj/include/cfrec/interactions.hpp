#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cfrec/rng.hpp"

namespace cfrec {

using Index = std::int32_t;

// Sparse binary user-item (or item-user) matrix in CSR form. Stored values
// are implicitly 1; column indices are strictly increasing within each row.
// Immutable after construction.
class InteractionMatrix {
public:
    InteractionMatrix() = default;

    InteractionMatrix(Index num_rows, Index num_cols,
                      std::vector<std::pair<Index, Index>> entries)
        : rows_(num_rows), cols_(num_cols) {
        if (num_rows < 0 || num_cols < 0)
            throw std::invalid_argument("InteractionMatrix: negative dimensions");
        std::sort(entries.begin(), entries.end());
        row_ptr_.assign(static_cast<std::size_t>(rows_) + 1, 0);
        col_idx_.reserve(entries.size());
        for (std::size_t k = 0; k < entries.size(); ++k) {
            const auto [r, c] = entries[k];
            if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
                throw std::invalid_argument("InteractionMatrix: entry out of range");
            if (k > 0 && entries[k] == entries[k - 1])
                throw std::invalid_argument("InteractionMatrix: duplicate (row, col) entry");
            row_ptr_[static_cast<std::size_t>(r) + 1]++;
            col_idx_.push_back(c);
        }
        for (std::size_t r = 0; r < static_cast<std::size_t>(rows_); ++r)
            row_ptr_[r + 1] += row_ptr_[r];
    }

    Index num_rows() const { return rows_; }
    Index num_cols() const { return cols_; }
    std::size_t nnz() const { return col_idx_.size(); }

    std::span<const Index> row(Index r) const {
        return {col_idx_.data() + row_ptr_[static_cast<std::size_t>(r)],
                col_idx_.data() + row_ptr_[static_cast<std::size_t>(r) + 1]};
    }

    std::size_t row_nnz(Index r) const { return row(r).size(); }

    bool has(Index r, Index c) const {
        const auto cols = row(r);
        return std::binary_search(cols.begin(), cols.end(), c);
    }

    std::vector<std::pair<Index, Index>> entries() const {
        std::vector<std::pair<Index, Index>> out;
        out.reserve(nnz());
        for (Index r = 0; r < rows_; ++r)
            for (Index c : row(r)) out.emplace_back(r, c);
        return out;
    }

    // Interaction count per column (item popularity in user-based orientation).
    std::vector<std::int64_t> col_counts() const {
        std::vector<std::int64_t> counts(static_cast<std::size_t>(cols_), 0);
        for (Index c : col_idx_) counts[static_cast<std::size_t>(c)]++;
        return counts;
    }

    InteractionMatrix transposed() const {
        std::vector<std::pair<Index, Index>> swapped;
        swapped.reserve(nnz());
        for (Index r = 0; r < rows_; ++r)
            for (Index c : row(r)) swapped.emplace_back(c, r);
        return InteractionMatrix(cols_, rows_, std::move(swapped));
    }

    // Dense 0/1 copy of one row.
    std::vector<double> dense_row(Index r) const {
        std::vector<double> out(static_cast<std::size_t>(cols_), 0.0);
        for (Index c : row(r)) out[static_cast<std::size_t>(c)] = 1.0;
        return out;
    }

    bool operator==(const InteractionMatrix& other) const = default;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<Index> col_idx_;
};

inline InteractionMatrix transpose(const InteractionMatrix& m) { return m.transposed(); }

struct DatasetSplit {
    InteractionMatrix train;
    std::optional<InteractionMatrix> validation;
    InteractionMatrix test;
};

// Exact-count random holdout: shuffles the stored interactions and assigns
// the first round(ratio * nnz) to `train`, the rest to `holdout`. Both
// outputs keep the input dimensions.
inline std::pair<InteractionMatrix, InteractionMatrix>
split_holdout(const InteractionMatrix& m, double train_ratio, std::uint64_t seed) {
    if (!(train_ratio > 0.0 && train_ratio < 1.0))
        throw std::invalid_argument("split_holdout: train_ratio must be in (0,1)");
    if (m.nnz() == 0)
        throw std::invalid_argument("split_holdout: empty matrix");

    auto entries = m.entries();
    Rng rng(seed);
    std::shuffle(entries.begin(), entries.end(), rng);

    const auto n_train =
        static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(entries.size())));
    std::vector<std::pair<Index, Index>> train_entries(entries.begin(),
                                                       entries.begin() + n_train);
    std::vector<std::pair<Index, Index>> holdout_entries(entries.begin() + n_train,
                                                         entries.end());
    return {InteractionMatrix(m.num_rows(), m.num_cols(), std::move(train_entries)),
            InteractionMatrix(m.num_rows(), m.num_cols(), std::move(holdout_entries))};
}

// Union of two disjoint matrices with identical dimensions (train + validation
// for the final refit).
inline InteractionMatrix merge(const InteractionMatrix& a, const InteractionMatrix& b) {
    if (a.num_rows() != b.num_rows() || a.num_cols() != b.num_cols())
        throw std::invalid_argument("merge: dimension mismatch");
    auto entries = a.entries();
    auto more = b.entries();
    entries.insert(entries.end(), more.begin(), more.end());
    return InteractionMatrix(a.num_rows(), a.num_cols(), std::move(entries));
}

}  // namespace cfrec
