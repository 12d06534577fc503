#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cfrec/interactions.hpp"

namespace cfrec {

// `u.data` style rows are `user<TAB>item<TAB>rating<TAB>timestamp`;
// `ratings.dat` style rows are `user::item::rating::timestamp`.
enum class FileLayout { tab_separated, double_colon_separated };

struct ParseError : std::runtime_error {
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
          line_number(line) {}
    std::size_t line_number;
};

// Interactions plus the id maps produced by dense re-indexing: inner index
// k corresponds to raw identifier user_ids[k] / item_ids[k].
struct LoadedDataset {
    InteractionMatrix interactions;
    std::vector<std::int64_t> user_ids;
    std::vector<std::int64_t> item_ids;
};

namespace detail {

inline std::vector<std::string_view> split_record(std::string_view line, FileLayout layout) {
    std::vector<std::string_view> fields;
    if (layout == FileLayout::double_colon_separated) {
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const auto next = line.find("::", pos);
            if (next == std::string_view::npos) {
                fields.push_back(line.substr(pos));
                break;
            }
            fields.push_back(line.substr(pos, next - pos));
            pos = next + 2;
        }
    } else {
        std::size_t pos = 0;
        while (pos < line.size()) {
            while (pos < line.size() && (line[pos] == '\t' || line[pos] == ' ')) ++pos;
            if (pos >= line.size()) break;
            auto end = pos;
            while (end < line.size() && line[end] != '\t' && line[end] != ' ') ++end;
            fields.push_back(line.substr(pos, end - pos));
            pos = end;
        }
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    if constexpr (std::is_floating_point_v<T>) {
        // from_chars<double> is available in libstdc++ 11
        const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
        return res.ec == std::errc() && res.ptr == s.data() + s.size();
    } else {
        const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
        return res.ec == std::errc() && res.ptr == s.data() + s.size();
    }
}

}  // namespace detail

// Reads a rating file, keeps records with rating >= rating_threshold, and
// re-indexes users/items densely from 0 in first-appearance order.
inline LoadedDataset load_interactions(const std::filesystem::path& path, FileLayout layout,
                                       double rating_threshold) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open rating file: " + path.string());

    std::unordered_map<std::int64_t, Index> user_index, item_index;
    LoadedDataset out;
    std::vector<std::pair<Index, Index>> entries;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const auto fields = detail::split_record(line, layout);
        if (fields.size() < 3)
            throw ParseError(path.string(), line_no, "expected `user sep item sep rating`");
        std::int64_t raw_user = 0, raw_item = 0;
        double rating = 0.0;
        if (!detail::parse_number(fields[0], raw_user))
            throw ParseError(path.string(), line_no, "bad user id");
        if (!detail::parse_number(fields[1], raw_item))
            throw ParseError(path.string(), line_no, "bad item id");
        if (!detail::parse_number(fields[2], rating))
            throw ParseError(path.string(), line_no, "bad rating");
        if (rating < rating_threshold) continue;

        auto [uit, u_new] = user_index.try_emplace(raw_user, static_cast<Index>(out.user_ids.size()));
        if (u_new) out.user_ids.push_back(raw_user);
        auto [iit, i_new] = item_index.try_emplace(raw_item, static_cast<Index>(out.item_ids.size()));
        if (i_new) out.item_ids.push_back(raw_item);
        entries.emplace_back(uit->second, iit->second);
    }
    if (entries.empty())
        throw std::runtime_error("no interactions loaded from " + path.string());

    out.interactions = InteractionMatrix(static_cast<Index>(out.user_ids.size()),
                                         static_cast<Index>(out.item_ids.size()),
                                         std::move(entries));
    return out;
}

// Two-column sidecar: `inner_index raw_id`, one line per entity.
inline void write_id_map(const std::filesystem::path& path,
                         const std::vector<std::int64_t>& ids) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open id-map file for writing: " + path.string());
    for (std::size_t k = 0; k < ids.size(); ++k) os << k << '\t' << ids[k] << '\n';
}

inline std::vector<std::int64_t> read_id_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open id-map file: " + path.string());
    std::vector<std::int64_t> ids;
    std::size_t idx = 0;
    std::int64_t raw = 0;
    while (in >> idx >> raw) {
        if (idx != ids.size()) throw std::runtime_error("id-map out of order: " + path.string());
        ids.push_back(raw);
    }
    return ids;
}

}  // namespace cfrec
