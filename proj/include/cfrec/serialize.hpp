#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfrec/cfgan.hpp"
#include "cfrec/interactions.hpp"
#include "cfrec/metrics.hpp"
#include "cfrec/mlp.hpp"
#include "cfrec/tuning.hpp"

namespace cfrec {

using Json = nlohmann::json;

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

// ---- interaction matrix text format -------------------------------------

inline void write_matrix(const std::filesystem::path& path, const InteractionMatrix& m) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write matrix file: " + path.string());
    os << "cfrec-interactions v1\n" << m.num_rows() << ' ' << m.num_cols() << ' ' << m.nnz() << '\n';
    for (Index r = 0; r < m.num_rows(); ++r)
        for (Index c : m.row(r)) os << r << ' ' << c << '\n';
}

inline InteractionMatrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix file: " + path.string());
    std::string header;
    std::getline(in, header);
    if (header != "cfrec-interactions v1")
        throw std::runtime_error("unrecognized matrix header in " + path.string());
    Index rows = 0, cols = 0;
    std::size_t nnz = 0;
    in >> rows >> cols >> nnz;
    std::vector<std::pair<Index, Index>> entries;
    entries.reserve(nnz);
    Index r = 0, c = 0;
    while (in >> r >> c) entries.emplace_back(r, c);
    if (entries.size() != nnz)
        throw std::runtime_error("matrix entry count mismatch in " + path.string());
    return InteractionMatrix(rows, cols, std::move(entries));
}

// ---- assignments / configs ------------------------------------------------

inline Json to_json(const ParamValue& v) {
    if (const auto* i = std::get_if<long long>(&v)) return *i;
    if (const auto* d = std::get_if<double>(&v)) return *d;
    return std::get<std::string>(v);
}

inline Json to_json(const Assignment& a) {
    Json j = Json::object();
    for (const auto& [k, v] : a) j[k] = to_json(v);
    return j;
}

inline Assignment assignment_from_json(const Json& j) {
    Assignment a;
    for (const auto& [k, v] : j.items()) {
        if (v.is_number_integer())
            a[k] = static_cast<long long>(v.get<std::int64_t>());
        else if (v.is_number_float())
            a[k] = v.get<double>();
        else
            a[k] = v.get<std::string>();
    }
    return a;
}

// Canonical text rendering of an assignment; keys sorted by map order.
inline std::string canonical_string(const Assignment& a) {
    std::ostringstream os;
    for (const auto& [k, v] : a) {
        os << k << '=';
        if (const auto* i = std::get_if<long long>(&v))
            os << *i;
        else if (const auto* d = std::get_if<double>(&v))
            os << std::scientific << std::setprecision(17) << *d;
        else
            os << std::get<std::string>(v);
        os << ';';
    }
    return os.str();
}

inline std::string config_hash(const Assignment& a) { return hash_hex(fnv1a64(canonical_string(a))); }

// ---- model checkpoints ------------------------------------------------------

// Binary layout: magic, config-hash length + bytes, layer count, per layer
// rows/cols + raw little-endian doubles (weights then bias). Round-trips
// bitwise.
inline void save_mlp_checkpoint(const std::filesystem::path& path, const Mlp& net,
                                const std::string& config_hash_hex) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write checkpoint: " + path.string());
    const char magic[8] = {'C', 'F', 'R', 'E', 'C', 'K', 'P', '1'};
    os.write(magic, sizeof(magic));
    const auto hash_len = static_cast<std::uint32_t>(config_hash_hex.size());
    os.write(reinterpret_cast<const char*>(&hash_len), sizeof(hash_len));
    os.write(config_hash_hex.data(), static_cast<std::streamsize>(hash_len));
    const auto layers = static_cast<std::uint32_t>(net.layer_count());
    os.write(reinterpret_cast<const char*>(&layers), sizeof(layers));
    for (const auto& layer : net.layers()) {
        const auto rows = static_cast<std::uint32_t>(layer.weight.rows());
        const auto cols = static_cast<std::uint32_t>(layer.weight.cols());
        os.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
        os.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
        os.write(reinterpret_cast<const char*>(layer.weight.data()),
                 static_cast<std::streamsize>(sizeof(double) * layer.weight.size()));
        os.write(reinterpret_cast<const char*>(layer.bias.data()),
                 static_cast<std::streamsize>(sizeof(double) * layer.bias.size()));
    }
}

struct MlpCheckpoint {
    Mlp net;
    std::string config_hash;
};

inline MlpCheckpoint load_mlp_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (std::memcmp(magic, "CFRECKP1", 8) != 0)
        throw std::runtime_error("bad checkpoint magic in " + path.string());
    std::uint32_t hash_len = 0;
    in.read(reinterpret_cast<char*>(&hash_len), sizeof(hash_len));
    MlpCheckpoint out;
    out.config_hash.resize(hash_len);
    in.read(out.config_hash.data(), hash_len);
    std::uint32_t layers = 0;
    in.read(reinterpret_cast<char*>(&layers), sizeof(layers));
    for (std::uint32_t l = 0; l < layers; ++l) {
        std::uint32_t rows = 0, cols = 0;
        in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
        in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
        Mlp::Layer layer;
        layer.weight.resize(rows, cols);
        layer.bias.resize(rows);
        in.read(reinterpret_cast<char*>(layer.weight.data()),
                static_cast<std::streamsize>(sizeof(double) * layer.weight.size()));
        in.read(reinterpret_cast<char*>(layer.bias.data()),
                static_cast<std::streamsize>(sizeof(double) * layer.bias.size()));
        out.net.layers().push_back(std::move(layer));
    }
    if (!in) throw std::runtime_error("truncated checkpoint: " + path.string());
    return out;
}

// ---- metric reports --------------------------------------------------------

inline Json to_json(const MetricReport& report) {
    Json j;
    j["evaluated_rows"] = report.evaluated_rows;
    Json cutoffs = Json::object();
    for (const auto& [n, cr] : report.per_cutoff) {
        Json c;
        c["PREC"] = cr.accuracy.prec;
        c["REC"] = cr.accuracy.rec;
        c["F1"] = cr.accuracy.f1;
        c["MAP"] = cr.accuracy.map;
        c["MRR"] = cr.accuracy.mrr;
        c["ARHR"] = cr.accuracy.arhr;
        c["NDCG"] = cr.accuracy.ndcg;
        c["Novelty"] = cr.beyond.novelty;
        c["CovItem"] = cr.beyond.cov_item;
        c["DivMIL"] = cr.beyond.div_mil;
        c["DivGini"] = cr.beyond.div_gini;
        c["DivShannon"] = cr.beyond.div_shannon;
        cutoffs[std::to_string(n)] = c;
    }
    j["cutoffs"] = cutoffs;
    return j;
}

inline MetricReport metric_report_from_json(const Json& j) {
    MetricReport report;
    report.evaluated_rows = j.at("evaluated_rows").get<std::size_t>();
    for (const auto& [key, c] : j.at("cutoffs").items()) {
        CutoffReport cr;
        cr.accuracy.prec = c.at("PREC").get<double>();
        cr.accuracy.rec = c.at("REC").get<double>();
        cr.accuracy.f1 = c.at("F1").get<double>();
        cr.accuracy.map = c.at("MAP").get<double>();
        cr.accuracy.mrr = c.at("MRR").get<double>();
        cr.accuracy.arhr = c.at("ARHR").get<double>();
        cr.accuracy.ndcg = c.at("NDCG").get<double>();
        cr.beyond.novelty = c.at("Novelty").get<double>();
        cr.beyond.cov_item = c.at("CovItem").get<double>();
        cr.beyond.div_mil = c.at("DivMIL").get<double>();
        cr.beyond.div_gini = c.at("DivGini").get<double>();
        cr.beyond.div_shannon = c.at("DivShannon").get<double>();
        report.per_cutoff[std::stoi(key)] = cr;
    }
    return report;
}

inline const char* metric_formula_header() {
    return "# PREC=hits/n; REC=hits/|relevant|; F1=harmonic(PREC,REC); "
           "MAP=sum(prec@hit)/min(|relevant|,n); MRR=1/first-hit-rank; ARHR=sum(1/hit-rank); "
           "NDCG=DCG/IDCG, gain 1, discount 1/log2(rank+1)\n"
           "# Novelty=mean_list sum_j -log2(pop_j/total_pop)/n; CovItem=|distinct items|/#items; "
           "DivGini=1-Gini(rec frequencies, all items); DivShannon=entropy bits of rec "
           "frequencies; DivMIL=mean pairwise 1-cosine(list indicators)\n";
}

inline std::string csv_double(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << v;
    return os.str();
}

inline void write_metric_report_csv(std::ostream& os, const std::string& model,
                                    const MetricReport& report, bool with_header = true) {
    if (with_header) {
        os << metric_formula_header();
        os << "model,cutoff,PREC,REC,F1,MAP,MRR,ARHR,NDCG,Novelty,CovItem,DivMIL,DivGini,DivShannon\n";
    }
    for (const auto& [n, cr] : report.per_cutoff) {
        os << model << ',' << n << ',' << csv_double(cr.accuracy.prec) << ','
           << csv_double(cr.accuracy.rec) << ',' << csv_double(cr.accuracy.f1) << ','
           << csv_double(cr.accuracy.map) << ',' << csv_double(cr.accuracy.mrr) << ','
           << csv_double(cr.accuracy.arhr) << ',' << csv_double(cr.accuracy.ndcg) << ','
           << csv_double(cr.beyond.novelty) << ',' << csv_double(cr.beyond.cov_item) << ','
           << csv_double(cr.beyond.div_mil) << ',' << csv_double(cr.beyond.div_gini) << ','
           << csv_double(cr.beyond.div_shannon) << '\n';
    }
}

// ---- study journal -----------------------------------------------------------

inline Json trial_to_json(int index, const Trial& t) {
    Json j;
    j["index"] = index;
    j["config"] = to_json(t.config);
    j["status"] = t.status == TrialStatus::ok ? "ok" : "failed";
    j["objective"] = t.status == TrialStatus::ok ? Json(t.objective) : Json(nullptr);
    j["fit_seconds"] = t.fit_seconds;
    j["evaluate_seconds"] = t.evaluate_seconds;
    j["stopped_epoch"] = t.stopped_epoch;
    j["seed"] = t.seed;
    return j;
}

inline Trial trial_from_json(const Json& j) {
    Trial t;
    t.config = assignment_from_json(j.at("config"));
    t.status = j.at("status").get<std::string>() == "ok" ? TrialStatus::ok : TrialStatus::failed;
    t.objective = j.at("objective").is_null() ? -std::numeric_limits<double>::infinity()
                                              : j.at("objective").get<double>();
    t.fit_seconds = j.at("fit_seconds").get<double>();
    t.evaluate_seconds = j.at("evaluate_seconds").get<double>();
    t.stopped_epoch = j.at("stopped_epoch").get<int>();
    t.seed = j.at("seed").get<std::uint64_t>();
    return t;
}

inline std::vector<Trial> read_journal(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::vector<Trial> trials;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        trials.push_back(trial_from_json(Json::parse(line)));
    }
    return trials;
}

}  // namespace cfrec
