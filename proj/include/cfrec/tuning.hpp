#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cfrec/early_stopping.hpp"
#include "cfrec/metrics.hpp"
#include "cfrec/rng.hpp"

namespace cfrec {

using ParamValue = std::variant<long long, double, std::string>;
using Assignment = std::map<std::string, ParamValue>;

struct ParamSpec {
    enum class Kind { integer_uniform, real_uniform, real_log_uniform, categorical };
    Kind kind = Kind::real_uniform;
    double lo = 0, hi = 1;
    std::vector<std::string> values;

    static ParamSpec integer(long long lo, long long hi) {
        if (lo >= hi) throw std::invalid_argument("ParamSpec: lo must be < hi");
        return {Kind::integer_uniform, static_cast<double>(lo), static_cast<double>(hi), {}};
    }
    static ParamSpec real(double lo, double hi) {
        if (lo >= hi) throw std::invalid_argument("ParamSpec: lo must be < hi");
        return {Kind::real_uniform, lo, hi, {}};
    }
    static ParamSpec log_real(double lo, double hi) {
        if (!(lo > 0) || lo >= hi) throw std::invalid_argument("ParamSpec: log range needs 0 < lo < hi");
        return {Kind::real_log_uniform, lo, hi, {}};
    }
    static ParamSpec choice(std::vector<std::string> values) {
        if (values.empty()) throw std::invalid_argument("ParamSpec: empty categorical");
        return {Kind::categorical, 0, 0, std::move(values)};
    }

    bool contains(const ParamValue& v) const {
        switch (kind) {
            case Kind::integer_uniform: {
                const auto* i = std::get_if<long long>(&v);
                return i && static_cast<double>(*i) >= lo && static_cast<double>(*i) <= hi;
            }
            case Kind::real_uniform:
            case Kind::real_log_uniform: {
                const auto* d = std::get_if<double>(&v);
                return d && *d >= lo && *d <= hi;
            }
            case Kind::categorical: {
                const auto* s = std::get_if<std::string>(&v);
                return s && std::find(values.begin(), values.end(), *s) != values.end();
            }
        }
        return false;
    }
};

using SearchSpace = std::vector<std::pair<std::string, ParamSpec>>;

enum class TrialStatus { ok, failed };

struct Trial {
    Assignment config;
    double objective = -std::numeric_limits<double>::infinity();  // validation NDCG@10
    TrialStatus status = TrialStatus::failed;
    double fit_seconds = 0;
    double evaluate_seconds = 0;
    int stopped_epoch = 0;  // 0 when early stopping does not apply
    std::uint64_t seed = 0;
};

namespace detail {

inline double sample_uniform(const ParamSpec& spec, Rng& rng, std::string* categorical_out) {
    switch (spec.kind) {
        case ParamSpec::Kind::integer_uniform: {
            std::uniform_int_distribution<long long> d(static_cast<long long>(spec.lo),
                                                       static_cast<long long>(spec.hi));
            return static_cast<double>(d(rng));
        }
        case ParamSpec::Kind::real_uniform: {
            std::uniform_real_distribution<double> d(spec.lo, spec.hi);
            return d(rng);
        }
        case ParamSpec::Kind::real_log_uniform: {
            std::uniform_real_distribution<double> d(std::log(spec.lo), std::log(spec.hi));
            return std::exp(d(rng));
        }
        case ParamSpec::Kind::categorical: {
            std::uniform_int_distribution<std::size_t> d(0, spec.values.size() - 1);
            const auto idx = d(rng);
            if (categorical_out) *categorical_out = spec.values[idx];
            return static_cast<double>(idx);
        }
    }
    return 0;
}

inline ParamValue to_value(const ParamSpec& spec, double x, const std::string& categorical) {
    switch (spec.kind) {
        case ParamSpec::Kind::integer_uniform:
            return static_cast<long long>(std::llround(std::clamp(x, spec.lo, spec.hi)));
        case ParamSpec::Kind::real_uniform:
        case ParamSpec::Kind::real_log_uniform:
            return std::clamp(x, spec.lo, spec.hi);
        case ParamSpec::Kind::categorical:
            return categorical;
    }
    return 0.0;
}

// Numeric observations in transformed space (log for log-uniform specs).
inline double transform(const ParamSpec& spec, const ParamValue& v) {
    if (spec.kind == ParamSpec::Kind::integer_uniform)
        return static_cast<double>(std::get<long long>(v));
    const double d = std::get<double>(v);
    return spec.kind == ParamSpec::Kind::real_log_uniform ? std::log(d) : d;
}

// Parzen mixture over observed points plus one uniform prior component.
struct ParzenDensity {
    std::vector<double> points;
    double lo = 0, hi = 1, sigma = 1;

    static ParzenDensity build(std::vector<double> points, double lo, double hi) {
        ParzenDensity d;
        d.lo = lo;
        d.hi = hi;
        d.points = std::move(points);
        const double range = hi - lo;
        d.sigma = d.points.empty()
                      ? range
                      : std::max(range / 20.0, range / std::sqrt(static_cast<double>(d.points.size()) + 1.0));
        return d;
    }

    double pdf(double x) const {
        const double range = hi - lo;
        double acc = 1.0 / range;  // uniform prior component
        const double inv = 1.0 / (sigma * std::sqrt(2.0 * 3.14159265358979323846));
        for (double p : points) {
            const double z = (x - p) / sigma;
            acc += inv * std::exp(-0.5 * z * z);
        }
        return acc / (static_cast<double>(points.size()) + 1.0);
    }

    double sample(Rng& rng) const {
        std::uniform_int_distribution<std::size_t> pick(0, points.size());  // last = prior
        const auto idx = pick(rng);
        if (idx == points.size()) {
            std::uniform_real_distribution<double> u(lo, hi);
            return u(rng);
        }
        std::normal_distribution<double> n(points[idx], sigma);
        return std::clamp(n(rng), lo, hi);
    }
};

}  // namespace detail

struct SuggestOptions {
    int n_random = 16;     // initial uniform draws
    double gamma = 0.25;   // good/bad quantile split
    int n_candidates = 24; // candidates drawn from the good density
};

// Parzen-estimator density-ratio suggestion: after the warm-up, candidates are
// sampled from the good-trial density and scored by good/bad likelihood ratio.
inline Assignment suggest(const SearchSpace& space, const std::vector<Trial>& history, Rng& rng,
                          const SuggestOptions& options = {}) {
    Assignment out;
    if (static_cast<int>(history.size()) < options.n_random) {
        for (const auto& [name, spec] : space) {
            std::string categorical;
            const double x = detail::sample_uniform(spec, rng, &categorical);
            out[name] = detail::to_value(spec, x, categorical);
        }
        return out;
    }

    std::vector<const Trial*> ok;
    std::vector<const Trial*> failed;
    for (const auto& t : history)
        (t.status == TrialStatus::ok ? ok : failed).push_back(&t);
    std::stable_sort(ok.begin(), ok.end(),
                     [](const Trial* a, const Trial* b) { return a->objective > b->objective; });
    const auto n_good = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(options.gamma * static_cast<double>(ok.size()))));

    for (const auto& [name, spec] : space) {
        if (spec.kind == ParamSpec::Kind::categorical) {
            const auto count_in = [&](std::size_t from, std::size_t to, std::vector<double>& counts) {
                for (std::size_t i = from; i < to; ++i) {
                    const auto it = ok[i]->config.find(name);
                    if (it == ok[i]->config.end()) continue;
                    const auto& v = std::get<std::string>(it->second);
                    const auto idx = std::find(spec.values.begin(), spec.values.end(), v) -
                                     spec.values.begin();
                    counts[static_cast<std::size_t>(idx)] += 1.0;
                }
            };
            std::vector<double> good(spec.values.size(), 1.0), bad(spec.values.size(), 1.0);
            count_in(0, n_good, good);
            count_in(n_good, ok.size(), bad);
            for (const Trial* t : failed) {
                const auto it = t->config.find(name);
                if (it == t->config.end()) continue;
                const auto& v = std::get<std::string>(it->second);
                const auto idx =
                    std::find(spec.values.begin(), spec.values.end(), v) - spec.values.begin();
                bad[static_cast<std::size_t>(idx)] += 1.0;
            }
            double gsum = 0, bsum = 0;
            for (double g : good) gsum += g;
            for (double b : bad) bsum += b;
            std::size_t best = 0;
            double best_ratio = -1;
            // sample candidates from the good distribution, keep the best ratio
            std::discrete_distribution<std::size_t> good_dist(good.begin(), good.end());
            for (int c = 0; c < options.n_candidates; ++c) {
                const auto idx = good_dist(rng);
                const double ratio = (good[idx] / gsum) / (bad[idx] / bsum);
                if (ratio > best_ratio) {
                    best_ratio = ratio;
                    best = idx;
                }
            }
            out[name] = spec.values[best];
            continue;
        }

        const double lo_t = detail::transform(spec, detail::to_value(spec, spec.lo, ""));
        const double hi_t = detail::transform(spec, detail::to_value(spec, spec.hi, ""));
        std::vector<double> good_pts, bad_pts;
        for (std::size_t i = 0; i < ok.size(); ++i) {
            const auto it = ok[i]->config.find(name);
            if (it == ok[i]->config.end()) continue;
            (i < n_good ? good_pts : bad_pts).push_back(detail::transform(spec, it->second));
        }
        for (const Trial* t : failed) {
            const auto it = t->config.find(name);
            if (it != t->config.end()) bad_pts.push_back(detail::transform(spec, it->second));
        }
        const auto good_density = detail::ParzenDensity::build(std::move(good_pts), lo_t, hi_t);
        const auto bad_density = detail::ParzenDensity::build(std::move(bad_pts), lo_t, hi_t);

        double best_x = lo_t, best_ratio = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < options.n_candidates; ++c) {
            const double x = good_density.sample(rng);
            const double ratio = std::log(good_density.pdf(x)) - std::log(bad_density.pdf(x));
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best_x = x;
            }
        }
        const double raw = spec.kind == ParamSpec::Kind::real_log_uniform ? std::exp(best_x) : best_x;
        out[name] = detail::to_value(spec, raw, "");
    }
    return out;
}

struct TrialOutcome {
    double objective = 0;
    int stopped_epoch = 0;
    double fit_seconds = 0;
    double evaluate_seconds = 0;
};

struct FinalOutcome {
    MetricReport report;
    double fit_seconds = 0;
    double recommend_seconds = 0;   // one full ranking pass over all rows
    double rows_per_second = 0;
};

// Binds one tunable algorithm to its data: trials fit on train and score on
// validation; the final fit uses train + validation and reports on test.
class StudyAlgorithm {
public:
    virtual ~StudyAlgorithm() = default;
    virtual std::string name() const = 0;
    virtual SearchSpace space() const = 0;
    virtual TrialOutcome run_trial(const Assignment& config, std::uint64_t seed) = 0;
    virtual FinalOutcome run_final(const Assignment& config, int stopped_epoch,
                                   std::uint64_t seed) = 0;
};

struct StudyOptions {
    int n_total = 50;
    int n_random = 16;
};

struct StudyResult {
    std::vector<Trial> trials;
    int best_index = -1;
    FinalOutcome final_outcome;
    int final_epochs = 0;
};

// Appends one line per finished trial; any sink works (file, string, ...).
using TrialSink = std::function<void(int index, const Trial&)>;

inline StudyResult run_study(StudyAlgorithm& algorithm, const StudyOptions& options,
                             std::uint64_t seed, const TrialSink& sink = {},
                             std::vector<Trial> resume_history = {}) {
    if (options.n_total < 1) throw std::invalid_argument("run_study: n_total must be >= 1");
    const SearchSpace space = algorithm.space();
    SuggestOptions suggest_options;
    suggest_options.n_random = options.n_random;

    StudyResult result;
    result.trials = std::move(resume_history);
    Rng rng = make_rng(seed, 0x57);

    using clock = std::chrono::steady_clock;
    for (int i = static_cast<int>(result.trials.size()); i < options.n_total; ++i) {
        Trial trial;
        trial.seed = mix_seed(seed, 0x7100 + static_cast<std::uint64_t>(i));
        trial.config = suggest(space, result.trials, rng, suggest_options);
        const auto t0 = clock::now();
        try {
            const TrialOutcome outcome = algorithm.run_trial(trial.config, trial.seed);
            trial.objective = outcome.objective;
            trial.stopped_epoch = outcome.stopped_epoch;
            trial.fit_seconds = outcome.fit_seconds;
            trial.evaluate_seconds = outcome.evaluate_seconds;
            trial.status = TrialStatus::ok;
        } catch (const std::exception&) {
            trial.status = TrialStatus::failed;
            trial.objective = -std::numeric_limits<double>::infinity();
        }
        if (trial.fit_seconds == 0)
            trial.fit_seconds = std::chrono::duration<double>(clock::now() - t0).count();
        if (sink) sink(i, trial);
        result.trials.push_back(std::move(trial));
    }

    for (std::size_t i = 0; i < result.trials.size(); ++i) {
        const auto& t = result.trials[i];
        if (t.status != TrialStatus::ok) continue;
        if (result.best_index < 0 ||
            t.objective > result.trials[static_cast<std::size_t>(result.best_index)].objective)
            result.best_index = static_cast<int>(i);
    }
    if (result.best_index < 0) throw std::runtime_error("run_study: every trial failed");

    const auto& best = result.trials[static_cast<std::size_t>(result.best_index)];
    result.final_outcome = algorithm.run_final(best.config, best.stopped_epoch,
                                               mix_seed(seed, 0xf17a1));
    result.final_epochs = best.stopped_epoch;
    return result;
}

}  // namespace cfrec
