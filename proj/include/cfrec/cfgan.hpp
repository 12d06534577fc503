#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfrec/early_stopping.hpp"
#include "cfrec/interactions.hpp"
#include "cfrec/mlp.hpp"
#include "cfrec/ranking.hpp"
#include "cfrec/rng.hpp"

namespace cfrec {

enum class Mode { user_based, item_based };
enum class Variant { zr, pm, zp };
enum class ConditionKind { real_profile, class_one_hot };

inline const char* to_string(Mode m) { return m == Mode::user_based ? "user" : "item"; }
inline const char* to_string(Variant v) {
    switch (v) {
        case Variant::zr: return "zr";
        case Variant::pm: return "pm";
        default: return "zp";
    }
}
inline const char* to_string(ConditionKind c) {
    return c == ConditionKind::real_profile ? "real-profile" : "class-one-hot";
}

struct NetConfig {
    int hidden_layers = 1;      // 1..4
    int hidden_features = 128;  // 50..300
    int steps = 1;              // 1..4 sub-passes per epoch
    double l2 = 1e-3;           // 1e-4..1e-1
    double learning_rate = 1e-3;  // 1e-4..5e-3
    int batch_size = 128;       // 32..256
};

struct CfganConfig {
    Mode mode = Mode::item_based;
    Variant variant = Variant::zp;
    ConditionKind condition_kind = ConditionKind::real_profile;
    double noise_fraction = 0.0;  // {0, 0.5, 1.0, 2.0} of the input-neuron count
    double zr_coefficient = 0.5;  // 0..1, unused for PM
    int zr_ratio = 50;            // 10..90 percent, unused for PM
    int pm_ratio = 50;            // 10..90 percent, unused for ZR
    NetConfig generator;
    NetConfig discriminator;
    int min_epochs = 200;
    int max_epochs = 400;

    void validate() const {
        auto check = [](bool ok, const char* what) {
            if (!ok) throw std::invalid_argument(std::string("CfganConfig: ") + what);
        };
        check(noise_fraction == 0.0 || noise_fraction == 0.5 || noise_fraction == 1.0 ||
                  noise_fraction == 2.0,
              "noise_fraction must be one of {0, 0.5, 1, 2}");
        check(zr_coefficient >= 0.0 && zr_coefficient <= 1.0, "zr_coefficient outside [0,1]");
        check(zr_ratio >= 10 && zr_ratio <= 90, "zr_ratio outside [10,90]");
        check(pm_ratio >= 10 && pm_ratio <= 90, "pm_ratio outside [10,90]");
        for (const NetConfig* net : {&generator, &discriminator}) {
            check(net->hidden_layers >= 1 && net->hidden_layers <= 4, "hidden_layers outside [1,4]");
            check(net->hidden_features >= 50 && net->hidden_features <= 300,
                  "hidden_features outside [50,300]");
            check(net->steps >= 1 && net->steps <= 4, "steps outside [1,4]");
            check(net->l2 >= 1e-4 && net->l2 <= 1e-1, "l2 outside [1e-4,1e-1]");
            check(net->learning_rate >= 1e-4 && net->learning_rate <= 5e-3,
                  "learning_rate outside [1e-4,5e-3]");
            check(net->batch_size >= 32 && net->batch_size <= 256, "batch_size outside [32,256]");
        }
        check(min_epochs <= max_epochs, "min_epochs > max_epochs");
    }
};

struct NoiseSpec {
    int size = 0;  // noise_fraction * input-neuron count, rounded
};

inline NoiseSpec make_noise_spec(const CfganConfig& config, int input_neurons) {
    return {static_cast<int>(std::lround(config.noise_fraction * input_neurons))};
}

// i.i.d. standard normal draws; empty when noise is disabled.
inline Vector sample_noise(const NoiseSpec& spec, Rng& rng) {
    Vector z(spec.size);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < spec.size; ++i) z[i] = normal(rng);
    return z;
}

// real-profile: the row's interaction vector; class-one-hot: indicator of the
// row index over all rows.
inline Vector build_condition(const CfganConfig& config, Index row, Index num_rows,
                              const std::vector<double>& real_profile) {
    if (config.condition_kind == ConditionKind::real_profile) {
        return Eigen::Map<const Vector>(real_profile.data(),
                                        static_cast<Eigen::Index>(real_profile.size()));
    }
    Vector c = Vector::Zero(num_rows);
    c[row] = 1.0;
    return c;
}

// Uniform sample without replacement of round(ratio% * #zeros) positions
// among the zero entries of a binary row. Shared by the ZR and PM samplers.
inline std::vector<Index> sample_zero_indices(std::span<const Index> seen_cols, Index num_cols,
                                              int ratio_percent, Rng& rng) {
    std::vector<Index> zeros;
    zeros.reserve(static_cast<std::size_t>(num_cols) - seen_cols.size());
    std::size_t k = 0;
    for (Index c = 0; c < num_cols; ++c) {
        if (k < seen_cols.size() && seen_cols[k] == c) {
            ++k;
            continue;
        }
        zeros.push_back(c);
    }
    const auto take = static_cast<std::size_t>(
        std::llround(static_cast<double>(ratio_percent) / 100.0 * static_cast<double>(zeros.size())));
    for (std::size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, zeros.size() - 1);
        std::swap(zeros[i], zeros[pick(rng)]);
    }
    zeros.resize(take);
    return zeros;
}

// result_j = fake_j where real_row_j = 1 or j is a partial-masking index,
// else 0. pm_indices stays empty for the ZR variant (full masking).
inline Vector apply_mask(const Vector& fake, const Vector& real_row,
                         const std::vector<Index>& pm_indices) {
    if (fake.size() != real_row.size())
        throw std::invalid_argument("apply_mask: dimension mismatch");
    Vector out = fake.cwiseProduct(real_row);
    for (Index j : pm_indices) out[j] = fake[j];
    return out;
}

namespace detail {
constexpr double kProbEps = 1e-7;
inline double clamp_prob(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }
}  // namespace detail

// Mean over the batch of -log D(real) - log(1 - D(fake)).
inline double discriminator_loss(const Vector& d_real, const Vector& d_fake) {
    if (d_real.size() != d_fake.size())
        throw std::invalid_argument("discriminator_loss: batch size mismatch");
    double sum = 0;
    for (Eigen::Index i = 0; i < d_real.size(); ++i)
        sum += -std::log(detail::clamp_prob(d_real[i])) -
               std::log(1.0 - detail::clamp_prob(d_fake[i]));
    return sum / static_cast<double>(d_real.size());
}

// Mean over the batch of -log D(fake) + alpha * sum_{j in zr} fake_j^2.
// zr_indices holds one index set per batch row; empty for the PM variant.
inline double generator_loss(const Vector& d_fake, const Matrix& fake,
                             const std::vector<std::vector<Index>>& zr_indices, double alpha) {
    const auto batch = d_fake.size();
    if (!zr_indices.empty() && static_cast<Eigen::Index>(zr_indices.size()) != batch)
        throw std::invalid_argument("generator_loss: zr index sets do not match batch");
    double sum = 0;
    for (Eigen::Index b = 0; b < batch; ++b) {
        sum += -std::log(detail::clamp_prob(d_fake[b]));
        if (!zr_indices.empty())
            for (Index j : zr_indices[static_cast<std::size_t>(b)])
                sum += alpha * fake(b, j) * fake(b, j);
    }
    return sum / static_cast<double>(batch);
}

struct EpochRecord {
    int epoch = 0;
    double discriminator_loss = 0;
    double generator_loss = 0;
    std::optional<double> validation_ndcg;
};

struct TrainResult {
    Mlp generator;
    std::vector<EpochRecord> history;
    int trained_epochs = 0;
    int best_epoch = 0;  // epoch whose parameters are returned (stopper runs only)
    double best_validation = 0;
};

struct TrainOptions {
    const EarlyStopping* stopper_template = nullptr;  // copied per run; null = no early stopping
    int override_epochs = 0;  // > 0 trains exactly this many epochs (no stopper)
};

namespace detail {

struct OrientedData {
    InteractionMatrix rows;       // matrix whose rows the generator learns
    const InteractionMatrix* user_train = nullptr;   // original orientation, for evaluation
    const InteractionMatrix* validation = nullptr;
    int input_neurons = 0;  // profile length = rows.num_cols()
};

inline Matrix batch_real(const InteractionMatrix& m, std::span<const Index> rows) {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), m.num_cols());
    for (std::size_t b = 0; b < rows.size(); ++b)
        for (Index c : m.row(rows[b])) out(static_cast<Eigen::Index>(b), c) = 1.0;
    return out;
}

inline Matrix batch_condition(const CfganConfig& config, const InteractionMatrix& m,
                              std::span<const Index> rows, const Matrix& real) {
    if (config.condition_kind == ConditionKind::real_profile) return real;
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), m.num_rows());
    for (std::size_t b = 0; b < rows.size(); ++b) out(static_cast<Eigen::Index>(b), rows[b]) = 1.0;
    return out;
}

inline Matrix batch_noise(const NoiseSpec& spec, Eigen::Index batch, Rng& rng) {
    Matrix z(batch, spec.size);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index b = 0; b < batch; ++b)
        for (int j = 0; j < spec.size; ++j) z(b, j) = normal(rng);
    return z;
}

inline Matrix hconcat(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

// Full generator output for every oriented row, with fresh noise per row.
inline Matrix generate_all(const Mlp& generator, const CfganConfig& config,
                           const InteractionMatrix& oriented, const NoiseSpec& noise, Rng& rng) {
    std::vector<Index> all(static_cast<std::size_t>(oriented.num_rows()));
    std::iota(all.begin(), all.end(), 0);
    const Matrix real = batch_real(oriented, all);
    const Matrix cond = batch_condition(config, oriented, all, real);
    const Matrix z = batch_noise(noise, oriented.num_rows(), rng);
    return generator.forward(hconcat(z, cond));
}

// NDCG@10 of the generator against a holdout, in user orientation.
inline double validation_ndcg10(const Mlp& generator, const CfganConfig& config,
                                const OrientedData& data, Rng& rng, const NoiseSpec& noise) {
    Matrix scores = generate_all(generator, config, data.rows, noise, rng);
    if (config.mode == Mode::item_based) scores = scores.transpose().eval();
    const auto& train = *data.user_train;
    const auto& holdout = *data.validation;

    double ndcg_sum = 0;
    std::size_t evaluated = 0;
    std::vector<double> row(static_cast<std::size_t>(scores.cols()));
    for (Index u = 0; u < holdout.num_rows(); ++u) {
        const auto rel = holdout.row(u);
        if (rel.empty()) continue;
        for (Eigen::Index j = 0; j < scores.cols(); ++j) row[static_cast<std::size_t>(j)] = scores(u, j);
        const RankedList list = rank_top_n(u, row, train.row(u), 10);
        double dcg = 0;
        for (std::size_t k = 0; k < list.items.size(); ++k)
            if (std::binary_search(rel.begin(), rel.end(), list.items[k]))
                dcg += 1.0 / std::log2(static_cast<double>(k + 2));
        double idcg = 0;
        const auto ideal = std::min<std::size_t>(rel.size(), 10);
        for (std::size_t k = 0; k < ideal; ++k) idcg += 1.0 / std::log2(static_cast<double>(k + 2));
        ndcg_sum += dcg / idcg;
        ++evaluated;
    }
    return evaluated ? ndcg_sum / static_cast<double>(evaluated) : 0.0;
}

}  // namespace detail

// Adversarial training: every epoch runs `steps` full discriminator passes
// then `steps` generator passes over shuffled mini-batches. With a stopper,
// the parameters from the best validation evaluation are returned.
inline TrainResult train_cfgan(const CfganConfig& config, const DatasetSplit& split,
                               const TrainOptions& options, std::uint64_t seed) {
    config.validate();
    if (options.stopper_template && !split.validation.has_value())
        throw std::invalid_argument("train_cfgan: early stopping needs a validation split");

    detail::OrientedData data;
    data.rows = (config.mode == Mode::user_based) ? split.train : transpose(split.train);
    data.user_train = &split.train;
    data.validation = split.validation ? &*split.validation : nullptr;
    data.input_neurons = data.rows.num_cols();

    const NoiseSpec noise = make_noise_spec(config, data.input_neurons);
    const int condition_len = (config.condition_kind == ConditionKind::real_profile)
                                  ? data.rows.num_cols()
                                  : data.rows.num_rows();

    Rng init_rng = make_rng(seed, 0x11);
    std::vector<int> g_dims{noise.size + condition_len};
    for (int l = 0; l < config.generator.hidden_layers; ++l)
        g_dims.push_back(config.generator.hidden_features);
    g_dims.push_back(data.rows.num_cols());
    Mlp generator = Mlp::create(g_dims, init_rng);

    std::vector<int> d_dims{data.rows.num_cols() + condition_len};
    for (int l = 0; l < config.discriminator.hidden_layers; ++l)
        d_dims.push_back(config.discriminator.hidden_features);
    d_dims.push_back(1);
    Mlp discriminator = Mlp::create(d_dims, init_rng);

    AdamState g_adam(generator), d_adam(discriminator);
    Rng train_rng = make_rng(seed, 0x22);

    const int n_rows = data.rows.num_rows();
    const int n_cols = data.rows.num_cols();
    std::vector<Index> order(static_cast<std::size_t>(n_rows));
    std::iota(order.begin(), order.end(), 0);

    const bool use_pm = config.variant == Variant::pm || config.variant == Variant::zp;
    const bool use_zr = config.variant == Variant::zr || config.variant == Variant::zp;

    std::optional<EarlyStopping> stopper;
    if (options.stopper_template) stopper = *options.stopper_template;
    const int epoch_limit = options.override_epochs > 0
                                ? options.override_epochs
                                : config.max_epochs;

    TrainResult result;
    Mlp best_generator = generator;
    int best_epoch = 0;
    double best_value = -std::numeric_limits<double>::infinity();

    for (int epoch = 1; epoch <= epoch_limit; ++epoch) {
        double d_loss_sum = 0, g_loss_sum = 0;
        std::size_t d_batches = 0, g_batches = 0;

        for (int step = 0; step < config.discriminator.steps; ++step) {
            std::shuffle(order.begin(), order.end(), train_rng);
            for (std::size_t start = 0; start < order.size();
                 start += static_cast<std::size_t>(config.discriminator.batch_size)) {
                const auto end = std::min(order.size(),
                                          start + static_cast<std::size_t>(config.discriminator.batch_size));
                const std::span<const Index> rows(order.data() + start, end - start);
                const auto batch = static_cast<Eigen::Index>(rows.size());

                const Matrix real = detail::batch_real(data.rows, rows);
                const Matrix cond = detail::batch_condition(config, data.rows, rows, real);
                const Matrix z = detail::batch_noise(noise, batch, train_rng);
                const Matrix fake = generator.forward(detail::hconcat(z, cond));

                Matrix mask = real;
                if (use_pm)
                    for (Eigen::Index b = 0; b < batch; ++b)
                        for (Index j : sample_zero_indices(data.rows.row(rows[static_cast<std::size_t>(b)]),
                                                           n_cols, config.pm_ratio, train_rng))
                            mask(b, j) = 1.0;
                const Matrix masked = fake.cwiseProduct(mask);

                std::vector<Matrix> real_acts, fake_acts;
                const Matrix d_real = discriminator.forward(detail::hconcat(real, cond), &real_acts);
                const Matrix d_fake = discriminator.forward(detail::hconcat(masked, cond), &fake_acts);

                d_loss_sum += discriminator_loss(d_real.col(0), d_fake.col(0));
                ++d_batches;

                const double inv_batch = 1.0 / static_cast<double>(batch);
                Matrix grad_real(batch, 1), grad_fake(batch, 1);
                for (Eigen::Index b = 0; b < batch; ++b) {
                    grad_real(b, 0) = -inv_batch / detail::clamp_prob(d_real(b, 0));
                    grad_fake(b, 0) = inv_batch / (1.0 - detail::clamp_prob(d_fake(b, 0)));
                }
                MlpGradients d_grads = MlpGradients::zeros_like(discriminator);
                mlp_backward(discriminator, real_acts, grad_real, &d_grads);
                mlp_backward(discriminator, fake_acts, grad_fake, &d_grads);
                d_adam.step(discriminator, d_grads, config.discriminator.learning_rate,
                            config.discriminator.l2);
            }
        }

        for (int step = 0; step < config.generator.steps; ++step) {
            std::shuffle(order.begin(), order.end(), train_rng);
            for (std::size_t start = 0; start < order.size();
                 start += static_cast<std::size_t>(config.generator.batch_size)) {
                const auto end = std::min(order.size(),
                                          start + static_cast<std::size_t>(config.generator.batch_size));
                const std::span<const Index> rows(order.data() + start, end - start);
                const auto batch = static_cast<Eigen::Index>(rows.size());

                const Matrix real = detail::batch_real(data.rows, rows);
                const Matrix cond = detail::batch_condition(config, data.rows, rows, real);
                const Matrix z = detail::batch_noise(noise, batch, train_rng);

                std::vector<Matrix> g_acts;
                const Matrix fake = generator.forward(detail::hconcat(z, cond), &g_acts);

                Matrix mask = real;
                if (use_pm)
                    for (Eigen::Index b = 0; b < batch; ++b)
                        for (Index j : sample_zero_indices(data.rows.row(rows[static_cast<std::size_t>(b)]),
                                                           n_cols, config.pm_ratio, train_rng))
                            mask(b, j) = 1.0;

                std::vector<std::vector<Index>> zr_sets;
                if (use_zr) {
                    zr_sets.resize(static_cast<std::size_t>(batch));
                    for (Eigen::Index b = 0; b < batch; ++b)
                        zr_sets[static_cast<std::size_t>(b)] =
                            sample_zero_indices(data.rows.row(rows[static_cast<std::size_t>(b)]), n_cols,
                                                config.zr_ratio, train_rng);
                }

                const Matrix masked = fake.cwiseProduct(mask);
                std::vector<Matrix> d_acts;
                const Matrix d_fake = discriminator.forward(detail::hconcat(masked, cond), &d_acts);

                g_loss_sum += generator_loss(d_fake.col(0), fake, zr_sets, config.zr_coefficient);
                ++g_batches;

                const double inv_batch = 1.0 / static_cast<double>(batch);
                Matrix grad_d_out(batch, 1);
                for (Eigen::Index b = 0; b < batch; ++b)
                    grad_d_out(b, 0) = -inv_batch / detail::clamp_prob(d_fake(b, 0));

                const Matrix d_input_grad = mlp_backward(discriminator, d_acts, grad_d_out, nullptr);
                Matrix grad_fake = d_input_grad.leftCols(n_cols).cwiseProduct(mask);
                if (use_zr)
                    for (Eigen::Index b = 0; b < batch; ++b)
                        for (Index j : zr_sets[static_cast<std::size_t>(b)])
                            grad_fake(b, j) += 2.0 * config.zr_coefficient * fake(b, j) * inv_batch;

                MlpGradients g_grads = MlpGradients::zeros_like(generator);
                mlp_backward(generator, g_acts, grad_fake, &g_grads);
                g_adam.step(generator, g_grads, config.generator.learning_rate, config.generator.l2);
            }
        }

        EpochRecord record;
        record.epoch = epoch;
        record.discriminator_loss = d_batches ? d_loss_sum / static_cast<double>(d_batches) : 0.0;
        record.generator_loss = g_batches ? g_loss_sum / static_cast<double>(g_batches) : 0.0;
        if (!std::isfinite(record.discriminator_loss) || !std::isfinite(record.generator_loss))
            throw std::runtime_error("cfgan training diverged at epoch " + std::to_string(epoch));

        if (stopper && stopper->is_eval_epoch(epoch)) {
            Rng eval_rng = make_rng(seed, 0x33000 + static_cast<std::uint64_t>(epoch));
            const double value = detail::validation_ndcg10(generator, config, data, eval_rng, noise);
            record.validation_ndcg = value;
            if (value > best_value) {
                best_value = value;
                best_epoch = epoch;
                best_generator = generator;
            }
            result.history.push_back(record);
            if (stopper->step(epoch, value) == EarlyStopping::Verdict::stop) {
                result.trained_epochs = epoch;
                break;
            }
            result.trained_epochs = epoch;
            continue;
        }
        result.history.push_back(record);
        result.trained_epochs = epoch;
    }

    if (stopper && best_epoch > 0) {
        result.generator = std::move(best_generator);
        result.best_epoch = best_epoch;
        result.best_validation = best_value;
    } else {
        result.generator = std::move(generator);
        result.best_epoch = result.trained_epochs;
        result.best_validation = std::isfinite(best_value) ? best_value : 0.0;
    }
    return result;
}

// Single-row recommendation in the trained orientation: fresh noise when
// enabled, rows with real_row_j = 1 excluded, ties broken by ascending index.
inline RankedList recommend(const Mlp& generator, const CfganConfig& config, Index row,
                            Index num_rows, const std::vector<double>& real_row, int n, Rng& rng) {
    const auto profile_len = static_cast<int>(real_row.size());
    const NoiseSpec noise = make_noise_spec(config, profile_len);
    const Vector z = sample_noise(noise, rng);
    const Vector c = build_condition(config, row, num_rows, real_row);

    Matrix input(1, z.size() + c.size());
    input << z.transpose(), c.transpose();
    const Matrix scores = generator.forward(input);

    std::vector<Index> seen;
    for (std::size_t j = 0; j < real_row.size(); ++j)
        if (real_row[j] != 0.0) seen.push_back(static_cast<Index>(j));
    std::vector<double> score_vec(static_cast<std::size_t>(scores.cols()));
    for (Eigen::Index j = 0; j < scores.cols(); ++j) score_vec[static_cast<std::size_t>(j)] = scores(0, j);
    return rank_top_n(row, score_vec, seen, n);
}

// User-facing scorer: always yields scores over items per user, regardless of
// mode. Item-based mode generates the full item-profile matrix and transposes.
class CfganRanker {
public:
    CfganRanker(const Mlp& generator, const CfganConfig& config, const InteractionMatrix& user_train,
                std::uint64_t noise_seed)
        : config_(config), user_train_(&user_train) {
        const InteractionMatrix oriented =
            (config.mode == Mode::user_based) ? user_train : transpose(user_train);
        const NoiseSpec noise = make_noise_spec(config_, oriented.num_cols());
        Rng rng = make_rng(noise_seed, 0x44);
        scores_ = detail::generate_all(generator, config_, oriented, noise, rng);
        if (config.mode == Mode::item_based) scores_ = scores_.transpose().eval();
    }

    RankedList operator()(Index user, int n) const {
        std::vector<double> row(static_cast<std::size_t>(scores_.cols()));
        for (Eigen::Index j = 0; j < scores_.cols(); ++j) row[static_cast<std::size_t>(j)] = scores_(user, j);
        return rank_top_n(user, row, user_train_->row(user), n);
    }

private:
    CfganConfig config_;
    const InteractionMatrix* user_train_;
    Matrix scores_;
};

}  // namespace cfrec
