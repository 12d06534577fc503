#pragma once

#include <limits>

namespace cfrec {

// Periodic validation-based stopping: stop at max_epochs, or once min_epochs
// is reached and the best value has not improved for `patience` evaluations.
class EarlyStopping {
public:
    int min_epochs = 200;
    int max_epochs = 400;
    int eval_every = 5;
    int patience = 5;

    enum class Verdict { continue_training, stop };

    bool is_eval_epoch(int epoch) const { return epoch % eval_every == 0 || epoch >= max_epochs; }

    Verdict step(int epoch, double value) {
        ++evaluations_;
        if (value > best_value_) {
            best_value_ = value;
            best_epoch_ = epoch;
            evals_since_best_ = 0;
        } else {
            ++evals_since_best_;
        }
        if (epoch >= max_epochs) return Verdict::stop;
        if (epoch >= min_epochs && evals_since_best_ >= patience) return Verdict::stop;
        return Verdict::continue_training;
    }

    double best_value() const { return best_value_; }
    int best_epoch() const { return best_epoch_; }
    int evaluations() const { return evaluations_; }

private:
    double best_value_ = -std::numeric_limits<double>::infinity();
    int best_epoch_ = 0;
    int evals_since_best_ = 0;
    int evaluations_ = 0;
};

}  // namespace cfrec
