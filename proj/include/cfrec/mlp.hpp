#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfrec/rng.hpp"

namespace cfrec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix sigmoid(const Matrix& z) {
    return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

// Fully connected feed-forward network with sigmoid on every layer,
// including the output. Batches are row-major: one sample per row.
class Mlp {
public:
    struct Layer {
        Matrix weight;  // out x in
        Vector bias;    // out
    };

    Mlp() = default;

    // dims = {input, hidden..., output}; weights uniform in
    // +-sqrt(6 / (fan_in + fan_out)), biases zero.
    static Mlp create(const std::vector<int>& dims, Rng& rng) {
        if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least input and output dims");
        Mlp net;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            const int fan_in = dims[l];
            const int fan_out = dims[l + 1];
            const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            std::uniform_real_distribution<double> dist(-bound, bound);
            Layer layer;
            layer.weight = Matrix::NullaryExpr(fan_out, fan_in, [&]() { return dist(rng); });
            layer.bias = Vector::Zero(fan_out);
            net.layers_.push_back(std::move(layer));
        }
        return net;
    }

    int input_size() const { return static_cast<int>(layers_.front().weight.cols()); }
    int output_size() const { return static_cast<int>(layers_.back().weight.rows()); }
    std::size_t layer_count() const { return layers_.size(); }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    // activations, when provided, receives {input, a_1, ..., a_L}.
    Matrix forward(const Matrix& input, std::vector<Matrix>* activations = nullptr) const {
        if (input.cols() != input_size())
            throw std::invalid_argument("Mlp::forward: input width " + std::to_string(input.cols()) +
                                        " != expected " + std::to_string(input_size()));
        if (activations) {
            activations->clear();
            activations->push_back(input);
        }
        Matrix a = input;
        for (const auto& layer : layers_) {
            Matrix z = a * layer.weight.transpose();
            z.rowwise() += layer.bias.transpose();
            a = sigmoid(z);
            if (activations) activations->push_back(a);
        }
        return a;
    }

private:
    std::vector<Layer> layers_;
};

struct MlpGradients {
    std::vector<Mlp::Layer> layers;

    static MlpGradients zeros_like(const Mlp& net) {
        MlpGradients g;
        for (const auto& layer : net.layers())
            g.layers.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                                Vector::Zero(layer.bias.size())});
        return g;
    }
};

// Backpropagates grad_output (batch x out, d loss / d final activation)
// through the cached forward pass. Returns the gradient with respect to the
// network input; fills `grads` when non-null.
inline Matrix mlp_backward(const Mlp& net, const std::vector<Matrix>& activations,
                           const Matrix& grad_output, MlpGradients* grads) {
    const auto& layers = net.layers();
    if (activations.size() != layers.size() + 1)
        throw std::invalid_argument("mlp_backward: activation cache size mismatch");

    Matrix delta = grad_output;
    for (std::size_t l = layers.size(); l-- > 0;) {
        const Matrix& a_out = activations[l + 1];
        delta = delta.cwiseProduct(a_out.unaryExpr([](double a) { return a * (1.0 - a); }));
        if (grads) {
            grads->layers[l].weight += delta.transpose() * activations[l];
            grads->layers[l].bias += delta.colwise().sum().transpose();
        }
        Matrix next = delta * layers[l].weight;
        delta = std::move(next);
    }
    return delta;  // batch x input
}

// ADAM with bias correction (beta1 = 0.9, beta2 = 0.999, eps = 1e-8).
class AdamState {
public:
    AdamState() = default;
    explicit AdamState(const Mlp& net) {
        for (const auto& layer : net.layers()) {
            m_.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                          Vector::Zero(layer.bias.size())});
            v_.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                          Vector::Zero(layer.bias.size())});
        }
    }

    long step_count() const { return t_; }

    // Applies one update from `grads` plus l2 * theta weight decay.
    void step(Mlp& net, const MlpGradients& grads, double learning_rate, double l2) {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t l = 0; l < net.layers().size(); ++l) {
            auto& layer = net.layers()[l];
            const Matrix gw = grads.layers[l].weight + l2 * layer.weight;
            const Vector gb = grads.layers[l].bias + l2 * layer.bias;
            if (!gw.allFinite() || !gb.allFinite())
                throw std::runtime_error("non-finite gradient at layer " + std::to_string(l));

            m_[l].weight = beta1_ * m_[l].weight + (1.0 - beta1_) * gw;
            m_[l].bias = beta1_ * m_[l].bias + (1.0 - beta1_) * gb;
            v_[l].weight = beta2_ * v_[l].weight + (1.0 - beta2_) * gw.cwiseProduct(gw);
            v_[l].bias = beta2_ * v_[l].bias + (1.0 - beta2_) * gb.cwiseProduct(gb);

            const Matrix mw_hat = m_[l].weight / bc1;
            const Vector mb_hat = m_[l].bias / bc1;
            const Matrix vw_hat = v_[l].weight / bc2;
            const Vector vb_hat = v_[l].bias / bc2;

            layer.weight -= learning_rate *
                            mw_hat.cwiseQuotient(vw_hat.cwiseSqrt() + Matrix::Constant(vw_hat.rows(), vw_hat.cols(), eps_));
            layer.bias -= learning_rate *
                          mb_hat.cwiseQuotient(vb_hat.cwiseSqrt() + Vector::Constant(vb_hat.size(), eps_));
        }
    }

private:
    std::vector<Mlp::Layer> m_, v_;
    long t_ = 0;
    static constexpr double beta1_ = 0.9;
    static constexpr double beta2_ = 0.999;
    static constexpr double eps_ = 1e-8;
};

}  // namespace cfrec
