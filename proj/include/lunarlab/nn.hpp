#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lunarlab/env.hpp"
#include "lunarlab/random.hpp"

namespace lunarlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// weight is (out x in); the layer computes weight * x + bias.
struct DenseLayer {
    Matrix weight;
    Vector bias;
};

inline constexpr std::array<int, 5> kDefaultArchitecture{8, 256, 128, 64, 4};

/// Fully connected network: ReLU after every hidden layer, linear output.
class ValueNetwork {
public:
    ValueNetwork() = default;

    /// Zero-initialised network with the given layer widths.
    explicit ValueNetwork(std::span<const int> sizes) {
        if (sizes.size() < 2) throw std::invalid_argument("network needs at least input and output widths");
        for (int s : sizes)
            if (s < 1) throw std::invalid_argument("layer widths must be positive");
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
            layers_.push_back({Matrix::Zero(sizes[l + 1], sizes[l]), Vector::Zero(sizes[l + 1])});
    }

    /// Weights and biases uniform in +-1/sqrt(fan_in).
    static ValueNetwork random(std::span<const int> sizes, Rng& rng) {
        ValueNetwork net(sizes);
        for (auto& layer : net.layers_) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
            for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = uniform(rng, -bound, bound);
            for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = uniform(rng, -bound, bound);
        }
        return net;
    }

    std::vector<int> architecture() const {
        std::vector<int> sizes;
        if (layers_.empty()) return sizes;
        sizes.push_back(static_cast<int>(layers_.front().weight.cols()));
        for (const auto& l : layers_) sizes.push_back(static_cast<int>(l.weight.rows()));
        return sizes;
    }

    int input_size() const { return static_cast<int>(layers_.front().weight.cols()); }
    int output_size() const { return static_cast<int>(layers_.back().weight.rows()); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
        return n;
    }

    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    bool same_shape(const ValueNetwork& other) const { return architecture() == other.architecture(); }

    bool finite() const {
        for (const auto& l : layers_)
            if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
        return true;
    }

    Vector forward(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != input_size())
            throw std::invalid_argument("forward: expected " + std::to_string(input_size()) + " inputs");
        Matrix in = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
        if (!in.allFinite()) throw std::invalid_argument("forward: non-finite input");
        return forward_batch(in).col(0);
    }

    /// Column-per-sample evaluation; inputs is (input_size x n).
    Matrix forward_batch(const Matrix& inputs) const {
        Matrix a = inputs;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            Matrix z = layers_[l].weight * a;
            z.colwise() += layers_[l].bias;
            a = (l + 1 < layers_.size()) ? Matrix(z.cwiseMax(0.0)) : std::move(z);
        }
        return a;
    }

    friend bool operator==(const ValueNetwork& a, const ValueNetwork& b) {
        if (a.layers_.size() != b.layers_.size()) return false;
        for (std::size_t l = 0; l < a.layers_.size(); ++l) {
            const auto& x = a.layers_[l];
            const auto& y = b.layers_[l];
            if (x.weight.rows() != y.weight.rows() || x.weight.cols() != y.weight.cols()) return false;
            if (x.weight != y.weight || x.bias != y.bias) return false;
        }
        return true;
    }

private:
    std::vector<DenseLayer> layers_;
};

/// Gradients share the layer layout of the network they came from.
using Gradients = std::vector<DenseLayer>;

inline Gradients zero_like(const ValueNetwork& net) {
    Gradients g;
    for (const auto& l : net.layers()) g.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    return g;
}

/// Regression batch: inputs (input_size x n), the action whose output is
/// regressed for each column, and the targets.
struct Batch {
    Matrix inputs;
    std::vector<int> actions;
    Vector targets;

    std::size_t size() const { return actions.size(); }
};

struct LossAndGradients {
    double loss = 0.0;
    Gradients grads;
};

/// Mean squared error between targets and the chosen action's output, with
/// gradients for every parameter. Only the chosen output carries error.
inline LossAndGradients loss_and_gradients(const ValueNetwork& net, const Batch& batch) {
    const auto n = static_cast<Eigen::Index>(batch.size());
    if (n == 0) throw std::invalid_argument("loss_and_gradients: empty batch");
    if (batch.inputs.cols() != n || batch.targets.size() != n || batch.inputs.rows() != net.input_size())
        throw std::invalid_argument("loss_and_gradients: inconsistent batch shapes");
    if (!batch.targets.allFinite()) throw std::invalid_argument("loss_and_gradients: non-finite target");
    if (!batch.inputs.allFinite()) throw std::invalid_argument("loss_and_gradients: non-finite input");

    const auto& layers = net.layers();
    const std::size_t depth = layers.size();
    // activations[0] = inputs, activations[l+1] = output of layer l.
    std::vector<Matrix> activations;
    activations.reserve(depth + 1);
    activations.push_back(batch.inputs);
    for (std::size_t l = 0; l < depth; ++l) {
        Matrix z = layers[l].weight * activations.back();
        z.colwise() += layers[l].bias;
        if (l + 1 < depth) z = z.cwiseMax(0.0);
        activations.push_back(std::move(z));
    }

    const Matrix& out = activations.back();
    Matrix delta = Matrix::Zero(out.rows(), n);
    double loss = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const int a = batch.actions[static_cast<std::size_t>(j)];
        if (a < 0 || a >= out.rows()) throw std::invalid_argument("loss_and_gradients: action out of range");
        const double err = out(a, j) - batch.targets[j];
        loss += err * err;
        delta(a, j) = 2.0 * err / static_cast<double>(n);
    }
    loss /= static_cast<double>(n);

    Gradients grads(depth);
    for (std::size_t l = depth; l-- > 0;) {
        grads[l].weight.noalias() = delta * activations[l].transpose();
        grads[l].bias = delta.rowwise().sum();
        if (l > 0) {
            Matrix back = layers[l].weight.transpose() * delta;
            delta = back.cwiseProduct((activations[l].array() > 0.0).cast<double>().matrix());
        }
    }
    return {loss, std::move(grads)};
}

struct AdamConfig {
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// First/second moment accumulators and step count.
struct AdamState {
    AdamConfig config;
    Gradients m;
    Gradients v;
    std::int64_t step = 0;

    AdamState() = default;
    AdamState(const ValueNetwork& net, AdamConfig cfg) : config(cfg), m(zero_like(net)), v(zero_like(net)) {}
};

inline void check_same_layout(const std::vector<DenseLayer>& a, const std::vector<DenseLayer>& b, const char* what) {
    bool ok = a.size() == b.size();
    for (std::size_t l = 0; ok && l < a.size(); ++l)
        ok = a[l].weight.rows() == b[l].weight.rows() && a[l].weight.cols() == b[l].weight.cols() &&
             a[l].bias.size() == b[l].bias.size();
    if (!ok) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

/// Bias-corrected Adam update of every parameter.
inline void adam_step(ValueNetwork& net, const Gradients& grads, AdamState& state) {
    check_same_layout(net.layers(), grads, "adam_step");
    check_same_layout(net.layers(), state.m, "adam_step");
    check_same_layout(net.layers(), state.v, "adam_step");
    const AdamConfig& c = state.config;
    ++state.step;
    const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    const double step_size = c.learning_rate / correction1;
    const double root2 = std::sqrt(correction2);

    auto apply = [&](auto& param, const auto& g, auto& m, auto& v) {
        m = c.beta1 * m + (1.0 - c.beta1) * g;
        v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
        param.array() -= step_size * m.array() / (v.array().sqrt() / root2 + c.epsilon);
    };
    for (std::size_t l = 0; l < grads.size(); ++l) {
        apply(net.layers()[l].weight, grads[l].weight, state.m[l].weight, state.v[l].weight);
        apply(net.layers()[l].bias, grads[l].bias, state.m[l].bias, state.v[l].bias);
    }
}

/// Polyak averaging: target <- tau * source + (1 - tau) * target.
inline void soft_update(const ValueNetwork& source, ValueNetwork& target, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau must be in [0, 1]");
    if (!source.same_shape(target)) throw std::invalid_argument("soft_update: architecture mismatch");
    for (std::size_t l = 0; l < source.layers().size(); ++l) {
        auto& t = target.layers()[l];
        const auto& s = source.layers()[l];
        t.weight = tau * s.weight + (1.0 - tau) * t.weight;
        t.bias = tau * s.bias + (1.0 - tau) * t.bias;
    }
}

}  // namespace lunarlab
