#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "affect/common.hpp"

namespace affect {

enum class Topology { linear, mlp };
enum class Activation { identity, tanh, softmax, sigmoid };

inline std::string_view to_string(Topology t) { return t == Topology::linear ? "linear" : "mlp"; }

inline std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::tanh: return "tanh";
        case Activation::softmax: return "softmax";
        case Activation::sigmoid: return "sigmoid";
    }
    return "?";
}

inline Topology parse_topology(std::string_view s) {
    if (s == "linear") return Topology::linear;
    if (s == "mlp") return Topology::mlp;
    throw ConfigError("unknown topology '" + std::string(s) + "'");
}

inline Activation parse_activation(std::string_view s) {
    if (s == "identity") return Activation::identity;
    if (s == "tanh") return Activation::tanh;
    if (s == "softmax") return Activation::softmax;
    if (s == "sigmoid") return Activation::sigmoid;
    throw ConfigError("unknown activation '" + std::string(s) + "'");
}

/// Row-wise output nonlinearity. Softmax subtracts the row maximum first.
template <typename Scalar>
Matrix<Scalar> activate(const Matrix<Scalar>& z, Activation act) {
    switch (act) {
        case Activation::identity: return z;
        case Activation::tanh: return z.array().tanh().matrix();
        case Activation::sigmoid: return (Scalar(1) / (Scalar(1) + (-z.array()).exp())).matrix();
        case Activation::softmax: {
            Matrix<Scalar> e = (z.colwise() - z.rowwise().maxCoeff()).array().exp().matrix();
            return (e.array().colwise() / e.rowwise().sum().array()).matrix();
        }
    }
    return z;
}

/// Gradient w.r.t. pre-activations given the activated output and dL/d(output).
template <typename Scalar>
Matrix<Scalar> activation_backward(const Matrix<Scalar>& out, const Matrix<Scalar>& d_out, Activation act) {
    switch (act) {
        case Activation::identity: return d_out;
        case Activation::tanh: return (d_out.array() * (Scalar(1) - out.array().square())).matrix();
        case Activation::sigmoid: return (d_out.array() * out.array() * (Scalar(1) - out.array())).matrix();
        case Activation::softmax: {
            const Vector<Scalar> dot = (d_out.array() * out.array()).rowwise().sum();
            return (out.array() * (d_out.colwise() - dot).array()).matrix();
        }
    }
    return d_out;
}

/// A linear or one-hidden-layer (ReLU) prediction head.
///
/// Parameters are kept as a flat list so the optimizer and the gradient
/// checker can walk them uniformly:
///   linear: { W (C x D), b (C x 1) }
///   mlp:    { W1 (H x D), b1 (H x 1), W2 (C x H), b2 (C x 1) }
/// Inputs are batches with one sample per row.
template <typename Scalar>
class Head {
public:
    using Params = std::vector<Matrix<Scalar>>;

    struct Trace {
        Matrix<Scalar> input;
        Matrix<Scalar> hidden;  // post-ReLU, mlp only
        Matrix<Scalar> output;  // post-activation
    };

    Head() = default;

    Head(Topology topology, Index input_dim, Index output_dim, Activation activation, Index hidden_units = 128)
        : topology_(topology),
          activation_(activation),
          input_dim_(input_dim),
          output_dim_(output_dim),
          hidden_units_(topology == Topology::mlp ? hidden_units : 0) {
        if (input_dim < 1 || output_dim < 1) throw ConfigError("head dimensions must be positive");
        if (topology == Topology::mlp && hidden_units < 1) throw ConfigError("hidden_units must be positive");
        if (topology == Topology::linear) {
            params_ = {Matrix<Scalar>::Zero(output_dim, input_dim), Matrix<Scalar>::Zero(output_dim, 1)};
        } else {
            params_ = {Matrix<Scalar>::Zero(hidden_units, input_dim), Matrix<Scalar>::Zero(hidden_units, 1),
                       Matrix<Scalar>::Zero(output_dim, hidden_units), Matrix<Scalar>::Zero(output_dim, 1)};
        }
    }

    /// Uniform weights in [-s, s], s = sqrt(6 / (fan_in + fan_out)); zero biases.
    void initialize(std::mt19937_64& rng) {
        for (std::size_t i = 0; i < params_.size(); i += 2) {
            auto& w = params_[i];
            const double s = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
            for (Index c = 0; c < w.cols(); ++c)
                for (Index r = 0; r < w.rows(); ++r) w(r, c) = static_cast<Scalar>((2.0 * uniform01(rng) - 1.0) * s);
            params_[i + 1].setZero();
        }
    }

    Topology topology() const { return topology_; }
    Activation activation() const { return activation_; }
    Index input_dim() const { return input_dim_; }
    Index output_dim() const { return output_dim_; }
    Index hidden_units() const { return hidden_units_; }

    Params& parameters() { return params_; }
    const Params& parameters() const { return params_; }

    Index parameter_count() const {
        Index n = 0;
        for (const auto& p : params_) n += p.size();
        return n;
    }

    /// Pre-activation outputs (logits).
    Matrix<Scalar> logits(const Matrix<Scalar>& x) const { return logits(x, nullptr); }

    Matrix<Scalar> forward(const Matrix<Scalar>& x, Trace* trace = nullptr) const {
        Matrix<Scalar> out = activate(logits(x, trace), activation_);
        if (trace) trace->output = out;
        return out;
    }

    Vector<Scalar> forward(const Vector<Scalar>& x) const {
        return forward(Matrix<Scalar>(x.transpose())).row(0).transpose();
    }

    /// Parameter gradients given dL/d(output) for the traced batch.
    Params backward(const Trace& trace, const Matrix<Scalar>& d_output) const {
        const Matrix<Scalar> dz = activation_backward(trace.output, d_output, activation_);
        if (topology_ == Topology::linear) {
            return {dz.transpose() * trace.input, dz.colwise().sum().transpose()};
        }
        Matrix<Scalar> dh = dz * params_[2];
        dh = (trace.hidden.array() > Scalar(0)).select(dh, Scalar(0));
        return {dh.transpose() * trace.input, dh.colwise().sum().transpose(), dz.transpose() * trace.hidden,
                dz.colwise().sum().transpose()};
    }

private:
    Matrix<Scalar> logits(const Matrix<Scalar>& x, Trace* trace) const {
        if (x.cols() != input_dim_)
            throw DataError("head expects input dim " + std::to_string(input_dim_) + ", got " + std::to_string(x.cols()));
        if (trace) trace->input = x;
        if (topology_ == Topology::linear) {
            return (x * params_[0].transpose()).rowwise() + params_[1].col(0).transpose();
        }
        Matrix<Scalar> h = ((x * params_[0].transpose()).rowwise() + params_[1].col(0).transpose()).cwiseMax(Scalar(0));
        Matrix<Scalar> z = (h * params_[2].transpose()).rowwise() + params_[3].col(0).transpose();
        if (trace) trace->hidden = std::move(h);
        return z;
    }

    Topology topology_ = Topology::linear;
    Activation activation_ = Activation::identity;
    Index input_dim_ = 0;
    Index output_dim_ = 0;
    Index hidden_units_ = 0;
    Params params_;
};

/// Single-sample forward pass.
template <typename Scalar>
Vector<Scalar> forward(const Head<Scalar>& head, const Vector<Scalar>& x) {
    return head.forward(x);
}

template <typename Scalar>
Matrix<Scalar> forward(const Head<Scalar>& head, const Matrix<Scalar>& x) {
    return head.forward(x);
}

}  // namespace affect
