#pragma once

#include <cmath>
#include <vector>

#include "affect/common.hpp"

namespace affect {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
    std::vector<Matrix<Scalar>> first_moment;
    std::vector<Matrix<Scalar>> second_moment;
    long step = 0;

    AdamState() = default;
    explicit AdamState(const std::vector<Matrix<Scalar>>& params) {
        for (const auto& p : params) {
            first_moment.push_back(Matrix<Scalar>::Zero(p.rows(), p.cols()));
            second_moment.push_back(Matrix<Scalar>::Zero(p.rows(), p.cols()));
        }
    }
};

/// One bias-corrected Adam update, in place.
template <typename Scalar>
void adam_step(std::vector<Matrix<Scalar>>& params, AdamState<Scalar>& state,
               const std::vector<Matrix<Scalar>>& grads, const AdamConfig& config) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size())
        throw DataError("adam_step: parameter/gradient count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].rows() != grads[i].rows() || params[i].cols() != grads[i].cols() ||
            state.first_moment[i].rows() != grads[i].rows() || state.first_moment[i].cols() != grads[i].cols())
            throw DataError("adam_step: shape mismatch in parameter " + std::to_string(i));
    }
    ++state.step;
    const Scalar b1(config.beta1), b2(config.beta2);
    const Scalar c1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(state.step));
    const Scalar c2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(state.step));
    const Scalar lr(config.learning_rate), eps(config.epsilon);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& m = state.first_moment[i];
        auto& v = state.second_moment[i];
        m = b1 * m + (Scalar(1) - b1) * grads[i];
        v = b2 * v + (Scalar(1) - b2) * grads[i].cwiseProduct(grads[i]);
        params[i].array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }
}

}  // namespace affect
