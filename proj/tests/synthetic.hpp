#pragma once

// Synthetic training problems and gradient-check instances shared by the
// head tests and the acceptance runner.

#include <random>
#include <vector>

#include "affect/featurestore.hpp"
#include "affect/gradient_check.hpp"
#include "affect/train.hpp"

namespace synthetic {

using affect::Index;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Mat gaussian(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
    Mat m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m(i) = scale * affect::standard_normal(rng);
    return m;
}

struct GradientInstance {
    affect::OutputLoss<double> loss;
    affect::Head<double> head;
    Mat batch;
};

/// A random head, batch and loss closure for one loss/topology pair.
inline GradientInstance gradient_instance(affect::LossKind kind, affect::Topology topology, std::uint64_t seed) {
    using namespace affect;
    std::mt19937_64 rng(seed * 7919 + static_cast<std::uint64_t>(kind) * 31 + static_cast<std::uint64_t>(topology));
    const Index n = 12, d = 5, hidden = 6;
    const Mat batch = gaussian(rng, n, d);
    auto make_head = [&](Index out, Activation act) {
        Head<double> h(topology, d, out, act, hidden);
        h.initialize(rng);
        for (auto& p : h.parameters())
            for (Index i = 0; i < p.size(); ++i) p(i) += 0.1 * standard_normal(rng);
        return h;
    };

    switch (kind) {
        case LossKind::weighted_ce: {
            const int c = 3 + static_cast<int>(uniform_index(rng, 4));
            std::vector<int> labels(n);
            for (auto& y : labels) y = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(c)));
            Vec w(c);
            for (Index i = 0; i < c; ++i) w(i) = 0.5 + 2.0 * uniform01(rng);
            return {[labels, w](const Mat& out) { return weighted_ce_loss<double>(out, labels, w); },
                    make_head(c, Activation::softmax), batch};
        }
        case LossKind::weighted_bce: {
            const Index a = 4;
            Mat t(n, a);
            for (Index i = 0; i < t.size(); ++i) {
                const auto r = uniform_index(rng, 10);
                t(i) = r == 0 ? -1.0 : (r < 5 ? 1.0 : 0.0);
            }
            Vec w(a);
            for (Index i = 0; i < a; ++i) w(i) = 0.5 + 3.0 * uniform01(rng);
            return {[t, w](const Mat& out) { return weighted_bce_loss<double>(out, t, w); },
                    make_head(a, Activation::sigmoid), batch};
        }
        case LossKind::ccc_loss: {
            Mat t(n, 2);
            for (Index i = 0; i < t.size(); ++i) t(i) = 2.0 * uniform01(rng) - 1.0;
            t(0, 0) = kVaIgnore;
            t(3, 1) = kVaIgnore;
            return {[t](const Mat& out) { return ccc_batch_loss<double>(out, t); }, make_head(2, Activation::tanh),
                    batch};
        }
        case LossKind::weighted_pcc_loss: {
            Mat t(n, 6);
            for (Index i = 0; i < t.size(); ++i) t(i) = uniform01(rng);
            Vec w(6);
            for (Index i = 0; i < 6; ++i) w(i) = uniform01(rng) + 0.1;
            w /= w.sum();
            return {[t, w](const Mat& out) { return weighted_pcc_loss<double>(out, t, w); },
                    make_head(6, Activation::sigmoid), batch};
        }
        case LossKind::multitask_eq1: {
            std::vector<int> labels(n);
            for (auto& y : labels) y = static_cast<int>(uniform_index(rng, 8));
            Mat va(n, 2);
            for (Index i = 0; i < va.size(); ++i) va(i) = 2.0 * uniform01(rng) - 1.0;
            Vec counts(8);
            for (Index i = 0; i < 8; ++i) counts(i) = 1.0 + static_cast<double>(uniform_index(rng, 500));
            const ClassWeights w = class_weights(counts, WeightStyle::eq1_max_ratio);
            return {[labels, va, w](const Mat& out) { return multitask_eq1_loss<double>(out, labels, va, w); },
                    make_head(10, Activation::identity), batch};
        }
    }
    throw ConfigError("unknown loss");
}

struct Dataset {
    Mat x;
    Mat y;
    std::vector<int> labels;
};

/// Two Gaussian blobs at +-2.5 on the first axis with nothing inside |x0| < 1.
inline Dataset separable_blobs(Index n, Index d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Dataset out{Mat(n, d), Mat(n, 1), std::vector<int>(static_cast<std::size_t>(n))};
    for (Index i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        double x0;
        do {
            x0 = (label == 1 ? 2.5 : -2.5) + affect::standard_normal(rng);
        } while ((label == 1 && x0 < 1.0) || (label == 0 && x0 > -1.0));
        out.x(i, 0) = x0;
        for (Index j = 1; j < d; ++j) out.x(i, j) = affect::standard_normal(rng);
        out.y(i, 0) = label;
        out.labels[static_cast<std::size_t>(i)] = label;
    }
    return out;
}

/// Classic perceptron; true when it reaches zero training errors.
inline bool perceptron_separates(const Mat& x, const std::vector<int>& labels, int max_epochs = 1000) {
    Vec w = Vec::Zero(x.cols());
    double b = 0;
    for (int epoch = 0; epoch < max_epochs; ++epoch) {
        int errors = 0;
        for (Index i = 0; i < x.rows(); ++i) {
            const double s = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
            if (s * (x.row(i).dot(w) + b) <= 0) {
                w += s * x.row(i).transpose();
                b += s;
                ++errors;
            }
        }
        if (errors == 0) return true;
    }
    return false;
}

inline affect::TrainConfig blob_config() {
    auto config = affect::default_train_config(affect::TrainTask::EXPR);
    config.topology = affect::Topology::linear;
    config.batch_size = 16;
    config.adam.learning_rate = 1e-2;
    config.seed = 3;
    return config;
}

inline std::vector<int> argmax_rows(const Mat& scores) {
    std::vector<int> out(static_cast<std::size_t>(scores.rows()));
    for (Index i = 0; i < scores.rows(); ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(affect::argmax(scores.row(i)));
    return out;
}

/// Targets tanh(x A^T) from a fixed random teacher A.
inline Dataset va_dataset(Index n, Index d, std::uint64_t teacher_seed, std::uint64_t sample_seed) {
    std::mt19937_64 teacher(teacher_seed);
    const Mat a = gaussian(teacher, 2, d, 1.0 / std::sqrt(static_cast<double>(d)));
    std::mt19937_64 rng(sample_seed + 1000);
    Dataset out{gaussian(rng, n, d), Mat(), {}};
    out.y = (out.x * a.transpose()).array().tanh().matrix();
    return out;
}

inline affect::TrainConfig va_config() {
    auto config = affect::default_train_config(affect::TrainTask::VA);
    config.batch_size = 16;
    config.seed = 11;
    return config;
}

/// Six sigmoid intensities of a fixed linear teacher.
inline Dataset emi_dataset(Index n, Index d, std::uint64_t teacher_seed, std::uint64_t sample_seed) {
    std::mt19937_64 teacher(teacher_seed);
    const Mat a = gaussian(teacher, 6, d, 2.0 / std::sqrt(static_cast<double>(d)));
    std::mt19937_64 rng(sample_seed + 2000);
    Dataset out{gaussian(rng, n, d), Mat(), {}};
    out.y = (1.0 / (1.0 + (-(out.x * a.transpose()).array()).exp())).matrix();
    return out;
}

inline affect::TrainConfig emi_config() {
    auto config = affect::default_train_config(affect::TrainTask::EMI);
    config.topology = affect::Topology::mlp;
    config.hidden_units = 128;
    config.batch_size = 64;
    config.seed = 5;
    return config;
}

inline double mean_pcc(const Mat& pred, const Mat& truth) {
    double s = 0;
    for (Index c = 0; c < pred.cols(); ++c) s += affect::pcc(pred.col(c), truth.col(c));
    return s / static_cast<double>(pred.cols());
}

}  // namespace synthetic
