#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "affect/adam.hpp"
#include "affect/head.hpp"
#include "affect/losses.hpp"
#include "affect/metrics.hpp"

namespace affect {

enum class TrainTask { VA, EXPR, AU, EMI, MT_STATIC };
enum class LossKind { ccc_loss, weighted_ce, weighted_bce, weighted_pcc_loss, multitask_eq1 };

std::string_view to_string(TrainTask t);
std::string_view to_string(LossKind l);
TrainTask parse_train_task(std::string_view s);
LossKind parse_loss_kind(std::string_view s);

/// Training recipe. Target matrices are laid out per task:
///   VA: N x 2 (valence, arousal)     EXPR: N x 1 class index
///   AU: N x A bits                   EMI:  N x 6 intensities
///   MT_STATIC: N x 3 (class index, valence, arousal)
struct TrainConfig {
    TrainTask task = TrainTask::VA;
    LossKind loss = LossKind::ccc_loss;
    Topology topology = Topology::linear;
    Activation activation = Activation::tanh;
    int hidden_units = 128;
    int output_dim = 0;  // 0 infers from the targets
    int epochs = 20;
    int batch_size = 256;
    AdamConfig adam;
    std::uint64_t seed = 0;
    std::optional<ClassWeights> class_weights;
    // Positive-cell weights for weighted_bce, category weights for weighted_pcc_loss.
    std::optional<Eigen::VectorXd> unit_weights;
};

TrainConfig default_train_config(TrainTask task);

/// Throws ConfigError for out-of-range values or a loss/activation mismatch.
void validate(const TrainConfig& config);

struct ResolvedWeights {
    ClassWeights class_weights;
    Eigen::VectorXd unit_weights;
};

template <typename Scalar>
struct TrainResult {
    Head<Scalar> head;
    std::vector<double> history;  // mean loss per epoch
    ResolvedWeights weights;
};

/// Loss of `outputs` against the matching target rows under the recipe's loss.
template <typename Scalar>
LossResult<Scalar> evaluate_loss(const TrainConfig& config, const ResolvedWeights& weights, const Matrix<Scalar>& outputs,
                                 const Matrix<Scalar>& targets) {
    auto labels_of = [](const Matrix<Scalar>& t) {
        std::vector<int> labels(static_cast<std::size_t>(t.rows()));
        for (Index i = 0; i < t.rows(); ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(t(i, 0));
        return labels;
    };
    switch (config.loss) {
        case LossKind::ccc_loss: return ccc_batch_loss<Scalar>(outputs, targets);
        case LossKind::weighted_ce: {
            const auto labels = labels_of(targets);
            return weighted_ce_loss<Scalar>(outputs, labels, weights.class_weights.weights.cast<Scalar>());
        }
        case LossKind::weighted_bce:
            return weighted_bce_loss<Scalar>(outputs, targets, weights.unit_weights.cast<Scalar>());
        case LossKind::weighted_pcc_loss:
            return weighted_pcc_loss<Scalar>(outputs, targets, weights.unit_weights.cast<Scalar>());
        case LossKind::multitask_eq1: {
            const auto labels = labels_of(targets);
            return multitask_eq1_loss<Scalar>(outputs, labels, targets.rightCols(2), weights.class_weights);
        }
    }
    throw ConfigError("unknown loss");
}

namespace detail {

inline bool is_correlation_loss(LossKind l) {
    return l == LossKind::ccc_loss || l == LossKind::weighted_pcc_loss || l == LossKind::multitask_eq1;
}

template <typename Scalar>
Matrix<Scalar> gather_rows(const Matrix<Scalar>& m, const std::vector<Index>& rows) {
    Matrix<Scalar> out(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
    return out;
}

}  // namespace detail

/// Drops rows that carry no usable target for the task.
template <typename Scalar>
std::vector<Index> usable_rows(const TrainConfig& config, const Matrix<Scalar>& targets) {
    std::vector<Index> rows;
    for (Index i = 0; i < targets.rows(); ++i) {
        bool keep = true;
        switch (config.task) {
            case TrainTask::EXPR:
            case TrainTask::MT_STATIC: keep = targets(i, 0) >= 0; break;
            case TrainTask::VA:
                keep = (targets.row(i).array() >= Scalar(-1)).cwiseProduct(targets.row(i).array() <= Scalar(1)).any();
                break;
            case TrainTask::AU:
                keep = (targets.row(i).array() == Scalar(0)).any() || (targets.row(i).array() == Scalar(1)).any();
                break;
            case TrainTask::EMI: keep = true; break;
        }
        if (keep) rows.push_back(i);
    }
    return rows;
}

/// Fixes output size and loss weights from the recipe and the training targets.
template <typename Scalar>
std::pair<Index, ResolvedWeights> resolve_training(const TrainConfig& config, const Matrix<Scalar>& targets) {
    ResolvedWeights w;
    Index out_dim = config.output_dim;
    auto labels = [&] {
        std::vector<int> l(static_cast<std::size_t>(targets.rows()));
        for (Index i = 0; i < targets.rows(); ++i) l[static_cast<std::size_t>(i)] = static_cast<int>(targets(i, 0));
        return l;
    };
    switch (config.task) {
        case TrainTask::VA:
            if (targets.cols() != 2) throw DataError("VA targets need 2 columns");
            out_dim = 2;
            break;
        case TrainTask::EMI:
        case TrainTask::AU:
            if (out_dim != 0 && out_dim != targets.cols()) throw ConfigError("output_dim does not match target columns");
            out_dim = targets.cols();
            if (config.unit_weights) {
                if (config.unit_weights->size() != out_dim) throw ConfigError("unit_weights size mismatch");
                w.unit_weights = *config.unit_weights;
            } else if (config.task == TrainTask::AU) {
                w.unit_weights = default_positive_weights<Scalar>(targets).template cast<double>();
            } else {
                w.unit_weights = uniform_category_weights<double>(out_dim);
            }
            break;
        case TrainTask::EXPR:
        case TrainTask::MT_STATIC: {
            if (config.task == TrainTask::MT_STATIC && targets.cols() != 3)
                throw DataError("multi-task targets need 3 columns");
            const auto l = labels();
            int classes = static_cast<int>(config.output_dim) - (config.task == TrainTask::MT_STATIC ? 2 : 0);
            if (config.output_dim == 0) {
                classes = config.task == TrainTask::MT_STATIC ? 8 : 1 + *std::max_element(l.begin(), l.end());
                if (config.class_weights) classes = static_cast<int>(config.class_weights->weights.size());
            }
            if (classes < 1) throw ConfigError("need at least one class");
            const WeightStyle style =
                config.task == TrainTask::MT_STATIC ? WeightStyle::eq1_max_ratio : WeightStyle::inverse_frequency;
            if (config.class_weights) {
                if (config.class_weights->weights.size() != classes) throw ConfigError("class_weights size mismatch");
                if (config.loss == LossKind::multitask_eq1 && config.class_weights->style != WeightStyle::eq1_max_ratio)
                    throw ConfigError("multitask_eq1 needs eq1_max_ratio class weights");
                w.class_weights = *config.class_weights;
            } else {
                // Classes absent from the training labels are counted once.
                Eigen::VectorXd counts = class_counts(l, classes).cwiseMax(1.0);
                w.class_weights = class_weights(counts, style);
            }
            out_dim = config.task == TrainTask::MT_STATIC ? classes + 2 : classes;
            break;
        }
    }
    return {out_dim, w};
}

/// Trains a fresh head for exactly `config.epochs` passes of mini-batch Adam.
/// Deterministic for a given seed: the seed drives initialization and the
/// per-epoch shuffle.
template <typename Scalar>
TrainResult<Scalar> train_head(const Matrix<Scalar>& features, const Matrix<Scalar>& targets, const TrainConfig& config) {
    validate(config);
    if (features.rows() != targets.rows()) throw DataError("feature and target row counts differ");
    const auto rows = usable_rows(config, targets);
    if (rows.empty()) throw DataError("training set is empty");
    const bool correlation = detail::is_correlation_loss(config.loss);
    if (correlation && rows.size() < 2) throw DataError("correlation losses need at least 2 training samples");

    const Matrix<Scalar> x = detail::gather_rows(features, rows);
    const Matrix<Scalar> y = detail::gather_rows(targets, rows);
    auto [out_dim, weights] = resolve_training(config, y);

    std::mt19937_64 rng(config.seed);
    TrainResult<Scalar> result{Head<Scalar>(config.topology, x.cols(), out_dim, config.activation, config.hidden_units),
                               {}, weights};
    result.head.initialize(rng);
    AdamState<Scalar> state(result.head.parameters());

    const Index n = x.rows();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (Index i = n - 1; i > 0; --i)
            std::swap(order[static_cast<std::size_t>(i)],
                      order[uniform_index(rng, static_cast<std::uint64_t>(i) + 1)]);

        std::vector<std::pair<Index, Index>> batches;
        for (Index start = 0; start < n; start += config.batch_size)
            batches.emplace_back(start, std::min<Index>(n, start + config.batch_size));
        // A trailing single-sample batch has no correlation; fold it into its neighbour.
        if (correlation && batches.size() > 1 && batches.back().second - batches.back().first < 2) {
            batches[batches.size() - 2].second = batches.back().second;
            batches.pop_back();
        }

        double epoch_loss = 0;
        for (const auto& [begin, end] : batches) {
            std::vector<Index> idx(order.begin() + begin, order.begin() + end);
            const Matrix<Scalar> xb = detail::gather_rows(x, idx);
            const Matrix<Scalar> yb = detail::gather_rows(y, idx);
            typename Head<Scalar>::Trace trace;
            const Matrix<Scalar> out = result.head.forward(xb, &trace);
            const LossResult<Scalar> loss = evaluate_loss<Scalar>(config, weights, out, yb);
            if (!std::isfinite(static_cast<double>(loss.value)) || !loss.grad.allFinite())
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch + 1));
            adam_step(result.head.parameters(), state, result.head.backward(trace, loss.grad), config.adam);
            epoch_loss += static_cast<double>(loss.value) * static_cast<double>(end - begin);
        }
        result.history.push_back(epoch_loss / static_cast<double>(n));
    }
    for (const auto& p : result.head.parameters())
        if (!p.allFinite()) throw NumericError("training produced non-finite weights");
    return result;
}

}  // namespace affect
