#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "affect/common.hpp"
#include "affect/metrics.hpp"

namespace affect {

/// Loss value together with its gradient w.r.t. the head outputs it was given.
template <typename Scalar>
struct LossResult {
    Scalar value = 0;
    Matrix<Scalar> grad;
};

inline constexpr double kProbabilityClamp = 1e-12;

namespace detail {

/// Concordance of one column restricted to `rows`, plus dCCC/dx for those rows.
template <typename Scalar>
Scalar ccc_with_grad(const Matrix<Scalar>& pred, const Matrix<Scalar>& target, Index col, const std::vector<Index>& rows,
                     Vector<Scalar>& d_pred) {
    const Index n = static_cast<Index>(rows.size());
    Vector<Scalar> x(n), y(n);
    for (Index i = 0; i < n; ++i) {
        x(i) = pred(rows[static_cast<std::size_t>(i)], col);
        y(i) = target(rows[static_cast<std::size_t>(i)], col);
    }
    const Scalar nn = static_cast<Scalar>(n);
    const Scalar mx = x.mean(), my = y.mean();
    const Vector<Scalar> dx = x.array() - mx;
    const Vector<Scalar> dy = y.array() - my;
    const Scalar cov = dx.dot(dy) / nn;
    const Scalar denom = dx.squaredNorm() / nn + dy.squaredNorm() / nn + (mx - my) * (mx - my);
    d_pred = Vector<Scalar>::Zero(n);
    if (denom < Scalar(kDegenerateEps)) return Scalar(0);
    // d cov = dy/n; d var_x = 2 dx/n; d (mx-my)^2 = 2 (mx-my)/n
    const Vector<Scalar> d_cov = dy / nn;
    const Vector<Scalar> d_denom = (Scalar(2) * dx.array() + Scalar(2) * (mx - my)).matrix() / nn;
    d_pred = (Scalar(2) * d_cov * denom - Scalar(2) * cov * d_denom) / (denom * denom);
    return Scalar(2) * cov / denom;
}

template <typename Scalar>
Scalar pcc_with_grad(const Vector<Scalar>& x, const Vector<Scalar>& y, Vector<Scalar>& d_x) {
    const Vector<Scalar> dx = x.array() - x.mean();
    const Vector<Scalar> dy = y.array() - y.mean();
    const Scalar sxx = dx.squaredNorm();
    const Scalar syy = dy.squaredNorm();
    d_x = Vector<Scalar>::Zero(x.size());
    if (sxx < Scalar(kDegenerateEps) || syy < Scalar(kDegenerateEps)) return Scalar(0);
    const Scalar norm = std::sqrt(sxx * syy);
    const Scalar r = dx.dot(dy) / norm;
    d_x = dy / norm - r * dx / sxx;
    return r;
}

template <typename Scalar>
std::vector<Index> valid_va_rows(const Matrix<Scalar>& target, Index col) {
    std::vector<Index> rows;
    for (Index i = 0; i < target.rows(); ++i) {
        const Scalar v = target(i, col);
        if (v >= Scalar(-1) && v <= Scalar(1)) rows.push_back(i);
    }
    return rows;
}

}  // namespace detail

/// mean_i w[y_i] * -ln(scores[i][y_i]) on softmax outputs; probabilities are
/// clamped at 1e-12 before the log.
template <typename Scalar>
LossResult<Scalar> weighted_ce_loss(const Matrix<Scalar>& scores, std::span<const int> labels,
                                    const Vector<Scalar>& weights) {
    if (static_cast<std::size_t>(scores.rows()) != labels.size()) throw DataError("weighted_ce_loss: label count mismatch");
    if (weights.size() != scores.cols()) throw DataError("weighted_ce_loss: weight count mismatch");
    if (scores.rows() == 0) throw DataError("weighted_ce_loss: empty batch");
    LossResult<Scalar> out;
    out.grad = Matrix<Scalar>::Zero(scores.rows(), scores.cols());
    const Scalar n = static_cast<Scalar>(scores.rows());
    for (Index i = 0; i < scores.rows(); ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= scores.cols()) throw DataError("weighted_ce_loss: label out of range");
        const Scalar p = scores(i, y);
        const Scalar w = weights(y);
        if (p > Scalar(kProbabilityClamp)) {
            out.value -= w * std::log(p);
            out.grad(i, y) = -w / (p * n);
        } else {
            out.value -= w * std::log(Scalar(kProbabilityClamp));
        }
    }
    out.value /= n;
    return out;
}

/// Binary cross-entropy averaged over non-ignored cells (target 0 or 1).
/// `positive_weights[a]` scales positive cells of unit a; negatives have weight 1.
template <typename Scalar>
LossResult<Scalar> weighted_bce_loss(const Matrix<Scalar>& scores, const Matrix<Scalar>& targets,
                                     const Vector<Scalar>& positive_weights) {
    if (scores.rows() != targets.rows() || scores.cols() != targets.cols())
        throw DataError("weighted_bce_loss: shape mismatch");
    if (positive_weights.size() != scores.cols()) throw DataError("weighted_bce_loss: weight count mismatch");
    LossResult<Scalar> out;
    out.grad = Matrix<Scalar>::Zero(scores.rows(), scores.cols());
    const Scalar lo(kProbabilityClamp), hi(1 - kProbabilityClamp);
    Index cells = 0;
    for (Index i = 0; i < scores.rows(); ++i)
        for (Index a = 0; a < scores.cols(); ++a)
            if (targets(i, a) == Scalar(0) || targets(i, a) == Scalar(1)) ++cells;
    if (cells == 0) throw DataError("weighted_bce_loss: no labeled cells");
    const Scalar n = static_cast<Scalar>(cells);
    for (Index i = 0; i < scores.rows(); ++i) {
        for (Index a = 0; a < scores.cols(); ++a) {
            const Scalar t = targets(i, a);
            if (t != Scalar(0) && t != Scalar(1)) continue;
            const Scalar s = scores(i, a);
            const Scalar sc = std::clamp(s, lo, hi);
            const bool inside = s > lo && s < hi;
            if (t == Scalar(1)) {
                const Scalar w = positive_weights(a);
                out.value -= w * std::log(sc);
                if (inside) out.grad(i, a) = -w / (sc * n);
            } else {
                out.value -= std::log(Scalar(1) - sc);
                if (inside) out.grad(i, a) = Scalar(1) / ((Scalar(1) - sc) * n);
            }
        }
    }
    out.value /= n;
    return out;
}

/// Per-unit positive weights (T - P_a) / P_a over labeled cells. Units with no
/// positives or no negatives get weight 1.
template <typename Scalar>
Vector<Scalar> default_positive_weights(const Matrix<Scalar>& targets) {
    Vector<Scalar> w = Vector<Scalar>::Ones(targets.cols());
    for (Index a = 0; a < targets.cols(); ++a) {
        Scalar pos = 0, total = 0;
        for (Index i = 0; i < targets.rows(); ++i) {
            const Scalar t = targets(i, a);
            if (t == Scalar(1)) pos += 1;
            if (t == Scalar(0) || t == Scalar(1)) total += 1;
        }
        if (pos > 0 && pos < total) w(a) = (total - pos) / pos;
    }
    return w;
}

/// 1 - 0.5 (ccc_V + ccc_A). Target values outside [-1, 1] are ignored per column.
template <typename Scalar>
LossResult<Scalar> ccc_batch_loss(const Matrix<Scalar>& pred, const Matrix<Scalar>& target) {
    if (pred.rows() != target.rows() || pred.cols() != 2 || target.cols() != 2)
        throw DataError("ccc_batch_loss: expected matching T x 2 matrices");
    LossResult<Scalar> out;
    out.grad = Matrix<Scalar>::Zero(pred.rows(), 2);
    Scalar total = 0;
    for (Index c = 0; c < 2; ++c) {
        const auto rows = detail::valid_va_rows(target, c);
        if (rows.size() < 2) throw DataError("ccc_batch_loss: fewer than 2 valid frames");
        Vector<Scalar> d;
        total += detail::ccc_with_grad(pred, target, c, rows, d);
        for (std::size_t i = 0; i < rows.size(); ++i) out.grad(rows[i], c) = Scalar(-0.5) * d(static_cast<Index>(i));
    }
    out.value = Scalar(1) - Scalar(0.5) * total;
    return out;
}

/// 1 - sum_c w_c pcc(pred_c, target_c).
template <typename Scalar>
LossResult<Scalar> weighted_pcc_loss(const Matrix<Scalar>& pred, const Matrix<Scalar>& target,
                                     const Vector<Scalar>& category_weights) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw DataError("weighted_pcc_loss: shape mismatch");
    if (category_weights.size() != pred.cols()) throw DataError("weighted_pcc_loss: weight count mismatch");
    if (pred.rows() < 2) throw DataError("weighted_pcc_loss: need at least 2 samples");
    LossResult<Scalar> out;
    out.grad = Matrix<Scalar>::Zero(pred.rows(), pred.cols());
    Scalar total = 0;
    for (Index c = 0; c < pred.cols(); ++c) {
        Vector<Scalar> d;
        const Scalar r = detail::pcc_with_grad<Scalar>(pred.col(c), target.col(c), d);
        total += category_weights(c) * r;
        out.grad.col(c) = -category_weights(c) * d;
    }
    out.value = Scalar(1) - total;
    return out;
}

template <typename Scalar>
Vector<Scalar> uniform_category_weights(Index categories) {
    return Vector<Scalar>::Constant(categories, Scalar(1) / static_cast<Scalar>(categories));
}

/// Static multi-task loss on raw logits laid out as [z_expr (C) | z_V | z_A]:
///   1 - mean_i log(softmax(z_expr,i)[y_i] * w[y_i]) - 0.5 (CCC(z_V, y_V) + CCC(z_A, y_A))
/// with w[y] = max_k N_k / N_y. The weight sits inside the log, so confidently
/// classified minority samples contribute negative terms.
template <typename Scalar>
LossResult<Scalar> multitask_eq1_loss(const Matrix<Scalar>& logits, std::span<const int> expr_labels,
                                      const Matrix<Scalar>& va_targets, const ClassWeights& weights) {
    const Index classes = logits.cols() - 2;
    if (classes < 1) throw DataError("multitask_eq1_loss: logits need expression and VA columns");
    if (logits.rows() < 2) throw DataError("multitask_eq1_loss: batch needs at least 2 samples");
    if (static_cast<std::size_t>(logits.rows()) != expr_labels.size() || va_targets.rows() != logits.rows() ||
        va_targets.cols() != 2)
        throw DataError("multitask_eq1_loss: target shape mismatch");
    if (weights.style != WeightStyle::eq1_max_ratio) throw ConfigError("multitask_eq1_loss: needs eq1_max_ratio weights");
    if (weights.weights.size() != classes) throw DataError("multitask_eq1_loss: weight count mismatch");

    LossResult<Scalar> out;
    out.grad = Matrix<Scalar>::Zero(logits.rows(), logits.cols());
    const Scalar n = static_cast<Scalar>(logits.rows());
    const Matrix<Scalar> z = logits.leftCols(classes);
    const Vector<Scalar> zmax = z.rowwise().maxCoeff();
    const Matrix<Scalar> shifted = z.colwise() - zmax;
    const Vector<Scalar> log_norm = shifted.array().exp().rowwise().sum().log();
    Scalar ce_term = 0;
    for (Index i = 0; i < logits.rows(); ++i) {
        const int y = expr_labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= classes) throw DataError("multitask_eq1_loss: label out of range");
        const Scalar log_p = shifted(i, y) - log_norm(i);
        ce_term += log_p + std::log(static_cast<Scalar>(weights.weights(y)));
        // d(-log p_y)/dz = softmax - onehot
        out.grad.row(i).head(classes) = (shifted.row(i).array() - log_norm(i)).exp().matrix() / n;
        out.grad(i, y) -= Scalar(1) / n;
    }
    ce_term /= n;

    Scalar ccc_sum = 0;
    const Matrix<Scalar> va_pred = logits.rightCols(2);
    for (Index c = 0; c < 2; ++c) {
        const auto rows = detail::valid_va_rows(va_targets, c);
        if (rows.size() < 2) throw DataError("multitask_eq1_loss: fewer than 2 valid VA targets");
        Vector<Scalar> d;
        ccc_sum += detail::ccc_with_grad(va_pred, va_targets, c, rows, d);
        for (std::size_t i = 0; i < rows.size(); ++i)
            out.grad(rows[i], classes + c) = Scalar(-0.5) * d(static_cast<Index>(i));
    }
    out.value = Scalar(1) - ce_term - Scalar(0.5) * ccc_sum;
    return out;
}

}  // namespace affect
