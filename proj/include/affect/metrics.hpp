#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "affect/common.hpp"

namespace affect {

namespace detail {

template <typename DX, typename DY>
void require_same_length(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y, const char* who) {
    if (x.size() != y.size())
        throw DataError(std::string(who) + ": length mismatch (" + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
}

}  // namespace detail

inline constexpr double kDegenerateEps = 1e-12;

/// Concordance correlation with population moments. Returns 0 when the
/// denominator vanishes (both series constant and equal in mean).
template <typename DX, typename DY>
typename DX::Scalar ccc(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y) {
    using Scalar = typename DX::Scalar;
    detail::require_same_length(x, y, "ccc");
    if (x.size() < 2) throw DataError("ccc: need at least 2 points");
    const auto n = static_cast<Scalar>(x.size());
    const Scalar mx = x.mean();
    const Scalar my = y.mean();
    const auto dx = (x.array() - mx);
    const auto dy = (y.array() - my);
    const Scalar cov = (dx * dy).sum() / n;
    const Scalar denom = dx.square().sum() / n + dy.square().sum() / n + (mx - my) * (mx - my);
    if (denom < Scalar(kDegenerateEps)) return Scalar(0);
    return Scalar(2) * cov / denom;
}

/// Pearson correlation with population moments; 0 if either series is constant.
template <typename DX, typename DY>
typename DX::Scalar pcc(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y) {
    using Scalar = typename DX::Scalar;
    detail::require_same_length(x, y, "pcc");
    if (x.size() < 2) throw DataError("pcc: need at least 2 points");
    const Scalar mx = x.mean();
    const Scalar my = y.mean();
    const auto dx = (x.array() - mx);
    const auto dy = (y.array() - my);
    const Scalar sxx = dx.square().sum();
    const Scalar syy = dy.square().sum();
    if (sxx < Scalar(kDegenerateEps) || syy < Scalar(kDegenerateEps)) return Scalar(0);
    const Scalar r = (dx * dy).sum() / std::sqrt(sxx * syy);
    return std::clamp(r, Scalar(-1), Scalar(1));
}

template <typename DX, typename DY>
typename DX::Scalar rmse(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y) {
    detail::require_same_length(x, y, "rmse");
    if (x.size() < 1) throw DataError("rmse: empty series");
    return std::sqrt((x - y).squaredNorm() / static_cast<typename DX::Scalar>(x.size()));
}

/// Unweighted mean of per-class F1 over classes 0..C-1. Pairs whose truth or
/// prediction is negative (ignore marker) are skipped. A class with no true
/// and no predicted samples scores 0.
double macro_f1(std::span<const int> pred, std::span<const int> truth, int num_classes);

/// Fraction of exact matches over pairs with non-negative truth.
double accuracy(std::span<const int> pred, std::span<const int> truth);

/// F1 of the positive class per unit (columns), averaged over units. Cells
/// with a negative truth are skipped. Predictions are 0/1.
double multilabel_macro_f1(const Eigen::MatrixXi& pred, const Eigen::MatrixXi& truth);

inline constexpr double kKlSmoothing = 1e-10;

/// Sum p_i ln((p_i + eps) / (q_i + eps)) in nats.
template <typename DP, typename DQ>
typename DP::Scalar kl_divergence(const Eigen::MatrixBase<DP>& p, const Eigen::MatrixBase<DQ>& q) {
    using Scalar = typename DP::Scalar;
    detail::require_same_length(p, q, "kl_divergence");
    if (p.size() == 0) throw DataError("kl_divergence: empty distribution");
    if ((p.array() < 0).any() || (q.array() < 0).any()) throw DataError("kl_divergence: negative probability");
    if (std::abs(p.sum() - 1) > 1e-9 || std::abs(q.sum() - 1) > 1e-9)
        throw DataError("kl_divergence: distributions must sum to 1");
    const Scalar eps(kKlSmoothing);
    return (p.array() * ((p.array() + eps) / (q.array() + eps)).log()).sum();
}

/// Chance-corrected agreement between two labelings; 1 when chance agreement is 1.
double cohens_kappa(std::span<const int> a, std::span<const int> b);

enum class WeightStyle { eq1_max_ratio, inverse_frequency };

struct ClassWeights {
    WeightStyle style = WeightStyle::inverse_frequency;
    Eigen::VectorXd counts;
    Eigen::VectorXd weights;
};

ClassWeights class_weights(const Eigen::VectorXd& counts, WeightStyle style);

/// Per-class counts of non-negative labels.
Eigen::VectorXd class_counts(std::span<const int> labels, int num_classes);

}  // namespace affect
