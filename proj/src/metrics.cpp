#include "affect/metrics.hpp"

#include <map>

namespace affect {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* who) {
    if (a != b)
        throw DataError(std::string(who) + ": length mismatch (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

double f1(double tp, double fp, double fn) {
    const double denom = 2 * tp + fp + fn;
    return denom > 0 ? 2 * tp / denom : 0.0;
}

}  // namespace

double macro_f1(std::span<const int> pred, std::span<const int> truth, int num_classes) {
    require_same_size(pred.size(), truth.size(), "macro_f1");
    if (num_classes < 1) throw DataError("macro_f1: need at least one class");
    std::vector<double> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const int p = pred[i];
        const int t = truth[i];
        if (p >= num_classes || t >= num_classes || p < -1 || t < -1)
            throw DataError("macro_f1: label out of range at index " + std::to_string(i));
        if (p < 0 || t < 0) continue;
        if (p == t) {
            tp[t] += 1;
        } else {
            fp[p] += 1;
            fn[t] += 1;
        }
    }
    double sum = 0;
    for (int c = 0; c < num_classes; ++c) sum += f1(tp[c], fp[c], fn[c]);
    return sum / num_classes;
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
    require_same_size(pred.size(), truth.size(), "accuracy");
    std::size_t total = 0, hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (truth[i] < 0) continue;
        ++total;
        if (pred[i] == truth[i]) ++hits;
    }
    if (total == 0) throw DataError("accuracy: no labeled samples");
    return static_cast<double>(hits) / static_cast<double>(total);
}

double multilabel_macro_f1(const Eigen::MatrixXi& pred, const Eigen::MatrixXi& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
        throw DataError("multilabel_macro_f1: shape mismatch");
    if (pred.cols() == 0) throw DataError("multilabel_macro_f1: no units");
    double sum = 0;
    for (Index a = 0; a < pred.cols(); ++a) {
        double tp = 0, fp = 0, fn = 0;
        for (Index i = 0; i < pred.rows(); ++i) {
            const int t = truth(i, a);
            if (t < 0) continue;
            const int p = pred(i, a);
            if (p == 1 && t == 1) tp += 1;
            else if (p == 1) fp += 1;
            else if (t == 1) fn += 1;
        }
        sum += f1(tp, fp, fn);
    }
    return sum / static_cast<double>(pred.cols());
}

double cohens_kappa(std::span<const int> a, std::span<const int> b) {
    require_same_size(a.size(), b.size(), "cohens_kappa");
    if (a.empty()) throw DataError("cohens_kappa: empty labelings");
    const auto n = static_cast<double>(a.size());
    std::map<int, double> freq_a, freq_b;
    double agree = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        freq_a[a[i]] += 1;
        freq_b[b[i]] += 1;
        if (a[i] == b[i]) agree += 1;
    }
    const double p_o = agree / n;
    double p_e = 0;
    for (const auto& [label, count] : freq_a) {
        const auto it = freq_b.find(label);
        if (it != freq_b.end()) p_e += (count / n) * (it->second / n);
    }
    if (p_e >= 1.0 - 1e-12) return 1.0;
    return (p_o - p_e) / (1.0 - p_e);
}

ClassWeights class_weights(const Eigen::VectorXd& counts, WeightStyle style) {
    if (counts.size() == 0) throw DataError("class_weights: no classes");
    for (Index i = 0; i < counts.size(); ++i)
        if (!(counts(i) >= 1)) throw DataError("class_weights: class " + std::to_string(i) + " has zero count");
    ClassWeights cw;
    cw.style = style;
    cw.counts = counts;
    if (style == WeightStyle::eq1_max_ratio) {
        cw.weights = counts.cwiseInverse() * counts.maxCoeff();
    } else {
        cw.weights = counts.cwiseInverse() * (counts.sum() / static_cast<double>(counts.size()));
    }
    return cw;
}

Eigen::VectorXd class_counts(std::span<const int> labels, int num_classes) {
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(num_classes);
    for (int y : labels) {
        if (y >= num_classes) throw DataError("class_counts: label " + std::to_string(y) + " out of range");
        if (y >= 0) counts(y) += 1;
    }
    return counts;
}

}  // namespace affect
