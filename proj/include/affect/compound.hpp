#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "affect/common.hpp"
#include "affect/featurestore.hpp"
#include "affect/postprocess.hpp"

namespace affect {

/// The seven C-EXPR compound classes, their reference frame counts, and the
/// pair of AffectNet classes each compound is built from.
struct CompoundTarget {
    static constexpr int kNumClasses = 7;
    static constexpr std::array<std::string_view, kNumClasses> kClassNames = {
        "Fearfully_Surprised", "Happily_Surprised", "Sadly_Surprised", "Disgustedly_Surprised",
        "Angrily_Surprised",   "Sadly_Fearful",     "Sadly_Angry"};
    static constexpr std::array<long, kNumClasses> kFrameCounts = {14445, 24915, 10780, 10637, 10535, 10112, 8878};
    static constexpr std::array<std::pair<int, int>, kNumClasses> kConstituents = {{
        {affectnet::kFear, affectnet::kSurprise},
        {affectnet::kHappiness, affectnet::kSurprise},
        {affectnet::kSadness, affectnet::kSurprise},
        {affectnet::kDisgust, affectnet::kSurprise},
        {affectnet::kAnger, affectnet::kSurprise},
        {affectnet::kSadness, affectnet::kFear},
        {affectnet::kSadness, affectnet::kAnger},
    }};

    /// Normalized class frequencies: counts / 90302.
    static Eigen::VectorXd prior();
};

/// Sum of the two constituent probabilities for each compound class.
Eigen::VectorXd compound_scores(const Eigen::VectorXd& prob8);

struct CompoundPrediction {
    PredictionSeries scores;  // T x 7 summary scores
    std::vector<int> labels;
};

/// Face aggregation, compound scoring, and argmax (ties to the lowest index) per frame.
CompoundPrediction predict_compound(const std::vector<FrameFaceScores>& frames, const std::string& video_id = "");

struct ClusterModel {
    int k = 7;
    Eigen::MatrixXd centroids;  // k x D
    std::vector<int> assignment;
    std::vector<double> inertia_history;  // after every Lloyd iteration
    int iterations = 0;
    std::vector<std::optional<int>> cluster_to_class;

    double inertia() const { return inertia_history.empty() ? 0.0 : inertia_history.back(); }
    std::vector<Index> cluster_sizes() const;
};

/// Lloyd's algorithm with k-means++ seeding. Empty clusters are re-seeded with
/// the point farthest from its current centroid (taken from a cluster that
/// keeps at least one member). Stops at an assignment fixed point or max_iters.
ClusterModel kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int max_iters = 100);

/// Per-column z-scores; constant columns become zero.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& points);

struct ClusterLabeling {
    std::vector<std::optional<int>> cluster_to_class;
    std::vector<int> empty_clusters;
};

/// Labels each non-empty cluster with the argmax of its frames' mean compound scores.
ClusterLabeling label_clusters(const ClusterModel& model, const Eigen::MatrixXd& compound_scores);

enum class KlDirection { empirical_to_prior, prior_to_empirical };

struct KlSelection {
    std::size_t index = 0;
    std::vector<double> kl;
    std::vector<Eigen::VectorXd> distributions;
};

/// Empirical class frequencies of a CE label sequence.
Eigen::VectorXd class_distribution(const std::vector<int>& labels, int num_classes = CompoundTarget::kNumClasses);

/// Picks the candidate whose class balance is closest to the reference prior.
KlSelection select_by_kl(const std::vector<std::vector<int>>& candidates,
                         KlDirection direction = KlDirection::empirical_to_prior);

/// Pairwise Cohen's kappa between labelings of the same frames.
Eigen::MatrixXd kappa_matrix(const std::vector<std::vector<int>>& models);

/// Heatmap of a kappa matrix with a fixed color scale over [-0.2, 1].
std::string render_kappa_svg(const Eigen::MatrixXd& kappa, const std::vector<std::string>& names);

}  // namespace affect
