#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "affect/common.hpp"

namespace affect {

enum class Modality { visual, acoustic };
enum class FeatureKind { embeddings, logits };
enum class Task { VA, EXPR, AU, EMI, CE };
enum class Granularity { per_frame, per_video };

std::string_view to_string(Modality m);
std::string_view to_string(FeatureKind k);
std::string_view to_string(Task t);
Modality parse_modality(std::string_view s);
FeatureKind parse_feature_kind(std::string_view s);
Task parse_task(std::string_view s);

/// Frame-level features of one video. Rows of `values` are frames.
struct FeatureSequence {
    std::string video_id;
    Modality modality = Modality::visual;
    FeatureKind kind = FeatureKind::embeddings;
    std::vector<std::int64_t> frame_ids;
    std::vector<double> timestamps;  // empty when absent
    Eigen::MatrixXd values;          // T x D

    Index frames() const { return values.rows(); }
    Index dim() const { return values.cols(); }
    bool has_timestamps() const { return !timestamps.empty(); }
};

/// Throws DataError when frame ids, timestamps, or shapes are inconsistent.
void validate(const FeatureSequence& seq);

struct ManifestEntry {
    std::string video_id;
    Modality modality = Modality::visual;
    FeatureKind kind = FeatureKind::embeddings;
    int dim = 0;
    std::optional<double> fps;
    std::filesystem::path feature_path;
    std::optional<std::filesystem::path> label_path;
};

/// Reads a JSON manifest; relative paths resolve against the manifest's directory.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

FeatureSequence load_feature_sequence(const ManifestEntry& entry);

/// Writes the feature CSV layout; values use shortest round-trip formatting.
void write_feature_sequence(const FeatureSequence& seq, const std::filesystem::path& path);

inline constexpr double kVaIgnore = -5.0;
inline constexpr double kLabelIgnore = -1.0;

/// Targets for one task. Rows of `targets` follow `frame_ids` (per frame) or
/// `video_ids` (per video). Invalid cells are normalized to the task's ignore
/// sentinel: -5 for VA, -1 otherwise.
struct LabelSet {
    Task task = Task::VA;
    Granularity granularity = Granularity::per_frame;
    int class_count = 0;
    std::vector<std::int64_t> frame_ids;
    std::vector<std::string> video_ids;
    Eigen::MatrixXd targets;

    Index size() const { return targets.rows(); }
    bool cell_valid(Index row, Index col) const;
    /// True when every cell of the entry is an ignore marker.
    bool ignored(Index row) const;
};

/// `class_count` is the number of classes for EXPR/CE and the number of units
/// for AU (0 takes the column count). It is ignored for VA and EMI.
LabelSet load_labels(const std::filesystem::path& path, Task task, int class_count);

/// Nearest-timestamp resampling of acoustic features onto the video's frames.
/// Ties go to the earlier acoustic frame.
FeatureSequence align_audio_to_video(const FeatureSequence& video, const FeatureSequence& audio);

/// [mean | std | min | max] over rows, population std.
template <typename Derived>
Vector<typename Derived::Scalar> stat_pool(const Eigen::MatrixBase<Derived>& frames) {
    using Scalar = typename Derived::Scalar;
    if (frames.rows() < 1) throw DataError("stat_pool: empty sequence");
    const Index d = frames.cols();
    const RowVector<Scalar> mean = frames.colwise().mean();
    const RowVector<Scalar> var =
        (frames.rowwise() - mean).array().square().colwise().sum().matrix() /
        static_cast<Scalar>(frames.rows());
    Vector<Scalar> out(4 * d);
    out.segment(0, d) = mean.transpose();
    out.segment(d, d) = var.array().sqrt().matrix().transpose();
    out.segment(2 * d, d) = frames.colwise().minCoeff().transpose();
    out.segment(3 * d, d) = frames.colwise().maxCoeff().transpose();
    return out;
}

inline Eigen::VectorXd stat_pool(const FeatureSequence& seq) { return stat_pool(seq.values); }

/// Scores of every face detected in one frame; rows are faces.
struct FrameFaceScores {
    std::int64_t frame_id = 0;
    Eigen::MatrixXd per_face_scores;
};

Eigen::VectorXd aggregate_faces(const FrameFaceScores& scores);

}  // namespace affect
