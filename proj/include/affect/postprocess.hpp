#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "affect/common.hpp"

namespace affect {

enum class ScoreSemantics { logits, probabilities, regressions };

std::string_view to_string(ScoreSemantics s);
ScoreSemantics parse_semantics(std::string_view s);

/// Per-frame scores of one video; rows of `scores` follow `frame_ids`.
struct PredictionSeries {
    std::string video_id;
    std::string task;
    std::vector<std::int64_t> frame_ids;
    Eigen::MatrixXd scores;  // T x C
    ScoreSemantics semantics = ScoreSemantics::probabilities;
    std::optional<int> smoothing_window;

    Index frames() const { return scores.rows(); }
    Index classes() const { return scores.cols(); }
};

void validate(const PredictionSeries& series);

/// Window used for a task when none is given: 5 frames for AU, 50 otherwise.
int default_window(std::string_view task);

/// Truncated-boundary box filter. Odd windows are centered; the only accepted
/// even window is 50, taken as 25 frames before and 24 after.
PredictionSeries box_smooth(const PredictionSeries& series, int window);

/// Row-wise softmax of logits; other semantics pass through unchanged.
PredictionSeries to_probabilities(const PredictionSeries& series);

/// w * a + (1 - w) * b over matching frames. Both inputs must carry the same
/// semantics, and that semantics must be probabilities or regressions.
PredictionSeries blend(const PredictionSeries& a, const PredictionSeries& b, double weight = 0.5);

/// Removes the Contempt entry from AffectNet-ordered 8-class scores.
Eigen::VectorXd drop_contempt(const Eigen::VectorXd& scores8);
Eigen::MatrixXd drop_contempt_rows(const Eigen::MatrixXd& scores8);

/// AffectNet class index -> Aff-Wild2 class index. Contempt maps to Other.
int affectnet_to_affwild2(int affectnet_class);

enum class RemapStrategy { contempt_to_other, drop_both };
RemapStrategy parse_remap_strategy(std::string_view s);

struct RemappedLabels {
    std::vector<int> pred;   // Aff-Wild2 indices
    std::vector<int> truth;  // Aff-Wild2 indices
    std::vector<std::size_t> kept_rows;
};

/// Maps AffectNet 8-class frame scores onto Aff-Wild2 truth labels.
/// contempt_to_other keeps every frame and sends Contempt predictions to Other;
/// drop_both removes Other-truth frames and predicts from the 7 non-Contempt scores.
RemappedLabels remap_expr(const Eigen::MatrixXd& affectnet_scores, const std::vector<int>& affwild2_truth,
                          RemapStrategy strategy);

/// Prediction CSV `frame_id,s0,...` with a `<stem>.meta.json` sidecar.
void write_prediction_csv(const PredictionSeries& series, const std::filesystem::path& path);
PredictionSeries read_prediction_csv(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace affect
