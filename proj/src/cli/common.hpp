#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "affect/featurestore.hpp"
#include "affect/postprocess.hpp"

namespace affect::cli {

namespace fs = std::filesystem;

struct Context {
    std::ostream& out;
    std::ostream& err;
    std::function<void()> action;
    const CLI::App* selected = nullptr;

    void warn(const std::string& message) const { err << "warning: " << message << '\n'; }
};

void register_train(CLI::App& root, Context& ctx);
void register_predict(CLI::App& root, Context& ctx);
void register_smooth(CLI::App& root, Context& ctx);
void register_fuse(CLI::App& root, Context& ctx);
void register_eval(CLI::App& root, Context& ctx);
void register_ce(CLI::App& root, Context& ctx);

/// Writes `resolved_config.json` describing every option of the selected command.
void write_config_echo(const Context& ctx, const fs::path& dir);

/// Expands directories into their *.csv files (sorted); plain files pass through.
std::vector<fs::path> expand_csv_inputs(const std::vector<std::string>& inputs);

/// Entries of one modality and kind, in manifest order.
std::vector<ManifestEntry> select_entries(const std::vector<ManifestEntry>& manifest, Modality modality,
                                          FeatureKind kind);

/// Frame features of an entry. Acoustic entries are resampled onto the frames
/// of a visual entry with the same video id.
FeatureSequence frame_features(const ManifestEntry& entry, const std::vector<ManifestEntry>& manifest);

/// The label file for a video: the entry's own, else any entry of that video that has one.
std::optional<fs::path> label_path_for(const ManifestEntry& entry, const std::vector<ManifestEntry>& manifest);

/// Per-video 6-category rows keyed by video id: `video_id,<categories>`.
std::map<std::string, Eigen::VectorXd> read_emi_csv(const fs::path& path);
void write_emi_csv(const std::vector<std::string>& videos, const Eigen::MatrixXd& values, const fs::path& path);

/// Face-level score file: `frame_id,s0,...` where a frame id repeats once per face.
struct FaceScoreFile {
    std::string video_id;
    ScoreSemantics semantics = ScoreSemantics::probabilities;
    std::vector<FrameFaceScores> frames;
};
FaceScoreFile read_face_scores(const fs::path& path);

/// CE labels `frame_id,label`.
void write_label_csv(const std::vector<std::int64_t>& frame_ids, const std::vector<int>& labels, const fs::path& path);
std::pair<std::vector<std::int64_t>, std::vector<int>> read_label_csv(const fs::path& path);

std::string fixed(double value, int digits = 6);

}  // namespace affect::cli
