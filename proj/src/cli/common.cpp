#include "common.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "affect/csv.hpp"

namespace affect::cli {

namespace {

std::string command_path(const CLI::App* app) {
    std::vector<std::string> names;
    for (; app != nullptr && app->get_parent() != nullptr; app = app->get_parent()) names.push_back(app->get_name());
    std::string out;
    for (auto it = names.rbegin(); it != names.rend(); ++it) out += (out.empty() ? "" : " ") + *it;
    return out;
}

}  // namespace

void write_config_echo(const Context& ctx, const fs::path& dir) {
    nlohmann::json options = nlohmann::json::object();
    for (const CLI::Option* opt : ctx.selected->get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "config" || opt->get_lnames().empty()) continue;
        if (opt->get_expected_min() == 0) {
            options[name] = opt->count() > 0;
            continue;
        }
        const auto& results = opt->results();
        if (opt->count() > 0) {
            if (opt->get_expected_max() > 1)
                options[name] = results;
            else
                options[name] = results.back();
        } else if (!opt->get_default_str().empty()) {
            options[name] = opt->get_default_str();
        }
    }
    nlohmann::json echo;
    echo["command"] = command_path(ctx.selected);
    echo["options"] = options;
    csv::write_text(dir / "resolved_config.json", echo.dump(2) + "\n");
}

std::vector<fs::path> expand_csv_inputs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> out;
    for (const auto& input : inputs) {
        const fs::path p(input);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(p))
                if (e.is_regular_file() && e.path().extension() == ".csv") found.push_back(e.path());
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else if (fs::exists(p)) {
            out.push_back(p);
        } else {
            throw DataError("input not found: " + input);
        }
    }
    if (out.empty()) throw DataError("no CSV inputs found");
    return out;
}

std::vector<ManifestEntry> select_entries(const std::vector<ManifestEntry>& manifest, Modality modality,
                                          FeatureKind kind) {
    std::vector<ManifestEntry> out;
    for (const auto& e : manifest)
        if (e.modality == modality && e.kind == kind) out.push_back(e);
    if (out.empty())
        throw DataError("manifest has no " + std::string(to_string(modality)) + " " + std::string(to_string(kind)) +
                        " entries");
    return out;
}

FeatureSequence frame_features(const ManifestEntry& entry, const std::vector<ManifestEntry>& manifest) {
    FeatureSequence seq = load_feature_sequence(entry);
    if (entry.modality == Modality::visual) return seq;
    for (const auto& v : manifest)
        if (v.video_id == entry.video_id && v.modality == Modality::visual)
            return align_audio_to_video(load_feature_sequence(v), seq);
    throw DataError(entry.video_id + ": no visual entry to align acoustic features to");
}

std::optional<fs::path> label_path_for(const ManifestEntry& entry, const std::vector<ManifestEntry>& manifest) {
    if (entry.label_path) return entry.label_path;
    for (const auto& e : manifest)
        if (e.video_id == entry.video_id && e.label_path) return e.label_path;
    return std::nullopt;
}

std::map<std::string, Eigen::VectorXd> read_emi_csv(const fs::path& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw DataError(path.string() + ": missing header");
    const auto header = csv::split(lines.front());
    if (header.size() < 2 || header[0] != "video_id") throw DataError(path.string() + ": header must start with video_id");
    std::map<std::string, Eigen::VectorXd> out;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto fields = csv::split(lines[r]);
        if (fields.size() != header.size())
            throw DataError(path.string() + " row " + std::to_string(r) + ": expected " + std::to_string(header.size()) +
                            " columns");
        Eigen::VectorXd v(static_cast<Index>(header.size()) - 1);
        for (Index c = 0; c < v.size(); ++c) {
            const auto x = csv::parse_double(fields[static_cast<std::size_t>(c) + 1]);
            if (!x) throw DataError(path.string() + " row " + std::to_string(r) + ": malformed value");
            v(c) = *x;
        }
        if (!out.emplace(std::string(fields[0]), v).second)
            throw DataError(path.string() + ": duplicate video_id " + std::string(fields[0]));
    }
    return out;
}

void write_emi_csv(const std::vector<std::string>& videos, const Eigen::MatrixXd& values, const fs::path& path) {
    std::ostringstream out;
    out << "video_id";
    for (const auto& name : kEmiCategories) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < videos.size(); ++i) {
        out << videos[i];
        for (Index c = 0; c < values.cols(); ++c) out << ',' << csv::format_double(values(static_cast<Index>(i), c));
        out << '\n';
    }
    csv::write_text(path, out.str());
}

FaceScoreFile read_face_scores(const fs::path& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw DataError(path.string() + ": missing header");
    const auto header = csv::split(lines.front());
    if (header.size() < 2 || header[0] != "frame_id") throw DataError(path.string() + ": header must start with frame_id");

    FaceScoreFile file;
    file.video_id = path.stem().string();
    const auto meta_path = sidecar_path(path);
    if (fs::exists(meta_path)) {
        std::ifstream in(meta_path);
        try {
            nlohmann::json meta;
            in >> meta;
            file.video_id = meta.value("video_id", file.video_id);
            file.semantics = parse_semantics(meta.value("semantics", std::string("probabilities")));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("malformed sidecar " + meta_path.string() + ": " + e.what());
        }
    }

    const Index classes = static_cast<Index>(header.size()) - 1;
    std::vector<Eigen::RowVectorXd> faces;
    std::int64_t current = -1;
    auto flush = [&] {
        if (faces.empty()) return;
        Eigen::MatrixXd m(static_cast<Index>(faces.size()), classes);
        for (std::size_t f = 0; f < faces.size(); ++f) m.row(static_cast<Index>(f)) = faces[f];
        file.frames.push_back({current, m});
        faces.clear();
    };
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto fields = csv::split(lines[r]);
        const std::string where = path.string() + " row " + std::to_string(r);
        if (fields.size() != header.size()) throw DataError(where + ": expected " + std::to_string(header.size()) + " columns");
        const auto fid = csv::parse_int(fields[0]);
        if (!fid || *fid < 0) throw DataError(where + ": malformed frame_id");
        if (*fid < current) throw DataError(where + ": non-monotonic frame_id");
        if (*fid != current) flush();
        current = *fid;
        Eigen::RowVectorXd row(classes);
        for (Index c = 0; c < classes; ++c) {
            const auto v = csv::parse_double(fields[static_cast<std::size_t>(c) + 1]);
            if (!v) throw DataError(where + ": malformed score");
            row(c) = *v;
        }
        faces.push_back(row);
    }
    flush();
    return file;
}

void write_label_csv(const std::vector<std::int64_t>& frame_ids, const std::vector<int>& labels, const fs::path& path) {
    std::ostringstream out;
    out << "frame_id,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) out << frame_ids[i] << ',' << labels[i] << '\n';
    csv::write_text(path, out.str());
}

std::pair<std::vector<std::int64_t>, std::vector<int>> read_label_csv(const fs::path& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty() || lines.front() != "frame_id,label") throw DataError(path.string() + ": expected header frame_id,label");
    std::vector<std::int64_t> frames;
    std::vector<int> labels;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto fields = csv::split(lines[r]);
        const auto fid = fields.size() == 2 ? csv::parse_int(fields[0]) : std::nullopt;
        const auto label = fields.size() == 2 ? csv::parse_int(fields[1]) : std::nullopt;
        if (!fid || !label) throw DataError(path.string() + " row " + std::to_string(r) + ": malformed");
        frames.push_back(*fid);
        labels.push_back(static_cast<int>(*label));
    }
    return {frames, labels};
}

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
    return buf;
}

}  // namespace affect::cli
