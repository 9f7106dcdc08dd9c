#include "affect/featurestore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "affect/csv.hpp"

namespace affect {

namespace {

std::string row_error(const std::filesystem::path& path, std::size_t row, const std::string& what) {
    return path.string() + ": " + what + " at row " + std::to_string(row);
}

}  // namespace

std::string_view to_string(Modality m) { return m == Modality::visual ? "visual" : "acoustic"; }

std::string_view to_string(FeatureKind k) { return k == FeatureKind::embeddings ? "embeddings" : "logits"; }

std::string_view to_string(Task t) {
    switch (t) {
        case Task::VA: return "va";
        case Task::EXPR: return "expr";
        case Task::AU: return "au";
        case Task::EMI: return "emi";
        case Task::CE: return "ce";
    }
    return "?";
}

Modality parse_modality(std::string_view s) {
    if (s == "visual") return Modality::visual;
    if (s == "acoustic") return Modality::acoustic;
    throw ConfigError("unknown modality '" + std::string(s) + "'");
}

FeatureKind parse_feature_kind(std::string_view s) {
    if (s == "embeddings") return FeatureKind::embeddings;
    if (s == "logits") return FeatureKind::logits;
    throw ConfigError("unknown feature kind '" + std::string(s) + "'");
}

Task parse_task(std::string_view s) {
    if (s == "va" || s == "VA") return Task::VA;
    if (s == "expr" || s == "EXPR") return Task::EXPR;
    if (s == "au" || s == "AU") return Task::AU;
    if (s == "emi" || s == "EMI") return Task::EMI;
    if (s == "ce" || s == "CE") return Task::CE;
    throw ConfigError("unknown task '" + std::string(s) + "'");
}

void validate(const FeatureSequence& seq) {
    const auto t = static_cast<std::size_t>(seq.frames());
    if (seq.frame_ids.size() != t) throw DataError(seq.video_id + ": frame id count does not match rows");
    for (std::size_t i = 0; i < t; ++i) {
        if (seq.frame_ids[i] < 0) throw DataError(seq.video_id + ": negative frame_id");
        if (i > 0 && seq.frame_ids[i] <= seq.frame_ids[i - 1])
            throw DataError(seq.video_id + ": non-monotonic frame_id at row " + std::to_string(i + 1));
    }
    if (seq.has_timestamps()) {
        if (seq.timestamps.size() != t) throw DataError(seq.video_id + ": timestamp count does not match rows");
        for (std::size_t i = 0; i < t; ++i) {
            if (!(seq.timestamps[i] >= 0.0) || !std::isfinite(seq.timestamps[i]))
                throw DataError(seq.video_id + ": invalid timestamp at row " + std::to_string(i + 1));
            if (i > 0 && seq.timestamps[i] < seq.timestamps[i - 1])
                throw DataError(seq.video_id + ": decreasing timestamp at row " + std::to_string(i + 1));
        }
    }
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed manifest " + path.string() + ": " + e.what());
    }
    const nlohmann::json* list = &doc;
    if (doc.is_object() && doc.contains("entries")) list = &doc.at("entries");
    if (!list->is_array()) throw DataError("manifest " + path.string() + " must be a list of entries");

    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    std::vector<ManifestEntry> entries;
    std::size_t index = 0;
    for (const auto& item : *list) {
        ++index;
        try {
            ManifestEntry e;
            e.video_id = item.at("video_id").get<std::string>();
            e.modality = parse_modality(item.value("modality", std::string("visual")));
            e.kind = parse_feature_kind(item.value("kind", std::string("embeddings")));
            e.dim = item.at("dim").get<int>();
            if (e.dim <= 0) throw DataError("dim must be positive");
            if (item.contains("fps") && !item.at("fps").is_null()) {
                e.fps = item.at("fps").get<double>();
                if (!(*e.fps > 0.0)) throw DataError("fps must be positive");
            }
            e.feature_path = resolve(item.at("feature_path").get<std::string>());
            if (item.contains("label_path") && !item.at("label_path").is_null())
                e.label_path = resolve(item.at("label_path").get<std::string>());
            entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw DataError("manifest " + path.string() + " entry " + std::to_string(index) + ": " + ex.what());
        } catch (const ConfigError& ex) {
            throw DataError("manifest " + path.string() + " entry " + std::to_string(index) + ": " + ex.what());
        } catch (const DataError& ex) {
            throw DataError("manifest " + path.string() + " entry " + std::to_string(index) + ": " + ex.what());
        }
    }
    return entries;
}

FeatureSequence load_feature_sequence(const ManifestEntry& entry) {
    const auto& path = entry.feature_path;
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw DataError(path.string() + ": missing header");

    const auto header = csv::split(lines.front());
    if (header.empty() || header[0] != "frame_id") throw DataError(path.string() + ": header must start with frame_id");
    const bool with_timestamp = header.size() > 1 && header[1] == "timestamp";
    const std::size_t first_value = with_timestamp ? 2 : 1;
    const std::size_t declared = header.size() - first_value;
    if (declared != static_cast<std::size_t>(entry.dim))
        throw DataError(path.string() + ": header has " + std::to_string(declared) + " feature columns, manifest declares dim " +
                        std::to_string(entry.dim));

    FeatureSequence seq;
    seq.video_id = entry.video_id;
    seq.modality = entry.modality;
    seq.kind = entry.kind;
    const std::size_t rows = lines.size() - 1;
    seq.values.resize(static_cast<Index>(rows), entry.dim);
    seq.frame_ids.reserve(rows);
    if (with_timestamp) seq.timestamps.reserve(rows);

    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t row = r + 1;
        const auto fields = csv::split(lines[r + 1]);
        if (fields.size() != header.size())
            throw DataError(row_error(path, row, "dimension mismatch: expected " + std::to_string(header.size()) +
                                                     " columns, found " + std::to_string(fields.size())));
        const auto fid = csv::parse_int(fields[0]);
        if (!fid || *fid < 0) throw DataError(row_error(path, row, "malformed frame_id"));
        if (!seq.frame_ids.empty() && *fid <= seq.frame_ids.back())
            throw DataError(row_error(path, row, "non-monotonic frame_id"));
        seq.frame_ids.push_back(*fid);
        if (with_timestamp) {
            const auto ts = csv::parse_double(fields[1]);
            if (!ts || !(*ts >= 0.0)) throw DataError(row_error(path, row, "malformed timestamp"));
            if (!seq.timestamps.empty() && *ts < seq.timestamps.back())
                throw DataError(row_error(path, row, "decreasing timestamp"));
            seq.timestamps.push_back(*ts);
        }
        for (std::size_t c = 0; c < declared; ++c) {
            const auto v = csv::parse_double(fields[first_value + c]);
            if (!v || !std::isfinite(*v)) throw DataError(row_error(path, row, "malformed value in column " + std::to_string(c)));
            seq.values(static_cast<Index>(r), static_cast<Index>(c)) = *v;
        }
    }

    if (!with_timestamp && entry.fps) {
        seq.timestamps.reserve(rows);
        for (auto fid : seq.frame_ids) seq.timestamps.push_back(static_cast<double>(fid) / *entry.fps);
    }
    return seq;
}

void write_feature_sequence(const FeatureSequence& seq, const std::filesystem::path& path) {
    validate(seq);
    std::ostringstream out;
    out << "frame_id";
    if (seq.has_timestamps()) out << ",timestamp";
    for (Index c = 0; c < seq.dim(); ++c) out << ",f" << c;
    out << '\n';
    for (Index r = 0; r < seq.frames(); ++r) {
        out << seq.frame_ids[static_cast<std::size_t>(r)];
        if (seq.has_timestamps()) out << ',' << csv::format_double(seq.timestamps[static_cast<std::size_t>(r)]);
        for (Index c = 0; c < seq.dim(); ++c) out << ',' << csv::format_double(seq.values(r, c));
        out << '\n';
    }
    csv::write_text(path, out.str());
}

bool LabelSet::cell_valid(Index row, Index col) const {
    const double v = targets(row, col);
    switch (task) {
        case Task::VA: return v >= -1.0 && v <= 1.0;
        case Task::EMI: return v >= 0.0 && v <= 1.0;
        case Task::AU: return v == 0.0 || v == 1.0;
        case Task::EXPR:
        case Task::CE: return v >= 0.0;
    }
    return false;
}

bool LabelSet::ignored(Index row) const {
    for (Index c = 0; c < targets.cols(); ++c)
        if (cell_valid(row, c)) return false;
    return true;
}

LabelSet load_labels(const std::filesystem::path& path, Task task, int class_count) {
    const auto lines = csv::read_lines(path);
    LabelSet set;
    set.task = task;
    set.granularity = task == Task::EMI ? Granularity::per_video : Granularity::per_frame;

    Index width = 0;
    switch (task) {
        case Task::VA: width = 2; break;
        case Task::EXPR:
        case Task::CE: width = 1; break;
        case Task::EMI: width = 6; break;
        case Task::AU: width = class_count > 0 ? class_count : -1; break;
    }
    if (task == Task::CE && class_count <= 0) class_count = 7;
    if (task == Task::EXPR && class_count <= 0) throw ConfigError("EXPR labels need a class count");

    std::size_t first = 0;
    // An optional header is recognized by a non-numeric field after the key.
    if (!lines.empty()) {
        const auto fields = csv::split(lines.front());
        const bool numeric_key = set.granularity == Granularity::per_video || csv::parse_int(fields[0]).has_value();
        bool numeric_rest = fields.size() > 1;
        for (std::size_t i = 1; i < fields.size(); ++i)
            if (!csv::parse_double(fields[i])) numeric_rest = false;
        if (!(numeric_key && numeric_rest)) first = 1;
    }
    if (width < 0) {
        if (first >= lines.size()) throw DataError(path.string() + ": no AU rows to infer unit count");
        width = static_cast<Index>(csv::split(lines[first]).size()) - 1;
        if (width <= 0) throw DataError(path.string() + ": AU rows need at least one unit");
    }
    set.class_count = task == Task::AU ? static_cast<int>(width) : (task == Task::VA ? 2 : (task == Task::EMI ? 6 : class_count));

    const std::size_t rows = lines.size() - first;
    set.targets.resize(static_cast<Index>(rows), width);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t line_no = first + r + 1;
        const auto fields = csv::split(lines[first + r]);
        auto fail = [&](const std::string& what) {
            return DataError(path.string() + ": " + what + " at line " + std::to_string(line_no));
        };
        if (fields.size() != static_cast<std::size_t>(width) + 1)
            throw fail("expected " + std::to_string(width + 1) + " fields, found " + std::to_string(fields.size()));
        if (set.granularity == Granularity::per_video) {
            if (fields[0].empty()) throw fail("empty video_id");
            set.video_ids.emplace_back(fields[0]);
        } else {
            const auto fid = csv::parse_int(fields[0]);
            if (!fid || *fid < 0) throw fail("malformed frame_id");
            set.frame_ids.push_back(*fid);
        }
        for (Index c = 0; c < width; ++c) {
            const auto v = csv::parse_double(fields[static_cast<std::size_t>(c) + 1]);
            if (!v || std::isnan(*v)) throw fail("unparseable value");
            double value = *v;
            switch (task) {
                case Task::VA:
                    if (!(value >= -1.0 && value <= 1.0)) value = kVaIgnore;
                    break;
                case Task::EMI:
                    if (!(value >= 0.0 && value <= 1.0)) value = kLabelIgnore;
                    break;
                case Task::AU:
                    if (value == -1.0) break;
                    if (value != 0.0 && value != 1.0) throw fail("AU value must be 0, 1, or -1");
                    break;
                case Task::EXPR:
                case Task::CE:
                    if (value == -1.0) break;
                    if (value != std::floor(value) || value < 0.0) throw fail("malformed class label");
                    if (value >= class_count)
                        throw fail("label " + std::to_string(static_cast<long long>(value)) + " >= class count " +
                                   std::to_string(class_count));
                    break;
            }
            set.targets(static_cast<Index>(r), c) = value;
        }
    }
    return set;
}

FeatureSequence align_audio_to_video(const FeatureSequence& video, const FeatureSequence& audio) {
    if (!video.has_timestamps() && video.frames() > 0)
        throw DataError(video.video_id + ": video features have no timestamps");
    if (!audio.has_timestamps()) throw DataError(audio.video_id + ": acoustic features have no timestamps");
    if (audio.frames() == 0) throw DataError(audio.video_id + ": acoustic sequence is empty");

    FeatureSequence out;
    out.video_id = video.video_id;
    out.modality = Modality::acoustic;
    out.kind = audio.kind;
    out.frame_ids = video.frame_ids;
    out.timestamps = video.timestamps;
    out.values.resize(video.frames(), audio.dim());

    const auto& at = audio.timestamps;
    for (Index r = 0; r < video.frames(); ++r) {
        const double t = video.timestamps[static_cast<std::size_t>(r)];
        auto hi = std::lower_bound(at.begin(), at.end(), t);
        std::size_t pick;
        if (hi == at.end()) {
            pick = at.size() - 1;
        } else if (hi == at.begin()) {
            pick = 0;
        } else {
            const double d_hi = *hi - t;
            const double d_lo = t - *(hi - 1);
            pick = d_lo <= d_hi ? static_cast<std::size_t>(hi - 1 - at.begin()) : static_cast<std::size_t>(hi - at.begin());
        }
        // Equal timestamps: take the first acoustic frame carrying that time.
        pick = static_cast<std::size_t>(std::lower_bound(at.begin(), at.end(), at[pick]) - at.begin());
        out.values.row(r) = audio.values.row(static_cast<Index>(pick));
    }
    return out;
}

Eigen::VectorXd aggregate_faces(const FrameFaceScores& scores) {
    if (scores.per_face_scores.rows() == 0) throw DataError("frame " + std::to_string(scores.frame_id) + " has no faces");
    return scores.per_face_scores.colwise().mean().transpose();
}

}  // namespace affect
