#include "affect/postprocess.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "affect/csv.hpp"
#include "affect/head.hpp"

namespace affect {

std::string_view to_string(ScoreSemantics s) {
    switch (s) {
        case ScoreSemantics::logits: return "logits";
        case ScoreSemantics::probabilities: return "probabilities";
        case ScoreSemantics::regressions: return "regressions";
    }
    return "?";
}

ScoreSemantics parse_semantics(std::string_view s) {
    if (s == "logits") return ScoreSemantics::logits;
    if (s == "probabilities") return ScoreSemantics::probabilities;
    if (s == "regressions") return ScoreSemantics::regressions;
    throw ConfigError("unknown score semantics '" + std::string(s) + "'");
}

void validate(const PredictionSeries& series) {
    if (series.frame_ids.size() != static_cast<std::size_t>(series.frames()))
        throw DataError(series.video_id + ": frame id count does not match score rows");
    for (std::size_t i = 1; i < series.frame_ids.size(); ++i)
        if (series.frame_ids[i] <= series.frame_ids[i - 1])
            throw DataError(series.video_id + ": frame ids must be strictly increasing");
}

int default_window(std::string_view task) { return task == "au" || task == "AU" ? 5 : 50; }

PredictionSeries box_smooth(const PredictionSeries& series, int window) {
    if (window < 1) throw ConfigError("window must be positive");
    if (window % 2 == 0 && window != 50) throw ConfigError("even window " + std::to_string(window) + " is not supported");
    validate(series);
    if (series.frames() == 0) throw DataError(series.video_id + ": cannot smooth an empty series");

    const Index before = window / 2;
    const Index after = window - 1 - before;
    const Index t = series.frames();
    PredictionSeries out = series;
    for (Index i = 0; i < t; ++i) {
        const Index lo = std::max<Index>(0, i - before);
        const Index hi = std::min<Index>(t - 1, i + after);
        out.scores.row(i) = series.scores.middleRows(lo, hi - lo + 1).colwise().mean();
    }
    out.smoothing_window = window;
    return out;
}

PredictionSeries to_probabilities(const PredictionSeries& series) {
    if (series.semantics != ScoreSemantics::logits) return series;
    PredictionSeries out = series;
    out.scores = activate<double>(series.scores, Activation::softmax);
    out.semantics = ScoreSemantics::probabilities;
    return out;
}

PredictionSeries blend(const PredictionSeries& a, const PredictionSeries& b, double weight) {
    if (!(weight >= 0.0 && weight <= 1.0)) throw ConfigError("blend weight must lie in [0, 1]");
    if (a.semantics != b.semantics)
        throw DataError("cannot blend " + std::string(to_string(a.semantics)) + " with " +
                        std::string(to_string(b.semantics)));
    if (a.semantics == ScoreSemantics::logits) throw DataError("blend needs probabilities; convert logits first");
    if (a.frame_ids != b.frame_ids) throw DataError(a.video_id + ": frame ids differ between blend inputs");
    if (a.classes() != b.classes()) throw DataError(a.video_id + ": class counts differ between blend inputs");
    PredictionSeries out = a;
    out.scores = weight * a.scores + (1.0 - weight) * b.scores;
    out.smoothing_window.reset();
    return out;
}

Eigen::VectorXd drop_contempt(const Eigen::VectorXd& scores8) {
    if (scores8.size() != affectnet::kNumClasses) throw DataError("drop_contempt expects 8 scores");
    Eigen::VectorXd out(7);
    out << scores8.head(affectnet::kContempt), scores8.tail(7 - affectnet::kContempt);
    return out;
}

Eigen::MatrixXd drop_contempt_rows(const Eigen::MatrixXd& scores8) {
    if (scores8.cols() != affectnet::kNumClasses) throw DataError("drop_contempt expects 8 score columns");
    Eigen::MatrixXd out(scores8.rows(), 7);
    out << scores8.leftCols(affectnet::kContempt), scores8.rightCols(7 - affectnet::kContempt);
    return out;
}

int affectnet_to_affwild2(int c) {
    switch (c) {
        case affectnet::kAnger: return 1;
        case affectnet::kContempt: return affwild2::kOther;
        case affectnet::kDisgust: return 2;
        case affectnet::kFear: return 3;
        case affectnet::kHappiness: return 4;
        case affectnet::kNeutral: return 0;
        case affectnet::kSadness: return 5;
        case affectnet::kSurprise: return 6;
        default: break;
    }
    throw DataError("AffectNet class index out of range: " + std::to_string(c));
}

RemapStrategy parse_remap_strategy(std::string_view s) {
    if (s == "contempt_to_other") return RemapStrategy::contempt_to_other;
    if (s == "drop_both") return RemapStrategy::drop_both;
    throw ConfigError("unknown remap strategy '" + std::string(s) + "'");
}

RemappedLabels remap_expr(const Eigen::MatrixXd& scores, const std::vector<int>& truth, RemapStrategy strategy) {
    if (scores.cols() != affectnet::kNumClasses) throw DataError("remap_expr expects AffectNet 8-class scores");
    if (static_cast<std::size_t>(scores.rows()) != truth.size()) throw DataError("remap_expr: frame count mismatch");
    RemappedLabels out;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto row = scores.row(static_cast<Index>(i));
        if (strategy == RemapStrategy::contempt_to_other) {
            out.pred.push_back(affectnet_to_affwild2(static_cast<int>(argmax(row))));
            out.truth.push_back(truth[i]);
            out.kept_rows.push_back(i);
        } else {
            if (truth[i] == affwild2::kOther) continue;
            const Eigen::VectorXd seven = drop_contempt(row.transpose());
            int c = static_cast<int>(argmax(seven));
            if (c >= affectnet::kContempt) ++c;
            out.pred.push_back(affectnet_to_affwild2(c));
            out.truth.push_back(truth[i]);
            out.kept_rows.push_back(i);
        }
    }
    return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    auto p = csv_path;
    p.replace_extension(".meta.json");
    return p;
}

void write_prediction_csv(const PredictionSeries& series, const std::filesystem::path& path) {
    validate(series);
    std::ostringstream out;
    out << "frame_id";
    for (Index c = 0; c < series.classes(); ++c) out << ",s" << c;
    out << '\n';
    for (Index r = 0; r < series.frames(); ++r) {
        out << series.frame_ids[static_cast<std::size_t>(r)];
        for (Index c = 0; c < series.classes(); ++c) out << ',' << csv::format_double(series.scores(r, c));
        out << '\n';
    }
    csv::write_text(path, out.str());

    nlohmann::json meta;
    meta["video_id"] = series.video_id;
    meta["task"] = series.task;
    meta["semantics"] = std::string(to_string(series.semantics));
    meta["classes"] = series.classes();
    meta["smoothing_window"] = series.smoothing_window ? nlohmann::json(*series.smoothing_window) : nlohmann::json();
    csv::write_text(sidecar_path(path), meta.dump(1) + "\n");
}

PredictionSeries read_prediction_csv(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw DataError(path.string() + ": missing header");
    const auto header = csv::split(lines.front());
    if (header.empty() || header[0] != "frame_id") throw DataError(path.string() + ": header must start with frame_id");
    const Index classes = static_cast<Index>(header.size()) - 1;

    PredictionSeries series;
    series.video_id = path.stem().string();
    const auto meta_path = sidecar_path(path);
    if (std::filesystem::exists(meta_path)) {
        std::ifstream in(meta_path);
        nlohmann::json meta;
        try {
            in >> meta;
            series.video_id = meta.value("video_id", series.video_id);
            series.task = meta.value("task", std::string());
            series.semantics = parse_semantics(meta.value("semantics", std::string("probabilities")));
            if (meta.contains("smoothing_window") && !meta.at("smoothing_window").is_null())
                series.smoothing_window = meta.at("smoothing_window").get<int>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError("malformed sidecar " + meta_path.string() + ": " + e.what());
        } catch (const ConfigError& e) {
            throw DataError("malformed sidecar " + meta_path.string() + ": " + e.what());
        }
    }

    const std::size_t rows = lines.size() - 1;
    series.scores.resize(static_cast<Index>(rows), classes);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto fields = csv::split(lines[r + 1]);
        const std::string where = path.string() + " row " + std::to_string(r + 1);
        if (fields.size() != header.size()) throw DataError(where + ": expected " + std::to_string(header.size()) + " columns");
        const auto fid = csv::parse_int(fields[0]);
        if (!fid || *fid < 0) throw DataError(where + ": malformed frame_id");
        if (!series.frame_ids.empty() && *fid <= series.frame_ids.back())
            throw DataError(where + ": non-monotonic frame_id");
        series.frame_ids.push_back(*fid);
        for (Index c = 0; c < classes; ++c) {
            const auto v = csv::parse_double(fields[static_cast<std::size_t>(c) + 1]);
            if (!v) throw DataError(where + ": malformed score");
            series.scores(static_cast<Index>(r), c) = *v;
        }
    }
    return series;
}

}  // namespace affect
