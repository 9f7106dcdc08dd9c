// Writes the bundled synthetic mini-dataset: three short "videos" whose
// features and labels all derive from one smooth latent trajectory per video.
//
//   make_mini_dataset <output-dir>

#include <cmath>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "affect/csv.hpp"
#include "affect/featurestore.hpp"

namespace fs = std::filesystem;
using affect::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr int kVideos = 3;
constexpr int kFrames = 200;
constexpr double kFps = 25.0;
constexpr double kAudioRate = 50.0;
constexpr int kLatent = 4;
constexpr int kEmbeddingDim = 16;
constexpr int kAudioDim = 16;
constexpr int kUnits = affect::kDefaultActionUnits;

MatrixXd gaussian(std::mt19937_64& rng, Index rows, Index cols, double scale) {
    MatrixXd m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m(i) = scale * affect::standard_normal(rng);
    return m;
}

std::string fmt(double v) { return affect::csv::format_double(v); }

affect::FeatureSequence make_sequence(const std::string& id, affect::Modality m, affect::FeatureKind k,
                                      const MatrixXd& values, double rate) {
    affect::FeatureSequence seq;
    seq.video_id = id;
    seq.modality = m;
    seq.kind = k;
    seq.values = values;
    for (Index i = 0; i < values.rows(); ++i) {
        seq.frame_ids.push_back(i);
        seq.timestamps.push_back(static_cast<double>(i) / rate);
    }
    return seq;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_mini_dataset <output-dir>\n";
        return 2;
    }
    const fs::path root(argv[1]);
    std::mt19937_64 rng(20240601);

    const MatrixXd to_embedding = gaussian(rng, kEmbeddingDim, kLatent, 1.0);
    const MatrixXd to_logits = gaussian(rng, affect::affectnet::kNumClasses, kLatent, 1.5);
    const MatrixXd to_audio = gaussian(rng, kAudioDim, kLatent, 1.0);
    const MatrixXd to_va = gaussian(rng, 2, kLatent, 0.5);
    const MatrixXd to_expr = gaussian(rng, affect::affwild2::kClassNames.size(), kLatent, 2.0);
    const MatrixXd to_au = gaussian(rng, kUnits, kLatent, 1.0);
    const MatrixXd to_emi = gaussian(rng, 6, kLatent, 1.5);

    std::ostringstream emi;
    emi << "video_id";
    for (const auto& c : affect::kEmiCategories) emi << ',' << c;
    emi << '\n';

    nlohmann::json manifests;
    for (int v = 0; v < kVideos; ++v) {
        char id_buf[16];
        std::snprintf(id_buf, sizeof(id_buf), "vid%02d", v);
        const std::string id = id_buf;

        // Latent AR(1) trajectory with a per-video offset.
        MatrixXd z(kFrames, kLatent);
        const VectorXd offset = gaussian(rng, kLatent, 1, 0.7);
        VectorXd state = gaussian(rng, kLatent, 1, 1.0);
        for (int t = 0; t < kFrames; ++t) {
            state = 0.95 * state + 0.3 * gaussian(rng, kLatent, 1, 1.0);
            z.row(t) = (state + offset).transpose();
        }

        const MatrixXd embeddings = z * to_embedding.transpose() + gaussian(rng, kFrames, kEmbeddingDim, 0.1);
        const MatrixXd logits = z * to_logits.transpose() + gaussian(rng, kFrames, affect::affectnet::kNumClasses, 0.2);
        MatrixXd audio(static_cast<Index>(kFrames * kAudioRate / kFps), kAudioDim);
        for (Index a = 0; a < audio.rows(); ++a) {
            const Index t = std::min<Index>(kFrames - 1, a * static_cast<Index>(kFps) / static_cast<Index>(kAudioRate));
            audio.row(a) = z.row(t) * to_audio.transpose();
        }
        audio += gaussian(rng, audio.rows(), kAudioDim, 0.2);

        const fs::path feat = root / "features";
        using affect::FeatureKind;
        using affect::Modality;
        affect::write_feature_sequence(make_sequence(id, Modality::visual, FeatureKind::embeddings, embeddings, kFps),
                                       feat / (id + "_visual_embeddings.csv"));
        affect::write_feature_sequence(make_sequence(id, Modality::visual, FeatureKind::logits, logits, kFps),
                                       feat / (id + "_visual_logits.csv"));
        affect::write_feature_sequence(make_sequence(id, Modality::acoustic, FeatureKind::embeddings, audio, kAudioRate),
                                       feat / (id + "_audio.csv"));

        // Per-frame labels; a few cells carry the ignore markers.
        std::ostringstream va, expr, au;
        va << "frame_id,valence,arousal\n";
        expr << "frame_id,expression\n";
        au << "frame_id";
        for (int u = 0; u < kUnits; ++u) au << ",AU" << u;
        au << '\n';
        for (int t = 0; t < kFrames; ++t) {
            const VectorXd zt = z.row(t).transpose();
            const VectorXd vat = (to_va * zt).array().tanh();
            va << t << ',' << (t % 37 == 5 ? fmt(affect::kVaIgnore) : fmt(vat(0))) << ',' << fmt(vat(1)) << '\n';
            const VectorXd ex = to_expr * zt + gaussian(rng, to_expr.rows(), 1, 0.5);
            expr << t << ',' << (t % 41 == 7 ? -1 : static_cast<int>(affect::argmax(ex))) << '\n';
            const VectorXd aut = to_au * zt + gaussian(rng, kUnits, 1, 0.3);
            au << t;
            for (int u = 0; u < kUnits; ++u) au << ',' << (t % 53 == 11 && u == 0 ? -1 : (aut(u) > 0.5 ? 1 : 0));
            au << '\n';
        }
        const fs::path labels = root / "labels";
        affect::csv::write_text(labels / (id + "_va.csv"), va.str());
        affect::csv::write_text(labels / (id + "_expr.csv"), expr.str());
        affect::csv::write_text(labels / (id + "_au.csv"), au.str());

        const VectorXd intensity = (1.0 + (-(to_emi * z.colwise().mean().transpose()).array()).exp()).inverse();
        emi << id;
        for (Index c = 0; c < 6; ++c) emi << ',' << fmt(intensity(c));
        emi << '\n';

        // Face-level AffectNet logits; every tenth frame shows a second, noisier face.
        std::ostringstream faces;
        faces << "frame_id";
        for (int c = 0; c < affect::affectnet::kNumClasses; ++c) faces << ",s" << c;
        faces << '\n';
        for (int t = 0; t < kFrames; ++t) {
            const int count = t % 10 == 0 ? 2 : 1;
            for (int f = 0; f < count; ++f) {
                const MatrixXd row = logits.row(t) + gaussian(rng, 1, affect::affectnet::kNumClasses, f == 0 ? 0.0 : 1.0);
                faces << t;
                for (Index c = 0; c < row.cols(); ++c) faces << ',' << fmt(row(0, c));
                faces << '\n';
            }
        }
        affect::csv::write_text(root / "faces" / (id + ".csv"), faces.str());
        nlohmann::json meta{{"video_id", id}, {"task", "expr"}, {"semantics", "logits"}, {"classes", 8}};
        affect::csv::write_text(root / "faces" / (id + ".meta.json"), meta.dump(1) + "\n");

        for (const std::string task : {"va", "expr", "au", "emi", "ce"}) {
            const std::string label = task == "ce" ? "" : (task == "emi" ? "labels/emi.csv" : "labels/" + id + "_" + task + ".csv");
            auto entry = [&](const std::string& modality, const std::string& kind, int dim, std::optional<double> fps,
                             const std::string& path) {
                nlohmann::json e{{"video_id", id}, {"modality", modality}, {"kind", kind}, {"dim", dim},
                                 {"feature_path", path}};
                e["fps"] = fps ? nlohmann::json(*fps) : nlohmann::json();
                e["label_path"] = label.empty() ? nlohmann::json() : nlohmann::json(label);
                return e;
            };
            manifests[task].push_back(entry("visual", "embeddings", kEmbeddingDim, kFps, "features/" + id + "_visual_embeddings.csv"));
            manifests[task].push_back(entry("visual", "logits", affect::affectnet::kNumClasses, kFps, "features/" + id + "_visual_logits.csv"));
            manifests[task].push_back(entry("acoustic", "embeddings", kAudioDim, std::nullopt, "features/" + id + "_audio.csv"));
        }
    }
    affect::csv::write_text(root / "labels" / "emi.csv", emi.str());
    for (const auto& [task, entries] : manifests.items())
        affect::csv::write_text(root / ("manifest_" + task + ".json"), nlohmann::json{{"entries", entries}}.dump(1) + "\n");
    std::cout << "wrote mini dataset to " << root.string() << '\n';
    return 0;
}
