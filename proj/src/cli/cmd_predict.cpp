#include "affect/model_io.hpp"
#include "common.hpp"

namespace affect::cli {

namespace {

struct PredictOptions {
    std::string model;
    std::string manifest;
    std::string out;
    std::optional<std::string> kind;
    std::optional<std::string> modality;
};

ScoreSemantics semantics_for(const std::string& task) {
    if (task == "expr" || task == "au") return ScoreSemantics::probabilities;
    return ScoreSemantics::regressions;
}

void run_predict(const PredictOptions& o, Context& ctx) {
    const StoredModel model = load_head(o.model);
    const auto& echo = model.train_config_echo;
    const FeatureKind kind = parse_feature_kind(o.kind.value_or(echo.value("feature_kind", std::string("embeddings"))));
    const Modality modality = parse_modality(o.modality.value_or(echo.value("modality", std::string("visual"))));
    const bool pooled = echo.value("pooling", std::string("none")) == "stat";

    const auto manifest = load_manifest(o.manifest);
    const auto entries = select_entries(manifest, modality, kind);
    const fs::path out(o.out);

    if (pooled) {
        std::vector<std::string> videos;
        Eigen::MatrixXd pooled_x(static_cast<Index>(entries.size()), model.head.input_dim());
        for (const auto& e : entries) {
            const FeatureSequence seq = load_feature_sequence(e);
            const Eigen::VectorXd v = stat_pool(seq);
            if (v.size() != model.head.input_dim())
                throw DataError(e.video_id + ": pooled features have " + std::to_string(v.size()) + " values, model expects " +
                                std::to_string(model.head.input_dim()));
            pooled_x.row(static_cast<Index>(videos.size())) = v.transpose();
            videos.push_back(e.video_id);
        }
        write_emi_csv(videos, model.head.forward(pooled_x), out / (model.task + ".csv"));
        write_config_echo(ctx, out);
        ctx.out << "wrote " << model.task << " predictions for " << videos.size() << " videos\n";
        return;
    }

    std::size_t frames = 0;
    for (const auto& e : entries) {
        const FeatureSequence seq = frame_features(e, manifest);
        PredictionSeries series;
        series.video_id = e.video_id;
        series.task = model.task;
        series.frame_ids = seq.frame_ids;
        series.semantics = semantics_for(model.task);
        if (seq.frames() == 0) {
            ctx.warn(e.video_id + ": feature file has no frames; writing an empty prediction file");
            series.scores.resize(0, model.head.output_dim());
        } else {
            series.scores = model.head.forward(seq.values);
        }
        write_prediction_csv(series, out / (e.video_id + ".csv"));
        frames += series.frame_ids.size();
    }
    write_config_echo(ctx, out);
    ctx.out << "wrote " << model.task << " predictions for " << entries.size() << " videos (" << frames << " frames)\n";
}

}  // namespace

void register_predict(CLI::App& root, Context& ctx) {
    auto o = std::make_shared<PredictOptions>();
    CLI::App* sub = root.add_subcommand("predict", "Run a trained head over manifest features");
    sub->add_option("--config", "JSON file with option values; flags override it");
    sub->add_option("--model", o->model, "model.json written by train")->required();
    sub->add_option("--manifest", o->manifest, "Feature manifest")->required();
    sub->add_option("--out", o->out, "Output directory, one CSV per video")->required();
    sub->add_option("--kind", o->kind, "Override the feature kind recorded in the model");
    sub->add_option("--modality", o->modality, "Override the modality recorded in the model");
    sub->callback([o, sub, &ctx] {
        ctx.selected = sub;
        ctx.action = [o, &ctx] { run_predict(*o, ctx); };
    });
}

}  // namespace affect::cli
