#include <map>
#include <sstream>

#include <json.hpp>

#include "affect/csv.hpp"
#include "affect/model_io.hpp"
#include "affect/train.hpp"
#include "common.hpp"

namespace affect::cli {

namespace {

struct TrainOptions {
    std::string task;
    std::string manifest;
    std::string out;
    std::optional<std::string> kind;
    std::string modality = "visual";
    std::optional<std::string> topology;
    std::optional<int> hidden;
    std::optional<int> epochs;
    std::optional<int> batch_size;
    std::optional<double> lr;
    std::uint64_t seed = 0;
    int classes = 8;
};

FeatureKind default_kind(TrainTask task) {
    return task == TrainTask::VA || task == TrainTask::EMI ? FeatureKind::logits : FeatureKind::embeddings;
}

Task label_task(TrainTask t) {
    switch (t) {
        case TrainTask::VA: return Task::VA;
        case TrainTask::EXPR: return Task::EXPR;
        case TrainTask::AU: return Task::AU;
        case TrainTask::EMI: return Task::EMI;
        case TrainTask::MT_STATIC: break;
    }
    throw ConfigError("task is not available from the command line");
}

struct TrainingData {
    Eigen::MatrixXd x;
    Eigen::MatrixXd y;
    std::size_t videos = 0;
};

void append(TrainingData& data, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    if (data.x.size() > 0 && data.x.cols() != x.cols()) throw DataError("feature dimension differs between videos");
    if (data.y.size() > 0 && data.y.cols() != y.cols()) throw DataError("label width differs between videos");
    Eigen::MatrixXd nx(data.x.rows() + x.rows(), x.cols()), ny(data.y.rows() + y.rows(), y.cols());
    nx << data.x, x;
    ny << data.y, y;
    data.x = std::move(nx);
    data.y = std::move(ny);
}

TrainingData assemble(const TrainOptions& o, TrainTask task, FeatureKind kind, Modality modality, Context& ctx) {
    const auto manifest = load_manifest(o.manifest);
    const auto entries = select_entries(manifest, modality, kind);
    const Task ltask = label_task(task);

    std::vector<std::string> missing;
    for (const auto& e : entries) {
        const auto lp = label_path_for(e, manifest);
        if (!lp)
            missing.push_back(e.video_id + " (no label_path)");
        else if (!fs::exists(*lp))
            missing.push_back(lp->string());
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += "\n  " + m;
        throw DataError("missing label files:" + list);
    }

    std::map<fs::path, LabelSet> label_cache;
    auto labels_for = [&](const fs::path& p) -> const LabelSet& {
        auto it = label_cache.find(p);
        if (it == label_cache.end()) it = label_cache.emplace(p, load_labels(p, ltask, ltask == Task::EXPR ? o.classes : 0)).first;
        return it->second;
    };

    TrainingData data;
    for (const auto& e : entries) {
        const LabelSet& labels = labels_for(*label_path_for(e, manifest));
        if (task == TrainTask::EMI) {
            const FeatureSequence seq = load_feature_sequence(e);
            const auto it = std::find(labels.video_ids.begin(), labels.video_ids.end(), e.video_id);
            if (it == labels.video_ids.end()) throw DataError(e.video_id + ": no EMI label row");
            const Index row = it - labels.video_ids.begin();
            if (labels.ignored(row) || (labels.targets.row(row).array() < 0).any()) {
                ctx.warn(e.video_id + ": EMI label has invalid cells, skipped");
                continue;
            }
            append(data, stat_pool(seq).transpose(), labels.targets.row(row));
            ++data.videos;
            continue;
        }
        const FeatureSequence seq = frame_features(e, manifest);
        std::map<std::int64_t, Index> label_row;
        for (std::size_t i = 0; i < labels.frame_ids.size(); ++i) label_row[labels.frame_ids[i]] = static_cast<Index>(i);
        std::vector<Index> feat_rows, targ_rows;
        for (std::size_t i = 0; i < seq.frame_ids.size(); ++i) {
            const auto it = label_row.find(seq.frame_ids[i]);
            if (it == label_row.end()) continue;
            feat_rows.push_back(static_cast<Index>(i));
            targ_rows.push_back(it->second);
        }
        if (feat_rows.empty()) {
            ctx.warn(e.video_id + ": no labeled frames");
            continue;
        }
        append(data, seq.values(feat_rows, Eigen::all), labels.targets(targ_rows, Eigen::all));
        ++data.videos;
    }
    if (data.x.rows() == 0) throw DataError("no training samples after joining features and labels");
    return data;
}

void run_train(const TrainOptions& o, Context& ctx) {
    const TrainTask task = parse_train_task(o.task);
    const Modality modality = parse_modality(o.modality);
    const FeatureKind kind = o.kind ? parse_feature_kind(*o.kind) : default_kind(task);

    TrainConfig config = default_train_config(task);
    if (task == TrainTask::EMI && (kind == FeatureKind::embeddings || modality == Modality::acoustic))
        config.topology = Topology::mlp;
    if (o.topology) config.topology = parse_topology(*o.topology);
    if (o.hidden) config.hidden_units = *o.hidden;
    if (o.epochs) config.epochs = *o.epochs;
    if (o.batch_size) config.batch_size = *o.batch_size;
    if (o.lr) config.adam.learning_rate = *o.lr;
    config.seed = o.seed;
    if (task == TrainTask::EXPR) config.output_dim = o.classes;
    validate(config);

    const TrainingData data = assemble(o, task, kind, modality, ctx);
    const auto result = train_head<double>(data.x, data.y, config);

    nlohmann::json echo;
    echo["task"] = std::string(to_string(task));
    echo["loss"] = std::string(to_string(config.loss));
    echo["topology"] = std::string(to_string(config.topology));
    echo["activation"] = std::string(to_string(config.activation));
    echo["hidden_units"] = config.hidden_units;
    echo["epochs"] = config.epochs;
    echo["batch_size"] = config.batch_size;
    echo["learning_rate"] = config.adam.learning_rate;
    echo["seed"] = config.seed;
    echo["feature_kind"] = std::string(to_string(kind));
    echo["modality"] = std::string(to_string(modality));
    echo["pooling"] = task == TrainTask::EMI ? "stat" : "none";
    echo["samples"] = data.x.rows();
    echo["videos"] = data.videos;
    const auto& cw = result.weights.class_weights.weights;
    if (cw.size() > 0) echo["class_weights"] = std::vector<double>(cw.data(), cw.data() + cw.size());
    const auto& uw = result.weights.unit_weights;
    if (uw.size() > 0) echo["unit_weights"] = std::vector<double>(uw.data(), uw.data() + uw.size());

    const fs::path out(o.out);
    save_head(StoredModel{std::string(to_string(task)), result.head, echo}, out / "model.json");
    std::ostringstream history;
    history << "epoch,loss\n";
    for (std::size_t i = 0; i < result.history.size(); ++i)
        history << i + 1 << ',' << csv::format_double(result.history[i]) << '\n';
    csv::write_text(out / "history.csv", history.str());
    write_config_echo(ctx, out);

    ctx.out << "trained " << to_string(task) << " head (" << to_string(config.topology) << ", " << data.x.cols()
            << " inputs) on " << data.x.rows() << " samples from " << data.videos << " videos; final loss "
            << fixed(result.history.back()) << '\n';
}

}  // namespace

void register_train(CLI::App& root, Context& ctx) {
    auto o = std::make_shared<TrainOptions>();
    CLI::App* sub = root.add_subcommand("train", "Train a head on manifest features and labels");
    sub->add_option("--config", "JSON file with option values; flags override it");
    sub->add_option("--task", o->task, "va, expr, au or emi")->required()->check(CLI::IsMember({"va", "expr", "au", "emi"}));
    sub->add_option("--manifest", o->manifest, "Feature manifest with label paths")->required();
    sub->add_option("--out", o->out, "Output directory for model.json and history.csv")->required();
    sub->add_option("--kind", o->kind, "Feature kind: embeddings or logits (task default)");
    sub->add_option("--modality", o->modality, "visual or acoustic");
    sub->add_option("--topology", o->topology, "linear or mlp (task default)");
    sub->add_option("--hidden", o->hidden, "Hidden units of the mlp head");
    sub->add_option("--epochs", o->epochs, "Training epochs (task default)");
    sub->add_option("--batch-size", o->batch_size, "Mini-batch size");
    sub->add_option("--lr", o->lr, "Adam learning rate");
    sub->add_option("--seed", o->seed, "Seed for initialization and shuffling");
    sub->add_option("--classes", o->classes, "Number of expression classes");
    sub->callback([o, sub, &ctx] {
        ctx.selected = sub;
        ctx.action = [o, &ctx] { run_train(*o, ctx); };
    });
}

}  // namespace affect::cli
