#include <map>
#include <sstream>

#include <json.hpp>

#include "affect/compound.hpp"
#include "affect/csv.hpp"
#include "affect/head.hpp"
#include "common.hpp"

namespace affect::cli {

namespace {

struct ScoreOptions {
    std::vector<std::string> inputs;
    std::optional<std::string> semantics;
    std::string out;
};

struct ClusterOptions {
    std::vector<std::string> scores;
    std::optional<std::string> manifest;
    std::string space = "scores";
    int k = CompoundTarget::kNumClasses;
    std::uint64_t seed = 0;
    int max_iters = 100;
    std::optional<std::string> semantics;
    std::string out;
};

struct CandidateOptions {
    std::vector<std::string> candidates;
    std::string direction = "empirical_to_prior";
    std::string out;
};

/// Face-level scores turned into per-face probabilities.
FaceScoreFile load_probabilities(const fs::path& path, const std::optional<std::string>& semantics) {
    FaceScoreFile file = read_face_scores(path);
    if (semantics) file.semantics = parse_semantics(*semantics);
    if (file.semantics == ScoreSemantics::regressions) throw DataError(path.string() + ": CE scoring needs logits or probabilities");
    for (auto& f : file.frames) {
        if (f.per_face_scores.cols() != affectnet::kNumClasses)
            throw DataError(path.string() + ": CE scoring needs 8 AffectNet class scores per face");
        if (file.semantics == ScoreSemantics::logits) f.per_face_scores = activate<double>(f.per_face_scores, Activation::softmax);
    }
    return file;
}

std::string class_summary(const std::vector<int>& labels) {
    std::vector<int> counts(CompoundTarget::kNumClasses, 0);
    for (int y : labels) ++counts[static_cast<std::size_t>(y)];
    std::ostringstream s;
    for (int c = 0; c < CompoundTarget::kNumClasses; ++c)
        s << "  " << CompoundTarget::kClassNames[static_cast<std::size_t>(c)] << ' ' << counts[static_cast<std::size_t>(c)] << '\n';
    return s.str();
}

void run_score(const ScoreOptions& o, Context& ctx) {
    const fs::path out(o.out);
    std::vector<int> all;
    const auto files = expand_csv_inputs(o.inputs);
    for (const auto& f : files) {
        const FaceScoreFile file = load_probabilities(f, o.semantics);
        if (file.frames.empty()) {
            ctx.warn(f.string() + ": no frames");
            write_label_csv({}, {}, out / (file.video_id + ".csv"));
            continue;
        }
        const CompoundPrediction pred = predict_compound(file.frames, file.video_id);
        write_label_csv(pred.scores.frame_ids, pred.labels, out / (file.video_id + ".csv"));
        write_prediction_csv(pred.scores, out / "scores" / (file.video_id + ".csv"));
        all.insert(all.end(), pred.labels.begin(), pred.labels.end());
    }
    write_config_echo(ctx, out);
    ctx.out << "scored " << all.size() << " frames in " << files.size() << " videos\n" << class_summary(all);
}

void run_cluster(const ClusterOptions& o, Context& ctx) {
    if (o.space != "scores" && !o.manifest) throw ConfigError("--space " + o.space + " needs --manifest");
    std::vector<ManifestEntry> manifest;
    if (o.manifest) manifest = load_manifest(*o.manifest);
    auto entry_for = [&](const std::string& video, Modality m, FeatureKind k) {
        for (const auto& e : manifest)
            if (e.video_id == video && e.modality == m && e.kind == k) return e;
        throw DataError(video + ": manifest has no " + std::string(to_string(m)) + " " + std::string(to_string(k)) + " entry");
    };

    struct VideoRows {
        std::string video_id;
        std::vector<std::int64_t> frame_ids;
    };
    std::vector<VideoRows> videos;
    std::vector<Eigen::RowVectorXd> feature_rows, score_rows;

    for (const auto& f : expand_csv_inputs(o.scores)) {
        const FaceScoreFile file = load_probabilities(f, o.semantics);
        std::map<std::int64_t, Index> feature_row;
        FeatureSequence seq;
        if (o.space != "scores") {
            const auto entry = o.space == "embeddings" ? entry_for(file.video_id, Modality::visual, FeatureKind::embeddings)
                                                       : entry_for(file.video_id, Modality::acoustic, FeatureKind::embeddings);
            seq = frame_features(entry, manifest);
            for (std::size_t i = 0; i < seq.frame_ids.size(); ++i) feature_row[seq.frame_ids[i]] = static_cast<Index>(i);
        }
        VideoRows rows{file.video_id, {}};
        for (const auto& frame : file.frames) {
            const Eigen::VectorXd prob8 = aggregate_faces(frame);
            Eigen::RowVectorXd feature;
            if (o.space == "scores") {
                feature = prob8.transpose();
            } else {
                const auto hit = feature_row.find(frame.frame_id);
                if (hit == feature_row.end()) continue;
                feature = seq.values.row(hit->second);
            }
            rows.frame_ids.push_back(frame.frame_id);
            feature_rows.push_back(feature);
            score_rows.push_back(compound_scores(prob8).transpose());
        }
        videos.push_back(rows);
    }
    if (feature_rows.empty()) throw DataError("no frames to cluster");

    const Index n = static_cast<Index>(feature_rows.size());
    Eigen::MatrixXd x(n, feature_rows.front().size()), s(n, CompoundTarget::kNumClasses);
    for (Index i = 0; i < n; ++i) {
        x.row(i) = feature_rows[static_cast<std::size_t>(i)];
        s.row(i) = score_rows[static_cast<std::size_t>(i)];
    }
    ClusterModel model = kmeans(standardize_columns(x), o.k, o.seed, o.max_iters);
    const ClusterLabeling labeling = label_clusters(model, s);
    model.cluster_to_class = labeling.cluster_to_class;
    for (int c : labeling.empty_clusters) ctx.warn("cluster " + std::to_string(c) + " is empty and has no class");

    const fs::path out(o.out);
    std::vector<int> all;
    std::size_t offset = 0;
    for (const auto& v : videos) {
        std::vector<int> labels;
        for (std::size_t i = 0; i < v.frame_ids.size(); ++i)
            labels.push_back(*model.cluster_to_class[static_cast<std::size_t>(model.assignment[offset + i])]);
        offset += v.frame_ids.size();
        write_label_csv(v.frame_ids, labels, out / "labels" / (v.video_id + ".csv"));
        all.insert(all.end(), labels.begin(), labels.end());
    }

    nlohmann::json info;
    info["space"] = o.space;
    info["k"] = o.k;
    info["seed"] = o.seed;
    info["frames"] = n;
    info["iterations"] = model.iterations;
    info["inertia_history"] = model.inertia_history;
    info["cluster_sizes"] = model.cluster_sizes();
    nlohmann::json mapping = nlohmann::json::array();
    for (const auto& c : model.cluster_to_class) mapping.push_back(c ? nlohmann::json(*c) : nlohmann::json());
    info["cluster_to_class"] = mapping;
    info["empty_clusters"] = labeling.empty_clusters;
    csv::write_text(out / "clusters.json", info.dump(1) + "\n");
    write_config_echo(ctx, out);
    ctx.out << "clustered " << n << " frames on " << o.space << " into " << o.k << " clusters (" << model.iterations
            << " iterations, inertia " << fixed(model.inertia(), 4) << ")\n"
            << class_summary(all);
}

struct Candidate {
    std::string name;
    std::map<std::pair<std::string, std::int64_t>, int> labels;
};

std::vector<Candidate> load_candidates(const std::vector<std::string>& specs) {
    std::vector<Candidate> out;
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
            throw ConfigError("candidate '" + spec + "' must look like NAME=PATH");
        Candidate c{spec.substr(0, eq), {}};
        for (const auto& f : expand_csv_inputs({spec.substr(eq + 1)})) {
            const auto [frames, labels] = read_label_csv(f);
            for (std::size_t i = 0; i < frames.size(); ++i) c.labels[{f.stem().string(), frames[i]}] = labels[i];
        }
        if (c.labels.empty()) throw DataError("candidate " + c.name + " has no labels");
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<int> label_sequence(const Candidate& c) {
    std::vector<int> v;
    for (const auto& [key, label] : c.labels) v.push_back(label);
    return v;
}

void run_select(const CandidateOptions& o, Context& ctx) {
    KlDirection direction;
    if (o.direction == "empirical_to_prior")
        direction = KlDirection::empirical_to_prior;
    else if (o.direction == "prior_to_empirical")
        direction = KlDirection::prior_to_empirical;
    else
        throw ConfigError("unknown KL direction '" + o.direction + "'");

    const auto candidates = load_candidates(o.candidates);
    std::vector<std::vector<int>> sequences;
    for (const auto& c : candidates) sequences.push_back(label_sequence(c));
    const KlSelection sel = select_by_kl(sequences, direction);

    // Wide table: one row per model, one column per clustering variant.
    std::vector<std::string> columns{"scores", "cluster-scores", "cluster-embeddings", "cluster-audio"};
    std::vector<std::string> models;
    std::map<std::pair<std::string, std::string>, double> cell;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& name = candidates[i].name;
        const auto slash = name.rfind('/');
        const std::string model = slash == std::string::npos ? name : name.substr(0, slash);
        const std::string variant = slash == std::string::npos ? "scores" : name.substr(slash + 1);
        if (std::find(models.begin(), models.end(), model) == models.end()) models.push_back(model);
        if (std::find(columns.begin(), columns.end(), variant) == columns.end()) columns.push_back(variant);
        cell[{model, variant}] = sel.kl[i];
    }
    std::ostringstream table;
    table << "model";
    for (const auto& c : columns) table << ',' << c;
    table << '\n';
    for (const auto& m : models) {
        table << m;
        for (const auto& c : columns) {
            table << ',';
            const auto it = cell.find({m, c});
            if (it != cell.end()) table << fixed(it->second);
        }
        table << '\n';
    }

    std::ostringstream detail;
    detail << "candidate,kl,frames";
    for (const auto& name : CompoundTarget::kClassNames) detail << ',' << name;
    detail << '\n';
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        detail << candidates[i].name << ',' << csv::format_double(sel.kl[i]) << ',' << sequences[i].size();
        for (Index c = 0; c < sel.distributions[i].size(); ++c) detail << ',' << csv::format_double(sel.distributions[i](c));
        detail << '\n';
    }

    const fs::path out(o.out);
    csv::write_text(out / "kl_table.csv", table.str());
    csv::write_text(out / "kl_candidates.csv", detail.str());
    const std::string chosen = "selected " + candidates[sel.index].name + " (KL " + fixed(sel.kl[sel.index]) + ")\n";
    csv::write_text(out / "selection.txt", chosen);
    write_config_echo(ctx, out);
    ctx.out << table.str() << chosen;
}

void run_kappa(const CandidateOptions& o, Context& ctx) {
    const auto candidates = load_candidates(o.candidates);
    if (candidates.size() < 2) throw ConfigError("kappa needs at least two candidates");
    std::vector<std::vector<int>> sequences;
    std::vector<std::string> names;
    for (const auto& c : candidates) {
        if (c.labels.size() != candidates.front().labels.size() ||
            !std::equal(c.labels.begin(), c.labels.end(), candidates.front().labels.begin(),
                        [](const auto& a, const auto& b) { return a.first == b.first; }))
            throw DataError("candidate " + c.name + " does not cover the same frames as " + candidates.front().name);
        sequences.push_back(label_sequence(c));
        names.push_back(c.name);
    }
    const Eigen::MatrixXd kappa = kappa_matrix(sequences);

    std::ostringstream table;
    table << "model";
    for (const auto& n : names) table << ',' << n;
    table << '\n';
    for (Index i = 0; i < kappa.rows(); ++i) {
        table << names[static_cast<std::size_t>(i)];
        for (Index j = 0; j < kappa.cols(); ++j) table << ',' << fixed(kappa(i, j), 4);
        table << '\n';
    }
    const fs::path out(o.out);
    csv::write_text(out / "kappa.csv", table.str());
    csv::write_text(out / "kappa.svg", render_kappa_svg(kappa, names));
    write_config_echo(ctx, out);
    ctx.out << table.str();
}

}  // namespace

void register_ce(CLI::App& root, Context& ctx) {
    CLI::App* ce = root.add_subcommand("ce", "Zero-shot compound expression tools");
    ce->require_subcommand(1);

    auto so = std::make_shared<ScoreOptions>();
    CLI::App* score = ce->add_subcommand("score", "Compound labels from 8-class face scores");
    score->add_option("--config", "JSON file with option values; flags override it");
    score->add_option("--input", so->inputs, "Face-level score CSV files or directories")->required();
    score->add_option("--semantics", so->semantics, "Override the sidecar: logits or probabilities");
    score->add_option("--out", so->out, "Output directory")->required();
    score->callback([so, score, &ctx] {
        ctx.selected = score;
        ctx.action = [so, &ctx] { run_score(*so, ctx); };
    });

    auto co = std::make_shared<ClusterOptions>();
    CLI::App* cluster = ce->add_subcommand("cluster", "K-means compound labels");
    cluster->add_option("--config", "JSON file with option values; flags override it");
    cluster->add_option("--scores", co->scores, "Face-level score CSV files or directories")->required();
    cluster->add_option("--manifest", co->manifest, "Feature manifest (embeddings and audio spaces)");
    cluster->add_option("--space", co->space, "Clustering features: scores, embeddings or audio")
        ->check(CLI::IsMember({"scores", "embeddings", "audio"}));
    cluster->add_option("--k", co->k, "Number of clusters");
    cluster->add_option("--seed", co->seed, "Seed for k-means++ initialization");
    cluster->add_option("--max-iters", co->max_iters, "Iteration cap");
    cluster->add_option("--semantics", co->semantics, "Override the sidecar: logits or probabilities");
    cluster->add_option("--out", co->out, "Output directory")->required();
    cluster->callback([co, cluster, &ctx] {
        ctx.selected = cluster;
        ctx.action = [co, &ctx] { run_cluster(*co, ctx); };
    });

    auto sel = std::make_shared<CandidateOptions>();
    CLI::App* select = ce->add_subcommand("select", "Rank candidate labelings by class-balance KL");
    select->add_option("--config", "JSON file with option values; flags override it");
    select->add_option("--candidate", sel->candidates, "MODEL/VARIANT=PATH label directories or files")->required();
    select->add_option("--direction", sel->direction, "empirical_to_prior or prior_to_empirical")
        ->check(CLI::IsMember({"empirical_to_prior", "prior_to_empirical"}));
    select->add_option("--out", sel->out, "Output directory")->required();
    select->callback([sel, select, &ctx] {
        ctx.selected = select;
        ctx.action = [sel, &ctx] { run_select(*sel, ctx); };
    });

    auto ko = std::make_shared<CandidateOptions>();
    CLI::App* kappa = ce->add_subcommand("kappa", "Pairwise Cohen's kappa with an SVG heatmap");
    kappa->add_option("--config", "JSON file with option values; flags override it");
    kappa->add_option("--candidate", ko->candidates, "NAME=PATH label directories or files")->required();
    kappa->add_option("--out", ko->out, "Output directory")->required();
    kappa->callback([ko, kappa, &ctx] {
        ctx.selected = kappa;
        ctx.action = [ko, &ctx] { run_kappa(*ko, ctx); };
    });
}

}  // namespace affect::cli
