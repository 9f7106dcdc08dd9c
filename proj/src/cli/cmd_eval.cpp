#include <algorithm>
#include <map>
#include <sstream>

#include "affect/csv.hpp"
#include "affect/metrics.hpp"
#include "common.hpp"

namespace affect::cli {

namespace {

struct EvalOptions {
    std::string task;
    std::vector<std::string> predictions;
    std::string manifest;
    std::string remap = "none";
    double threshold = 0.5;
    int classes = 8;
    std::string out;
};

using Report = std::vector<std::pair<std::string, double>>;

struct Joined {
    Eigen::MatrixXd scores;
    Eigen::MatrixXd truth;
};

void append_rows(Joined& j, const Eigen::MatrixXd& s, const Eigen::MatrixXd& t) {
    if (j.scores.size() > 0 && j.scores.cols() != s.cols()) throw DataError("prediction width differs between files");
    Eigen::MatrixXd ns(j.scores.rows() + s.rows(), s.cols()), nt(j.truth.rows() + t.rows(), t.cols());
    ns << j.scores, s;
    nt << j.truth, t;
    j.scores = std::move(ns);
    j.truth = std::move(nt);
}

std::map<std::string, fs::path> label_paths(const std::string& manifest_path) {
    std::map<std::string, fs::path> out;
    for (const auto& e : load_manifest(manifest_path))
        if (e.label_path && out.count(e.video_id) == 0) out[e.video_id] = *e.label_path;
    return out;
}

Joined join_frames(const EvalOptions& o, Task task) {
    const auto paths = label_paths(o.manifest);
    std::map<fs::path, LabelSet> cache;
    Joined joined;
    for (const auto& f : expand_csv_inputs(o.predictions)) {
        const PredictionSeries pred = read_prediction_csv(f);
        const auto lp = paths.find(pred.video_id);
        if (lp == paths.end()) throw DataError(pred.video_id + ": no label file in the manifest");
        auto it = cache.find(lp->second);
        if (it == cache.end()) it = cache.emplace(lp->second, load_labels(lp->second, task, task == Task::EXPR ? o.classes : 0)).first;
        const LabelSet& labels = it->second;
        std::map<std::int64_t, Index> row_of;
        for (std::size_t i = 0; i < labels.frame_ids.size(); ++i) row_of[labels.frame_ids[i]] = static_cast<Index>(i);
        std::vector<Index> pr, lr;
        for (std::size_t i = 0; i < pred.frame_ids.size(); ++i) {
            const auto hit = row_of.find(pred.frame_ids[i]);
            if (hit == row_of.end() || labels.ignored(hit->second)) continue;
            pr.push_back(static_cast<Index>(i));
            lr.push_back(hit->second);
        }
        append_rows(joined, pred.scores(pr, Eigen::all), labels.targets(lr, Eigen::all));
    }
    if (joined.scores.rows() == 0) throw DataError("no prediction frames match labeled frames");
    return joined;
}

Report eval_va(const EvalOptions& o) {
    const Joined j = join_frames(o, Task::VA);
    if (j.scores.cols() != 2) throw DataError("VA predictions need 2 columns");
    double c[2];
    Index frames = 0;
    for (Index col = 0; col < 2; ++col) {
        std::vector<Index> rows;
        for (Index i = 0; i < j.truth.rows(); ++i)
            if (j.truth(i, col) >= -1.0 && j.truth(i, col) <= 1.0) rows.push_back(i);
        c[col] = ccc(j.scores(rows, col), j.truth(rows, col));
        frames = std::max<Index>(frames, static_cast<Index>(rows.size()));
    }
    return {{"CCC_V", c[0]}, {"CCC_A", c[1]}, {"P_VA", 0.5 * (c[0] + c[1])}, {"frames", static_cast<double>(frames)}};
}

Report eval_expr(const EvalOptions& o) {
    const Joined j = join_frames(o, Task::EXPR);
    std::vector<int> truth;
    for (Index i = 0; i < j.truth.rows(); ++i) truth.push_back(static_cast<int>(j.truth(i, 0)));
    std::vector<int> pred;
    int classes = static_cast<int>(j.scores.cols());
    if (o.remap == "none") {
        for (Index i = 0; i < j.scores.rows(); ++i) pred.push_back(static_cast<int>(argmax(j.scores.row(i))));
    } else {
        const RemapStrategy strategy = parse_remap_strategy(o.remap);
        const RemappedLabels r = remap_expr(j.scores, truth, strategy);
        pred = r.pred;
        truth = r.truth;
        classes = strategy == RemapStrategy::drop_both ? affwild2::kOther : affwild2::kOther + 1;
        if (truth.empty()) throw DataError("no frames left after remapping");
    }
    for (int t : truth)
        if (t >= classes) throw DataError("truth label " + std::to_string(t) + " outside the predicted class set");
    return {{"macro_F1", macro_f1(pred, truth, classes)},
            {"accuracy", accuracy(pred, truth)},
            {"frames", static_cast<double>(truth.size())}};
}

Report eval_au(const EvalOptions& o) {
    const Joined j = join_frames(o, Task::AU);
    if (j.scores.cols() != j.truth.cols()) throw DataError("AU predictions and labels have different unit counts");
    const Eigen::MatrixXi pred = (j.scores.array() >= o.threshold).cast<int>();
    const Eigen::MatrixXi truth = j.truth.cast<int>();
    Report r{{"macro_F1", multilabel_macro_f1(pred, truth)}};
    for (Index a = 0; a < truth.cols(); ++a)
        r.emplace_back("F1_unit" + std::to_string(a), multilabel_macro_f1(pred.col(a), truth.col(a)));
    r.emplace_back("frames", static_cast<double>(truth.rows()));
    return r;
}

Report eval_emi(const EvalOptions& o) {
    const auto paths = label_paths(o.manifest);
    std::map<fs::path, LabelSet> cache;
    std::vector<Eigen::VectorXd> preds, truths;
    for (const auto& f : expand_csv_inputs(o.predictions)) {
        for (const auto& [video, values] : read_emi_csv(f)) {
            const auto lp = paths.find(video);
            if (lp == paths.end()) throw DataError(video + ": no label file in the manifest");
            auto it = cache.find(lp->second);
            if (it == cache.end()) it = cache.emplace(lp->second, load_labels(lp->second, Task::EMI, 0)).first;
            const auto& ids = it->second.video_ids;
            const auto row = std::find(ids.begin(), ids.end(), video);
            if (row == ids.end()) continue;
            const Eigen::VectorXd truth = it->second.targets.row(row - ids.begin()).transpose();
            if ((truth.array() < 0).any()) continue;
            if (values.size() != truth.size()) throw DataError(video + ": EMI prediction has the wrong width");
            preds.push_back(values);
            truths.push_back(truth);
        }
    }
    if (preds.size() < 2) throw DataError("EMI evaluation needs at least 2 labeled videos");
    const Index n = static_cast<Index>(preds.size());
    Eigen::MatrixXd p(n, 6), t(n, 6);
    for (Index i = 0; i < n; ++i) {
        p.row(i) = preds[static_cast<std::size_t>(i)].transpose();
        t.row(i) = truths[static_cast<std::size_t>(i)].transpose();
    }
    Report r;
    double sum = 0;
    for (Index c = 0; c < 6; ++c) {
        const double rho = pcc(p.col(c), t.col(c));
        r.emplace_back(std::string(kEmiCategories[static_cast<std::size_t>(c)]), rho);
        sum += rho;
    }
    r.emplace_back("mean_rho", sum / 6.0);
    r.emplace_back("videos", static_cast<double>(n));
    return r;
}

void run_eval(const EvalOptions& o, Context& ctx) {
    const Task task = parse_task(o.task);
    if (o.remap != "none" && task != Task::EXPR) throw ConfigError("--remap applies to expr only");
    if (o.remap != "none") parse_remap_strategy(o.remap);
    Report report;
    switch (task) {
        case Task::VA: report = eval_va(o); break;
        case Task::EXPR: report = eval_expr(o); break;
        case Task::AU: report = eval_au(o); break;
        case Task::EMI: report = eval_emi(o); break;
        case Task::CE: throw ConfigError("CE has no labels to evaluate against; use ce select or ce kappa");
    }

    std::ostringstream csv_text, text;
    csv_text << "metric,value\n";
    text << to_string(task) << " evaluation";
    if (o.remap != "none") text << " (remap " << o.remap << ")";
    text << '\n';
    std::size_t width = 0;
    for (const auto& entry : report) width = std::max(width, entry.first.size());
    for (const auto& [name, value] : report) {
        const bool count = name == "frames" || name == "videos";
        csv_text << name << ',' << (count ? std::to_string(static_cast<long>(value)) : csv::format_double(value)) << '\n';
        text << "  " << name << std::string(width + 2 - name.size(), ' ')
             << (count ? std::to_string(static_cast<long>(value)) : fixed(value, 4)) << '\n';
    }
    const fs::path out(o.out);
    csv::write_text(out / "report.csv", csv_text.str());
    csv::write_text(out / "report.txt", text.str());
    write_config_echo(ctx, out);
    ctx.out << text.str();
}

}  // namespace

void register_eval(CLI::App& root, Context& ctx) {
    auto o = std::make_shared<EvalOptions>();
    CLI::App* sub = root.add_subcommand("eval", "Score predictions against manifest labels");
    sub->add_option("--config", "JSON file with option values; flags override it");
    sub->add_option("--task", o->task, "va, expr, au or emi")->required()->check(CLI::IsMember({"va", "expr", "au", "emi"}));
    sub->add_option("--predictions", o->predictions, "Prediction CSV files or directories")->required();
    sub->add_option("--manifest", o->manifest, "Manifest whose entries carry label paths")->required();
    sub->add_option("--remap", o->remap, "none, contempt_to_other or drop_both (AffectNet-ordered expr scores)")
        ->check(CLI::IsMember({"none", "contempt_to_other", "drop_both"}));
    sub->add_option("--threshold", o->threshold, "AU decision threshold");
    sub->add_option("--classes", o->classes, "Expression classes in the label files");
    sub->add_option("--out", o->out, "Output directory for report.csv and report.txt")->required();
    sub->callback([o, sub, &ctx] {
        ctx.selected = sub;
        ctx.action = [o, &ctx] { run_eval(*o, ctx); };
    });
}

}  // namespace affect::cli
