#include <map>

#include "common.hpp"

namespace affect::cli {

namespace {

struct SmoothOptions {
    std::vector<std::string> inputs;
    std::optional<int> window;
    std::string out;
};

struct FuseOptions {
    std::vector<std::string> a;
    std::vector<std::string> b;
    double weight = 0.5;
    std::string out;
};

void run_smooth(const SmoothOptions& o, Context& ctx) {
    const auto files = expand_csv_inputs(o.inputs);
    if (o.window && *o.window % 2 == 0 && *o.window != 50)
        throw ConfigError("even window " + std::to_string(*o.window) + " is not supported");
    const fs::path out(o.out);
    for (const auto& f : files) {
        const PredictionSeries series = read_prediction_csv(f);
        const int window = o.window.value_or(default_window(series.task));
        if (series.frames() == 0) {
            ctx.warn(f.string() + ": empty prediction file copied unchanged");
            write_prediction_csv(series, out / f.filename());
            continue;
        }
        write_prediction_csv(box_smooth(series, window), out / f.filename());
    }
    write_config_echo(ctx, out);
    ctx.out << "smoothed " << files.size() << " prediction files\n";
}

void run_fuse(const FuseOptions& o, Context& ctx) {
    if (!(o.weight >= 0.0 && o.weight <= 1.0)) throw ConfigError("--weight must lie in [0, 1]");
    std::map<std::string, fs::path> b_files;
    for (const auto& f : expand_csv_inputs(o.b)) b_files[read_prediction_csv(f).video_id] = f;
    const auto a_files = expand_csv_inputs(o.a);
    const fs::path out(o.out);
    for (const auto& f : a_files) {
        const PredictionSeries a = to_probabilities(read_prediction_csv(f));
        const auto it = b_files.find(a.video_id);
        if (it == b_files.end()) throw DataError(a.video_id + ": no matching prediction in the second input");
        const PredictionSeries b = to_probabilities(read_prediction_csv(it->second));
        write_prediction_csv(blend(a, b, o.weight), out / f.filename());
    }
    write_config_echo(ctx, out);
    ctx.out << "fused " << a_files.size() << " prediction files with weight " << o.weight << '\n';
}

}  // namespace

void register_smooth(CLI::App& root, Context& ctx) {
    auto o = std::make_shared<SmoothOptions>();
    CLI::App* sub = root.add_subcommand("smooth", "Box-filter prediction files over time");
    sub->add_option("--config", "JSON file with option values; flags override it");
    sub->add_option("--input", o->inputs, "Prediction CSV files or directories")->required();
    sub->add_option("--window", o->window, "Window in frames: odd, or 50 (default: 5 for AU, 50 otherwise)");
    sub->add_option("--out", o->out, "Output directory")->required();
    sub->callback([o, sub, &ctx] {
        ctx.selected = sub;
        ctx.action = [o, &ctx] { run_smooth(*o, ctx); };
    });
}

void register_fuse(CLI::App& root, Context& ctx) {
    auto o = std::make_shared<FuseOptions>();
    CLI::App* sub = root.add_subcommand("fuse", "Blend two sets of predictions frame by frame");
    sub->add_option("--config", "JSON file with option values; flags override it");
    sub->add_option("--a", o->a, "First prediction set (weight w)")->required();
    sub->add_option("--b", o->b, "Second prediction set (weight 1 - w)")->required();
    sub->add_option("--weight", o->weight, "Blend weight of the first set");
    sub->add_option("--out", o->out, "Output directory")->required();
    sub->callback([o, sub, &ctx] {
        ctx.selected = sub;
        ctx.action = [o, &ctx] { run_fuse(*o, ctx); };
    });
}

}  // namespace affect::cli
