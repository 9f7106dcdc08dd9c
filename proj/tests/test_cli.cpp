#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "affect/cli.hpp"
#include "affect/compound.hpp"
#include "affect/postprocess.hpp"
#include "oracles.hpp"

using namespace affect;
namespace fs = std::filesystem;
using Mat = Eigen::MatrixXd;

namespace {

const fs::path kMini = AFFECT_MINI_DATASET;
const fs::path kTmp = AFFECT_TEST_TMP;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run affectkit(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

std::string mini(const std::string& name) { return (kMini / name).string(); }

PredictionSeries series(const std::string& video, const std::string& task, const Mat& scores, ScoreSemantics sem) {
    PredictionSeries s;
    s.video_id = video;
    s.task = task;
    s.scores = scores;
    s.semantics = sem;
    for (Index i = 0; i < scores.rows(); ++i) s.frame_ids.push_back(i);
    return s;
}

/// Manifest with one visual logits entry pointing at the mini features and the given labels.
fs::path label_manifest(const fs::path& dir, const std::string& video, const fs::path& labels) {
    nlohmann::json e{{"video_id", video},
                     {"modality", "visual"},
                     {"kind", "logits"},
                     {"dim", 8},
                     {"fps", 25.0},
                     {"feature_path", (kMini / "features" / "vid00_visual_logits.csv").string()},
                     {"label_path", labels.string()}};
    const fs::path p = dir / "manifest.json";
    write(p, nlohmann::json{{"entries", {e}}}.dump());
    return p;
}

double report_value(const fs::path& report, const std::string& metric) {
    std::istringstream in(slurp(report));
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(metric + ",", 0) == 0) return std::stod(line.substr(metric.size() + 1));
    FAIL("metric " << metric << " not in report");
    return 0;
}

std::string label_dir_csv(const std::vector<int>& labels) {
    std::ostringstream s;
    s << "frame_id,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) s << i << ',' << labels[i] << '\n';
    return s.str();
}

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(affectkit({"--help"}).code == 0);
    CHECK(affectkit({"train", "--help"}).code == 0);
    CHECK(affectkit({}).code == cli::kConfigError);
    CHECK(affectkit({"frobnicate"}).code == cli::kConfigError);
    const Run r = affectkit({"train", "--task", "va"});
    CHECK(r.code == cli::kConfigError);
    CHECK(r.err.find("--manifest") != std::string::npos);
    CHECK(affectkit({"train", "--task", "mood", "--manifest", "m", "--out", "o"}).code == cli::kConfigError);
}

TEST_CASE("train rejects bad hyperparameters before touching data") {
    const Run r = affectkit({"train", "--task", "va", "--manifest", "does_not_exist.json", "--out",
                             (kTmp / "never").string(), "--epochs", "0"});
    CHECK(r.code == cli::kConfigError);
    CHECK(!fs::exists(kTmp / "never"));
    CHECK(affectkit({"train", "--task", "expr", "--manifest", mini("manifest_expr.json"), "--out",
                     (kTmp / "never").string(), "--lr", "-1"})
              .code == cli::kConfigError);
}

TEST_CASE("missing label files are listed") {
    const fs::path dir = oracle::fresh_dir(kTmp / "missing");
    nlohmann::json entries = nlohmann::json::array();
    for (const std::string v : {"vid00", "vid01"})
        entries.push_back({{"video_id", v},
                           {"modality", "visual"},
                           {"kind", "embeddings"},
                           {"dim", 16},
                           {"fps", 25.0},
                           {"feature_path", (kMini / "features" / (v + "_visual_embeddings.csv")).string()},
                           {"label_path", "nowhere_" + v + ".csv"}});
    write(dir / "manifest.json", nlohmann::json{{"entries", entries}}.dump());
    const Run r = affectkit({"train", "--task", "expr", "--manifest", (dir / "manifest.json").string(), "--out",
                             (dir / "model").string()});
    CHECK(r.code == cli::kDataError);
    CHECK(r.err.find("nowhere_vid00.csv") != std::string::npos);
    CHECK(r.err.find("nowhere_vid01.csv") != std::string::npos);
}

TEST_CASE("train, predict and a feature width mismatch") {
    const fs::path dir = oracle::fresh_dir(kTmp / "va");
    const Run t = affectkit({"train", "--task", "va", "--manifest", mini("manifest_va.json"), "--out",
                             (dir / "model").string(), "--epochs", "5"});
    REQUIRE(t.code == 0);
    CHECK(fs::exists(dir / "model" / "model.json"));
    CHECK(slurp(dir / "model" / "history.csv").rfind("epoch,loss\n1,", 0) == 0);

    const Run p = affectkit({"predict", "--model", (dir / "model" / "model.json").string(), "--manifest",
                             mini("manifest_va.json"), "--out", (dir / "pred").string()});
    REQUIRE(p.code == 0);
    const PredictionSeries s = read_prediction_csv(dir / "pred" / "vid01.csv");
    CHECK(s.frames() == 200);
    CHECK(s.classes() == 2);
    CHECK(s.task == "va");
    CHECK(s.semantics == ScoreSemantics::regressions);
    CHECK(s.scores.cwiseAbs().maxCoeff() <= 1.0);

    // The model was trained on 8 logits; embeddings have 16 columns.
    const Run bad = affectkit({"predict", "--model", (dir / "model" / "model.json").string(), "--manifest",
                               mini("manifest_va.json"), "--kind", "embeddings", "--out", (dir / "bad").string()});
    CHECK(bad.code == cli::kDataError);
}

TEST_CASE("re-running with the same seed is byte-identical") {
    const fs::path dir = oracle::fresh_dir(kTmp / "repeat");
    for (const std::string run : {"a", "b"}) {
        REQUIRE(affectkit({"train", "--task", "expr", "--manifest", mini("manifest_expr.json"), "--out",
                           (dir / run / "model").string(), "--epochs", "3", "--seed", "7"})
                    .code == 0);
        REQUIRE(affectkit({"predict", "--model", (dir / run / "model" / "model.json").string(), "--manifest",
                           mini("manifest_expr.json"), "--out", (dir / run / "pred").string()})
                    .code == 0);
    }
    CHECK(slurp(dir / "a" / "model" / "model.json") == slurp(dir / "b" / "model" / "model.json"));
    CHECK(slurp(dir / "a" / "model" / "history.csv") == slurp(dir / "b" / "model" / "history.csv"));
    CHECK(slurp(dir / "a" / "pred" / "vid02.csv") == slurp(dir / "b" / "pred" / "vid02.csv"));

    REQUIRE(affectkit({"train", "--task", "expr", "--manifest", mini("manifest_expr.json"), "--out",
                       (dir / "c" / "model").string(), "--epochs", "3", "--seed", "8"})
                .code == 0);
    CHECK(slurp(dir / "a" / "model" / "model.json") != slurp(dir / "c" / "model" / "model.json"));
}

TEST_CASE("config files merge under command-line flags") {
    const fs::path dir = oracle::fresh_dir(kTmp / "config");
    write(dir / "bad.json", R"({"task": "va", "manifest": ")" + mini("manifest_va.json") + R"(", "epochs": 0})");
    CHECK(affectkit({"train", "--config", (dir / "bad.json").string(), "--out", (dir / "x").string()}).code ==
          cli::kConfigError);

    // The flag wins over the file's epochs value.
    const Run r = affectkit({"train", "--config", (dir / "bad.json").string(), "--epochs", "2", "--batch-size", "64",
                             "--out", (dir / "m1").string()});
    REQUIRE(r.code == 0);
    const auto echo = nlohmann::json::parse(slurp(dir / "m1" / "resolved_config.json"));
    CHECK(echo.at("command") == "train");
    CHECK(echo.at("options").at("epochs") == "2");
    CHECK(echo.at("options").at("batch-size") == "64");
    CHECK(echo.at("options").at("task") == "va");
    CHECK(echo.at("options").at("modality") == "visual");
    CHECK(echo.at("options").count("config") == 0);

    // The echo re-runs to the same model when pointed elsewhere.
    REQUIRE(affectkit({"train", "--config", (dir / "m1" / "resolved_config.json").string(), "--out",
                       (dir / "m2").string()})
                .code == 0);
    CHECK(slurp(dir / "m1" / "model.json") == slurp(dir / "m2" / "model.json"));

    write(dir / "broken.json", "{not json");
    CHECK(affectkit({"train", "--config", (dir / "broken.json").string()}).code == cli::kConfigError);
    CHECK(affectkit({"train", "--config", (dir / "absent.json").string()}).code == cli::kConfigError);
}

TEST_CASE("smooth writes the box-filtered series") {
    const fs::path dir = oracle::fresh_dir(kTmp / "smooth");
    Mat x(5, 2);
    x << 0, 1, 0, 1, 3, 1, 0, 1, 0, 1;
    write_prediction_csv(series("v", "va", x, ScoreSemantics::regressions), dir / "in" / "v.csv");
    REQUIRE(affectkit({"smooth", "--input", (dir / "in").string(), "--window", "3", "--out", (dir / "out").string()})
                .code == 0);
    const PredictionSeries s = read_prediction_csv(dir / "out" / "v.csv");
    Mat expected(5, 2);
    expected << 0, 1, 1, 1, 1, 1, 1, 1, 0, 1;
    CHECK((s.scores - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s.smoothing_window == 3);

    Mat spike(5, 1);
    spike << 0, 0, 3, 0, 0;
    write_prediction_csv(series("spike", "au", spike, ScoreSemantics::regressions), dir / "spike" / "spike.csv");
    REQUIRE(affectkit({"smooth", "--input", (dir / "spike").string(), "--window", "5", "--out",
                       (dir / "spike_out").string()})
                .code == 0);
    Mat hand(5, 1);
    hand << 1.0, 0.75, 0.6, 0.75, 1.0;
    CHECK((read_prediction_csv(dir / "spike_out" / "spike.csv").scores - hand).cwiseAbs().maxCoeff() < 1e-15);

    CHECK(affectkit({"smooth", "--input", (dir / "in").string(), "--window", "4", "--out", (dir / "w4").string()})
              .code == cli::kConfigError);
    CHECK(affectkit({"smooth", "--input", (dir / "nope").string(), "--out", (dir / "w").string()}).code ==
          cli::kDataError);

    // Window 50 is the even exception: 25 frames before, 24 after.
    std::mt19937_64 rng(1);
    Mat y(80, 3);
    for (Index i = 0; i < y.size(); ++i) y(i) = standard_normal(rng);
    write_prediction_csv(series("w", "va", y, ScoreSemantics::regressions), dir / "in50" / "w.csv");
    REQUIRE(affectkit({"smooth", "--input", (dir / "in50" / "w.csv").string(), "--out", (dir / "out50").string()})
                .code == 0);
    const PredictionSeries s50 = read_prediction_csv(dir / "out50" / "w.csv");
    CHECK(s50.smoothing_window == 50);
    for (Index i : {0, 10, 40, 79}) {
        const Index lo = std::max<Index>(0, i - 25), hi = std::min<Index>(79, i + 24);
        const Eigen::RowVectorXd mean = y.middleRows(lo, hi - lo + 1).colwise().mean();
        CHECK((s50.scores.row(i) - mean).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("fuse is symmetric under swapping inputs and weights") {
    const fs::path dir = oracle::fresh_dir(kTmp / "fuse");
    std::mt19937_64 rng(5);
    Mat la(30, 8), lb(30, 8);
    for (Index i = 0; i < la.size(); ++i) {
        la(i) = standard_normal(rng);
        lb(i) = standard_normal(rng);
    }
    write_prediction_csv(series("v", "expr", la, ScoreSemantics::logits), dir / "a" / "v.csv");
    write_prediction_csv(series("v", "expr", lb, ScoreSemantics::logits), dir / "b" / "v.csv");
    REQUIRE(affectkit({"fuse", "--a", (dir / "a").string(), "--b", (dir / "b").string(), "--weight", "0.3", "--out",
                       (dir / "ab").string()})
                .code == 0);
    REQUIRE(affectkit({"fuse", "--a", (dir / "b").string(), "--b", (dir / "a").string(), "--weight", "0.7", "--out",
                       (dir / "ba").string()})
                .code == 0);
    REQUIRE(affectkit({"fuse", "--a", (dir / "a").string(), "--b", (dir / "b").string(), "--out",
                       (dir / "half_ab").string()})
                .code == 0);
    REQUIRE(affectkit({"fuse", "--a", (dir / "b").string(), "--b", (dir / "a").string(), "--out",
                       (dir / "half_ba").string()})
                .code == 0);
    CHECK(slurp(dir / "half_ab" / "v.csv") == slurp(dir / "half_ba" / "v.csv"));
    const Mat ab = read_prediction_csv(dir / "ab" / "v.csv").scores;
    const Mat ba = read_prediction_csv(dir / "ba" / "v.csv").scores;
    CHECK((ab - ba).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((ab.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(affectkit({"fuse", "--a", (dir / "a").string(), "--b", (dir / "b").string(), "--weight", "1.5", "--out",
                     (dir / "x").string()})
              .code == cli::kConfigError);
}

TEST_CASE("eval on constructed VA series with CCC 0.4 and 0.6 gives P_VA 0.5") {
    const fs::path dir = oracle::fresh_dir(kTmp / "eval_va");
    // ccc(x, x + c) = 2 var / (2 var + c^2), so c = sqrt(2 var (1 / target - 1)).
    std::vector<double> v, a;
    for (int t = 0; t < 40; ++t) {
        v.push_back(0.8 * std::sin(0.3 * t));
        a.push_back(0.6 * std::cos(0.17 * t + 1.0));
    }
    auto shift_for = [](const std::vector<double>& x, double target) {
        const double m = oracle::mean(x);
        double var = 0;
        for (double xi : x) var += (xi - m) * (xi - m);
        var /= static_cast<double>(x.size());
        return std::sqrt(2.0 * var * (1.0 / target - 1.0));
    };
    const double cv = shift_for(v, 0.4), ca = shift_for(a, 0.6);
    std::ostringstream labels;
    labels.precision(17);
    labels << "frame_id,valence,arousal\n";
    Mat pred(40, 2);
    std::vector<double> pv, pa;
    for (int t = 0; t < 40; ++t) {
        labels << t << ',' << v[static_cast<std::size_t>(t)] << ',' << a[static_cast<std::size_t>(t)] << '\n';
        pred(t, 0) = v[static_cast<std::size_t>(t)] + cv;
        pred(t, 1) = a[static_cast<std::size_t>(t)] + ca;
        pv.push_back(pred(t, 0));
        pa.push_back(pred(t, 1));
    }
    REQUIRE(oracle::ccc(pv, v) == doctest::Approx(0.4).epsilon(1e-12));
    REQUIRE(oracle::ccc(pa, a) == doctest::Approx(0.6).epsilon(1e-12));
    labels << 40 << ",-5,-5\n";
    write(dir / "labels.csv", labels.str());
    const fs::path manifest = label_manifest(dir, "v", dir / "labels.csv");
    write_prediction_csv(series("v", "va", pred, ScoreSemantics::regressions), dir / "pred" / "v.csv");
    const Run r = affectkit({"eval", "--task", "va", "--predictions", (dir / "pred").string(), "--manifest",
                             manifest.string(), "--out", (dir / "report").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("P_VA") != std::string::npos);
    const fs::path report = dir / "report" / "report.csv";
    CHECK(report_value(report, "CCC_V") == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(report_value(report, "CCC_A") == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(report_value(report, "P_VA") == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(report_value(report, "frames") == 40);
    CHECK(fs::exists(dir / "report" / "report.txt"));
    CHECK(fs::exists(dir / "report" / "resolved_config.json"));
}

TEST_CASE("perfect predictions score 1 for every task") {
    const fs::path dir = oracle::fresh_dir(kTmp / "perfect");
    auto eval = [&](const std::string& task, const std::string& preds, const std::string& manifest) {
        const Run r = affectkit({"eval", "--task", task, "--predictions", preds, "--manifest", manifest, "--out",
                                 (dir / ("report_" + task)).string()});
        REQUIRE(r.code == 0);
        return dir / ("report_" + task) / "report.csv";
    };
    // Label files copied into prediction files; ignored cells are clamped and then skipped by eval.
    for (const std::string task : {"va", "au", "expr"}) {
        for (const std::string v : {"vid00", "vid01", "vid02"}) {
            std::istringstream in(slurp(kMini / "labels" / (v + "_" + task + ".csv")));
            std::string line;
            std::getline(in, line);
            std::vector<std::vector<double>> rows;
            while (std::getline(in, line)) {
                std::vector<double> row;
                std::istringstream cells(line);
                std::string cell;
                while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
                rows.push_back(row);
            }
            const Index width = task == "expr" ? 8 : static_cast<Index>(rows.front().size()) - 1;
            Mat m = Mat::Zero(static_cast<Index>(rows.size()), width);
            const double lo = task == "va" ? -1.0 : 0.0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const Index r = static_cast<Index>(i);
                if (task == "expr")
                    m(r, std::max(0, static_cast<int>(rows[i][1]))) = 1.0;
                else
                    for (Index c = 0; c < width; ++c) m(r, c) = std::clamp(rows[i][static_cast<std::size_t>(c) + 1], lo, 1.0);
            }
            const auto sem = task == "va" ? ScoreSemantics::regressions : ScoreSemantics::probabilities;
            write_prediction_csv(series(v, task, m, sem), dir / task / (v + ".csv"));
        }
    }
    CHECK(report_value(eval("va", (dir / "va").string(), mini("manifest_va.json")), "P_VA") == doctest::Approx(1.0));
    CHECK(report_value(eval("au", (dir / "au").string(), mini("manifest_au.json")), "macro_F1") == doctest::Approx(1.0));
    const fs::path expr = eval("expr", (dir / "expr").string(), mini("manifest_expr.json"));
    CHECK(report_value(expr, "macro_F1") == doctest::Approx(1.0));
    CHECK(report_value(expr, "accuracy") == doctest::Approx(1.0));

    fs::copy_file(kMini / "labels" / "emi.csv", dir / "emi.csv");
    CHECK(report_value(eval("emi", (dir / "emi.csv").string(), mini("manifest_emi.json")), "mean_rho") ==
          doctest::Approx(1.0));
}

TEST_CASE("an empty feature file gives an empty prediction file and a warning") {
    const fs::path dir = oracle::fresh_dir(kTmp / "empty");
    REQUIRE(affectkit({"train", "--task", "au", "--manifest", mini("manifest_au.json"), "--out",
                       (dir / "model").string(), "--epochs", "1"})
                .code == 0);
    write(dir / "empty.csv", "frame_id,timestamp,f0,f1,f2,f3,f4,f5,f6,f7,f8,f9,f10,f11,f12,f13,f14,f15\n");
    nlohmann::json e{{"video_id", "blank"}, {"modality", "visual"}, {"kind", "embeddings"}, {"dim", 16},
                     {"fps", 25.0},        {"feature_path", (dir / "empty.csv").string()}};
    write(dir / "manifest.json", nlohmann::json{{"entries", {e}}}.dump());
    const Run r = affectkit({"predict", "--model", (dir / "model" / "model.json").string(), "--manifest",
                             (dir / "manifest.json").string(), "--out", (dir / "pred").string()});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("warning") != std::string::npos);
    const PredictionSeries s = read_prediction_csv(dir / "pred" / "blank.csv");
    CHECK(s.frames() == 0);
    CHECK(s.classes() == 12);
    CHECK(slurp(dir / "pred" / "blank.csv").rfind("frame_id,s0,", 0) == 0);
}

TEST_CASE("eval drop_both removes Other frames and scores 7 classes") {
    const fs::path dir = oracle::fresh_dir(kTmp / "eval_expr");
    // Aff-Wild2 truth; 7 = Other, -1 = ignored.
    const std::vector<int> truth{0, 1, 7, 3, 4, 7, 6, 2, -1, 5};
    std::ostringstream labels;
    labels << "frame_id,expression\n";
    for (std::size_t i = 0; i < truth.size(); ++i) labels << i << ',' << truth[i] << '\n';
    write(dir / "labels.csv", labels.str());
    const fs::path manifest = label_manifest(dir, "v", dir / "labels.csv");

    // AffectNet scores whose top class maps to the truth, except frame 1 where Contempt wins.
    const int to_affectnet[] = {affectnet::kNeutral, affectnet::kAnger,    affectnet::kDisgust,  affectnet::kFear,
                                affectnet::kHappiness, affectnet::kSadness, affectnet::kSurprise, affectnet::kContempt};
    Mat pred = Mat::Constant(10, 8, 0.02);
    for (Index i = 0; i < 10; ++i) pred(i, to_affectnet[std::max(0, truth[static_cast<std::size_t>(i)])]) = 0.8;
    pred(1, affectnet::kContempt) = 0.9;
    write_prediction_csv(series("v", "expr", pred, ScoreSemantics::probabilities), dir / "pred" / "v.csv");

    auto report = [&](const std::string& remap) {
        const Run r = affectkit({"eval", "--task", "expr", "--predictions", (dir / "pred").string(), "--manifest",
                                 manifest.string(), "--remap", remap, "--out", (dir / remap).string()});
        REQUIRE(r.code == 0);
        return slurp(dir / remap / "report.csv");
    };
    // 9 labeled frames; dropping the two Other frames leaves 7. Frame 1 falls back to Anger.
    const std::string drop = report("drop_both");
    CHECK(drop.find("frames,7\n") != std::string::npos);
    CHECK(drop.find("accuracy,1\n") != std::string::npos);
    const std::string other = report("contempt_to_other");
    CHECK(other.find("frames,9\n") != std::string::npos);
    CHECK(other.find("accuracy,0.8888888888888888") != std::string::npos);

    CHECK(affectkit({"eval", "--task", "va", "--predictions", (dir / "pred").string(), "--manifest",
                     manifest.string(), "--remap", "drop_both", "--out", (dir / "x").string()})
              .code == cli::kConfigError);
}

TEST_CASE("ce score labels a fear and surprise face as Fearfully_Surprised") {
    const fs::path dir = oracle::fresh_dir(kTmp / "ce_score");
    std::ostringstream faces;
    faces << "frame_id,s0,s1,s2,s3,s4,s5,s6,s7\n";
    faces << "0,0.01,0.01,0.01,0.45,0.01,0.05,0.01,0.45\n";
    faces << "1,0.01,0.01,0.01,0.05,0.45,0.01,0.01,0.45\n";
    // Two faces on frame 2; the mean keeps fear and surprise on top.
    faces << "2,0.01,0.01,0.01,0.60,0.01,0.05,0.01,0.30\n";
    faces << "2,0.01,0.01,0.01,0.30,0.01,0.05,0.01,0.60\n";
    write(dir / "in" / "clip.csv", faces.str());
    write(dir / "in" / "clip.meta.json", R"({"video_id": "clip", "semantics": "probabilities"})");
    const Run r = affectkit({"ce", "score", "--input", (dir / "in").string(), "--out", (dir / "out").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("Fearfully_Surprised 2") != std::string::npos);
    CHECK(r.out.find("Happily_Surprised 1") != std::string::npos);
    CHECK(slurp(dir / "out" / "clip.csv") == "frame_id,label\n0,0\n1,1\n2,0\n");
    CHECK(read_prediction_csv(dir / "out" / "scores" / "clip.csv").classes() == CompoundTarget::kNumClasses);

    write(dir / "reg" / "clip.csv", faces.str());
    write(dir / "reg" / "clip.meta.json", R"({"video_id": "clip", "semantics": "regressions"})");
    CHECK(affectkit({"ce", "score", "--input", (dir / "reg").string(), "--out", (dir / "x").string()}).code ==
          cli::kDataError);
}

TEST_CASE("ce select prefers the candidate that matches the prior") {
    const fs::path dir = oracle::fresh_dir(kTmp / "ce_select");
    const Eigen::VectorXd prior = CompoundTarget::prior();
    std::vector<int> balanced, skewed;
    for (int c = 0; c < CompoundTarget::kNumClasses; ++c) {
        const int n = static_cast<int>(std::lround(prior(c) * 1000));
        balanced.insert(balanced.end(), static_cast<std::size_t>(n), c);
    }
    skewed.assign(balanced.size(), 3);
    for (std::size_t i = 0; i < skewed.size(); i += 4) skewed[i] = static_cast<int>(i % 7);
    write(dir / "balanced" / "v.csv", label_dir_csv(balanced));
    write(dir / "skewed" / "v.csv", label_dir_csv(skewed));

    const Run r = affectkit({"ce", "select", "--candidate", "m1/cluster-scores=" + (dir / "skewed").string(),
                             "--candidate", "m1=" + (dir / "balanced").string(), "--out", (dir / "out").string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "out" / "selection.txt").rfind("selected m1 (KL ", 0) == 0);
    const std::string table = slurp(dir / "out" / "kl_table.csv");
    CHECK(table.rfind("model,scores,cluster-scores,cluster-embeddings,cluster-audio\nm1,", 0) == 0);
    CHECK(affectkit({"ce", "select", "--candidate", "noequals", "--out", (dir / "x").string()}).code ==
          cli::kConfigError);
}

TEST_CASE("ce kappa of identical labelings is 1 everywhere") {
    const fs::path dir = oracle::fresh_dir(kTmp / "ce_kappa");
    std::mt19937_64 rng(2);
    const auto labels = oracle::random_labels(rng, 120, 7);
    write(dir / "a" / "v.csv", label_dir_csv(labels));
    write(dir / "b" / "v.csv", label_dir_csv(labels));
    const Run r = affectkit({"ce", "kappa", "--candidate", "a=" + (dir / "a").string(), "--candidate",
                             "b=" + (dir / "b").string(), "--out", (dir / "out").string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "out" / "kappa.csv") == "model,a,b\na,1.0000,1.0000\nb,1.0000,1.0000\n");
    CHECK(slurp(dir / "out" / "kappa.svg").find("<svg") == 0);

    write(dir / "short" / "v.csv", label_dir_csv({0, 1}));
    CHECK(affectkit({"ce", "kappa", "--candidate", "a=" + (dir / "a").string(), "--candidate",
                     "s=" + (dir / "short").string(), "--out", (dir / "x").string()})
              .code == cli::kDataError);
    CHECK(affectkit({"ce", "kappa", "--candidate", "a=" + (dir / "a").string(), "--out", (dir / "x").string()})
              .code == cli::kConfigError);
}

TEST_CASE("ce cluster on the mini dataset") {
    const fs::path dir = oracle::fresh_dir(kTmp / "ce_cluster");
    for (const std::string space : {"scores", "embeddings", "audio"}) {
        CAPTURE(space);
        const Run r = affectkit({"ce", "cluster", "--scores", mini("faces"), "--manifest", mini("manifest_ce.json"),
                                 "--space", space, "--seed", "4", "--out", (dir / space).string()});
        REQUIRE(r.code == 0);
        const auto info = nlohmann::json::parse(slurp(dir / space / "clusters.json"));
        CHECK(info.at("frames") == 600);
        CHECK(info.at("cluster_sizes").size() == 7);
        const auto history = info.at("inertia_history").get<std::vector<double>>();
        for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i] <= history[i - 1] + 1e-9);
        CHECK(fs::exists(dir / space / "labels" / "vid02.csv"));
    }
    CHECK(affectkit({"ce", "cluster", "--scores", mini("faces"), "--space", "audio", "--out", (dir / "x").string()})
              .code == cli::kConfigError);
}
