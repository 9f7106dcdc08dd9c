#include <doctest.h>

#include <algorithm>
#include <random>

#include "affect/csv.hpp"
#include "affect/featurestore.hpp"
#include "oracles.hpp"

using namespace affect;
namespace fs = std::filesystem;

namespace {

const fs::path kTmp = AFFECT_TEST_TMP;

fs::path write_file(const std::string& name, const std::string& text) {
    fs::create_directories(kTmp);
    const auto path = kTmp / name;
    csv::write_text(path, text);
    return path;
}

ManifestEntry entry_for(const fs::path& path, int dim, std::optional<double> fps = std::nullopt) {
    ManifestEntry e;
    e.video_id = path.stem().string();
    e.dim = dim;
    e.fps = fps;
    e.feature_path = path;
    return e;
}

FeatureSequence timed(std::vector<double> ts, std::vector<double> values) {
    FeatureSequence s;
    s.values.resize(static_cast<Index>(ts.size()), 1);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        s.frame_ids.push_back(static_cast<std::int64_t>(i));
        s.values(static_cast<Index>(i), 0) = values[i];
    }
    s.timestamps = std::move(ts);
    return s;
}

}  // namespace

TEST_CASE("load_feature_sequence reads a well-formed csv") {
    const auto path = write_file("ok.csv", "frame_id,f0,f1\n0,1.5,2\n1,3,4\n2,-1,0.25\n");
    const auto seq = load_feature_sequence(entry_for(path, 2));
    CHECK(seq.frames() == 3);
    CHECK(seq.dim() == 2);
    CHECK(seq.frame_ids == std::vector<std::int64_t>{0, 1, 2});
    CHECK(seq.values(2, 1) == 0.25);
    CHECK_FALSE(seq.has_timestamps());
}

TEST_CASE("load_feature_sequence synthesizes timestamps from fps") {
    const auto path = write_file("fps.csv", "frame_id,f0\n0,1\n5,2\n");
    const auto seq = load_feature_sequence(entry_for(path, 1, 25.0));
    REQUIRE(seq.has_timestamps());
    CHECK(seq.timestamps[1] == doctest::Approx(0.2));
}

TEST_CASE("load_feature_sequence reports row numbers on errors") {
    SUBCASE("non-monotonic frame id") {
        const auto path = write_file("nonmono.csv", "frame_id,f0,f1\n0,1,2\n0,1,2\n1,1,2\n");
        CHECK_THROWS_WITH_AS(load_feature_sequence(entry_for(path, 2)), doctest::Contains("non-monotonic frame_id at row 2"),
                             DataError);
    }
    SUBCASE("too many values") {
        const auto path = write_file("wide.csv", "frame_id,f0,f1\n0,1,2\n1,1,2,3\n");
        CHECK_THROWS_WITH_AS(load_feature_sequence(entry_for(path, 2)), doctest::Contains("dimension mismatch"), DataError);
        CHECK_THROWS_WITH_AS(load_feature_sequence(entry_for(path, 2)), doctest::Contains("row 2"), DataError);
    }
    SUBCASE("header disagrees with manifest dim") {
        const auto path = write_file("dim.csv", "frame_id,f0,f1,f2\n0,1,2,3\n");
        CHECK_THROWS_AS(load_feature_sequence(entry_for(path, 2)), DataError);
    }
    SUBCASE("malformed value") {
        const auto path = write_file("bad.csv", "frame_id,f0\n0,abc\n");
        CHECK_THROWS_WITH_AS(load_feature_sequence(entry_for(path, 1)), doctest::Contains("row 1"), DataError);
    }
}

TEST_CASE("feature csv round trip is exact") {
    std::mt19937_64 rng(7);
    FeatureSequence seq;
    seq.video_id = "rt";
    seq.values.resize(20, 5);
    for (Index r = 0; r < 20; ++r) {
        seq.frame_ids.push_back(r * 2);
        seq.timestamps.push_back(static_cast<double>(r) / 30.0);
        for (Index c = 0; c < 5; ++c) seq.values(r, c) = standard_normal(rng) * 1e3;
    }
    const auto path = kTmp / "rt.csv";
    write_feature_sequence(seq, path);
    auto entry = entry_for(path, 5);
    const auto back = load_feature_sequence(entry);
    CHECK(back.frame_ids == seq.frame_ids);
    CHECK(back.timestamps == seq.timestamps);
    CHECK((back.values - seq.values).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("load_labels handles each task format") {
    SUBCASE("VA sentinel becomes ignore") {
        const auto path = write_file("va.csv", "frame_id,valence,arousal\n4,0.5,-0.25\n5,-5.0,-5.0\n6,1.5,0.1\n");
        const auto labels = load_labels(path, Task::VA, 0);
        REQUIRE(labels.size() == 3);
        CHECK(labels.frame_ids[1] == 5);
        CHECK(labels.ignored(1));
        CHECK_FALSE(labels.ignored(0));
        CHECK_FALSE(labels.cell_valid(2, 0));
        CHECK(labels.cell_valid(2, 1));
    }
    SUBCASE("EXPR class index") {
        const auto path = write_file("expr.csv", "7,3\n8,-1\n");
        const auto labels = load_labels(path, Task::EXPR, 8);
        CHECK(labels.frame_ids[0] == 7);
        CHECK(labels.targets(0, 0) == 3);
        CHECK(labels.ignored(1));
    }
    SUBCASE("EXPR label beyond class count") {
        const auto path = write_file("expr_bad.csv", "7,8\n");
        CHECK_THROWS_AS(load_labels(path, Task::EXPR, 8), DataError);
    }
    SUBCASE("AU bit vector") {
        const auto path = write_file("au.csv", "2,1,0,0,1,0,0,0,0,1,0,0,1\n");
        const auto labels = load_labels(path, Task::AU, 12);
        REQUIRE(labels.targets.cols() == 12);
        CHECK(labels.frame_ids[0] == 2);
        CHECK(labels.targets(0, 0) == 1);
        CHECK(labels.targets(0, 11) == 1);
        CHECK(labels.targets(0, 1) == 0);
    }
    SUBCASE("EMI per video") {
        const auto path = write_file("emi.csv", "video_id,v1,v2,v3,v4,v5,v6\nclip_a,0.1,0.2,0.3,0.4,0.5,0.6\n");
        const auto labels = load_labels(path, Task::EMI, 0);
        CHECK(labels.granularity == Granularity::per_video);
        CHECK(labels.video_ids[0] == "clip_a");
        CHECK(labels.targets(0, 5) == doctest::Approx(0.6));
    }
    SUBCASE("unparseable line") {
        const auto path = write_file("garbage.csv", "1,0.1,0.2\n2,x,0.3\n");
        CHECK_THROWS_WITH_AS(load_labels(path, Task::VA, 0), doctest::Contains("line 2"), DataError);
    }
}

TEST_CASE("load_manifest resolves relative paths") {
    write_file("m_feat.csv", "frame_id,f0\n0,1\n");
    const auto path = write_file("manifest.json",
                                 R"([{"video_id":"v","modality":"acoustic","kind":"logits","dim":1,"fps":25,)"
                                 R"("feature_path":"m_feat.csv","label_path":null}])");
    const auto entries = load_manifest(path);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].modality == Modality::acoustic);
    CHECK(entries[0].kind == FeatureKind::logits);
    CHECK(entries[0].feature_path == kTmp / "m_feat.csv");
    CHECK_FALSE(entries[0].label_path.has_value());
    CHECK(load_feature_sequence(entries[0]).frames() == 1);
}

TEST_CASE("align_audio_to_video picks the nearest acoustic frame") {
    SUBCASE("identity pairing") {
        const auto video = timed({0.0, 0.04}, {0, 0});
        const auto audio = timed({0.0, 0.04}, {10, 11});
        const auto out = align_audio_to_video(video, audio);
        CHECK(out.values(0, 0) == 10);
        CHECK(out.values(1, 0) == 11);
    }
    SUBCASE("closer later frame") {
        const auto out = align_audio_to_video(timed({0.03}, {0}), timed({0.0, 0.05}, {1, 2}));
        CHECK(out.values(0, 0) == 2);
    }
    SUBCASE("tie goes to the earlier frame") {
        const auto out = align_audio_to_video(timed({0.025}, {0}), timed({0.0, 0.05}, {1, 2}));
        CHECK(out.values(0, 0) == 1);
    }
    SUBCASE("missing timestamps") {
        auto video = timed({0.0}, {0});
        video.timestamps.clear();
        CHECK_THROWS_AS(align_audio_to_video(video, timed({0.0}, {1})), DataError);
    }
    SUBCASE("matches exhaustive search and keeps the video frame count") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t nv = 1 + uniform_index(rng, 60), na = 1 + uniform_index(rng, 90);
            std::vector<double> tv, ta, va;
            double t = 0;
            for (std::size_t i = 0; i < nv; ++i) tv.push_back(t += 0.04 * uniform01(rng));
            t = 0;
            for (std::size_t i = 0; i < na; ++i) {
                ta.push_back(t += 0.02 * std::floor(uniform01(rng) * 3));
                va.push_back(static_cast<double>(i));
            }
            const auto out = align_audio_to_video(timed(tv, std::vector<double>(nv, 0)), timed(ta, va));
            REQUIRE(out.frames() == static_cast<Index>(nv));
            for (std::size_t i = 0; i < nv; ++i)
                CHECK(out.values(static_cast<Index>(i), 0) == static_cast<double>(oracle::nearest_index(ta, tv[i])));
        }
    }
}

TEST_CASE("stat_pool concatenates mean, std, min, max") {
    Eigen::MatrixXd frames(2, 2);
    frames << 1, 2, 3, 4;
    Eigen::VectorXd expected(8);
    expected << 2, 3, 1, 1, 1, 2, 3, 4;
    CHECK(stat_pool(frames).isApprox(expected));

    Eigen::MatrixXd single(1, 1);
    single << 5;
    Eigen::VectorXd one(4);
    one << 5, 0, 5, 5;
    CHECK(stat_pool(single) == one);

    const Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(9, 1, 0.75);
    Eigen::VectorXd c(4);
    c << 0.75, 0, 0.75, 0.75;
    CHECK(stat_pool(constant) == c);

    CHECK_THROWS_AS(stat_pool(Eigen::MatrixXd(0, 3)), DataError);
}

TEST_CASE("stat_pool properties on random input") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const Index t = 1 + static_cast<Index>(uniform_index(rng, 30));
        const Index d = 1 + static_cast<Index>(uniform_index(rng, 8));
        Eigen::MatrixXd m(t, d);
        for (Index i = 0; i < m.size(); ++i) m(i) = standard_normal(rng);
        const Eigen::VectorXd s = stat_pool(m);
        REQUIRE(s.size() == 4 * d);
        for (Index j = 0; j < d; ++j) {
            CHECK(s(2 * d + j) <= s(j) + 1e-12);
            CHECK(s(j) <= s(3 * d + j) + 1e-12);
            CHECK(s(d + j) >= 0);
        }
    }
}

TEST_CASE("aggregate_faces averages faces") {
    FrameFaceScores one{0, Eigen::MatrixXd(1, 2)};
    one.per_face_scores << 0.2, 0.8;
    CHECK(aggregate_faces(one).isApprox(Eigen::Vector2d(0.2, 0.8)));

    FrameFaceScores two{0, Eigen::MatrixXd(2, 2)};
    two.per_face_scores << 1, 0, 0, 1;
    CHECK(aggregate_faces(two).isApprox(Eigen::Vector2d(0.5, 0.5)));

    FrameFaceScores three{0, Eigen::MatrixXd(3, 2)};
    three.per_face_scores << 0.1, 0.9, 0.3, 0.7, 0.2, 0.8;
    CHECK(aggregate_faces(three).isApprox(Eigen::Vector2d(0.2, 0.8)));

    FrameFaceScores reversed{0, three.per_face_scores.colwise().reverse()};
    CHECK((aggregate_faces(reversed) - aggregate_faces(three)).cwiseAbs().maxCoeff() < 1e-15);

    CHECK_THROWS_AS(aggregate_faces(FrameFaceScores{0, Eigen::MatrixXd(0, 2)}), DataError);
}
