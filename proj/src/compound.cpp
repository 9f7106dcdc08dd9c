#include "affect/compound.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "affect/metrics.hpp"

namespace affect {

Eigen::VectorXd CompoundTarget::prior() {
    Eigen::VectorXd p(kNumClasses);
    double total = 0;
    for (long c : kFrameCounts) total += static_cast<double>(c);
    for (int i = 0; i < kNumClasses; ++i) p(i) = static_cast<double>(kFrameCounts[static_cast<std::size_t>(i)]) / total;
    return p;
}

Eigen::VectorXd compound_scores(const Eigen::VectorXd& prob8) {
    if (prob8.size() != affectnet::kNumClasses) throw DataError("compound_scores expects 8 probabilities");
    if ((prob8.array() < -1e-12).any() || std::abs(prob8.sum() - 1.0) > 1e-6)
        throw DataError("compound_scores expects a probability vector");
    Eigen::VectorXd out(CompoundTarget::kNumClasses);
    for (int j = 0; j < CompoundTarget::kNumClasses; ++j) {
        const auto [a, b] = CompoundTarget::kConstituents[static_cast<std::size_t>(j)];
        out(j) = prob8(a) + prob8(b);
    }
    return out;
}

CompoundPrediction predict_compound(const std::vector<FrameFaceScores>& frames, const std::string& video_id) {
    if (frames.empty()) throw DataError("predict_compound: no frames");
    CompoundPrediction out;
    out.scores.video_id = video_id;
    out.scores.task = "ce";
    out.scores.semantics = ScoreSemantics::regressions;
    out.scores.scores.resize(static_cast<Index>(frames.size()), CompoundTarget::kNumClasses);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const Eigen::VectorXd s = compound_scores(aggregate_faces(frames[i]));
        out.scores.frame_ids.push_back(frames[i].frame_id);
        out.scores.scores.row(static_cast<Index>(i)) = s.transpose();
        out.labels.push_back(static_cast<int>(argmax(s)));
    }
    validate(out.scores);
    return out;
}

std::vector<Index> ClusterModel::cluster_sizes() const {
    std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
    for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
    return sizes;
}

namespace {

int nearest(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& x, double* dist2) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centroids.rows(); ++c) {
        const double d = (centroids.row(c) - x).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    if (dist2) *dist2 = best_d;
    return best;
}

double inertia_of(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids, const std::vector<int>& assignment) {
    double sum = 0;
    for (Index i = 0; i < points.rows(); ++i)
        sum += (points.row(i) - centroids.row(assignment[static_cast<std::size_t>(i)])).squaredNorm();
    return sum;
}

}  // namespace

ClusterModel kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int max_iters) {
    if (k < 1) throw ConfigError("kmeans: k must be positive");
    if (max_iters < 1) throw ConfigError("kmeans: max_iters must be positive");
    const Index n = points.rows();
    if (n < k) throw DataError("kmeans: need at least k=" + std::to_string(k) + " points, got " + std::to_string(n));
    if (!points.allFinite()) throw DataError("kmeans: non-finite points");

    std::mt19937_64 rng(seed);
    ClusterModel model;
    model.k = k;
    model.centroids.resize(k, points.cols());

    // k-means++ seeding.
    model.centroids.row(0) = points.row(static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n))));
    Eigen::VectorXd d2(n);
    for (Index i = 0; i < n; ++i) d2(i) = (points.row(i) - model.centroids.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Index pick = 0;
        if (total > 0) {
            const double r = uniform01(rng) * total;
            double acc = 0;
            pick = -1;
            for (Index i = 0; i < n; ++i) {
                if (d2(i) <= 0) continue;
                acc += d2(i);
                pick = i;
                if (acc > r) break;
            }
        } else {
            pick = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
        }
        model.centroids.row(c) = points.row(pick);
        for (Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), (points.row(i) - model.centroids.row(c)).squaredNorm());
    }

    std::vector<int> previous;
    model.assignment.assign(static_cast<std::size_t>(n), 0);
    for (int iter = 1; iter <= max_iters; ++iter) {
        model.iterations = iter;
        std::vector<double> dist(static_cast<std::size_t>(n));
        std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            model.assignment[u] = nearest(model.centroids, points.row(i), &dist[u]);
            ++sizes[static_cast<std::size_t>(model.assignment[u])];
        }

        for (int e = 0; e < k; ++e) {
            if (sizes[static_cast<std::size_t>(e)] > 0) continue;
            Index far = -1;
            for (Index i = 0; i < n; ++i) {
                const auto u = static_cast<std::size_t>(i);
                if (sizes[static_cast<std::size_t>(model.assignment[u])] < 2) continue;
                if (far < 0 || dist[u] > dist[static_cast<std::size_t>(far)]) far = i;
            }
            if (far < 0 || dist[static_cast<std::size_t>(far)] <= 0) continue;
            const auto uf = static_cast<std::size_t>(far);
            --sizes[static_cast<std::size_t>(model.assignment[uf])];
            model.assignment[uf] = e;
            sizes[static_cast<std::size_t>(e)] = 1;
            dist[uf] = 0;
            model.centroids.row(e) = points.row(far);
        }

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        for (Index i = 0; i < n; ++i) sums.row(model.assignment[static_cast<std::size_t>(i)]) += points.row(i);
        for (int c = 0; c < k; ++c) {
            const auto size = sizes[static_cast<std::size_t>(c)];
            if (size > 0) model.centroids.row(c) = sums.row(c) / static_cast<double>(size);
        }
        model.inertia_history.push_back(inertia_of(points, model.centroids, model.assignment));

        if (model.assignment == previous) break;
        previous = model.assignment;
    }
    return model;
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& points) {
    if (points.rows() == 0) return points;
    const Eigen::RowVectorXd mean = points.colwise().mean();
    Eigen::MatrixXd centered = points.rowwise() - mean;
    const Eigen::RowVectorXd sd =
        (centered.array().square().colwise().sum() / static_cast<double>(points.rows())).sqrt().matrix();
    for (Index c = 0; c < points.cols(); ++c)
        if (sd(c) > 1e-12) centered.col(c) /= sd(c);
    return centered;
}

ClusterLabeling label_clusters(const ClusterModel& model, const Eigen::MatrixXd& scores) {
    if (static_cast<std::size_t>(scores.rows()) != model.assignment.size())
        throw DataError("label_clusters: score rows do not match clustered frames");
    ClusterLabeling out;
    out.cluster_to_class.assign(static_cast<std::size_t>(model.k), std::nullopt);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(model.k, scores.cols());
    std::vector<Index> sizes(static_cast<std::size_t>(model.k), 0);
    for (std::size_t i = 0; i < model.assignment.size(); ++i) {
        const int c = model.assignment[i];
        if (c < 0 || c >= model.k) throw DataError("label_clusters: cluster id out of range");
        sums.row(c) += scores.row(static_cast<Index>(i));
        ++sizes[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < model.k; ++c) {
        const auto size = sizes[static_cast<std::size_t>(c)];
        if (size == 0) {
            out.empty_clusters.push_back(c);
            continue;
        }
        const Eigen::RowVectorXd mean = sums.row(c) / static_cast<double>(size);
        out.cluster_to_class[static_cast<std::size_t>(c)] = static_cast<int>(argmax(mean));
    }
    return out;
}

Eigen::VectorXd class_distribution(const std::vector<int>& labels, int num_classes) {
    if (labels.empty()) throw DataError("class_distribution: empty label sequence");
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(num_classes);
    for (int y : labels) {
        if (y < 0 || y >= num_classes) throw DataError("class label " + std::to_string(y) + " out of range");
        freq(y) += 1;
    }
    return freq / static_cast<double>(labels.size());
}

KlSelection select_by_kl(const std::vector<std::vector<int>>& candidates, KlDirection direction) {
    if (candidates.empty()) throw DataError("select_by_kl: no candidates");
    const Eigen::VectorXd prior = CompoundTarget::prior();
    KlSelection out;
    for (const auto& labels : candidates) {
        Eigen::VectorXd p = class_distribution(labels);
        out.kl.push_back(direction == KlDirection::empirical_to_prior ? kl_divergence(p, prior) : kl_divergence(prior, p));
        out.distributions.push_back(std::move(p));
    }
    for (std::size_t i = 1; i < out.kl.size(); ++i)
        if (out.kl[i] < out.kl[out.index]) out.index = i;
    return out;
}

Eigen::MatrixXd kappa_matrix(const std::vector<std::vector<int>>& models) {
    const auto m = static_cast<Index>(models.size());
    for (const auto& labels : models)
        if (labels.size() != models.front().size()) throw DataError("kappa_matrix: labelings differ in length");
    Eigen::MatrixXd k = Eigen::MatrixXd::Identity(m, m);
    for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j) {
            k(i, j) = cohens_kappa(models[static_cast<std::size_t>(i)], models[static_cast<std::size_t>(j)]);
            k(j, i) = k(i, j);
        }
    return k;
}

namespace {

std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string color_for(double v) {
    const double t = std::clamp((v + 0.2) / 1.2, 0.0, 1.0);
    // light yellow -> dark red
    const int r = static_cast<int>(std::lround(255 + t * (128 - 255)));
    const int g = static_cast<int>(std::lround(247 + t * (0 - 247)));
    const int b = static_cast<int>(std::lround(188 + t * (38 - 188)));
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace

std::string render_kappa_svg(const Eigen::MatrixXd& kappa, const std::vector<std::string>& names) {
    if (kappa.rows() != kappa.cols()) throw DataError("kappa matrix must be square");
    if (names.size() != static_cast<std::size_t>(kappa.rows())) throw DataError("one name per kappa row expected");
    const int cell = 48;
    const int margin = 160;
    const auto m = static_cast<int>(kappa.rows());
    const int width = margin + m * cell + 20;
    const int height = margin + m * cell + 20;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<title>Cohen's kappa (scale -0.2 to 1.0)</title>\n";
    for (int i = 0; i < m; ++i) {
        const std::string name = escape_xml(names[static_cast<std::size_t>(i)]);
        svg << "<text x=\"" << margin - 6 << "\" y=\"" << margin + i * cell + cell / 2 + 4 << "\" text-anchor=\"end\">" << name << "</text>\n";
        const int cx = margin + i * cell + cell / 2;
        svg << "<text x=\"" << cx << "\" y=\"" << margin - 6 << "\" text-anchor=\"start\" transform=\"rotate(-45 " << cx << ' '
            << margin - 6 << ")\">" << name << "</text>\n";
    }
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double v = kappa(i, j);
            char value[16];
            std::snprintf(value, sizeof(value), "%.2f", v);
            const int x = margin + j * cell;
            const int y = margin + i * cell;
            svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << color_for(v)
                << "\" data-kappa=\"" << value << "\"/>\n";
            const char* ink = (v + 0.2) / 1.2 > 0.6 ? "#ffffff" : "#000000";
            svg << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4 << "\" text-anchor=\"middle\" fill=\"" << ink << "\">" << value
                << "</text>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace affect
