#include "affect/model_io.hpp"

#include <fstream>

#include "affect/csv.hpp"

namespace affect {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json vector_to_json(const Eigen::MatrixXd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Index r = 0; r < v.rows(); ++r) out.push_back(v(r, 0));
    return out;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Index rows, Index cols, const std::string& name) {
    if (!j.is_array() || static_cast<Index>(j.size()) != rows)
        throw DataError("model weight '" + name + "' should have " + std::to_string(rows) + " rows");
    Eigen::MatrixXd m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols)
            throw DataError("model weight '" + name + "' row " + std::to_string(r) + " should have " + std::to_string(cols) +
                            " columns");
        for (Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

Eigen::MatrixXd vector_from_json(const nlohmann::json& j, Index size, const std::string& name) {
    if (!j.is_array() || static_cast<Index>(j.size()) != size)
        throw DataError("model weight '" + name + "' should have " + std::to_string(size) + " entries");
    Eigen::MatrixXd v(size, 1);
    for (Index i = 0; i < size; ++i) v(i, 0) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

}  // namespace

nlohmann::json model_to_json(const StoredModel& model) {
    const auto& h = model.head;
    const auto& p = h.parameters();
    nlohmann::json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["task"] = model.task;
    doc["topology"] = std::string(to_string(h.topology()));
    doc["input_dim"] = h.input_dim();
    doc["output_dim"] = h.output_dim();
    if (h.topology() == Topology::mlp) doc["hidden_units"] = h.hidden_units();
    doc["activation"] = std::string(to_string(h.activation()));
    nlohmann::json weights;
    if (h.topology() == Topology::linear) {
        weights["W"] = matrix_to_json(p[0]);
        weights["b"] = vector_to_json(p[1]);
    } else {
        weights["W1"] = matrix_to_json(p[0]);
        weights["b1"] = vector_to_json(p[1]);
        weights["W2"] = matrix_to_json(p[2]);
        weights["b2"] = vector_to_json(p[3]);
    }
    doc["weights"] = std::move(weights);
    doc["train_config_echo"] = model.train_config_echo;
    return doc;
}

StoredModel model_from_json(const nlohmann::json& doc) {
    try {
        if (!doc.is_object()) throw DataError("model file is not a JSON object");
        const int version = doc.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            throw DataError("unsupported model format_version " + std::to_string(version));
        StoredModel model;
        model.task = doc.at("task").get<std::string>();
        const Topology topology = parse_topology(doc.at("topology").get<std::string>());
        const Activation activation = parse_activation(doc.at("activation").get<std::string>());
        const Index in = doc.at("input_dim").get<Index>();
        const Index out = doc.at("output_dim").get<Index>();
        const Index hidden = topology == Topology::mlp ? doc.at("hidden_units").get<Index>() : 0;
        if (in < 1 || out < 1 || (topology == Topology::mlp && hidden < 1))
            throw DataError("model dimensions must be positive");
        model.head = Head<double>(topology, in, out, activation, topology == Topology::mlp ? hidden : 128);
        auto& p = model.head.parameters();
        const auto& w = doc.at("weights");
        if (topology == Topology::linear) {
            p[0] = matrix_from_json(w.at("W"), out, in, "W");
            p[1] = vector_from_json(w.at("b"), out, "b");
        } else {
            p[0] = matrix_from_json(w.at("W1"), hidden, in, "W1");
            p[1] = vector_from_json(w.at("b1"), hidden, "b1");
            p[2] = matrix_from_json(w.at("W2"), out, hidden, "W2");
            p[3] = vector_from_json(w.at("b2"), out, "b2");
        }
        if (doc.contains("train_config_echo")) model.train_config_echo = doc.at("train_config_echo");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

void save_head(const StoredModel& model, const std::filesystem::path& path) {
    csv::write_text(path, model_to_json(model).dump(1) + "\n");
}

StoredModel load_head(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("cannot parse model " + path.string() + ": " + e.what());
    }
    return model_from_json(doc);
}

}  // namespace affect
