#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "affect/head.hpp"

namespace affect {

inline constexpr int kModelFormatVersion = 1;

struct StoredModel {
    std::string task;
    Head<double> head;
    nlohmann::json train_config_echo = nlohmann::json::object();
};

nlohmann::json model_to_json(const StoredModel& model);

/// Throws DataError on a wrong format version, missing fields, or weight
/// shapes that disagree with the declared dimensions.
StoredModel model_from_json(const nlohmann::json& doc);

void save_head(const StoredModel& model, const std::filesystem::path& path);
StoredModel load_head(const std::filesystem::path& path);

}  // namespace affect
