#include "affect/cli.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "common.hpp"

namespace affect::cli {

namespace {

std::string option_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

std::string scalar_text(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    throw ConfigError("config values must be strings, numbers, booleans, or lists of those");
}

/// Turns a JSON config into flag tokens for every key not already given on the
/// command line, so explicit flags win over file values.
std::vector<std::string> config_tokens(const fs::path& path, const std::set<std::string>& given) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed config " + path.string() + ": " + e.what());
    }
    if (doc.is_object() && doc.contains("options")) doc = doc.at("options");
    if (!doc.is_object()) throw ConfigError("config " + path.string() + " must be a JSON object");

    std::vector<std::string> tokens;
    for (const auto& [key, value] : doc.items()) {
        const std::string name = option_name(key);
        if (name == "config" || given.count(name) > 0 || value.is_null()) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) tokens.push_back("--" + name);
            continue;
        }
        tokens.push_back("--" + name);
        if (value.is_array()) {
            for (const auto& v : value) tokens.push_back(scalar_text(v));
        } else {
            tokens.push_back(scalar_text(value));
        }
    }
    return tokens;
}

/// Leading words that name the command, e.g. {"ce", "score"}.
std::size_t command_length(const std::vector<std::string>& args) {
    std::size_t n = 0;
    while (n < args.size() && n < 2 && !args[n].empty() && args[n][0] != '-') {
        ++n;
        if (n == 1 && args[0] != "ce") break;
    }
    return n;
}

std::vector<std::string> merge_config(const std::vector<std::string>& args) {
    const std::size_t head = command_length(args);
    std::optional<fs::path> config;
    std::set<std::string> given;
    for (std::size_t i = head; i < args.size(); ++i) {
        const auto& a = args[i];
        if (a.rfind("--", 0) != 0) continue;
        const auto eq = a.find('=');
        const std::string name = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
        given.insert(name);
        if (name == "config") {
            if (eq != std::string::npos)
                config = a.substr(eq + 1);
            else if (i + 1 < args.size())
                config = args[i + 1];
        }
    }
    if (!config) return args;
    std::vector<std::string> merged(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(head));
    const auto extra = config_tokens(*config, given);
    merged.insert(merged.end(), extra.begin(), extra.end());
    merged.insert(merged.end(), args.begin() + static_cast<std::ptrdiff_t>(head), args.end());
    return merged;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Context ctx{out, err, {}, nullptr};
    CLI::App app{"Frame-level affect analysis toolkit", "affectkit"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    register_train(app, ctx);
    register_predict(app, ctx);
    register_smooth(app, ctx);
    register_fuse(app, ctx);
    register_eval(app, ctx);
    register_ce(app, ctx);

    try {
        std::vector<std::string> merged = merge_config(args);
        std::reverse(merged.begin(), merged.end());
        app.parse(merged);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (ctx.action) ctx.action();
        return kOk;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << '\n';
        return kNumericError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUnexpected;
    }
}

}  // namespace affect::cli
