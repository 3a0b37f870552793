#include "ubiq/io.hpp"

#include "ubiq/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace ubiq {
namespace {

std::string trim_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

int parse_int_field(const std::string& text, const fs::path& path, std::size_t line_no) {
    int value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": '" + text +
                          "' is not an integer class index");
    }
    return value;
}

fs::path resolve(const fs::path& p, const fs::path& base) {
    return (p.is_absolute() ? p : base / p).lexically_normal();
}

const std::set<std::string> kTopKeys = {
    "models",    "class_names", "target_class", "temperature",     "lambda",
    "alpha0",    "seed",        "channel_mode", "weight_mode",     "validation_size",
    "output_dir", "defaults_applied", "overrides"};
const std::set<std::string> kModelKeys = {"id", "attribution", "validation_log", "score"};

}  // namespace

ValidationLog read_validation_log(const fs::path& path, const std::string& model_id) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string() + ": cannot open validation log");
    ValidationLog log;
    log.model_id = model_id;

    std::string line;
    if (!std::getline(in, line) || trim_cr(line) != kValidationLogHeader) {
        throw FormatError(path.string() + ": expected header '" + kValidationLogHeader + "'");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim_cr(line);
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 3 || fields[0].empty()) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) +
                              ": expected 3 comma-separated fields");
        }
        log.records.push_back({fields[0], parse_int_field(fields[1], path, line_no),
                               parse_int_field(fields[2], path, line_no)});
    }
    return log;
}

void write_validation_log(const fs::path& path, const ValidationLog& log) {
    std::ostringstream out;
    out << kValidationLogHeader << '\n';
    for (const auto& r : log.records) {
        out << r.sample_id << ',' << r.predicted_class << ',' << r.true_class << '\n';
    }
    write_text(path, out.str());
}

RunManifest parse_manifest(const nlohmann::json& doc, const fs::path& base_dir) {
    std::vector<std::string> problems;
    RunManifest m;

    if (!doc.is_object()) throw ManifestError({"manifest must be a JSON object"});
    for (const auto& [key, _] : doc.items()) {
        if (!kTopKeys.count(key)) problems.push_back("unknown key '" + key + "'");
    }

    if (doc.contains("defaults_applied")) {
        if (doc["defaults_applied"].is_array() &&
            std::all_of(doc["defaults_applied"].begin(), doc["defaults_applied"].end(),
                        [](const auto& v) { return v.is_string(); })) {
            m.defaults_applied = doc["defaults_applied"].get<std::vector<std::string>>();
        } else {
            problems.push_back("'defaults_applied' must be an array of strings");
        }
    }
    if (doc.contains("overrides")) {
        if (doc["overrides"].is_array() &&
            std::all_of(doc["overrides"].begin(), doc["overrides"].end(),
                        [](const auto& v) { return v.is_string(); })) {
            m.overrides = doc["overrides"].get<std::vector<std::string>>();
        } else {
            problems.push_back("'overrides' must be an array of strings");
        }
    }
    auto note_default = [&](const std::string& key) {
        if (std::find(m.defaults_applied.begin(), m.defaults_applied.end(), key) ==
            m.defaults_applied.end()) {
            m.defaults_applied.push_back(key);
        }
    };

    // class_names / target_class
    if (!doc.contains("class_names")) {
        problems.push_back("missing required key 'class_names'");
    } else if (!doc["class_names"].is_array() ||
               !std::all_of(doc["class_names"].begin(), doc["class_names"].end(),
                            [](const auto& v) { return v.is_string(); })) {
        problems.push_back("'class_names' must be an array of strings");
    } else {
        m.class_names = doc["class_names"].get<std::vector<std::string>>();
    }
    if (!doc.contains("target_class")) {
        problems.push_back("missing required key 'target_class'");
    } else if (!doc["target_class"].is_number_integer()) {
        problems.push_back("'target_class' must be an integer");
    } else {
        m.target_class = doc["target_class"].get<int>();
    }
    if (!m.class_names.empty()) {
        try {
            m.frame().validate();
        } catch (const ValidationError& e) {
            problems.push_back(e.what());
        }
    }

    auto read_positive = [&](const char* key, double fallback, double& out) {
        if (!doc.contains(key)) {
            out = fallback;
            note_default(key);
        } else if (!doc[key].is_number() || !(doc[key].get<double>() > 0.0)) {
            problems.push_back(std::string("'") + key + "' must be a positive number");
        } else {
            out = doc[key].get<double>();
        }
    };
    read_positive("temperature", kDefaultTemperature, m.temperature);
    read_positive("lambda", kDefaultLambda, m.lambda);

    if (!doc.contains("seed")) {
        note_default("seed");
    } else if (!doc["seed"].is_number_unsigned()) {
        problems.push_back("'seed' must be a nonnegative integer");
    } else {
        m.seed = doc["seed"].get<std::uint64_t>();
    }

    if (!doc.contains("channel_mode")) {
        note_default("channel_mode");
    } else {
        try {
            m.channel_mode = parse_channel_mode(doc["channel_mode"].is_string()
                                                    ? doc["channel_mode"].get<std::string>()
                                                    : std::string("<non-string>"));
        } catch (const ValidationError& e) {
            problems.push_back(e.what());
        }
    }

    if (!doc.contains("weight_mode")) {
        note_default("weight_mode");
    } else {
        try {
            m.weight_mode = parse_weight_mode(doc["weight_mode"].is_string()
                                                  ? doc["weight_mode"].get<std::string>()
                                                  : std::string("<non-string>"));
        } catch (const ValidationError& e) {
            problems.push_back(e.what());
        }
    }

    if (doc.contains("validation_size")) {
        if (!doc["validation_size"].is_number_integer() || doc["validation_size"].get<int>() <= 0) {
            problems.push_back("'validation_size' must be a positive integer");
        } else {
            m.validation_size = doc["validation_size"].get<int>();
        }
    } else if (m.weight_mode == WeightMode::Scores) {
        problems.push_back("'validation_size' is required when weight_mode is 'scores'");
    }

    if (!doc.contains("output_dir")) {
        m.output_dir = resolve("out", base_dir);
        note_default("output_dir");
    } else if (!doc["output_dir"].is_string()) {
        problems.push_back("'output_dir' must be a string path");
    } else {
        m.output_dir = resolve(doc["output_dir"].get<std::string>(), base_dir);
    }

    // models
    if (!doc.contains("models")) {
        problems.push_back("missing required key 'models'");
    } else if (!doc["models"].is_array() || doc["models"].empty()) {
        problems.push_back("'models' must be a non-empty array");
    } else {
        std::set<std::string> seen;
        std::size_t index = 0;
        for (const auto& entry : doc["models"]) {
            const std::string where = "models[" + std::to_string(index++) + "]";
            if (!entry.is_object()) {
                problems.push_back(where + " must be an object");
                continue;
            }
            for (const auto& [key, _] : entry.items()) {
                if (!kModelKeys.count(key)) problems.push_back(where + ": unknown key '" + key + "'");
            }
            ModelEntry model;
            if (!entry.contains("id") || !entry["id"].is_string() ||
                entry["id"].get<std::string>().empty()) {
                problems.push_back(where + ": 'id' must be a non-empty string");
            } else {
                model.model_id = entry["id"].get<std::string>();
                if (!seen.insert(model.model_id).second) {
                    problems.push_back("duplicate model id '" + model.model_id + "'");
                }
            }
            if (!entry.contains("attribution") || !entry["attribution"].is_string()) {
                problems.push_back(where + ": 'attribution' must be a string path");
            } else {
                model.attribution = resolve(entry["attribution"].get<std::string>(), base_dir);
                if (!fs::exists(model.attribution)) {
                    problems.push_back(where + ": attribution file not found: " +
                                       model.attribution.string());
                }
            }
            if (entry.contains("validation_log")) {
                if (!entry["validation_log"].is_string()) {
                    problems.push_back(where + ": 'validation_log' must be a string path");
                } else {
                    model.validation_log = resolve(entry["validation_log"].get<std::string>(), base_dir);
                    if (!fs::exists(*model.validation_log)) {
                        problems.push_back(where + ": validation log not found: " +
                                           model.validation_log->string());
                    }
                }
            }
            if (entry.contains("score")) {
                if (!entry["score"].is_number() || entry["score"].get<double>() < 0.0 ||
                    entry["score"].get<double>() > 1.0) {
                    problems.push_back(where + ": 'score' must be a number in [0, 1]");
                } else {
                    model.score = entry["score"].get<double>();
                }
            }
            if (m.weight_mode == WeightMode::Counts && !entry.contains("validation_log")) {
                problems.push_back(where + ": 'validation_log' is required when weight_mode is 'counts'");
            }
            if (m.weight_mode == WeightMode::Scores && !entry.contains("score")) {
                problems.push_back(where + ": 'score' is required when weight_mode is 'scores'");
            }
            m.models.push_back(std::move(model));
        }
    }

    if (!doc.contains("alpha0")) {
        m.alpha0.assign(m.models.size(), 1.0);
        note_default("alpha0");
    } else if (!doc["alpha0"].is_array() ||
               !std::all_of(doc["alpha0"].begin(), doc["alpha0"].end(),
                            [](const auto& v) { return v.is_number() && v.template get<double>() > 0.0; })) {
        problems.push_back("'alpha0' must be an array of positive numbers");
    } else {
        m.alpha0 = doc["alpha0"].get<std::vector<double>>();
        if (m.alpha0.size() != m.models.size()) {
            problems.push_back("'alpha0' has " + std::to_string(m.alpha0.size()) + " entries for " +
                               std::to_string(m.models.size()) + " models");
        }
    }

    if (!problems.empty()) throw ManifestError(std::move(problems));
    return m;
}

RunManifest load_manifest(const fs::path& path) {
    nlohmann::json doc;
    try {
        doc = read_json(path);
    } catch (const nlohmann::json::parse_error& e) {
        throw ManifestError({path.string() + ": invalid JSON: " + e.what()});
    }
    return parse_manifest(doc, fs::absolute(path).parent_path());
}

nlohmann::json to_json(const RunManifest& m) {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& model : m.models) {
        nlohmann::json entry = {{"id", model.model_id}, {"attribution", model.attribution.string()}};
        if (model.validation_log) entry["validation_log"] = model.validation_log->string();
        if (model.score) entry["score"] = *model.score;
        models.push_back(std::move(entry));
    }
    nlohmann::json doc = {
        {"models", std::move(models)},
        {"class_names", m.class_names},
        {"target_class", m.target_class},
        {"temperature", m.temperature},
        {"lambda", m.lambda},
        {"alpha0", m.alpha0},
        {"seed", m.seed},
        {"channel_mode", to_string(m.channel_mode)},
        {"weight_mode", to_string(m.weight_mode)},
        {"output_dir", m.output_dir.string()},
        {"defaults_applied", m.defaults_applied},
        {"overrides", m.overrides},
    };
    if (m.validation_size > 0) doc["validation_size"] = m.validation_size;
    return doc;
}

void apply_overrides(RunManifest& m, const ManifestOverrides& o) {
    auto mark = [&](const std::string& key) {
        std::erase(m.defaults_applied, key);
        if (std::find(m.overrides.begin(), m.overrides.end(), key) == m.overrides.end()) {
            m.overrides.push_back(key);
        }
    };
    if (o.seed) {
        m.seed = *o.seed;
        mark("seed");
    }
    if (o.temperature) {
        if (!(*o.temperature > 0.0)) throw ParameterError("--temperature must be positive");
        m.temperature = *o.temperature;
        mark("temperature");
    }
    if (o.lambda) {
        if (!(*o.lambda > 0.0)) throw ParameterError("--lambda must be positive");
        m.lambda = *o.lambda;
        mark("lambda");
    }
    if (o.output_dir) {
        m.output_dir = fs::absolute(*o.output_dir).lexically_normal();
        mark("output_dir");
    }
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string() + ": cannot open");
    return nlohmann::json::parse(in);
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out << text;
    if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace ubiq
