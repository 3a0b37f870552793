#pragma once

// Run manifests, validation-log CSV files and JSON output helpers.

#include "ubiq/evidence.hpp"
#include "ubiq/reliability.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ubiq {

namespace fs = std::filesystem;

inline constexpr const char* kValidationLogHeader = "sample_id,predicted_class,true_class";

ValidationLog read_validation_log(const fs::path& path, const std::string& model_id);
void write_validation_log(const fs::path& path, const ValidationLog& log);

struct ModelEntry {
    std::string model_id;
    fs::path attribution;
    std::optional<fs::path> validation_log;
    std::optional<double> score;

    friend bool operator==(const ModelEntry&, const ModelEntry&) = default;
};

struct RunManifest {
    std::vector<ModelEntry> models;  // fold order
    std::vector<std::string> class_names;
    int target_class = 0;
    double temperature = kDefaultTemperature;
    double lambda = kDefaultLambda;
    std::vector<double> alpha0;
    std::uint64_t seed = 0;
    ChannelMode channel_mode = ChannelMode::Sum;
    WeightMode weight_mode = WeightMode::Counts;
    int validation_size = 0;  // required in scores mode
    fs::path output_dir;
    std::vector<std::string> defaults_applied;
    std::vector<std::string> overrides;

    FrameConfig frame() const { return {class_names, target_class}; }
    Eigen::VectorXd prior() const {
        return Eigen::Map<const Eigen::VectorXd>(alpha0.data(), static_cast<Index>(alpha0.size()));
    }

    friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

// Validates a manifest document, resolving relative paths against base_dir and filling
// defaults. Every problem found is reported in a single ManifestError.
RunManifest parse_manifest(const nlohmann::json& doc, const fs::path& base_dir);
RunManifest load_manifest(const fs::path& path);

// Resolved form: every key explicit, absolute paths, defaults listed.
nlohmann::json to_json(const RunManifest& manifest);

struct ManifestOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> temperature;
    std::optional<double> lambda;
    std::optional<fs::path> output_dir;
};

void apply_overrides(RunManifest& manifest, const ManifestOverrides& overrides);

nlohmann::json read_json(const fs::path& path);
// Pretty-printed with sorted keys and a trailing newline; byte-stable for equal documents.
void write_json(const fs::path& path, const nlohmann::json& doc);
void write_text(const fs::path& path, const std::string& text);

}  // namespace ubiq
