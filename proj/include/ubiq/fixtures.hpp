#pragma once

// Synthetic ensembles: attribution maps with Gaussian "lesion" blobs plus noise, and
// validation logs with prescribed accuracies.

#include "ubiq/io.hpp"
#include "ubiq/reliability.hpp"
#include "ubiq/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ubiq::fixtures {

inline constexpr double kDefaultAmplitude = 0.02;
inline constexpr double kDefaultNoiseSigma = 0.002 / 3.0;

struct Blob {
    double center_row = 0.0;
    double center_col = 0.0;
    double radius = 1.0;                   // mask radius and Gaussian sigma
    double amplitude = kDefaultAmplitude;  // signed peak value
};

struct ModelSpec {
    std::string model_id;
    double accuracy = 0.9;
    double fidelity = 1.0;
    bool conflict_flip = false;
};

struct FixtureSpec {
    Index rows = 64;
    Index cols = 64;
    std::vector<Blob> blobs;
    double noise_sigma = kDefaultNoiseSigma;
    std::vector<ModelSpec> models;
    std::uint64_t seed = 0;
    int validation_size = 100;
    std::vector<std::string> class_names{"negative", "positive"};
    int target_class = 1;

    void validate() const;
};

FixtureSpec spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const FixtureSpec& spec);

struct Fixture {
    std::vector<Plane> attributions;    // per model, H×W
    std::vector<ValidationLog> logs;    // per model, aligned sample ids
    Plane mask;                         // 1 inside any blob radius, else 0
};

// Sum of amplitude * exp(-d^2 / (2 r^2)) over blobs, without noise or fidelity scaling.
Plane clean_signal(const FixtureSpec& spec);

Fixture generate(const FixtureSpec& spec);

// Writes <id>.npy, <id>.csv, mask.npy and a ready-to-run manifest.json into dir.
// Returns the manifest path.
std::filesystem::path write_fixture(const FixtureSpec& spec, const Fixture& fixture,
                                    const std::filesystem::path& dir);

// Three-model, one-blob fixture at the default operating point.
FixtureSpec default_spec(Index size = 128, std::uint64_t seed = 7);

}  // namespace ubiq::fixtures
