#include "ubiq/fixtures.hpp"

#include "ubiq/error.hpp"
#include "ubiq/npy.hpp"
#include "ubiq/rng.hpp"

#include <cmath>
#include <numeric>
#include <set>

namespace ubiq::fixtures {

void FixtureSpec::validate() const {
    std::vector<std::string> problems;
    if (rows < 8 || cols < 8) problems.push_back("fixture shape must be at least 8x8");
    if (!(noise_sigma >= 0.0)) problems.push_back("noise_sigma must be nonnegative");
    if (models.empty()) problems.push_back("fixture needs at least one model");
    if (validation_size <= 0) problems.push_back("validation_size must be positive");
    if (class_names.size() < 2) problems.push_back("fixture needs at least two classes");
    if (target_class < 0 || target_class >= static_cast<int>(class_names.size())) {
        problems.push_back("target_class outside the class list");
    }
    for (const auto& b : blobs) {
        if (!(b.radius > 0.0)) problems.push_back("blob radius must be positive");
        if (!std::isfinite(b.amplitude)) problems.push_back("blob amplitude must be finite");
    }
    std::set<std::string> ids;
    for (const auto& m : models) {
        if (m.model_id.empty()) problems.push_back("model id must be non-empty");
        if (!ids.insert(m.model_id).second) problems.push_back("duplicate model id '" + m.model_id + "'");
        if (!(m.accuracy >= 0.0 && m.accuracy <= 1.0)) {
            problems.push_back("model '" + m.model_id + "': accuracy outside [0, 1]");
        }
        if (!(m.fidelity >= 0.0 && m.fidelity <= 1.0)) {
            problems.push_back("model '" + m.model_id + "': fidelity outside [0, 1]");
        }
    }
    if (!problems.empty()) throw ManifestError(std::move(problems));
}

FixtureSpec spec_from_json(const nlohmann::json& doc) {
    FixtureSpec s;
    try {
        const auto& shape = doc.at("shape");
        s.rows = shape.at(0).get<Index>();
        s.cols = shape.at(1).get<Index>();
        for (const auto& b : doc.value("blobs", nlohmann::json::array())) {
            s.blobs.push_back({b.at("center").at(0).get<double>(), b.at("center").at(1).get<double>(),
                               b.at("radius").get<double>(), b.value("amplitude", kDefaultAmplitude)});
        }
        s.noise_sigma = doc.value("noise_sigma", kDefaultNoiseSigma);
        for (const auto& m : doc.at("models")) {
            s.models.push_back({m.at("id").get<std::string>(), m.value("accuracy", 0.9),
                                m.value("fidelity", 1.0), m.value("conflict_flip", false)});
        }
        s.seed = doc.value("seed", std::uint64_t{0});
        s.validation_size = doc.value("validation_size", 100);
        if (doc.contains("class_names")) s.class_names = doc["class_names"].get<std::vector<std::string>>();
        s.target_class = doc.value("target_class", 1);
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError({std::string("fixture spec: ") + e.what()});
    }
    s.validate();
    return s;
}

nlohmann::json to_json(const FixtureSpec& s) {
    nlohmann::json blobs = nlohmann::json::array();
    for (const auto& b : s.blobs) {
        blobs.push_back({{"center", {b.center_row, b.center_col}}, {"radius", b.radius}, {"amplitude", b.amplitude}});
    }
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : s.models) {
        models.push_back({{"id", m.model_id},
                          {"accuracy", m.accuracy},
                          {"fidelity", m.fidelity},
                          {"conflict_flip", m.conflict_flip}});
    }
    return {{"shape", {s.rows, s.cols}},     {"blobs", blobs},
            {"noise_sigma", s.noise_sigma},  {"models", models},
            {"seed", s.seed},                {"validation_size", s.validation_size},
            {"class_names", s.class_names},  {"target_class", s.target_class}};
}

Plane clean_signal(const FixtureSpec& spec) {
    Plane out = Plane::Zero(spec.rows, spec.cols);
    for (const auto& b : spec.blobs) {
        for (Index r = 0; r < spec.rows; ++r) {
            for (Index c = 0; c < spec.cols; ++c) {
                const double dr = static_cast<double>(r) - b.center_row;
                const double dc = static_cast<double>(c) - b.center_col;
                out(r, c) += b.amplitude * std::exp(-(dr * dr + dc * dc) / (2.0 * b.radius * b.radius));
            }
        }
    }
    return out;
}

namespace {

Plane blob_mask(const FixtureSpec& spec) {
    Plane mask = Plane::Zero(spec.rows, spec.cols);
    for (const auto& b : spec.blobs) {
        for (Index r = 0; r < spec.rows; ++r) {
            for (Index c = 0; c < spec.cols; ++c) {
                const double dr = static_cast<double>(r) - b.center_row;
                const double dc = static_cast<double>(c) - b.center_col;
                if (dr * dr + dc * dc <= b.radius * b.radius) mask(r, c) = 1.0;
            }
        }
    }
    return mask;
}

std::string sample_name(int i) {
    std::string digits = std::to_string(i);
    return "s" + std::string(digits.size() < 5 ? 5 - digits.size() : 0, '0') + digits;
}

}  // namespace

Fixture generate(const FixtureSpec& spec) {
    spec.validate();
    Fixture out;
    out.mask = blob_mask(spec);
    const Plane clean = clean_signal(spec);
    const int num_classes = static_cast<int>(spec.class_names.size());

    // Ground-truth labels shared by every model's log.
    Rng label_rng(derive_seed(spec.seed, 0));
    std::vector<int> truth(static_cast<std::size_t>(spec.validation_size));
    for (auto& t : truth) t = static_cast<int>(label_rng.below(static_cast<std::uint64_t>(num_classes)));

    for (std::size_t j = 0; j < spec.models.size(); ++j) {
        const auto& model = spec.models[j];
        Rng rng(derive_seed(spec.seed, j + 1));

        Plane noise(spec.rows, spec.cols);
        for (Index i = 0; i < noise.size(); ++i) noise.data()[i] = spec.noise_sigma * rng.normal();
        const double sign = model.conflict_flip ? -1.0 : 1.0;
        out.attributions.push_back(sign * model.fidelity * clean + noise);

        const auto correct = static_cast<std::size_t>(std::lround(model.accuracy * spec.validation_size));
        std::vector<std::size_t> order(truth.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
        }
        std::vector<bool> is_correct(truth.size(), false);
        for (std::size_t k = 0; k < correct; ++k) is_correct[order[k]] = true;

        ValidationLog log;
        log.model_id = model.model_id;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const int t = truth[i];
            const int predicted = is_correct[i] ? t : (t + 1) % num_classes;
            log.records.push_back({sample_name(static_cast<int>(i)), predicted, t});
        }
        out.logs.push_back(std::move(log));
    }
    return out;
}

std::filesystem::path write_fixture(const FixtureSpec& spec, const Fixture& fixture,
                                    const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json models = nlohmann::json::array();
    for (std::size_t j = 0; j < spec.models.size(); ++j) {
        const auto& id = spec.models[j].model_id;
        write_tensor(dir / (id + ".npy"), TensorFile::from_plane(fixture.attributions[j]));
        write_validation_log(dir / (id + ".csv"), fixture.logs[j]);
        models.push_back({{"id", id}, {"attribution", id + ".npy"}, {"validation_log", id + ".csv"}});
    }
    write_tensor(dir / "mask.npy", TensorFile::from_plane(fixture.mask));
    write_json(dir / "fixture_spec.json", to_json(spec));

    const nlohmann::json manifest = {
        {"models", models},
        {"class_names", spec.class_names},
        {"target_class", spec.target_class},
        {"seed", spec.seed},
        {"output_dir", "out"},
    };
    const auto path = dir / "manifest.json";
    write_json(path, manifest);
    return path;
}

FixtureSpec default_spec(Index size, std::uint64_t seed) {
    FixtureSpec s;
    s.rows = size;
    s.cols = size;
    const double centre = static_cast<double>(size) / 2.0;
    s.blobs.push_back({centre, centre, static_cast<double>(size) / 10.0, kDefaultAmplitude});
    s.models = {{"cnn", 0.85, 1.0, false}, {"resnet", 0.90, 1.0, false}, {"vit", 0.92, 1.0, false}};
    s.seed = seed;
    return s;
}

}  // namespace ubiq::fixtures
