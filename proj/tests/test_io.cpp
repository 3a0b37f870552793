#include "ubiq/error.hpp"
#include "ubiq/io.hpp"
#include "ubiq/npy.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>

using namespace ubiq;
using nlohmann::json;

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

// Directory with two tiny attribution maps and validation logs.
fs::path make_inputs(const std::string& name) {
    const auto dir = testing::scratch_dir(name);
    for (const char* id : {"a", "b"}) {
        write_tensor(dir / (std::string(id) + ".npy"), TensorFile::from_plane(Plane::Zero(4, 4)));
        ValidationLog log{id, {{"s0", 1, 1}, {"s1", 0, 1}}};
        write_validation_log(dir / (std::string(id) + ".csv"), log);
    }
    return dir;
}

json minimal_doc() {
    return json{{"class_names", {"neg", "pos"}},
                {"target_class", 1},
                {"models",
                 {{{"id", "a"}, {"attribution", "a.npy"}, {"validation_log", "a.csv"}},
                  {{"id", "b"}, {"attribution", "b.npy"}, {"validation_log", "b.csv"}}}}};
}

std::vector<std::string> problems_of(const json& doc, const fs::path& base) {
    try {
        parse_manifest(doc, base);
    } catch (const ManifestError& e) {
        return e.problems();
    }
    return {};
}

}  // namespace

TEST_CASE("validation log round trip") {
    const auto dir = testing::scratch_dir("io_log");
    ValidationLog log{"m", {{"s0", 1, 1}, {"s1", 0, 1}, {"s2", 2, 2}}};
    write_validation_log(dir / "log.csv", log);
    const auto back = read_validation_log(dir / "log.csv", "m");
    REQUIRE(back.size() == 3);
    CHECK(back.records[1].sample_id == "s1");
    CHECK(back.records[1].predicted_class == 0);
    CHECK_FALSE(back.records[1].correct());
    CHECK(back.records[2].correct());
}

TEST_CASE("validation log errors") {
    const auto dir = testing::scratch_dir("io_log_bad");
    auto write = [&](const std::string& text) {
        std::ofstream(dir / "bad.csv") << text;
        return dir / "bad.csv";
    };
    CHECK_THROWS_AS(read_validation_log(write("id,pred,true\ns0,1,1\n"), "m"), FormatError);
    CHECK_THROWS_AS(read_validation_log(write("sample_id,predicted_class,true_class\ns0,1\n"), "m"), FormatError);
    CHECK_THROWS_AS(read_validation_log(write("sample_id,predicted_class,true_class\ns0,x,1\n"), "m"), FormatError);
    CHECK_THROWS_AS(read_validation_log(dir / "absent.csv", "m"), IoError);
    const auto crlf = read_validation_log(write("sample_id,predicted_class,true_class\r\ns0,1,1\r\n"), "m");
    CHECK(crlf.size() == 1);
}

TEST_CASE("minimal manifest is filled with defaults") {
    const auto dir = make_inputs("io_minimal");
    const auto m = parse_manifest(minimal_doc(), dir);
    CHECK(m.temperature == 5.0);
    CHECK(m.lambda == 100.0);
    CHECK(m.seed == 0);
    CHECK(m.channel_mode == ChannelMode::Sum);
    CHECK(m.weight_mode == WeightMode::Counts);
    CHECK(m.alpha0 == std::vector<double>{1.0, 1.0});
    CHECK(m.output_dir == dir / "out");
    CHECK(m.models[0].attribution == dir / "a.npy");
    CHECK(m.models[0].attribution.is_absolute());
    for (const char* key : {"temperature", "lambda", "seed", "alpha0", "channel_mode", "weight_mode", "output_dir"}) {
        CHECK(contains(m.defaults_applied, key));
    }
    CHECK(m.overrides.empty());
}

TEST_CASE("explicit values are kept") {
    const auto dir = make_inputs("io_explicit");
    auto doc = minimal_doc();
    doc["temperature"] = 2.5;
    doc["lambda"] = 50;
    doc["alpha0"] = {2.0, 3.0};
    doc["channel_mode"] = "l2";
    const auto m = parse_manifest(doc, dir);
    CHECK(m.temperature == 2.5);
    CHECK(m.lambda == 50.0);
    CHECK(m.alpha0 == std::vector<double>{2.0, 3.0});
    CHECK(m.channel_mode == ChannelMode::L2);
    CHECK_FALSE(contains(m.defaults_applied, "temperature"));
    CHECK(contains(m.defaults_applied, "seed"));
}

TEST_CASE("duplicate ids are reported by name") {
    const auto dir = make_inputs("io_dup");
    auto doc = minimal_doc();
    doc["models"][1]["id"] = "a";
    const auto problems = problems_of(doc, dir);
    REQUIRE(problems.size() == 1);
    CHECK(problems[0].find("'a'") != std::string::npos);
    CHECK(problems[0].find("duplicate") != std::string::npos);
}

TEST_CASE("every problem is reported at once") {
    const auto dir = make_inputs("io_many");
    auto doc = minimal_doc();
    doc["models"][0]["attribution"] = "missing.npy";
    doc["temperature"] = -1;
    doc["colour"] = "red";
    doc["models"][1].erase("validation_log");
    const auto problems = problems_of(doc, dir);
    CHECK(problems.size() == 4);
    auto mentions = [&](const std::string& s) {
        return std::any_of(problems.begin(), problems.end(),
                           [&](const std::string& p) { return p.find(s) != std::string::npos; });
    };
    CHECK(mentions("missing.npy"));
    CHECK(mentions("temperature"));
    CHECK(mentions("colour"));
    CHECK(mentions("validation_log"));

    try {
        parse_manifest(doc, dir);
    } catch (const ManifestError& e) {
        CHECK(e.exit_code() == ExitCode::Validation);
        CHECK(std::string(e.what()).find("missing.npy") != std::string::npos);
    }
}

TEST_CASE("scores mode requires scores and a validation size") {
    const auto dir = make_inputs("io_scores");
    auto doc = minimal_doc();
    doc["weight_mode"] = "scores";
    CHECK(problems_of(doc, dir).size() == 3);
    doc["validation_size"] = 100;
    doc["models"][0]["score"] = 0.9;
    doc["models"][1]["score"] = 0.8;
    const auto m = parse_manifest(doc, dir);
    CHECK(m.weight_mode == WeightMode::Scores);
    CHECK(*m.models[1].score == 0.8);
}

TEST_CASE("alpha0 length and frame are validated") {
    const auto dir = make_inputs("io_alpha");
    auto doc = minimal_doc();
    doc["alpha0"] = {1.0};
    CHECK(problems_of(doc, dir).size() == 1);
    doc = minimal_doc();
    doc["target_class"] = 2;
    CHECK(problems_of(doc, dir).size() == 1);
    doc = minimal_doc();
    doc["models"] = json::array();
    CHECK(problems_of(doc, dir).size() == 1);
}

TEST_CASE("resolved form is idempotent") {
    const auto dir = make_inputs("io_idem");
    std::ofstream(dir / "manifest.json") << minimal_doc().dump();
    const auto first = load_manifest(dir / "manifest.json");
    const auto resolved = to_json(first);
    write_json(dir / "resolved.json", resolved);
    const auto second = load_manifest(dir / "resolved.json");
    CHECK(second == first);
    CHECK(to_json(second) == resolved);
    write_json(dir / "resolved2.json", to_json(second));
    CHECK(read_bytes(dir / "resolved.json") == read_bytes(dir / "resolved2.json"));
}

TEST_CASE("overrides replace values and are recorded") {
    const auto dir = make_inputs("io_override");
    auto m = parse_manifest(minimal_doc(), dir);
    apply_overrides(m, {.seed = 42, .temperature = 0.5, .lambda = std::nullopt, .output_dir = dir / "elsewhere"});
    CHECK(m.seed == 42);
    CHECK(m.temperature == 0.5);
    CHECK(m.lambda == 100.0);
    CHECK(m.output_dir == dir / "elsewhere");
    CHECK(contains(m.overrides, "seed"));
    CHECK(contains(m.overrides, "temperature"));
    CHECK_FALSE(contains(m.defaults_applied, "seed"));
    CHECK(contains(m.defaults_applied, "lambda"));
    CHECK_THROWS_AS(apply_overrides(m, {.temperature = 0.0}), ParameterError);
}

TEST_CASE("invalid JSON is a validation error") {
    const auto dir = testing::scratch_dir("io_badjson");
    std::ofstream(dir / "manifest.json") << "{ not json";
    CHECK_THROWS_AS(load_manifest(dir / "manifest.json"), ManifestError);
}
