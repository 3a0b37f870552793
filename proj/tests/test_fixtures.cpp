#include "ubiq/error.hpp"
#include "ubiq/fixtures.hpp"
#include "ubiq/io.hpp"
#include "ubiq/npy.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace ubiq;
using namespace ubiq::fixtures;

namespace {

FixtureSpec small_spec() {
    FixtureSpec s;
    s.rows = 32;
    s.cols = 40;
    s.blobs = {{10.0, 12.0, 4.0, 0.02}, {24.0, 30.0, 3.0, -0.01}};
    s.models = {{"a", 0.85}, {"b", 0.92}, {"c", 0.6, 0.5, true}};
    s.seed = 5;
    return s;
}

int correct(const ValidationLog& log) {
    int n = 0;
    for (const auto& r : log.records) n += r.correct() ? 1 : 0;
    return n;
}

}  // namespace

TEST_CASE("clean signal peaks at the blob centre with the blob amplitude") {
    auto s = small_spec();
    const Plane clean = clean_signal(s);
    CHECK(clean(10, 12) == doctest::Approx(0.02).epsilon(1e-3));
    CHECK(clean(24, 30) == doctest::Approx(-0.01).epsilon(1e-2));
    const double d2 = 3.0 * 3.0 + 4.0 * 4.0;
    const double expected = 0.02 * std::exp(-d2 / 32.0) + (-0.01) * std::exp(-(11.0 * 11.0 + 14.0 * 14.0) / 18.0);
    CHECK(clean(13, 16) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("noise-free maps equal the scaled clean signal") {
    auto s = small_spec();
    s.noise_sigma = 0.0;
    const auto fx = generate(s);
    const Plane clean = clean_signal(s);
    CHECK((fx.attributions[0] == clean).all());
    CHECK((fx.attributions[1] == clean).all());
    CHECK((fx.attributions[2] == -0.5 * clean).all());
}

TEST_CASE("conflict flip negates the signal while keeping noise") {
    auto s = small_spec();
    s.models = {{"x", 0.9, 1.0, false}, {"x2", 0.9, 1.0, true}};
    const auto fx = generate(s);
    const Plane clean = clean_signal(s);
    const Plane noise_flip = fx.attributions[1] + clean;
    CHECK(std::abs(noise_flip.mean()) < 4.0 * s.noise_sigma / std::sqrt(static_cast<double>(clean.size())) + 1e-6);
    const double sd = std::sqrt((noise_flip - noise_flip.mean()).square().mean());
    CHECK(sd == doctest::Approx(s.noise_sigma).epsilon(0.1));
    CHECK(fx.attributions[1](10, 12) < 0.0);
    CHECK(fx.attributions[0](10, 12) > 0.0);
}

TEST_CASE("validation logs realise the exact accuracy") {
    auto s = small_spec();
    const auto fx = generate(s);
    REQUIRE(fx.logs.size() == 3);
    CHECK(correct(fx.logs[0]) == 85);
    CHECK(correct(fx.logs[1]) == 92);
    CHECK(correct(fx.logs[2]) == 60);
    for (const auto& log : fx.logs) {
        REQUIRE(log.size() == 100);
        CHECK(log.records.front().sample_id == fx.logs[0].records.front().sample_id);
        CHECK(log.records.back().true_class == fx.logs[0].records.back().true_class);
        for (const auto& r : log.records) {
            CHECK(r.predicted_class >= 0);
            CHECK(r.predicted_class < 2);
        }
    }
    const auto counts = accumulate_counts(fx.logs);
    CHECK(counts.counts(1) == 92);
}

TEST_CASE("mask covers the blob radii") {
    const auto fx = generate(small_spec());
    CHECK(fx.mask(10, 12) == 1.0);
    CHECK(fx.mask(10, 16) == 1.0);
    CHECK(fx.mask(10, 17) == 0.0);
    CHECK(fx.mask(0, 0) == 0.0);
}

TEST_CASE("generation is deterministic per seed") {
    auto s = small_spec();
    const auto a = generate(s);
    const auto b = generate(s);
    for (std::size_t j = 0; j < a.attributions.size(); ++j) CHECK((a.attributions[j] == b.attributions[j]).all());
    CHECK(a.logs[0].records[3].predicted_class == b.logs[0].records[3].predicted_class);
    s.seed = 6;
    const auto c = generate(s);
    CHECK_FALSE((a.attributions[0] == c.attributions[0]).all());
}

TEST_CASE("invalid specs are rejected") {
    auto s = small_spec();
    s.models[0].accuracy = 1.2;
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = small_spec();
    s.models.clear();
    CHECK_THROWS_AS(generate(s), ValidationError);
    s = small_spec();
    s.models[1].model_id = "a";
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = small_spec();
    s.rows = 0;
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = small_spec();
    s.noise_sigma = -1.0;
    CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("spec json round trip") {
    const auto s = small_spec();
    const auto doc = to_json(s);
    const auto back = spec_from_json(doc);
    CHECK(to_json(back) == doc);
    CHECK(back.blobs.size() == 2);
    CHECK(back.models[2].conflict_flip);
}

TEST_CASE("written fixtures load as a valid manifest") {
    const auto dir = testing::scratch_dir("fixture_write");
    const auto s = small_spec();
    const auto fx = generate(s);
    const auto manifest_path = write_fixture(s, fx, dir);
    const auto m = load_manifest(manifest_path);
    REQUIRE(m.models.size() == 3);
    CHECK(m.models[2].model_id == "c");
    CHECK(m.output_dir == dir / "out");
    CHECK((read_tensor(dir / "a.npy").plane() == fx.attributions[0]).all());
    CHECK((read_tensor(dir / "mask.npy").plane() == fx.mask).all());
    CHECK(read_validation_log(dir / "b.csv", "b").size() == 100);
}

TEST_CASE("default spec") {
    const auto s = default_spec();
    CHECK(s.rows == 128);
    CHECK(s.models.size() == 3);
    CHECK(s.models[1].accuracy == 0.90);
    CHECK(s.blobs[0].radius == doctest::Approx(12.8));
}
