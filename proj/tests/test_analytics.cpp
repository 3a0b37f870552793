#include "ubiq/analytics.hpp"
#include "ubiq/fixtures.hpp"
#include "ubiq/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace ubiq;

namespace {

double trapezoid(const DensityCurve& c) {
    double s = 0.0;
    for (Index i = 1; i < c.grid.size(); ++i) s += 0.5 * (c.density(i) + c.density(i - 1)) * (c.grid(i) - c.grid(i - 1));
    return s;
}

double density_at(const DensityCurve& c, double x) {
    Index best = 0;
    (c.grid.array() - x).abs().minCoeff(&best);
    return c.density(best);
}

CountVector counts_of(std::initializer_list<int> values) {
    CountVector c;
    c.counts.resize(static_cast<Index>(values.size()));
    Index i = 0;
    for (int v : values) c.counts(i++) = v;
    c.validation_size = 100;
    return c;
}

}  // namespace

TEST_CASE("kde of a constant sample is a degenerate spike") {
    const std::vector<double> zeros(10000, 0.0);
    const auto curve = kde(zeros);
    CHECK(curve.degenerate);
    CHECK(curve.spike_location == 0.0);
    CHECK(curve.grid.size() == static_cast<Index>(kDefaultGridSize));
    CHECK(trapezoid(curve) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(density_at(curve, 0.0) > 0.0);
    CHECK(density_at(curve, 0.5) == 0.0);

    const std::vector<double> one = {0.3};
    CHECK(kde(one).degenerate);
}

TEST_CASE("kde of uniform samples is flat in the interior") {
    Rng rng(77);
    std::vector<double> values(100000);
    for (auto& v : values) v = rng.uniform();
    const auto curve = kde(values);
    CHECK_FALSE(curve.degenerate);
    CHECK(trapezoid(curve) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(curve.density.minCoeff() >= 0.0);
    for (Index i = 0; i < curve.grid.size(); ++i) {
        if (curve.grid(i) >= 0.1 && curve.grid(i) <= 0.9) CHECK(std::abs(curve.density(i) - 1.0) < 0.15);
    }
    CHECK(curve.retained_mass <= 1.0);
    CHECK(curve.retained_mass > 0.9);
}

TEST_CASE("kde rejects samples outside the unit interval") {
    const std::vector<double> bad = {0.2, 1.5};
    CHECK_THROWS_AS(kde(bad), DataError);
}

TEST_CASE("silverman bandwidth follows the rule of thumb with a floor") {
    Rng rng(3);
    std::vector<double> v(5000);
    for (auto& x : v) x = 0.5 + 0.1 * rng.normal();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
    const double expected = 0.9 * std::min(sd, iqr / 1.34) * std::pow(5000.0, -0.2);
    CHECK(silverman_bandwidth(v) == doctest::Approx(expected).epsilon(1e-12));

    const std::vector<double> tight = {0.5, 0.5 + 1e-9, 0.5 - 1e-9, 0.5};
    CHECK(silverman_bandwidth(tight) == kMinBandwidth);
}

TEST_CASE("kde location follows a shift of the data") {
    Rng rng(4);
    std::vector<double> v(20000);
    for (auto& x : v) x = 0.4 + 0.05 * rng.normal();
    std::vector<double> shifted = v;
    for (auto& x : shifted) x += 0.1;
    const auto a = kde_on_range(v, -1.0, 2.0, 3001);
    const auto b = kde_on_range(shifted, -1.0, 2.0, 3001);
    Index ia = 0, ib = 0;
    a.density.maxCoeff(&ia);
    b.density.maxCoeff(&ib);
    const double cell = 3.0 / 3000.0;
    CHECK(std::abs((b.grid(ib) - a.grid(ia)) - 0.1) <= cell + 1e-12);
}

TEST_CASE("kde subsamples very large inputs deterministically") {
    Rng rng(6);
    std::vector<double> v(kMaxKdeSamples + 5000);
    for (auto& x : v) x = std::min(1.0, 0.02 * std::abs(rng.normal()));
    const auto a = kde(v, 256, "belief", 1);
    const auto b = kde(v, 256, "belief", 1);
    CHECK(a.n_points == kMaxKdeSamples);
    CHECK(a.density == b.density);
    CHECK(trapezoid(a) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fused belief density peaks near zero with a thin tail") {
    auto spec = fixtures::default_spec(128, 3);
    const auto fx = fixtures::generate(spec);
    std::vector<MassMap> masses;
    for (const auto& phi : fx.attributions) masses.push_back(bpa_from_plane(phi, 1.0 / 3.0, 100.0));
    const auto fused = fuse_sequential(masses);
    const auto curve = kde(std::span<const double>(fused.bel.data(), static_cast<std::size_t>(fused.bel.size())),
                           kDefaultGridSize, "belief");
    CHECK(density_at(curve, 0.05) > 10.0 * density_at(curve, 0.6));
    Index peak = 0;
    curve.density.maxCoeff(&peak);
    CHECK(curve.grid(peak) < 0.1);
}

TEST_CASE("quantile and summaries") {
    const std::vector<double> v = {4.0, 1.0, 3.0, 2.0};
    CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
    CHECK(quantile(v, 0.05) == doctest::Approx(1.15));
    CHECK(quantile(v, 1.0) == 4.0);

    const std::vector<double> m = {0.1, 0.6, 0.7, 0.2, 0.9};
    const auto s = summarize(m);
    CHECK(s.mean == doctest::Approx(0.5));
    CHECK(s.median == doctest::Approx(0.6));
    CHECK(s.frac_above_half == doctest::Approx(0.6));
    CHECK(s.p05 <= s.median);
    CHECK(s.median <= s.p95);
}

TEST_CASE("logspace covers the requested decades") {
    const auto xs = logspace(0.1, 100.0, 25);
    CHECK(xs.size() == 25);
    CHECK(xs(0) == 0.1);
    CHECK(xs(24) == 100.0);
    for (Index i = 1; i < xs.size(); ++i) CHECK(xs(i) / xs(i - 1) == doctest::Approx(std::pow(1000.0, 1.0 / 24.0)));
}

TEST_CASE("temperature sweep") {
    const auto xs = logspace(0.1, 100.0, 25);
    const auto sweep = sweep_temperature(counts_of({85, 90, 92}), xs);
    REQUIRE(sweep.ys.rows() == 3);
    REQUIRE(sweep.ys.cols() == 25);
    for (Index t = 0; t < 25; ++t) CHECK(std::abs(sweep.ys.col(t).sum() - 1.0) <= 1e-12);
    for (Index t = 1; t < 25; ++t) CHECK(sweep.ys(2, t) < sweep.ys(2, t - 1));
    for (Index j = 0; j < 3; ++j) CHECK(std::abs(sweep.ys(j, 24) - 1.0 / 3.0) < 0.02);

    const auto flat = sweep_temperature(counts_of({0, 0, 0}), xs);
    CHECK((flat.ys.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("lambda sweep anchors, monotonicity and odd symmetry") {
    Eigen::VectorXd phis(3);
    phis << 0.002, 0.005, 0.02;
    Eigen::VectorXd lambdas(3);
    lambdas << 10.0, 100.0, 500.0;
    const auto sweep = sweep_lambda(phis, lambdas);
    CHECK(sweep.ys(2, 0) == doctest::Approx(std::tanh(0.2)).epsilon(1e-15));
    CHECK(sweep.ys(0, 2) == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
    CHECK(sweep.ys(1, 1) == doctest::Approx(0.46211715726000974).epsilon(1e-12));

    const auto grid = logspace(1.0, 1000.0, 25);
    Eigen::VectorXd many = Eigen::VectorXd::LinSpaced(9, 0.0005, 0.05);
    const auto fwd = sweep_lambda(many, grid, MassSide::For);
    const auto mirrored = sweep_lambda(-many, grid, MassSide::Against);
    CHECK(fwd.ys == mirrored.ys);
    for (Index i = 0; i < fwd.ys.rows(); ++i) {
        for (Index l = 1; l < fwd.ys.cols(); ++l) CHECK(fwd.ys(i, l) >= fwd.ys(i, l - 1));
    }
}

TEST_CASE("json emitters follow the documented schema") {
    Rng rng(1);
    std::vector<double> v(100);
    for (auto& x : v) x = rng.uniform();
    const auto dj = to_json(kde(v, 64, "uncertainty"));
    CHECK(dj.at("metric") == "uncertainty");
    CHECK(dj.at("grid").size() == 64);
    CHECK(dj.at("density").size() == 64);
    CHECK(dj.at("bandwidth").get<double>() > 0.0);

    const auto sj = to_json(sweep_temperature(counts_of({1, 2}), logspace(1.0, 10.0, 4)));
    CHECK(sj.at("parameter") == "T");
    CHECK(sj.at("xs").size() == 4);
    CHECK(sj.at("series").size() == 2);

    const std::string csv = to_csv(sweep_lambda(Eigen::VectorXd::Constant(1, 0.01), logspace(1.0, 10.0, 3)));
    CHECK(csv.rfind("lambda,phi=0.01\n", 0) == 0);
}
