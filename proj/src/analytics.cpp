#include "ubiq/analytics.hpp"

#include "ubiq/error.hpp"
#include "ubiq/evidence.hpp"
#include "ubiq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace ubiq {
namespace {

double sample_sd(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n - 1.0));
}

std::string format_double(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

}  // namespace

double silverman_bandwidth(std::span<const double> values) {
    if (values.size() < 2) return kMinBandwidth;
    const double sd = sample_sd(values);
    std::vector<double> copy(values.begin(), values.end());
    const double iqr = quantile(copy, 0.75) - quantile(copy, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    const double h = 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
    return std::max(h, kMinBandwidth);
}

DensityCurve kde_on_range(std::span<const double> values, double lo, double hi,
                          std::size_t grid_size, std::string metric) {
    if (!(hi > lo)) throw ParameterError("kde: empty range");
    if (grid_size < 2) throw ParameterError("kde: grid needs at least two points");
    for (double v : values) {
        if (!std::isfinite(v)) throw DataError("kde: non-finite sample");
    }

    DensityCurve out;
    out.metric = std::move(metric);
    out.n_points = values.size();
    out.grid = Eigen::VectorXd::LinSpaced(static_cast<Index>(grid_size), lo, hi);
    out.density = Eigen::VectorXd::Zero(static_cast<Index>(grid_size));
    const double dx = (hi - lo) / static_cast<double>(grid_size - 1);

    const bool constant = values.size() >= 2 &&
                          std::all_of(values.begin(), values.end(),
                                      [&](double v) { return v == values.front(); });
    if (values.size() < 2 || constant) {
        out.degenerate = true;
        out.spike_location = values.empty() ? lo : values.front();
        out.bandwidth = 0.0;
        // Unit mass on the nearest grid cell, so the curve still integrates to one.
        const auto k = static_cast<Index>(std::clamp(
            std::round((out.spike_location - lo) / dx), 0.0, static_cast<double>(grid_size - 1)));
        const bool edge = k == 0 || k == static_cast<Index>(grid_size) - 1;
        out.density(k) = edge ? 2.0 / dx : 1.0 / dx;
        out.retained_mass = 1.0;
        return out;
    }

    out.bandwidth = silverman_bandwidth(values);
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    const double h = out.bandwidth;
    const double reach = 8.0 * h;
    const double norm = 1.0 / (static_cast<double>(sorted.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    for (Index g = 0; g < out.grid.size(); ++g) {
        const double x = out.grid(g);
        auto first = std::lower_bound(sorted.begin(), sorted.end(), x - reach);
        auto last = std::upper_bound(first, sorted.end(), x + reach);
        double acc = 0.0;
        for (auto it = first; it != last; ++it) {
            const double z = (x - *it) / h;
            acc += std::exp(-0.5 * z * z);
        }
        out.density(g) = acc * norm;
    }

    const double integral =
        dx * (out.density.sum() - 0.5 * (out.density(0) + out.density(out.density.size() - 1)));
    out.retained_mass = integral;
    if (integral > 0.0) out.density /= integral;
    return out;
}

DensityCurve kde(std::span<const double> values, std::size_t grid_size, std::string metric,
                 std::uint64_t seed) {
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("kde: samples must lie in [0, 1]");
    }
    if (values.size() <= kMaxKdeSamples) return kde_on_range(values, 0.0, 1.0, grid_size, std::move(metric));

    // Partial Fisher-Yates: the first kMaxKdeSamples slots become a uniform subsample.
    std::vector<double> pool(values.begin(), values.end());
    Rng rng(seed);
    for (std::size_t i = 0; i < kMaxKdeSamples; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(kMaxKdeSamples);
    return kde_on_range(pool, 0.0, 1.0, grid_size, std::move(metric));
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ParameterError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lower = static_cast<std::size_t>(std::floor(pos));
    const std::size_t upper = std::min(lower + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lower);
    return values[lower] + frac * (values[upper] - values[lower]);
}

MetricSummary summarize(std::span<const double> values) {
    if (values.empty()) throw ParameterError("cannot summarise an empty map");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    auto q = [&](double p) {
        const double pos = p * static_cast<double>(sorted.size() - 1);
        const auto lower = static_cast<std::size_t>(std::floor(pos));
        const std::size_t upper = std::min(lower + 1, sorted.size() - 1);
        return sorted[lower] + (pos - static_cast<double>(lower)) * (sorted[upper] - sorted[lower]);
    };
    MetricSummary s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    s.median = q(0.5);
    s.p05 = q(0.05);
    s.p95 = q(0.95);
    s.frac_above_half = static_cast<double>(std::count_if(values.begin(), values.end(),
                                                          [](double v) { return v > 0.5; })) /
                        static_cast<double>(values.size());
    return s;
}

SummaryStats summary_stats(const EpistemicMaps& maps, std::span<const double> weights) {
    auto flat = [](const Plane& p) {
        return std::span<const double>(p.data(), static_cast<std::size_t>(p.size()));
    };
    SummaryStats s;
    s.belief = summarize(flat(maps.bel));
    s.plausibility = summarize(flat(maps.pl));
    s.uncertainty = summarize(flat(maps.unc));
    s.mean_conflict = maps.conflict.mean();
    for (const auto& step : maps.conflict.per_step) s.mean_conflict_per_step.push_back(step.mean());
    if (maps.conflict.total_conflict_flags.size() > 0) {
        s.total_conflict_pixels = static_cast<std::size_t>((maps.conflict.total_conflict_flags > 0.0).count());
    }
    s.weights.assign(weights.begin(), weights.end());
    return s;
}

Eigen::VectorXd logspace(double lo, double hi, Index n) {
    if (!(lo > 0.0 && hi > 0.0) || n < 1) throw ParameterError("logspace needs positive bounds");
    if (n == 1) return Eigen::VectorXd::Constant(1, lo);
    Eigen::VectorXd exps = Eigen::VectorXd::LinSpaced(n, std::log10(lo), std::log10(hi));
    Eigen::VectorXd out = exps.unaryExpr([](double e) { return std::pow(10.0, e); });
    out(0) = lo;
    out(n - 1) = hi;
    return out;
}

SweepCurve sweep_temperature(const CountVector& c, const Eigen::VectorXd& temperatures,
                             const Eigen::VectorXd& alpha0) {
    SweepCurve out;
    out.parameter = SweepParameter::Temperature;
    out.xs = temperatures;
    out.ys.resize(c.size(), temperatures.size());
    for (Index t = 0; t < temperatures.size(); ++t) {
        out.ys.col(t) = expected_weights(tempered_posterior(c, temperatures(t), alpha0)).w;
    }
    for (Index j = 0; j < c.size(); ++j) out.series.push_back("model_" + std::to_string(j));
    return out;
}

SweepCurve sweep_temperature(const CountVector& c, const Eigen::VectorXd& temperatures) {
    return sweep_temperature(c, temperatures, Eigen::VectorXd::Ones(c.size()));
}

SweepCurve sweep_lambda(const Eigen::VectorXd& phis, const Eigen::VectorXd& lambdas, MassSide side) {
    if (!phis.allFinite()) throw DataError("sweep_lambda: non-finite attribution value");
    SweepCurve out;
    out.parameter = SweepParameter::Lambda;
    out.xs = lambdas;
    out.ys.resize(phis.size(), lambdas.size());
    for (Index l = 0; l < lambdas.size(); ++l) {
        const MassMap m = bpa_from_plane(phis.array(), 1.0, lambdas(l));
        out.ys.col(l) = side == MassSide::For ? m.m_for.matrix().col(0) : m.m_against.matrix().col(0);
    }
    for (Index i = 0; i < phis.size(); ++i) out.series.push_back("phi=" + format_double(phis(i)));
    return out;
}

nlohmann::json to_json(const DensityCurve& curve) {
    nlohmann::json doc = {
        {"metric", curve.metric},
        {"grid", std::vector<double>(curve.grid.begin(), curve.grid.end())},
        {"density", std::vector<double>(curve.density.begin(), curve.density.end())},
        {"bandwidth", curve.bandwidth},
        {"n_points", curve.n_points},
        {"retained_mass", curve.retained_mass},
        {"degenerate", curve.degenerate},
    };
    if (curve.degenerate) doc["spike_location"] = curve.spike_location;
    return doc;
}

nlohmann::json to_json(const SweepCurve& curve) {
    nlohmann::json series = nlohmann::json::object();
    for (Index i = 0; i < curve.ys.rows(); ++i) {
        const Eigen::VectorXd row = curve.ys.row(i);
        series[curve.series[static_cast<std::size_t>(i)]] = std::vector<double>(row.begin(), row.end());
    }
    return {
        {"parameter", curve.parameter == SweepParameter::Temperature ? "T" : "lambda"},
        {"xs", std::vector<double>(curve.xs.begin(), curve.xs.end())},
        {"series", std::move(series)},
    };
}

nlohmann::json to_json(const MetricSummary& s) {
    return {{"mean", s.mean}, {"median", s.median}, {"p05", s.p05},
            {"p95", s.p95},   {"frac_above_0_5", s.frac_above_half}};
}

nlohmann::json to_json(const SummaryStats& s) {
    return {
        {"belief", to_json(s.belief)},
        {"plausibility", to_json(s.plausibility)},
        {"uncertainty", to_json(s.uncertainty)},
        {"mean_conflict", s.mean_conflict},
        {"mean_conflict_per_step", s.mean_conflict_per_step},
        {"total_conflict_pixels", s.total_conflict_pixels},
        {"weights", s.weights},
    };
}

std::string to_csv(const DensityCurve& curve) {
    std::ostringstream out;
    out << "x,density\n";
    for (Index i = 0; i < curve.grid.size(); ++i) {
        out << format_double(curve.grid(i)) << ',' << format_double(curve.density(i)) << '\n';
    }
    return out.str();
}

std::string to_csv(const SweepCurve& curve) {
    std::ostringstream out;
    out << (curve.parameter == SweepParameter::Temperature ? "T" : "lambda");
    for (const auto& name : curve.series) out << ',' << name;
    out << '\n';
    for (Index x = 0; x < curve.xs.size(); ++x) {
        out << format_double(curve.xs(x));
        for (Index s = 0; s < curve.ys.rows(); ++s) out << ',' << format_double(curve.ys(s, x));
        out << '\n';
    }
    return out.str();
}

}  // namespace ubiq
