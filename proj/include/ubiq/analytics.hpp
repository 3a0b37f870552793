#pragma once

// Distribution summaries of epistemic maps and temperature / sensitivity sweeps.

#include "ubiq/fusion.hpp"
#include "ubiq/reliability.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ubiq {

inline constexpr std::size_t kDefaultGridSize = 512;
inline constexpr std::size_t kMaxKdeSamples = 1'000'000;
inline constexpr double kMinBandwidth = 1e-3;

struct DensityCurve {
    std::string metric;
    Eigen::VectorXd grid;
    Eigen::VectorXd density;
    double bandwidth = 0.0;
    std::size_t n_points = 0;
    // Trapezoidal integral over the grid before renormalisation (kernel mass kept in range).
    double retained_mass = 1.0;
    // Fewer than two samples or zero variance: a single spike at spike_location.
    bool degenerate = false;
    double spike_location = 0.0;
};

// 0.9 * min(sd, IQR / 1.34) * n^(-1/5), floored at kMinBandwidth. Falls back to sd when the
// IQR vanishes.
double silverman_bandwidth(std::span<const double> values);

// Gaussian KDE evaluated on grid_size points spanning [lo, hi], truncated to that range and
// renormalised to unit trapezoidal integral. No range check on the samples.
DensityCurve kde_on_range(std::span<const double> values, double lo, double hi,
                          std::size_t grid_size = kDefaultGridSize, std::string metric = {});

// KDE of a pixel metric over [0, 1]. Inputs above kMaxKdeSamples are subsampled with `seed`.
DensityCurve kde(std::span<const double> values, std::size_t grid_size = kDefaultGridSize,
                 std::string metric = {}, std::uint64_t seed = 0);

// Linear-interpolated quantile (q in [0, 1]) of unsorted data.
double quantile(std::vector<double> values, double q);

struct MetricSummary {
    double mean = 0.0;
    double median = 0.0;
    double p05 = 0.0;
    double p95 = 0.0;
    double frac_above_half = 0.0;
};

MetricSummary summarize(std::span<const double> values);

struct SummaryStats {
    MetricSummary belief;
    MetricSummary plausibility;
    MetricSummary uncertainty;
    double mean_conflict = 0.0;
    std::vector<double> mean_conflict_per_step;
    std::size_t total_conflict_pixels = 0;
    std::vector<double> weights;
};

SummaryStats summary_stats(const EpistemicMaps& maps, std::span<const double> weights);

enum class SweepParameter { Temperature, Lambda };

struct SweepCurve {
    SweepParameter parameter = SweepParameter::Temperature;
    Eigen::VectorXd xs;
    Eigen::MatrixXd ys;  // one row per series, one column per x
    std::vector<std::string> series;
};

// n log-spaced points from lo to hi inclusive.
Eigen::VectorXd logspace(double lo, double hi, Index n);

// Expected weights across temperatures; one row per model.
SweepCurve sweep_temperature(const CountVector& c, const Eigen::VectorXd& temperatures,
                             const Eigen::VectorXd& alpha0);
SweepCurve sweep_temperature(const CountVector& c, const Eigen::VectorXd& temperatures);

enum class MassSide { For, Against };

// Mass tanh(lambda * phi) at w = 1 on the chosen side; one row per phi value.
SweepCurve sweep_lambda(const Eigen::VectorXd& phis, const Eigen::VectorXd& lambdas,
                        MassSide side = MassSide::For);

nlohmann::json to_json(const DensityCurve& curve);
nlohmann::json to_json(const SweepCurve& curve);
nlohmann::json to_json(const MetricSummary& s);
nlohmann::json to_json(const SummaryStats& s);

std::string to_csv(const DensityCurve& curve);
std::string to_csv(const SweepCurve& curve);

}  // namespace ubiq
