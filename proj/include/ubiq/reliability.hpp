#pragma once

// Bayesian model reliability: validation counts, the tempered Dirichlet posterior over
// ensemble weights, and draws / expectations from it.

#include "ubiq/rng.hpp"
#include "ubiq/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ubiq {

inline constexpr double kDefaultTemperature = 5.0;

struct ValidationRecord {
    std::string sample_id;
    int predicted_class = 0;
    int true_class = 0;

    bool correct() const noexcept { return predicted_class == true_class; }
};

struct ValidationLog {
    std::string model_id;
    std::vector<ValidationRecord> records;

    std::size_t size() const noexcept { return records.size(); }
};

// Throws ValidationError if any class index falls outside [0, num_classes).
void check_class_indices(const ValidationLog& log, int num_classes);

// How per-model evidence counts were obtained.
enum class WeightMode { Counts, Scores };

std::string to_string(WeightMode mode);
WeightMode parse_weight_mode(const std::string& text);

struct CountVector {
    Eigen::VectorXi counts;
    int validation_size = 0;
    WeightMode mode = WeightMode::Counts;

    Index size() const noexcept { return counts.size(); }
};

// Number of correct predictions per log. Logs must list the same sample ids in the same order.
CountVector accumulate_counts(std::span<const ValidationLog> logs);

// Pseudo-counts c_j = round(s_j * V) from per-model scores in [0, 1] (e.g. F1).
CountVector counts_from_scores(const Eigen::VectorXd& scores, int validation_size);

struct DirichletPosterior {
    Eigen::VectorXd alpha;
    Eigen::VectorXd alpha0;
    double temperature = kDefaultTemperature;

    Index size() const noexcept { return alpha.size(); }
};

// alpha = alpha0 + c / T.
DirichletPosterior tempered_posterior(const CountVector& c, double temperature,
                                      const Eigen::VectorXd& alpha0);

// Same, with the non-informative prior alpha0 = ones.
DirichletPosterior tempered_posterior(const CountVector& c, double temperature);

struct WeightVector {
    enum class Provenance { Sampled, Expected };

    Eigen::VectorXd w;
    Provenance provenance = Provenance::Expected;
    std::optional<std::uint64_t> seed;

    Index size() const noexcept { return w.size(); }
};

// Posterior mean alpha_j / sum(alpha).
WeightVector expected_weights(const DirichletPosterior& post);

// One Dirichlet draw from normalised Gamma(alpha_j, 1) variates. Bit-reproducible per seed.
WeightVector sample_weights(const DirichletPosterior& post, std::uint64_t seed);

// Gamma(shape, 1) variate: Marsaglia-Tsang squeeze for shape >= 1, boosted for shape < 1.
double gamma_variate(double shape, Rng& rng);

}  // namespace ubiq
