#include "ubiq/reliability.hpp"

#include "ubiq/error.hpp"

#include <cmath>

namespace ubiq {

void check_class_indices(const ValidationLog& log, int num_classes) {
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        const auto& r = log.records[i];
        if (r.predicted_class < 0 || r.predicted_class >= num_classes || r.true_class < 0 ||
            r.true_class >= num_classes) {
            throw ValidationError("validation log '" + log.model_id + "' record " +
                                  std::to_string(i) + " (" + r.sample_id +
                                  "): class index outside [0, " + std::to_string(num_classes) +
                                  ")");
        }
    }
}

std::string to_string(WeightMode mode) {
    return mode == WeightMode::Counts ? "counts" : "scores";
}

WeightMode parse_weight_mode(const std::string& text) {
    if (text == "counts") return WeightMode::Counts;
    if (text == "scores") return WeightMode::Scores;
    throw ParameterError("unknown weight_mode '" + text + "' (expected counts or scores)");
}

CountVector accumulate_counts(std::span<const ValidationLog> logs) {
    if (logs.empty()) throw EmptyValidationError("no validation logs supplied");
    const auto& reference = logs.front();
    if (reference.records.empty()) {
        throw EmptyValidationError("validation log '" + reference.model_id + "' is empty");
    }

    CountVector out;
    out.counts = Eigen::VectorXi::Zero(static_cast<Index>(logs.size()));
    out.validation_size = static_cast<int>(reference.size());
    out.mode = WeightMode::Counts;

    for (std::size_t j = 0; j < logs.size(); ++j) {
        const auto& log = logs[j];
        if (log.records.empty()) {
            throw EmptyValidationError("validation log '" + log.model_id + "' is empty");
        }
        if (log.size() != reference.size()) {
            throw AlignmentError("validation log '" + log.model_id + "' has " +
                                 std::to_string(log.size()) + " records, expected " +
                                 std::to_string(reference.size()));
        }
        int correct = 0;
        for (std::size_t i = 0; i < log.records.size(); ++i) {
            if (log.records[i].sample_id != reference.records[i].sample_id) {
                throw AlignmentError("validation log '" + log.model_id + "' record " +
                                     std::to_string(i) + " is sample '" +
                                     log.records[i].sample_id + "', expected '" +
                                     reference.records[i].sample_id + "'");
            }
            if (log.records[i].correct()) ++correct;
        }
        out.counts(static_cast<Index>(j)) = correct;
    }
    return out;
}

CountVector counts_from_scores(const Eigen::VectorXd& scores, int validation_size) {
    if (scores.size() == 0) throw EmptyValidationError("no model scores supplied");
    if (validation_size <= 0) throw EmptyValidationError("validation size must be positive");
    for (Index j = 0; j < scores.size(); ++j) {
        if (!(scores(j) >= 0.0 && scores(j) <= 1.0)) {
            throw ParameterError("model score " + std::to_string(j) + " outside [0, 1]");
        }
    }
    CountVector out;
    out.counts = (scores.array() * validation_size).round().cast<int>().matrix();
    out.validation_size = validation_size;
    out.mode = WeightMode::Scores;
    return out;
}

DirichletPosterior tempered_posterior(const CountVector& c, double temperature,
                                      const Eigen::VectorXd& alpha0) {
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw ParameterError("temperature must be a positive finite number");
    }
    if (alpha0.size() != c.size()) {
        throw ShapeError("prior has " + std::to_string(alpha0.size()) + " entries but " +
                         std::to_string(c.size()) + " counts were given");
    }
    if ((alpha0.array() <= 0.0).any() || !alpha0.allFinite()) {
        throw ParameterError("prior concentrations must be positive");
    }
    if ((c.counts.array() < 0).any()) throw ParameterError("counts must be nonnegative");

    DirichletPosterior post;
    post.alpha0 = alpha0;
    post.temperature = temperature;
    post.alpha = alpha0 + c.counts.cast<double>() / temperature;
    return post;
}

DirichletPosterior tempered_posterior(const CountVector& c, double temperature) {
    return tempered_posterior(c, temperature, Eigen::VectorXd::Ones(c.size()));
}

WeightVector expected_weights(const DirichletPosterior& post) {
    WeightVector out;
    out.w = post.alpha / post.alpha.sum();
    out.provenance = WeightVector::Provenance::Expected;
    return out;
}

double gamma_variate(double shape, Rng& rng) {
    if (shape < 1.0) {
        // Gamma(a) = Gamma(a + 1) * U^(1/a)
        const double boosted = gamma_variate(shape + 1.0, rng);
        return boosted * std::pow(rng.uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

WeightVector sample_weights(const DirichletPosterior& post, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd g(post.size());
    for (Index j = 0; j < post.size(); ++j) g(j) = gamma_variate(post.alpha(j), rng);

    WeightVector out;
    out.w = g / g.sum();
    out.provenance = WeightVector::Provenance::Sampled;
    out.seed = seed;
    return out;
}

}  // namespace ubiq
