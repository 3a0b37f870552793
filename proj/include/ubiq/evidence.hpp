#pragma once

// Converts signed attribution maps into per-pixel basic probability assignments over the
// one-vs-rest frame {theta, not-theta, Omega}.

#include "ubiq/error.hpp"
#include "ubiq/types.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace ubiq {

inline constexpr double kDefaultLambda = 100.0;

struct FrameConfig {
    std::vector<std::string> class_names;
    int target_class = 0;

    int num_classes() const noexcept { return static_cast<int>(class_names.size()); }
    // Throws ValidationError on fewer than two classes, empty or duplicate names, or a bad target.
    void validate() const;
};

enum class ChannelMode { Sum, Mean, L2 };

std::string to_string(ChannelMode mode);
ChannelMode parse_channel_mode(const std::string& text);

struct AttributionMap {
    std::string model_id;
    int target_class = 0;
    Plane values;
    std::vector<std::size_t> source_shape;
};

// Mass planes for one evidence source. m_for is mass on {theta}, m_against on {not theta},
// m_ignorance on Omega.
struct MassMap {
    std::string model_id;
    Plane m_for;
    Plane m_against;
    Plane m_ignorance;
    double lambda = kDefaultLambda;
    double weight = 1.0;

    Index rows() const noexcept { return m_for.rows(); }
    Index cols() const noexcept { return m_for.cols(); }
};

// Reduces an H×W×C C-order tensor to an H×W plane across channels. Computation is in double
// regardless of the input scalar type.
template <typename Scalar>
Plane channel_reduce(std::span<const Scalar> data, Index rows, Index cols, Index channels,
                     ChannelMode mode = ChannelMode::Sum) {
    if (channels < 1 || rows < 0 || cols < 0) throw ShapeError("channel_reduce: bad tensor shape");
    if (static_cast<Index>(data.size()) != rows * cols * channels) {
        throw ShapeError("channel_reduce: payload does not match shape");
    }
    using Pixels = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const Pixels> pixels(data.data(), rows * cols, channels);
    const auto as_double = pixels.template cast<double>();
    if (!as_double.allFinite()) throw DataError("attribution tensor contains non-finite values");

    Eigen::ArrayXd reduced;
    switch (mode) {
        case ChannelMode::Sum: reduced = as_double.rowwise().sum(); break;
        case ChannelMode::Mean: reduced = as_double.rowwise().mean(); break;
        case ChannelMode::L2: reduced = as_double.square().rowwise().sum().sqrt(); break;
    }
    return Eigen::Map<const Plane>(reduced.data(), rows, cols);
}

// Elementwise tanh BPA mapping on any Eigen array expression:
//   psi = tanh(lambda * phi), m_for = w * max(0, psi), m_against = w * max(0, -psi),
//   m_ignorance = 1 - m_for - m_against.
template <typename Derived>
MassMap bpa_from_plane(const Eigen::ArrayBase<Derived>& phi, double w, double lambda) {
    if (!(w >= 0.0 && w <= 1.0)) throw ParameterError("model weight must lie in [0, 1]");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ParameterError("lambda must be a positive finite number");
    }
    const Plane values = phi.template cast<double>();
    if (!values.allFinite()) throw DataError("attribution map contains non-finite values");

    const Plane psi = (lambda * values).tanh();
    MassMap out;
    out.m_for = w * psi.max(0.0);
    out.m_against = w * (-psi).max(0.0);
    out.m_ignorance = 1.0 - (out.m_for + out.m_against);
    out.lambda = lambda;
    out.weight = w;
    return out;
}

MassMap attribution_to_mass(const AttributionMap& phi, double w, double lambda = kDefaultLambda);

// All mass on Omega: the identity element of Dempster's rule.
MassMap vacuous_mass(Index rows, Index cols);

// Largest deviation from a valid mass function (negative mass, mass above one, or sum != 1).
double mass_validity_violation(const MassMap& m);

}  // namespace ubiq
