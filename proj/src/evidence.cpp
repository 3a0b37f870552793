#include "ubiq/evidence.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace ubiq {

void FrameConfig::validate() const {
    if (class_names.size() < 2) throw ValidationError("frame needs at least two classes");
    std::set<std::string> seen;
    for (const auto& name : class_names) {
        if (name.empty()) throw ValidationError("class names must be non-empty");
        if (!seen.insert(name).second) throw ValidationError("duplicate class name '" + name + "'");
    }
    if (target_class < 0 || target_class >= num_classes()) {
        throw ValidationError("target class " + std::to_string(target_class) + " outside [0, " +
                              std::to_string(num_classes()) + ")");
    }
}

std::string to_string(ChannelMode mode) {
    switch (mode) {
        case ChannelMode::Sum: return "sum";
        case ChannelMode::Mean: return "mean";
        case ChannelMode::L2: return "l2";
    }
    return "sum";
}

ChannelMode parse_channel_mode(const std::string& text) {
    if (text == "sum") return ChannelMode::Sum;
    if (text == "mean") return ChannelMode::Mean;
    if (text == "l2") return ChannelMode::L2;
    throw ParameterError("unknown channel_mode '" + text + "' (expected sum, mean or l2)");
}

MassMap attribution_to_mass(const AttributionMap& phi, double w, double lambda) {
    MassMap out = bpa_from_plane(phi.values, w, lambda);
    out.model_id = phi.model_id;
    return out;
}

MassMap vacuous_mass(Index rows, Index cols) {
    if (rows <= 0 || cols <= 0) throw ShapeError("vacuous mass needs positive dimensions");
    MassMap out;
    out.model_id = "vacuous";
    out.m_for = Plane::Zero(rows, cols);
    out.m_against = Plane::Zero(rows, cols);
    out.m_ignorance = Plane::Ones(rows, cols);
    out.weight = 0.0;
    return out;
}

double mass_validity_violation(const MassMap& m) {
    if (!same_shape(m.m_for, m.m_against) || !same_shape(m.m_for, m.m_ignorance)) {
        throw ShapeError("mass planes differ in shape");
    }
    if (m.m_for.size() == 0) return 0.0;
    double worst = 0.0;
    for (const Plane* p : {&m.m_for, &m.m_against, &m.m_ignorance}) {
        if (!p->allFinite()) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, (-p->minCoeff()));
        worst = std::max(worst, p->maxCoeff() - 1.0);
    }
    const double sum_err = (m.m_for + m.m_against + m.m_ignorance - 1.0).abs().maxCoeff();
    return std::max(worst, sum_err);
}

}  // namespace ubiq
