#include "ubiq/fusion.hpp"

#include "ubiq/error.hpp"
#include "ubiq/parallel.hpp"

namespace ubiq {

Combination combine_pair(const PixelMass& a, const PixelMass& b) noexcept {
    Combination out;
    // Cross terms are summed pairwise so that the result is exactly symmetric in (a, b).
    out.conflict = a.m_for * b.m_against + a.m_against * b.m_for;
    const double norm = 1.0 - out.conflict;
    if (!(norm > kConflictEpsilon)) {
        out.mass = PixelMass::vacuous();
        out.total_conflict = true;
        return out;
    }
    const double agree_for = a.m_for * b.m_for + (a.m_for * b.m_ignorance + a.m_ignorance * b.m_for);
    const double agree_against =
        a.m_against * b.m_against + (a.m_against * b.m_ignorance + a.m_ignorance * b.m_against);
    const double ignorance = a.m_ignorance * b.m_ignorance;
    out.mass = {agree_for / norm, agree_against / norm, ignorance / norm};
    return out;
}

EpistemicMaps epistemic_metrics(const MassMap& fused, ConflictMap conflict) {
    EpistemicMaps out;
    out.bel = fused.m_for;
    // Where m(Omega) is 0, 1 - m_against can round one ulp below m_for; keep Bel <= Pl.
    out.pl = (1.0 - fused.m_against).max(fused.m_for);
    out.unc = out.pl - out.bel;
    out.fused_mass = fused;
    out.conflict = std::move(conflict);
    return out;
}

EpistemicMaps fuse_sequential(std::span<const MassMap> masses) {
    if (masses.empty()) throw ParameterError("fuse_sequential needs at least one mass map");
    const Index rows = masses.front().rows();
    const Index cols = masses.front().cols();
    for (const auto& m : masses) {
        if (m.rows() != rows || m.cols() != cols || !same_shape(m.m_for, m.m_against) ||
            !same_shape(m.m_for, m.m_ignorance)) {
            throw ShapeError("mass map '" + m.model_id + "' has shape " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
        }
    }

    MassMap fused = masses.front();
    fused.model_id = "fused";
    ConflictMap conflict;
    conflict.k_total = Plane::Zero(rows, cols);
    conflict.total_conflict_flags = Plane::Zero(rows, cols);
    conflict.steps = static_cast<int>(masses.size()) - 1;
    conflict.per_step.assign(masses.size() - 1, Plane::Zero(rows, cols));

    for_each_row_block(rows, [&](Index begin, Index end) {
        for (Index r = begin; r < end; ++r) {
            for (Index c = 0; c < cols; ++c) {
                PixelMass acc{fused.m_for(r, c), fused.m_against(r, c), fused.m_ignorance(r, c)};
                double k_sum = 0.0;
                bool flagged = false;
                for (std::size_t j = 1; j < masses.size(); ++j) {
                    const auto& next = masses[j];
                    const PixelMass b{next.m_for(r, c), next.m_against(r, c),
                                      next.m_ignorance(r, c)};
                    const Combination step = combine_pair(acc, b);
                    conflict.per_step[j - 1](r, c) = step.conflict;
                    k_sum += step.conflict;
                    flagged = flagged || step.total_conflict;
                    acc = step.mass;
                }
                fused.m_for(r, c) = acc.m_for;
                fused.m_against(r, c) = acc.m_against;
                fused.m_ignorance(r, c) = acc.m_ignorance;
                conflict.k_total(r, c) = k_sum;
                conflict.total_conflict_flags(r, c) = flagged ? 1.0 : 0.0;
            }
        }
    });
    return epistemic_metrics(fused, std::move(conflict));
}

double duality_check(const EpistemicMaps& maps) {
    if (!same_shape(maps.pl, maps.fused_mass.m_against)) {
        throw ShapeError("duality_check: plausibility and fused mass differ in shape");
    }
    if (maps.pl.size() == 0) return 0.0;
    return (maps.pl - (1.0 - maps.fused_mass.m_against)).abs().maxCoeff();
}

}  // namespace ubiq
