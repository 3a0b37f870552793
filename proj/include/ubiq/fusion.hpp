#pragma once

// Dempster's rule over the binary frame {theta, not-theta, Omega}, sequential ensemble fusion
// and extraction of belief / plausibility / uncertainty maps.

#include "ubiq/evidence.hpp"
#include "ubiq/types.hpp"

#include <span>
#include <vector>

namespace ubiq {

// Combinations with 1 - K at or below this are treated as total conflict.
inline constexpr double kConflictEpsilon = 1e-12;

struct PixelMass {
    double m_for = 0.0;
    double m_against = 0.0;
    double m_ignorance = 1.0;

    static constexpr PixelMass vacuous() noexcept { return {0.0, 0.0, 1.0}; }
};

struct Combination {
    PixelMass mass;
    double conflict = 0.0;
    bool total_conflict = false;
};

// Normalised orthogonal sum a ⊕ b. Total conflict yields the vacuous mass and sets the flag.
Combination combine_pair(const PixelMass& a, const PixelMass& b) noexcept;

struct ConflictMap {
    Plane k_total;                 // sum of per-step K
    std::vector<Plane> per_step;   // K of each pairwise combination, in fold order
    Plane total_conflict_flags;    // 1 where any step hit the total-conflict guard
    int steps = 0;

    double mean() const { return k_total.size() == 0 ? 0.0 : k_total.mean(); }
};

struct EpistemicMaps {
    Plane bel;
    Plane pl;
    Plane unc;
    MassMap fused_mass;
    ConflictMap conflict;
};

// Left fold of combine_pair across masses in order, then Bel = m_for, Pl = 1 - m_against,
// U = Pl - Bel.
EpistemicMaps fuse_sequential(std::span<const MassMap> masses);

// Bel / Pl / U read directly off a single (possibly already fused) mass map.
EpistemicMaps epistemic_metrics(const MassMap& fused, ConflictMap conflict);

// max |Pl(theta) - (1 - Bel(not theta))| with Bel(not theta) = fused m_against.
double duality_check(const EpistemicMaps& maps);

}  // namespace ubiq
