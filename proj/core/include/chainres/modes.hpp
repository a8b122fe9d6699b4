#pragma once

#include "chainres/capacitance.hpp"
#include "chainres/chain.hpp"

#include <vector>

namespace chainres {

// Segment tags: 0 left exterior, 2j-1 resonator j, 2j spacing j, 2N right exterior.
struct ModeSample {
    double x;
    cplx u;
    cplx du;
    int segment;
};

// Resonant mode with u = exp(-ik(x - x_1^-)) left of the chain. Every
// segment is sampled uniformly including both endpoints, so each interface
// appears twice (once per side). The exterior windows extend one unit.
struct ModeProfile {
    cplx k;
    std::vector<ModeSample> samples;
    // |u' - iku| at x_N^+ over the sup of |u'| + |k u| along the chain (u' taken
    // on the exterior side inside resonators).
    double outgoing_residual = 0.0;
};

// Propagates (u, u') through the chain. Throws InvalidInput when k is not a
// resonance (outgoing residual above 1e-6) or samples_per_segment < 2.
ModeProfile reconstruct(cplx k, const ChainGeometry& geometry, const Medium& medium, int samples_per_segment = 64,
                        cplx left_amplitude = 1.0);

struct ProfileDeviation {
    double resonators = 0.0;     // sup |u - a_j| on resonator samples
    double spacings = 0.0;       // sup |u - (a_j + b_j (x - x_j^+))| on interior spacings
    double resonator_slope = 0.0; // sup |u'| on resonator samples
    cplx scale;                   // u was divided by this to match a
};

// Compares a small-contrast subwavelength mode against the piecewise
// constant/linear profile built from eigenvector eig_index (0-based) of the
// capacitance matrix. The plateau vector is read at resonator midpoints and
// matched to a by a least-squares scalar. Exterior segments are not scored.
ProfileDeviation check_subwavelength_profile(const ModeProfile& profile, const CapacitanceSpectrum& spec,
                                             std::size_t eig_index, const ChainGeometry& geometry);

struct DualityCheck {
    cplx t;
    double max_residual = 0.0;
};

// Reconstructs the modes at delta and r^2/delta for the common resonance k,
// the second with left tail v_tail exp(-ik(x - x_1^-)), fits the scalar t
// linking them and returns the worst relative residual of the four
// first-order relations between u and v.
DualityCheck check_duality(cplx k, const ChainGeometry& geometry, const Medium& medium, cplx v_tail = 1.0,
                           int samples_per_segment = 64);

} // namespace chainres
