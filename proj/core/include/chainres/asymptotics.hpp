#pragma once

#include "chainres/capacitance.hpp"
#include "chainres/chain.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chainres {

enum class Regime { small_contrast, large_contrast }; // delta -> 0, delta -> infinity

// Which power of delta the expansion is in.
enum class ParameterKind { delta, inverse_delta, sqrt_delta, inverse_sqrt_delta };

// sqrt on C \ [0, inf) with Im > 0, extended to x >= 0 by +sqrt(x).
cplx branch_sqrt(cplx z);

cplx parameter_value(ParameterKind kind, cplx delta);
std::string to_string(ParameterKind kind);

// omega(delta) ~ omega0 + c1 phi(delta) + c2 phi(delta)^2.
struct AsymptoticResonance {
    double k0 = 0.0;
    cplx omega0;
    cplx c1;
    ParameterKind kind = ParameterKind::delta;
    std::optional<cplx> c2;
    std::string case_tag;

    cplx evaluate(cplx delta) const;
    // |delta| or 1/|delta|: the quantity that tends to zero in this regime.
    double small_parameter(cplx delta) const;
};

// Expansion of the unique resonance near k0 v, for k0 with n(k0) = 1.
AsymptoticResonance first_order(double k0, const ChainGeometry& geometry, const Medium& medium, Regime regime);

// The 2N resonances tending to 0: the trivial one, omega_1, and omega_i^+-,
// i = 2..N, ordered (trivial, omega_1, omega_2^+, omega_2^-, ...).
std::vector<AsymptoticResonance> subwavelength_spectrum(const ChainGeometry& geometry, const Medium& medium,
                                                        Regime regime);

// Same for resonators with drift gamma, delta -> 0 only.
std::vector<AsymptoticResonance> gauge_subwavelength_spectrum(const ChainGeometry& geometry, const Medium& medium);

// Locates the exact resonance (omega) at contrast delta starting from seed.
using ZeroTracker = std::function<cplx(cplx delta, cplx seed)>;

// Newton on f(k; sigma) (or the drift characteristic function when gamma is
// present) with the geometry and r, v of medium, delta swapped in.
ZeroTracker characteristic_tracker(const ChainGeometry& geometry, const Medium& medium);

struct ConvergenceFit {
    double order = 0.0;
    std::vector<double> parameters; // small parameter per delta
    std::vector<double> errors;
    std::vector<cplx> tracked; // exact omega per delta
};

// Least-squares slope of log|omega(delta) - approx(delta)| against the log of
// the small parameter. deltas must be a strictly monotone geometric sequence
// moving towards the regime's limit. siblings, when given, are the other
// resonances of the family; a tracked zero closer to a sibling's prediction
// than half their separation is reported as a tracking failure. A sibling
// with approx's own case_tag is skipped, so the whole family may be passed.
ConvergenceFit convergence_order(const ZeroTracker& reference, const AsymptoticResonance& approx,
                                 std::span<const double> deltas,
                                 std::span<const AsymptoticResonance> siblings = {});

} // namespace chainres
