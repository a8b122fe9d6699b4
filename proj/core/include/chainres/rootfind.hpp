#pragma once

#include "chainres/chain.hpp"
#include "chainres/evaluator.hpp"
#include "chainres/series.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace chainres {

struct Rect {
    double x1, x2, y1, y2;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double diameter() const;
    cplx center() const { return {0.5 * (x1 + x2), 0.5 * (y1 + y2)}; }
    bool contains(cplx z) const { return z.real() >= x1 && z.real() <= x2 && z.imag() >= y1 && z.imag() <= y2; }
    Rect inflated(double factor) const;
};

// Horizontal band lower < Im k < upper outside of which one exponential term
// dominates the rest, so no zero can lie there.
struct StripBounds {
    double lower;
    double upper;
};

// nullopt for a single-term polynomial, which has no zeros anywhere.
// With real_positive_contrast the upper bound is tightened to 0 (then the
// 0.1 margin is applied like on the lower side).
std::optional<StripBounds> strip_bounds(const TrigPoly& poly, bool real_positive_contrast = false);

using AnalyticFn = std::function<cplx(cplx)>;
using AnalyticFnWithDerivative = std::function<ValueWithDerivative(cplx)>;

struct WindingCount {
    int count;
    Rect rect; // after any outward shifts that moved the contour off a zero
};

// bandwidth: rough bound on |d arg f / dk| along the contour, used to size the
// initial sampling (the largest |exponent| for an exponential polynomial).
WindingCount count_zeros(const AnalyticFn& f, const Rect& rect, double bandwidth = 1.0);

struct ZeroRecord {
    cplx k;
    int multiplicity;
    double residual;       // |f(k)|
    double cluster_radius; // 0 for Newton-refined simple zeros
};

struct SpectrumResult {
    std::vector<ZeroRecord> zeros; // sorted by (Re k, Im k)
    Rect search_rect;
    int total_winding = 0;
    std::optional<StripBounds> strip;
};

struct FindOptions {
    double tol = 1e-10;
    double cluster_floor = 1e-6;
    unsigned threads = 1;
    double bandwidth = 1.0;
};

SpectrumResult find_zeros(const AnalyticFnWithDerivative& f, const Rect& rect, const FindOptions& options = {});

// Plain Newton iteration from a seed, run to machine precision. Throws
// NumericalFailure when it stalls, diverges or leaves the disk |k - seed| <= reach.
cplx newton_refine(const AnalyticFnWithDerivative& f, cplx seed, double reach);

// n(k0): how many t_j satisfy t_j k0 in pi Z.
int e_multiplicity(double k0, const ParamVector& params);
bool divides(double t, double k0); // t k0 in pi Z up to the relative tolerance

struct ClusterCount {
    double k0;
    int expected;
    int found;
};

struct ClusterReport {
    std::vector<ClusterCount> points;
    bool overlapping = false; // some disks intersect
};

// E-points m pi / t_j inside the search rectangle's real range.
ClusterReport cluster_counts(const SpectrumResult& result, const ParamVector& params, double radius);

struct DensityReport {
    double empirical;
    double theoretical;
    bool theoretical_applicable; // false when f has a single term (sigma = 1)
};

DensityReport zero_density(const SpectrumResult& result, const ParamVector& params, cplx sigma);

} // namespace chainres
