#pragma once

#include "chainres/series.hpp"

#include <vector>

namespace chainres {

struct LatticePoint {
    int j; // power of k
    int l; // power of nu

    friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

// Exact ratio num/den with den > 0, in lowest terms.
struct Rational {
    long num = 0;
    long den = 1;

    static Rational make(long num, long den);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

struct BalanceRoot {
    cplx value;
    int multiplicity;
};

struct PolygonEdge {
    LatticePoint start;
    LatticePoint end;
    Rational slope; // (end.l - start.l) / (end.j - start.j)
    std::vector<LatticePoint> lattice_points;
    std::vector<BalanceRoot> balance_roots;
};

// Negative-slope part of the lower convex hull of the support of the series,
// from the lowest point on the l axis down to the first point with l = 0.
// Edges ordered by increasing j, balance roots filled in.
std::vector<PolygonEdge> lower_hull(const BivariateSeries& series);

// Nonzero roots of sum over the edge's lattice points of c_{jl} c^j.
std::vector<BalanceRoot> balance_roots(const PolygonEdge& edge, const BivariateSeries& series);

// One asymptotic branch k ~ c nu^s.
struct Branch {
    Rational exponent;
    cplx leading;
    int multiplicity;
};

std::vector<Branch> branch_table(const BivariateSeries& series);

} // namespace chainres
