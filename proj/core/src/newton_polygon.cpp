#include "chainres/newton_polygon.hpp"

#include "chainres/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>

namespace chainres {

Rational Rational::make(long num, long den) {
    if (den == 0) throw InvalidInput("zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const long g = std::gcd(num, den);
    return {num / g, den / g};
}

namespace {

long cross(const LatticePoint& o, const LatticePoint& a, const LatticePoint& b) {
    return static_cast<long>(a.j - o.j) * (b.l - o.l) - static_cast<long>(a.l - o.l) * (b.j - o.j);
}

cplx horner(const std::vector<cplx>& coeffs, cplx x) {
    cplx s = 0.0;
    for (std::size_t d = coeffs.size(); d-- > 0;) s = s * x + coeffs[d];
    return s;
}

} // namespace

std::vector<PolygonEdge> lower_hull(const BivariateSeries& series) {
    const auto support = series.support();
    if (support.empty()) throw InvalidInput("series has empty support");
    std::vector<LatticePoint> pts;
    for (auto [j, l] : support) pts.push_back({j, l});
    std::sort(pts.begin(), pts.end(), [](const LatticePoint& a, const LatticePoint& b) {
        return a.j != b.j ? a.j < b.j : a.l < b.l;
    });

    std::vector<LatticePoint> hull;
    for (const auto& p : pts) {
        while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0) hull.pop_back();
        if (!hull.empty() && hull.back().j == p.j) continue; // keep the lowest point per column
        hull.push_back(p);
    }

    std::vector<PolygonEdge> edges;
    for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
        const LatticePoint a = hull[i], b = hull[i + 1];
        if (b.l >= a.l) break;
        PolygonEdge e;
        e.start = a;
        e.end = b;
        e.slope = Rational::make(b.l - a.l, b.j - a.j);
        for (const auto& p : pts) {
            if (p.j >= a.j && p.j <= b.j && cross(a, b, p) == 0) e.lattice_points.push_back(p);
        }
        e.balance_roots = balance_roots(e, series);
        edges.push_back(std::move(e));
    }
    return edges;
}

std::vector<BalanceRoot> balance_roots(const PolygonEdge& edge, const BivariateSeries& series) {
    const int degree = edge.end.j - edge.start.j;
    if (degree <= 0) throw InvalidInput("edge must run to the right");
    std::vector<cplx> coeffs(static_cast<std::size_t>(degree) + 1, 0.0);
    for (const auto& p : edge.lattice_points) coeffs[static_cast<std::size_t>(p.j - edge.start.j)] = series.coeff(p.j, p.l);
    if (coeffs.front() == 0.0 || coeffs.back() == 0.0) throw InvalidInput("edge endpoints must carry nonzero coefficients");

    const Eigen::Index n = degree;
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) companion(i, n - 1) = -coeffs[static_cast<std::size_t>(i)] / coeffs.back();

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(companion);
    const auto& sv = svd.singularValues();
    const double cond = sv(0) / sv(sv.size() - 1);
    if (!(cond <= 1e12)) throw NumericalFailure("balance polynomial companion matrix is ill-conditioned");

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion);
    if (es.info() != Eigen::Success) throw NumericalFailure("companion eigensolve failed");

    std::vector<cplx> derivative(coeffs.size() - 1);
    for (std::size_t d = 1; d < coeffs.size(); ++d) derivative[d - 1] = static_cast<double>(d) * coeffs[d];

    std::vector<cplx> roots;
    for (Eigen::Index i = 0; i < n; ++i) {
        cplx x = es.eigenvalues()(i);
        for (int it = 0; it < 3; ++it) {
            const cplx d = horner(derivative, x);
            if (std::abs(d) == 0.0) break;
            const cplx step = horner(coeffs, x) / d;
            if (std::abs(step) > 1e-6 * std::max(1.0, std::abs(x))) break; // clustered root: leave it
            x -= step;
        }
        roots.push_back(x);
    }
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });

    std::vector<BalanceRoot> out;
    for (cplx x : roots) {
        auto hit = std::find_if(out.begin(), out.end(), [&](const BalanceRoot& r) {
            return std::abs(r.value - x) <= 1e-6 * std::max(1.0, std::abs(x));
        });
        if (hit != out.end()) ++hit->multiplicity;
        else out.push_back({x, 1});
    }
    return out;
}

std::vector<Branch> branch_table(const BivariateSeries& series) {
    const auto edges = lower_hull(series);
    std::vector<Branch> out;
    int total = 0;
    for (const auto& e : edges) {
        const Rational s = Rational::make(-e.slope.num, e.slope.den);
        for (const auto& r : e.balance_roots) {
            out.push_back({s, r.value, r.multiplicity});
            total += r.multiplicity;
        }
    }
    const int order = series.order_at_zero();
    if (order < 0 || total != order) {
        throw NumericalFailure("branch multiplicities (" + std::to_string(total) +
                               ") do not match the order of the zero at the origin (" + std::to_string(order) +
                               "); increase the truncation orders");
    }
    return out;
}

} // namespace chainres
