#pragma once

#include "chainres/chain.hpp"
#include "chainres/evaluator.hpp"
#include "chainres/rootfind.hpp"
#include "chainres/series.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace chainres::testing {

inline constexpr double pi = std::numbers::pi;

inline std::vector<double> uniform_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline ChainGeometry random_geometry(std::mt19937_64& rng, std::size_t n, double lo = 0.3, double hi = 1.5) {
    return ChainGeometry(uniform_vec(rng, n, lo, hi), uniform_vec(rng, n - 1, lo, hi));
}

inline ParamVector random_params(std::mt19937_64& rng, std::size_t n, double lo = 0.3, double hi = 1.5) {
    return make_params(uniform_vec(rng, 2 * n - 1, lo, hi));
}

// Zeros of f(.; sigma) in |Re k| <= x inside the computed strip.
inline SpectrumResult spectrum_in(const ParamVector& p, cplx sigma, double xmin, double xmax, bool real_positive,
                                  unsigned threads = 1) {
    const TrigPoly poly = expand_f_trig(p, sigma);
    const auto strip = strip_bounds(poly, real_positive);
    FindOptions o;
    o.bandwidth = p.norm1();
    o.threads = threads;
    return find_zeros([&](cplx k) { return eval_f_with_derivative(k, p, sigma); },
                      Rect{xmin, xmax, strip->lower, strip->upper}, o);
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace chainres::testing
