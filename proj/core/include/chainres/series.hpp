#pragma once

#include "chainres/chain.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace chainres {

struct TrigTerm {
    double exponent;
    cplx coeff;
};

// sum_j a_j exp(i lambda_j k), exponents strictly increasing.
class TrigPoly {
public:
    TrigPoly() = default;
    TrigPoly(std::vector<TrigTerm> terms, std::size_t enumerated = 0);

    std::span<const TrigTerm> terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    // Number of raw terms summed before merging equal exponents.
    std::size_t enumerated_terms() const { return enumerated_; }

    cplx operator()(cplx k) const;
    cplx derivative(cplx k) const;
    // Sum of |a_j| exp(-lambda_j Im k): natural magnitude scale at height Im k.
    double magnitude_scale(double im_k) const;

private:
    std::vector<TrigTerm> terms_;
    std::size_t enumerated_ = 0;
};

inline constexpr std::size_t max_trig_resonators = 14;

// Explicit exponential-polynomial form of f(k; sigma): sum over sign vectors
// alpha with alpha_0 = alpha_{2N} = -1 of (-1)^{sum j eps_j} rho^{sum eps_j}
// exp(i <alpha, t> k), where eps_j marks a sign change between alpha_{j-1}
// and alpha_j and rho = (1 - sigma)/(1 + sigma).
TrigPoly expand_f_trig(const ParamVector& params, cplx sigma);

// Sum over index sets j_1 < ... < j_l of x (0-based positions) with no two
// adjacent, of the product of the chosen entries.
double gapped_elementary(std::span<const double> x, std::size_t l);

// Leading small-k coefficients of g_l(k), the nu^l coefficient of g(k; nu):
// odd is the k^{2N-1-2l} coefficient, even_left and even_right the two parts
// of the k^{2N-2l} coefficient carrying theta_0 and theta_{2N-1}.
struct LeadingCoefficients {
    cplx odd;
    cplx even_left;
    cplx even_right;
};

LeadingCoefficients g_l_leading(const ParamVector& params, int l);
double g_N_constant(const ParamVector& params); // 2^N

// Truncated double Taylor series sum c_{jl} k^j nu^l.
class BivariateSeries {
public:
    BivariateSeries(int j_max, int l_max);

    int j_max() const { return j_max_; }
    int l_max() const { return l_max_; }
    cplx coeff(int j, int l) const;
    void set(int j, int l, cplx c);
    std::vector<std::pair<int, int>> support() const; // sorted by (j, l)
    // Smallest j with c_{j0} != 0, or -1.
    int order_at_zero() const;

private:
    int j_max_, l_max_;
    std::vector<cplx> c_;
};

struct CauchyOptions {
    double radius_k = 0.1;
    double radius_nu = 0.1;
    double snap = 1e-9;      // relative to max |g| on the torus
    double agreement = 1e-8; // node-doubling tolerance
};

BivariateSeries bivariate_taylor(const std::function<cplx(cplx, cplx)>& fn, int j_max, int l_max,
                                 const CauchyOptions& options = {});
BivariateSeries g_bivariate_series(const ParamVector& params, int j_max, int l_max,
                                   const CauchyOptions& options = {});

// Characteristic polynomial P_N(lambda) = det(C - lambda I) of the capacitance
// matrix generated by theta_0..theta_{2N-1}, and the corner cofactors.
enum class CharPoly { P, Q_first, Q_last };

cplx char_poly_eval(std::span<const double> theta, cplx lambda, CharPoly which);

} // namespace chainres
