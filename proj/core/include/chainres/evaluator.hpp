#pragma once

#include "chainres/chain.hpp"

#include <complex>

namespace chainres {

struct Mat2 {
    cplx m11{1.0}, m12{0.0}, m21{0.0}, m22{1.0};

    static Mat2 identity() { return {}; }
    static Mat2 diag(cplx a, cplx d) { return {a, 0.0, 0.0, d}; }
    cplx det() const { return m11 * m22 - m12 * m21; }

    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
                a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
    }
};

struct ValueWithDerivative {
    cplx value;
    cplx d_dk;
};

// f(k; sigma): (2,2) entry of the scaled total propagation matrix. The
// prefactor (4 sigma)^N / (1 + sigma)^{2N} is distributed over the jump
// factors, so sigma = 0 gives the limit product with no special casing.
// Requires Hermitian params (beta = 0).
cplx eval_f(cplx k, const ParamVector& params, cplx sigma);
ValueWithDerivative eval_f_with_derivative(cplx k, const ParamVector& params, cplx sigma);

// g(k; nu) = [(R + nu S) L_{2N-1} (R + nu S) ... L_1 (R + nu S)]_{22}.
// Ignores beta.
cplx eval_g(cplx k, const ParamVector& params, cplx nu);
ValueWithDerivative eval_g_with_derivative(cplx k, const ParamVector& params, cplx nu);

// Same product with the drift-dependent resonator blocks. Resonators with
// beta_j == 0 take exactly the eval_g code path.
cplx eval_g_gauge(cplx k, const ParamVector& params, cplx nu);
ValueWithDerivative eval_g_gauge_with_derivative(cplx k, const ParamVector& params, cplx nu);

// Homogeneous coordinates of the Moebius chain applied to 0.
struct ProjectivePoint {
    cplx p;
    cplx q;

    bool at_infinity(double tol) const { return std::abs(q) <= tol * std::hypot(std::abs(p), std::abs(q)); }
    cplx value() const; // p/q, complex infinity when q == 0
};

ProjectivePoint mobius_chain(cplx k, const ParamVector& params, cplx sigma);

// sinh(z)/z, entire.
cplx sinhc(cplx z);

// Resonator block of the drift problem in the e_+/e_- basis.
Mat2 gauge_block(cplx k, double beta, double t);

} // namespace chainres
