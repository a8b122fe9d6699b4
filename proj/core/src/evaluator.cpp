#include "chainres/evaluator.hpp"

#include "chainres/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace chainres {

namespace {

constexpr cplx I{0.0, 1.0};

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void check_k(cplx k) {
    if (!finite(k)) throw InvalidInput("k must be finite");
}

void check_sigma(cplx sigma) {
    if (!finite(sigma)) throw InvalidInput("sigma must be finite");
    if (sigma == cplx(-1.0, 0.0)) throw InvalidInput("sigma = -1 is not allowed");
}

void check_hermitian(const ParamVector& p) {
    if (!p.hermitian()) throw InvalidInput("f(k; sigma) is defined for beta = 0 only; use eval_g_gauge");
}

// Scaled jump factors 2/(1+s) R(s) and 2s/(1+s) R(1/s).
Mat2 entering(cplx sigma) {
    const cplx rho = (1.0 - sigma) / (1.0 + sigma);
    return {1.0, rho, rho, 1.0};
}

Mat2 leaving(cplx sigma) {
    const cplx rho = (1.0 - sigma) / (1.0 + sigma);
    return {1.0, -rho, -rho, 1.0};
}

Mat2 rs_factor(cplx nu) { return {-1.0, 1.0 - nu, nu - 1.0, 1.0}; }

struct Block {
    Mat2 m;
    Mat2 dm;
};

Block free_block(cplx k, double t) {
    const cplx e = std::exp(I * t * k);
    const cplx em = std::exp(-I * t * k);
    return {Mat2::diag(e, em), Mat2::diag(I * t * e, -I * t * em)};
}

// (cosh z - sinh(z)/z) / z^2, entire, equal to 1/3 at 0.
cplx cosh_minus_sinhc_over_z2(cplx z) {
    if (std::abs(z) < 0.1) {
        const cplx z2 = z * z;
        cplx term = 1.0;
        cplx sum = 0.0;
        // sum_{n>=1} z^{2n-2} 2n/(2n+1)!
        double fact = 6.0; // (2n+1)! at n=1
        for (int n = 1; n <= 10; ++n) {
            sum += term * (2.0 * n / fact);
            term *= z2;
            fact *= (2.0 * n + 2.0) * (2.0 * n + 3.0);
        }
        return sum;
    }
    return (std::cosh(z) - std::sinh(z) / z) / (z * z);
}

Block drift_block(cplx k, double beta, double t) {
    const cplx delta = beta * beta - 4.0 * k * k;
    const cplx z = std::sqrt(delta) * (t / 2.0);
    const cplx s = (t / 2.0) * sinhc(z); // sinh(z)/sqrt(delta)
    const cplx c = std::cosh(z);
    const cplx ds = -(k * t * t * t / 2.0) * cosh_minus_sinhc_over_z2(z);
    const cplx dc = -2.0 * k * t * s;
    Block b;
    b.m = {2.0 * I * k * s + c, beta * s, beta * s, -2.0 * I * k * s + c};
    b.dm = {2.0 * I * s + 2.0 * I * k * ds + dc, beta * ds, beta * ds, -2.0 * I * s - 2.0 * I * k * ds + dc};
    return b;
}

// Factor list, left to right as written: J L_{2N-1} J L_{2N-2} ... L_1 J.
// Even positions hold jump factors, odd positions propagation blocks.
enum class Kind { f, g, gauge };

template <class JumpFn>
void assemble(cplx k, const ParamVector& p, Kind kind, JumpFn jump, std::vector<Block>& out) {
    const std::size_t m = p.t.size();
    out.clear();
    out.reserve(2 * m + 1);
    for (std::size_t pos = 0; pos <= m; ++pos) {
        const std::size_t j = m - pos; // the L immediately right of this jump factor is L_j
        out.push_back({jump(j), Mat2{0.0, 0.0, 0.0, 0.0}});
        if (j == 0) break;
        const double t = p.t[j - 1];
        if (kind == Kind::gauge && p.beta[j - 1] != 0.0) {
            out.push_back(drift_block(k, p.beta[j - 1], t));
        } else {
            out.push_back(free_block(k, t));
        }
    }
}

template <class JumpFn>
cplx product22(cplx k, const ParamVector& p, Kind kind, JumpFn jump) {
    // Row 2 of the product, accumulated left to right.
    cplx r1 = 0.0, r2 = 1.0;
    const std::size_t m = p.t.size();
    auto apply = [&](const Mat2& a) {
        const cplx n1 = r1 * a.m11 + r2 * a.m21;
        const cplx n2 = r1 * a.m12 + r2 * a.m22;
        r1 = n1;
        r2 = n2;
    };
    for (std::size_t pos = 0; pos <= m; ++pos) {
        const std::size_t j = m - pos;
        apply(jump(j));
        if (j == 0) break;
        const double t = p.t[j - 1];
        if (kind == Kind::gauge && p.beta[j - 1] != 0.0) {
            apply(drift_block(k, p.beta[j - 1], t).m);
        } else {
            r1 *= std::exp(I * t * k);
            r2 *= std::exp(-I * t * k);
        }
    }
    return r2;
}

template <class JumpFn>
ValueWithDerivative product22_with_derivative(cplx k, const ParamVector& p, Kind kind, JumpFn jump) {
    thread_local std::vector<Block> blocks;
    thread_local std::vector<std::array<cplx, 2>> suffix;
    assemble(k, p, kind, jump, blocks);
    const std::size_t n = blocks.size();

    // suffix[i] = column 2 of blocks[i+1] ... blocks[n-1].
    suffix.resize(n);
    std::array<cplx, 2> col{0.0, 1.0};
    for (std::size_t i = n; i-- > 0;) {
        suffix[i] = col;
        const Mat2& a = blocks[i].m;
        col = {a.m11 * col[0] + a.m12 * col[1], a.m21 * col[0] + a.m22 * col[1]};
    }

    std::array<cplx, 2> row{0.0, 1.0};
    cplx deriv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Mat2& a = blocks[i].m;
        if (i % 2 == 1) {
            const Mat2& d = blocks[i].dm;
            const auto& s = suffix[i];
            deriv += row[0] * (d.m11 * s[0] + d.m12 * s[1]) + row[1] * (d.m21 * s[0] + d.m22 * s[1]);
        }
        row = {row[0] * a.m11 + row[1] * a.m21, row[0] * a.m12 + row[1] * a.m22};
    }
    return {row[1], deriv};
}

struct FJumps {
    Mat2 enter, leave;
    // Jump factor left of L_j: leaving a resonator when j is odd.
    Mat2 operator()(std::size_t j) const { return (j % 2 == 1) ? leave : enter; }
};

struct GJumps {
    Mat2 rs;
    Mat2 operator()(std::size_t) const { return rs; }
};

} // namespace

cplx sinhc(cplx z) {
    if (std::abs(z) < 1e-2) {
        const cplx z2 = z * z;
        cplx term = 1.0, sum = 0.0;
        double fact = 1.0;
        for (int n = 0; n < 8; ++n) {
            sum += term / fact;
            term *= z2;
            fact *= (2.0 * n + 2.0) * (2.0 * n + 3.0);
        }
        return sum;
    }
    return std::sinh(z) / z;
}

Mat2 gauge_block(cplx k, double beta, double t) { return drift_block(k, beta, t).m; }

cplx eval_f(cplx k, const ParamVector& params, cplx sigma) {
    check_k(k);
    check_sigma(sigma);
    check_hermitian(params);
    return product22(k, params, Kind::f, FJumps{entering(sigma), leaving(sigma)});
}

ValueWithDerivative eval_f_with_derivative(cplx k, const ParamVector& params, cplx sigma) {
    check_k(k);
    check_sigma(sigma);
    check_hermitian(params);
    return product22_with_derivative(k, params, Kind::f, FJumps{entering(sigma), leaving(sigma)});
}

cplx eval_g(cplx k, const ParamVector& params, cplx nu) {
    check_k(k);
    if (!finite(nu)) throw InvalidInput("nu must be finite");
    return product22(k, params, Kind::g, GJumps{rs_factor(nu)});
}

ValueWithDerivative eval_g_with_derivative(cplx k, const ParamVector& params, cplx nu) {
    check_k(k);
    if (!finite(nu)) throw InvalidInput("nu must be finite");
    return product22_with_derivative(k, params, Kind::g, GJumps{rs_factor(nu)});
}

cplx eval_g_gauge(cplx k, const ParamVector& params, cplx nu) {
    check_k(k);
    if (!finite(nu)) throw InvalidInput("nu must be finite");
    return product22(k, params, Kind::gauge, GJumps{rs_factor(nu)});
}

ValueWithDerivative eval_g_gauge_with_derivative(cplx k, const ParamVector& params, cplx nu) {
    check_k(k);
    if (!finite(nu)) throw InvalidInput("nu must be finite");
    return product22_with_derivative(k, params, Kind::gauge, GJumps{rs_factor(nu)});
}

cplx ProjectivePoint::value() const {
    if (q == 0.0) {
        const double inf = std::numeric_limits<double>::infinity();
        return {inf, inf};
    }
    return p / q;
}

ProjectivePoint mobius_chain(cplx k, const ParamVector& params, cplx sigma) {
    check_k(k);
    check_sigma(sigma);
    check_hermitian(params);
    const FJumps jump{entering(sigma), leaving(sigma)};
    cplx p = 0.0, q = 1.0;
    auto apply = [&](const Mat2& a) {
        const cplx np = a.m11 * p + a.m12 * q;
        const cplx nq = a.m21 * p + a.m22 * q;
        const double scale = std::max(std::abs(np), std::abs(nq));
        p = scale > 0.0 ? np / scale : np;
        q = scale > 0.0 ? nq / scale : nq;
    };
    // Right to left: the map nearest the argument acts first.
    const std::size_t m = params.t.size();
    for (std::size_t j = 0; j <= m; ++j) {
        if (j > 0) {
            const double t = params.t[j - 1];
            apply(Mat2::diag(std::exp(I * t * k), std::exp(-I * t * k)));
        }
        apply(jump(j));
    }
    return {p, q};
}

} // namespace chainres
