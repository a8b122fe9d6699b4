#include "chainres/series.hpp"

#include "chainres/errors.hpp"
#include "chainres/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chainres {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double exponent_merge_tol = 1e-12;
constexpr double coeff_floor = 1e-300;

void merge_terms(std::vector<TrigTerm>& terms) {
    std::sort(terms.begin(), terms.end(),
              [](const TrigTerm& a, const TrigTerm& b) { return a.exponent < b.exponent; });
    std::vector<TrigTerm> merged;
    merged.reserve(terms.size());
    std::size_t i = 0;
    while (i < terms.size()) {
        const double lead = terms[i].exponent;
        cplx sum = 0.0;
        std::size_t j = i;
        while (j < terms.size() && terms[j].exponent - lead <= exponent_merge_tol) {
            sum += terms[j].coeff;
            ++j;
        }
        if (std::abs(sum) >= coeff_floor) merged.push_back({lead, sum});
        i = j;
    }
    terms.swap(merged);
}

} // namespace

TrigPoly::TrigPoly(std::vector<TrigTerm> terms, std::size_t enumerated)
    : terms_(std::move(terms)), enumerated_(enumerated) {}

cplx TrigPoly::operator()(cplx k) const {
    cplx s = 0.0;
    for (const auto& term : terms_) s += term.coeff * std::exp(I * term.exponent * k);
    return s;
}

cplx TrigPoly::derivative(cplx k) const {
    cplx s = 0.0;
    for (const auto& term : terms_) s += I * term.exponent * term.coeff * std::exp(I * term.exponent * k);
    return s;
}

double TrigPoly::magnitude_scale(double im_k) const {
    double s = 0.0;
    for (const auto& term : terms_) s += std::abs(term.coeff) * std::exp(-term.exponent * im_k);
    return s;
}

TrigPoly expand_f_trig(const ParamVector& params, cplx sigma) {
    const std::size_t n = params.resonators();
    if (n > max_trig_resonators) {
        throw InvalidInput("trigonometric expansion is limited to " + std::to_string(max_trig_resonators) +
                           " resonators");
    }
    if (sigma == cplx(-1.0, 0.0)) throw InvalidInput("sigma = -1 is not allowed");
    const cplx rho = (1.0 - sigma) / (1.0 + sigma);
    const std::size_t m = params.t.size(); // 2N - 1
    std::vector<cplx> rho_pow(m + 2, 1.0);
    for (std::size_t e = 1; e < rho_pow.size(); ++e) rho_pow[e] = rho_pow[e - 1] * rho;

    const std::uint64_t count = std::uint64_t{1} << m;
    constexpr std::size_t chunk = std::size_t{1} << 20;
    std::vector<TrigTerm> terms;
    terms.reserve(std::min<std::uint64_t>(count, 2 * chunk));
    std::size_t since_merge = 0;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        // bit j-1 set means alpha_j = +1
        double exponent = 0.0;
        int prev = -1;
        std::size_t flips = 0, sign_sum = 0;
        for (std::size_t j = 1; j <= m + 1; ++j) {
            const int a = (j <= m) ? (((mask >> (j - 1)) & 1u) ? 1 : -1) : -1;
            if (j <= m) exponent += a * params.t[j - 1];
            if (a != prev) {
                ++flips;
                sign_sum += j;
            }
            prev = a;
        }
        const cplx c = (sign_sum % 2 ? -1.0 : 1.0) * rho_pow[flips];
        terms.push_back({exponent, c});
        if (++since_merge == chunk) {
            merge_terms(terms);
            since_merge = 0;
        }
    }
    merge_terms(terms);
    return TrigPoly(std::move(terms), static_cast<std::size_t>(count));
}

double gapped_elementary(std::span<const double> x, std::size_t l) {
    if (l == 0) return 1.0;
    if (x.size() < 2 * l - 1) return 0.0;
    // e[i][q]: sum over gapped q-sets drawn from the first i entries.
    std::vector<std::vector<double>> e(x.size() + 1, std::vector<double>(l + 1, 0.0));
    for (auto& row : e) row[0] = 1.0;
    for (std::size_t i = 1; i <= x.size(); ++i) {
        for (std::size_t q = 1; q <= l; ++q) {
            const double skip = e[i - 1][q];
            const double take = x[i - 1] * (i >= 2 ? e[i - 2][q - 1] : (q == 1 ? 1.0 : 0.0));
            e[i][q] = skip + take;
        }
    }
    return e[x.size()][l];
}

LeadingCoefficients g_l_leading(const ParamVector& params, int l) {
    const int n = static_cast<int>(params.resonators());
    if (l < 0 || l > n) throw InvalidInput("l must lie in [0, N]");
    if (l == n) return {0.0, 0.0, 0.0};
    const double prod_t = params.product();
    const auto theta = params.thetas(); // theta_0 .. theta_{2N-1}
    const std::size_t last = theta.size() - 1;
    auto range = [&](std::size_t from, std::size_t to) -> std::span<const double> {
        if (to < from) return {};
        return std::span<const double>(theta).subspan(from, to - from + 1);
    };
    const cplx minus_2i = -2.0 * I;
    const std::size_t lu = static_cast<std::size_t>(l);

    LeadingCoefficients out{};
    out.odd = prod_t * std::pow(2.0, l) * std::pow(minus_2i, 2 * n - 1 - 2 * l) *
              gapped_elementary(range(1, last - 1), lu);
    if (l == 0) return out;
    const cplx common = prod_t * std::pow(2.0, l - 1) * std::pow(minus_2i, 2 * n - 2 * l);
    out.even_left = common * theta[0] * gapped_elementary(range(2, last - 1), lu - 1);
    out.even_right = common * theta[last] * (last >= 2 ? gapped_elementary(range(1, last - 2), lu - 1)
                                                       : (lu == 1 ? 1.0 : 0.0));
    return out;
}

double g_N_constant(const ParamVector& params) {
    return std::pow(2.0, static_cast<double>(params.resonators()));
}

BivariateSeries::BivariateSeries(int j_max, int l_max)
    : j_max_(j_max), l_max_(l_max), c_(static_cast<std::size_t>((j_max + 1) * (l_max + 1)), 0.0) {
    if (j_max < 0 || l_max < 0) throw InvalidInput("truncation orders must be nonnegative");
}

cplx BivariateSeries::coeff(int j, int l) const {
    if (j < 0 || l < 0 || j > j_max_ || l > l_max_) return 0.0;
    return c_[static_cast<std::size_t>(j * (l_max_ + 1) + l)];
}

void BivariateSeries::set(int j, int l, cplx c) {
    if (j < 0 || l < 0 || j > j_max_ || l > l_max_) throw InvalidInput("series index out of range");
    c_[static_cast<std::size_t>(j * (l_max_ + 1) + l)] = c;
}

std::vector<std::pair<int, int>> BivariateSeries::support() const {
    std::vector<std::pair<int, int>> out;
    for (int j = 0; j <= j_max_; ++j)
        for (int l = 0; l <= l_max_; ++l)
            if (coeff(j, l) != 0.0) out.emplace_back(j, l);
    return out;
}

int BivariateSeries::order_at_zero() const {
    for (int j = 0; j <= j_max_; ++j)
        if (coeff(j, 0) != 0.0) return j;
    return -1;
}

namespace {

struct RawSeries {
    std::vector<cplx> scaled; // c_{jl} r_k^j r_nu^l
    double scale;
};

RawSeries cauchy_coefficients(const std::function<cplx(cplx, cplx)>& fn, int j_max, int l_max,
                              const CauchyOptions& o, int nodes) {
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<cplx> roots(static_cast<std::size_t>(nodes));
    for (int p = 0; p < nodes; ++p) roots[p] = std::polar(1.0, two_pi * p / nodes);

    // h[p][l] = (1/M) sum_q fn(k_p, nu_q) w^{-lq}
    std::vector<cplx> h(static_cast<std::size_t>(nodes * (l_max + 1)), 0.0);
    double scale = 0.0;
    std::vector<cplx> row(static_cast<std::size_t>(nodes));
    for (int p = 0; p < nodes; ++p) {
        const cplx k = o.radius_k * roots[p];
        for (int q = 0; q < nodes; ++q) {
            row[q] = fn(k, o.radius_nu * roots[q]);
            scale = std::max(scale, std::abs(row[q]));
        }
        for (int l = 0; l <= l_max; ++l) {
            cplx s = 0.0;
            for (int q = 0; q < nodes; ++q) s += row[q] * std::conj(roots[(l * q) % nodes]);
            h[p * (l_max + 1) + l] = s / static_cast<double>(nodes);
        }
    }
    std::vector<cplx> scaled(static_cast<std::size_t>((j_max + 1) * (l_max + 1)), 0.0);
    for (int j = 0; j <= j_max; ++j) {
        for (int l = 0; l <= l_max; ++l) {
            cplx s = 0.0;
            for (int p = 0; p < nodes; ++p) s += h[p * (l_max + 1) + l] * std::conj(roots[(j * p) % nodes]);
            scaled[j * (l_max + 1) + l] = s / static_cast<double>(nodes);
        }
    }
    return {std::move(scaled), scale};
}

} // namespace

BivariateSeries bivariate_taylor(const std::function<cplx(cplx, cplx)>& fn, int j_max, int l_max,
                                 const CauchyOptions& options) {
    if (j_max < 0 || l_max < 0) throw InvalidInput("truncation orders must be nonnegative");
    const int nodes = 4 * (j_max + l_max + 8);
    const RawSeries coarse = cauchy_coefficients(fn, j_max, l_max, options, nodes);
    const RawSeries fine = cauchy_coefficients(fn, j_max, l_max, options, 2 * nodes);
    const double scale = std::max(fine.scale, coarse.scale);
    if (!(scale > 0.0)) throw NumericalFailure("function vanishes on the Cauchy torus");

    BivariateSeries out(j_max, l_max);
    for (int j = 0; j <= j_max; ++j) {
        for (int l = 0; l <= l_max; ++l) {
            const std::size_t idx = static_cast<std::size_t>(j * (l_max + 1) + l);
            if (std::abs(fine.scaled[idx] - coarse.scaled[idx]) > options.agreement * scale) {
                throw NumericalFailure("Cauchy quadrature did not converge under node doubling");
            }
            if (std::abs(fine.scaled[idx]) < options.snap * scale) continue;
            const double denom = std::pow(options.radius_k, j) * std::pow(options.radius_nu, l);
            out.set(j, l, fine.scaled[idx] / denom);
        }
    }
    return out;
}

BivariateSeries g_bivariate_series(const ParamVector& params, int j_max, int l_max,
                                   const CauchyOptions& options) {
    auto fn = [&params](cplx k, cplx nu) { return eval_g(k, params, nu); };
    return bivariate_taylor(fn, j_max, l_max, options);
}

namespace {

// det of rows/cols [lo, hi] (0-based, inclusive) of C - lambda I by the
// three-term continuant recurrence.
cplx tridiagonal_det(std::span<const double> theta, std::size_t n, std::size_t lo, std::size_t hi, cplx lambda) {
    auto diag = [&](std::size_t i) {
        double d = 0.0;
        if (i > 0) d += theta[2 * i];
        if (i + 1 < n) d += theta[2 * i + 1];
        return cplx(d) - lambda;
    };
    // Product of the off-diagonal pair coupling rows i and i+1.
    auto coupling = [&](std::size_t i) { return theta[2 * i + 1] * theta[2 * i + 2]; };
    if (hi < lo) return 1.0;
    cplx prev = 1.0, cur = diag(lo);
    for (std::size_t i = lo + 1; i <= hi; ++i) {
        const cplx next = diag(i) * cur - coupling(i - 1) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

} // namespace

cplx char_poly_eval(std::span<const double> theta, cplx lambda, CharPoly which) {
    if (theta.size() < 2 || theta.size() % 2 != 0) {
        throw InvalidInput("theta must hold theta_0 .. theta_{2N-1}");
    }
    const std::size_t n = theta.size() / 2;
    const std::size_t last = theta.size() - 1;
    auto range = [&](std::size_t from, std::size_t to) -> std::span<const double> {
        if (to < from || to > last) return {};
        return theta.subspan(from, to - from + 1);
    };

    cplx sum = 0.0;
    double magnitude = 0.0;
    auto add = [&](cplx term) {
        sum += term;
        magnitude += std::abs(term);
    };
    cplx det;
    switch (which) {
    case CharPoly::P:
        for (std::size_t l = 0; l < n; ++l)
            add(std::pow(-lambda, static_cast<int>(n - l)) * gapped_elementary(range(1, last - 1), l));
        det = tridiagonal_det(theta, n, 0, n - 1, lambda);
        break;
    case CharPoly::Q_first:
        for (std::size_t l = 1; l <= n; ++l)
            add(std::pow(-lambda, static_cast<int>(n - l)) * gapped_elementary(range(2, last - 1), l - 1));
        det = n >= 2 ? tridiagonal_det(theta, n, 1, n - 1, lambda) : cplx(1.0);
        break;
    case CharPoly::Q_last:
        for (std::size_t l = 1; l <= n; ++l)
            add(std::pow(-lambda, static_cast<int>(n - l)) *
                (last >= 2 ? gapped_elementary(range(1, last - 2), l - 1) : (l == 1 ? 1.0 : 0.0)));
        det = n >= 2 ? tridiagonal_det(theta, n, 0, n - 2, lambda) : cplx(1.0);
        break;
    }
    // Gershgorin-sized floor for the determinant: near a root both sides are tiny
    double theta_max = 0.0;
    for (std::size_t j = 1; j < last; ++j) theta_max = std::max(theta_max, std::abs(theta[j]));
    const double dim = which == CharPoly::P ? static_cast<double>(n) : static_cast<double>(n - 1);
    const double floor = std::pow(2.0 * theta_max + std::abs(lambda), dim);
    const double ref = std::max({std::abs(sum), std::abs(det), magnitude, floor});
    if (std::abs(sum - det) > 1e-10 * ref) {
        throw NumericalFailure("characteristic polynomial sum formula disagrees with the determinant");
    }
    return sum;
}

} // namespace chainres
