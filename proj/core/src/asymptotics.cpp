#include "chainres/asymptotics.hpp"

#include "chainres/errors.hpp"
#include "chainres/evaluator.hpp"
#include "chainres/rootfind.hpp"

#include <cmath>
#include <numbers>

namespace chainres {

namespace {

constexpr cplx I{0.0, 1.0};

} // namespace

cplx branch_sqrt(cplx z) {
    if (z.imag() == 0.0 && z.real() >= 0.0) return {std::sqrt(z.real()), 0.0};
    cplx w = std::sqrt(z); // principal: Re >= 0
    if (w.imag() < 0.0) w = -w;
    return w;
}

cplx parameter_value(ParameterKind kind, cplx delta) {
    switch (kind) {
    case ParameterKind::delta: return delta;
    case ParameterKind::inverse_delta: return 1.0 / delta;
    case ParameterKind::sqrt_delta: return branch_sqrt(delta);
    case ParameterKind::inverse_sqrt_delta: return branch_sqrt(1.0 / delta);
    }
    return delta;
}

std::string to_string(ParameterKind kind) {
    switch (kind) {
    case ParameterKind::delta: return "delta";
    case ParameterKind::inverse_delta: return "delta^-1";
    case ParameterKind::sqrt_delta: return "delta^1/2";
    case ParameterKind::inverse_sqrt_delta: return "delta^-1/2";
    }
    return "delta";
}

cplx AsymptoticResonance::evaluate(cplx delta) const {
    const cplx phi = parameter_value(kind, delta);
    cplx w = omega0 + c1 * phi;
    if (c2) w += *c2 * phi * phi;
    return w;
}

double AsymptoticResonance::small_parameter(cplx delta) const {
    const bool inverse = kind == ParameterKind::inverse_delta || kind == ParameterKind::inverse_sqrt_delta;
    return inverse ? 1.0 / std::abs(delta) : std::abs(delta);
}

AsymptoticResonance first_order(double k0, const ChainGeometry& geometry, const Medium& medium, Regime regime) {
    if (medium.has_gauge()) throw InvalidInput("first-order expansions are derived for gamma = 0");
    const ParamVector p = build_params(geometry, medium);
    const std::size_t m = p.t.size();
    std::size_t hit = 0, hits = 0;
    for (std::size_t j = 1; j <= m; ++j) {
        if (divides(p.t_at(j), k0)) {
            hit = j;
            ++hits;
        }
    }
    if (hits != 1) {
        throw InvalidInput("n(k0) = " + std::to_string(hits) + "; the first-order expansion needs exactly one t_j k0 in pi Z");
    }
    auto neighbour = [&](std::size_t j) -> cplx {
        if (j == 0 || j == m + 1) return -I; // radiating exterior
        const double arg = p.t_at(j) * k0;
        if (divides(p.t_at(j), k0) || std::abs(std::sin(arg)) < 1e-9) {
            throw InvalidInput("cotangent is singular at this k0");
        }
        return std::cos(arg) / std::sin(arg);
    };
    const cplx sum = neighbour(hit - 1) + neighbour(hit + 1);

    AsymptoticResonance res;
    res.k0 = k0;
    res.omega0 = k0 * medium.v();
    res.c1 = medium.v() * sum / (medium.r() * p.t_at(hit));
    res.kind = ParameterKind::delta;
    if (regime == Regime::large_contrast) {
        // delta and r^2/delta share their resonances exactly.
        res.c1 *= medium.r() * medium.r();
        res.kind = ParameterKind::inverse_delta;
    }
    const std::size_t idx = (hit + 1) / 2;
    if (m == 1) res.case_tag = "single_resonator";
    else if (hit == 1) res.case_tag = "first_resonator";
    else if (hit == m) res.case_tag = "last_resonator";
    else if (hit % 2 == 1) res.case_tag = "interior_resonator_" + std::to_string(idx);
    else res.case_tag = "spacing_" + std::to_string(hit / 2);
    return res;
}

namespace {

AsymptoticResonance trivial_resonance(Regime regime) {
    AsymptoticResonance r;
    r.kind = regime == Regime::small_contrast ? ParameterKind::delta : ParameterKind::inverse_delta;
    r.c1 = 0.0;
    r.case_tag = "trivial";
    return r;
}

void add_pair(std::vector<AsymptoticResonance>& out, std::size_t i, cplx lead, cplx second, ParameterKind kind) {
    for (int sign : {1, -1}) {
        AsymptoticResonance r;
        r.kind = kind;
        r.c1 = static_cast<double>(sign) * lead;
        r.c2 = second;
        r.case_tag = "omega_" + std::to_string(i + 1) + (sign > 0 ? "+" : "-");
        out.push_back(r);
    }
}

} // namespace

std::vector<AsymptoticResonance> subwavelength_spectrum(const ChainGeometry& geometry, const Medium& medium,
                                                        Regime regime) {
    if (medium.has_gauge()) throw InvalidInput("use the drift spectrum when gamma is present");
    const ParamVector p = build_params(geometry, medium);
    const CapacitanceSpectrum spec = eigensolve(build_capacitance(p));
    const double r = medium.r(), v = medium.v();
    const bool small = regime == Regime::small_contrast;
    const double mirror = small ? 1.0 : r * r; // delta -> r^2/delta
    const auto lengths = geometry.lengths();

    std::vector<AsymptoticResonance> out;
    out.push_back(trivial_resonance(regime));

    AsymptoticResonance w1;
    w1.kind = small ? ParameterKind::delta : ParameterKind::inverse_delta;
    w1.c1 = -2.0 * I * v / (r * r * geometry.total_length()) * mirror;
    w1.case_tag = "omega_1";
    out.push_back(w1);

    for (std::size_t i = 1; i < spec.eigenvalues.size(); ++i) {
        const Eigen::VectorXd& a = spec.right[i];
        double weighted = 0.0;
        for (Eigen::Index j = 0; j < a.size(); ++j) weighted += a(j) * a(j) * lengths[static_cast<std::size_t>(j)];
        const double ends = a(0) * a(0) + a(a.size() - 1) * a(a.size() - 1);
        const cplx second = -I * v * ends / (2.0 * r * r * weighted) * mirror;
        const cplx lead = v * std::sqrt(spec.eigenvalues[i] / r) * std::sqrt(mirror);
        add_pair(out, i, lead, second, small ? ParameterKind::sqrt_delta : ParameterKind::inverse_sqrt_delta);
    }
    return out;
}

std::vector<AsymptoticResonance> gauge_subwavelength_spectrum(const ChainGeometry& geometry, const Medium& medium) {
    const ParamVector p = build_params(geometry, medium);
    const CapacitanceMatrix c = build_gauge_capacitance(p);
    const CapacitanceSpectrum spec = eigensolve(c);
    const double r = medium.r(), v = medium.v(), vb = medium.vb();
    const double theta_first = c.theta.front(), theta_last = c.theta.back();

    // theta_0 a_1 b_1 + theta_{2N-1} a_N b_N over sum_j a_j b_j
    auto edge_weight = [&](std::size_t i) {
        const Eigen::VectorXd& a = spec.right[i];
        const Eigen::VectorXd& b = spec.left[i];
        const double norm = a.dot(b);
        if (std::abs(norm) < 1e-12 * a.norm() * b.norm()) {
            throw NumericalFailure("left/right eigenvector normalization is degenerate");
        }
        const Eigen::Index n = a.size() - 1;
        return (theta_first * a(0) * b(0) + theta_last * a(n) * b(n)) / norm;
    };

    std::vector<AsymptoticResonance> out;
    out.push_back(trivial_resonance(Regime::small_contrast));

    AsymptoticResonance w1;
    w1.kind = ParameterKind::delta;
    w1.c1 = -I * vb * edge_weight(0);
    w1.case_tag = "omega_1";
    out.push_back(w1);

    for (std::size_t i = 1; i < spec.eigenvalues.size(); ++i) {
        const cplx lead = v * std::sqrt(spec.eigenvalues[i] / r);
        const cplx second = -I * (vb / 2.0) * edge_weight(i);
        add_pair(out, i, lead, second, ParameterKind::sqrt_delta);
    }
    return out;
}

ZeroTracker characteristic_tracker(const ChainGeometry& geometry, const Medium& medium) {
    return [geometry, medium](cplx delta, cplx seed) {
        const Medium m = medium.with_delta(delta);
        const ParamVector p = build_params(geometry, m);
        const double v = m.v();
        const double reach = 0.25 * std::numbers::pi / p.norm1();
        AnalyticFnWithDerivative f;
        if (m.has_gauge()) {
            const cplx nu = m.nu();
            f = [p, nu](cplx k) { return eval_g_gauge_with_derivative(k, p, nu); };
        } else {
            const cplx sigma = m.sigma();
            f = [p, sigma](cplx k) { return eval_f_with_derivative(k, p, sigma); };
        }
        return newton_refine(f, seed / v, reach) * v;
    };
}

ConvergenceFit convergence_order(const ZeroTracker& reference, const AsymptoticResonance& approx,
                                 std::span<const double> deltas, std::span<const AsymptoticResonance> siblings) {
    if (deltas.size() < 4) throw InvalidInput("at least four contrast values are needed");
    const double ratio = deltas[1] / deltas[0];
    for (std::size_t i = 1; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0) || std::abs(deltas[i] / deltas[i - 1] - ratio) > 1e-9 * std::abs(ratio) || ratio == 1.0) {
            throw InvalidInput("contrast values must form a strictly monotone geometric sequence");
        }
    }

    ConvergenceFit fit;
    cplx prev_zero = 0.0, prev_pred = 0.0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const cplx delta = deltas[i];
        const cplx pred = approx.evaluate(delta);
        const cplx seed = i == 0 ? pred : prev_zero + (pred - prev_pred);
        const cplx zero = reference(delta, seed);

        double separation = INFINITY;
        for (const auto& s : siblings) {
            if (s.case_tag == approx.case_tag) continue;
            separation = std::min(separation, std::abs(s.evaluate(delta) - pred));
        }
        if (std::abs(zero - pred) > 0.5 * separation) {
            throw NumericalFailure("tracked zero is closer to another branch than to its own prediction");
        }
        fit.parameters.push_back(approx.small_parameter(delta));
        fit.errors.push_back(std::abs(zero - pred));
        fit.tracked.push_back(zero);
        prev_zero = zero;
        prev_pred = pred;
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(deltas.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const double x = std::log(fit.parameters[i]);
        const double y = std::log(std::max(fit.errors[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return fit;
}

} // namespace chainres
