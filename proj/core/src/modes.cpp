#include "chainres/modes.hpp"

#include "chainres/errors.hpp"
#include "chainres/evaluator.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace chainres {

namespace {

constexpr cplx I{0.0, 1.0};

// exp(d A) for A = [[0, 1], [-kappa^2, -gamma]]. With w^2 = gamma^2/4 - kappa^2,
// (A + gamma/2)^2 = w^2, so the exponential needs only cosh and sinhc.
Mat2 segment_propagator(double d, cplx kappa, double gamma) {
    const cplx w = std::sqrt(cplx(gamma * gamma / 4.0) - kappa * kappa);
    const cplx c = std::cosh(w * d);
    const cplx s = d * sinhc(w * d);
    const double e = std::exp(-gamma * d / 2.0);
    Mat2 m;
    m.m11 = e * (c + s * (gamma / 2.0));
    m.m12 = e * s;
    m.m21 = -e * kappa * kappa * s;
    m.m22 = e * (c - s * (gamma / 2.0));
    return m;
}

struct State {
    cplx u, du;
};

State apply(const Mat2& m, State s) { return {m.m11 * s.u + m.m12 * s.du, m.m21 * s.u + m.m22 * s.du}; }

// Samples [x0, x0 + len] uniformly from the exact start state; returns the
// state at the far end.
State sweep(std::vector<ModeSample>& out, double x0, double len, State start, cplx kappa, double gamma, int n,
            int segment) {
    State s = start;
    for (int i = 0; i < n; ++i) {
        const double d = i == n - 1 ? len : len * i / (n - 1);
        s = i == 0 ? start : apply(segment_propagator(d, kappa, gamma), start);
        out.push_back({x0 + d, s.u, s.du, segment});
    }
    return s;
}

} // namespace

ModeProfile reconstruct(cplx k, const ChainGeometry& geometry, const Medium& medium, int samples_per_segment,
                        cplx left_amplitude) {
    if (samples_per_segment < 2) throw InvalidInput("samples_per_segment must be at least 2");
    const std::size_t n = geometry.size();
    const int ns = samples_per_segment;
    const cplx delta = medium.delta();
    const cplx kb = medium.r() * k;
    const auto gamma = medium.gamma();

    ModeProfile prof;
    prof.k = k;
    prof.samples.reserve(static_cast<std::size_t>(ns) * (2 * n + 1));

    const double x1 = geometry.left(0);
    for (int i = 0; i < ns; ++i) {
        const double x = x1 - 1.0 + static_cast<double>(i) / (ns - 1);
        const cplx u = left_amplitude * std::exp(-I * k * (x - x1));
        prof.samples.push_back({i == ns - 1 ? x1 : x, u, -I * k * u, 0});
    }

    State s{left_amplitude, -I * k * left_amplitude};
    for (std::size_t j = 0; j < n; ++j) {
        const double g = gamma.empty() ? 0.0 : gamma[j];
        s.du *= delta; // entering
        s = sweep(prof.samples, geometry.left(j), geometry.lengths()[j], s, kb, g, ns, static_cast<int>(2 * j + 1));
        s.du /= delta; // leaving
        if (j + 1 < n) {
            s = sweep(prof.samples, geometry.right(j), geometry.spacings()[j], s, k, 0.0, ns,
                      static_cast<int>(2 * j + 2));
        }
    }

    // Relative to the largest state along the chain: a mode trapped near the
    // left end leaks to the right with an amplitude many orders below it.
    double scale = std::abs(s.du) + std::abs(k * s.u);
    for (const auto& smp : prof.samples) {
        const cplx du = smp.segment % 2 == 1 ? smp.du / delta : smp.du;
        scale = std::max(scale, std::abs(du) + std::abs(k * smp.u));
    }
    prof.outgoing_residual = scale > 0.0 ? std::abs(s.du - I * k * s.u) / scale : 0.0;
    if (!(prof.outgoing_residual <= 1e-6)) {
        throw InvalidInput("k is not a resonance: outgoing residual " + std::to_string(prof.outgoing_residual));
    }

    const double xn = geometry.right(n - 1);
    for (int i = 0; i < ns; ++i) {
        const double x = i == 0 ? xn : xn + static_cast<double>(i) / (ns - 1);
        const cplx u = s.u * std::exp(I * k * (x - xn));
        prof.samples.push_back({x, u, I * k * u, static_cast<int>(2 * n)});
    }
    return prof;
}

ProfileDeviation check_subwavelength_profile(const ModeProfile& profile, const CapacitanceSpectrum& spec,
                                             std::size_t eig_index, const ChainGeometry& geometry) {
    const std::size_t n = geometry.size();
    if (spec.right.size() != n) throw InvalidInput("spectrum does not match the geometry");
    if (eig_index >= n) throw InvalidInput("eigenvector index out of range");

    // plateau values at resonator midpoints
    Eigen::VectorXcd plateau(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        const int tag = static_cast<int>(2 * j + 1);
        const double mid = geometry.left(j) + geometry.lengths()[j] / 2.0;
        const ModeSample* best = nullptr;
        for (const auto& smp : profile.samples) {
            if (smp.segment == tag && (!best || std::abs(smp.x - mid) < std::abs(best->x - mid))) best = &smp;
        }
        if (!best) throw InvalidInput("profile has no samples in resonator " + std::to_string(j + 1));
        plateau(static_cast<Eigen::Index>(j)) = best->u;
    }
    const double pnorm = plateau.norm();
    if (pnorm == 0.0) throw NumericalFailure("profile vanishes on every resonator");

    std::vector<cplx> scales(n);
    std::vector<double> misfit(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::VectorXcd a = spec.right[i].cast<cplx>();
        scales[i] = a.dot(plateau) / a.squaredNorm();
        misfit[i] = (plateau - scales[i] * a).norm() / pnorm;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (i != eig_index && misfit[i] < 0.5 && misfit[eig_index] < 0.5) {
            throw NumericalFailure("eigenvector matching is ambiguous");
        }
    }

    ProfileDeviation dev;
    dev.scale = scales[eig_index];
    if (std::abs(dev.scale) == 0.0) throw NumericalFailure("profile is orthogonal to the requested eigenvector");
    const Eigen::VectorXd& a = spec.right[eig_index];
    for (const auto& smp : profile.samples) {
        const cplx u = smp.u / dev.scale;
        if (smp.segment % 2 == 1) {
            const auto j = static_cast<Eigen::Index>((smp.segment - 1) / 2);
            dev.resonators = std::max(dev.resonators, std::abs(u - a(j)));
            dev.resonator_slope = std::max(dev.resonator_slope, std::abs(smp.du / dev.scale));
        } else if (smp.segment > 0 && smp.segment < static_cast<int>(2 * n)) {
            const auto j = static_cast<std::size_t>(smp.segment / 2 - 1);
            const auto jj = static_cast<Eigen::Index>(j);
            const double b = (a(jj + 1) - a(jj)) / geometry.spacings()[j];
            dev.spacings = std::max(dev.spacings, std::abs(u - (a(jj) + b * (smp.x - geometry.right(j)))));
        }
    }
    return dev;
}

DualityCheck check_duality(cplx k, const ChainGeometry& geometry, const Medium& medium, cplx v_tail,
                           int samples_per_segment) {
    if (medium.has_gauge()) throw InvalidInput("the contrast duality holds for gamma = 0 only");
    const cplx d0 = medium.delta();
    const double r = medium.r();
    const ModeProfile u = reconstruct(k, geometry, medium, samples_per_segment);
    const ModeProfile v = reconstruct(k, geometry, medium.with_delta(r * r / d0), samples_per_segment, v_tail);
    const cplx kb = r * k;

    DualityCheck out;
    // u'(x_1^- +) = -i delta/(t r) k_b v(x_1^-): first sample inside resonator 1
    const auto first = std::find_if(u.samples.begin(), u.samples.end(), [](const ModeSample& s) { return s.segment == 1; });
    const std::size_t idx = static_cast<std::size_t>(first - u.samples.begin());
    const ModeSample& us = u.samples[idx];
    const ModeSample& vs = v.samples[idx];
    if (std::abs(us.du) > 1e-14 * (std::abs(us.u) + 1.0)) {
        out.t = -I * d0 * kb * vs.u / (r * us.du);
    } else {
        // exterior relation v' = -i t k u at x_1^-
        const ModeSample& ue = u.samples[idx - 1];
        const ModeSample& ve = v.samples[idx - 1];
        if (std::abs(k * ue.u) == 0.0) throw NumericalFailure("duality scalar fit is degenerate at k = 0");
        out.t = ve.du / (-I * k * ue.u);
    }
    const cplx t = out.t;

    // relation pairs (lhs, rhs) for: u' and v' in D, u' and v' outside D
    std::array<double, 4> global{};
    auto pairs = [&](std::size_t i) {
        const ModeSample& a = u.samples[i];
        const ModeSample& b = v.samples[i];
        const bool inside = a.segment % 2 == 1;
        std::array<std::pair<cplx, cplx>, 2> p;
        if (inside) {
            p[0] = {a.du, -I * d0 / (t * r) * kb * b.u};
            p[1] = {b.du, -I * (t * r / d0) * kb * a.u};
        } else {
            p[0] = {a.du, -I * k * b.u / t};
            p[1] = {b.du, -I * t * k * a.u};
        }
        return std::pair{inside ? 0 : 2, p};
    };
    for (std::size_t i = 0; i < u.samples.size(); ++i) {
        const auto [base, p] = pairs(i);
        for (int m = 0; m < 2; ++m) {
            global[base + m] = std::max(global[base + m], std::abs(p[m].first) + std::abs(p[m].second));
        }
    }
    for (std::size_t i = 0; i < u.samples.size(); ++i) {
        const auto [base, p] = pairs(i);
        for (int m = 0; m < 2; ++m) {
            const double denom = std::abs(p[m].first) + std::abs(p[m].second) + 1e-6 * global[base + m];
            if (denom > 0.0) out.max_residual = std::max(out.max_residual, std::abs(p[m].first - p[m].second) / denom);
        }
    }
    return out;
}

} // namespace chainres
