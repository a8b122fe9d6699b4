#include "chainres/capacitance.hpp"

#include "chainres/errors.hpp"
#include "chainres/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace chainres {

CapacitanceMatrix capacitance_from_theta(std::vector<double> theta, std::vector<double> volumes,
                                         CapacitanceKind kind) {
    if (theta.size() < 2 || theta.size() % 2 != 0) throw InvalidInput("theta must hold theta_0 .. theta_{2N-1}");
    const std::size_t n = theta.size() / 2;
    if (volumes.size() != n) throw InvalidInput("one volume per resonator expected");
    CapacitanceMatrix c;
    c.entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        if (i > 0) {
            c.entries(ii, ii - 1) = -theta[2 * i];
            c.entries(ii, ii) += theta[2 * i];
        }
        if (i + 1 < n) {
            c.entries(ii, ii + 1) = -theta[2 * i + 1];
            c.entries(ii, ii) += theta[2 * i + 1];
        }
    }
    c.theta = std::move(theta);
    c.volumes = std::move(volumes);
    c.kind = kind;
    return c;
}

namespace {

std::vector<double> odd_lengths(const ParamVector& p) {
    std::vector<double> v;
    for (std::size_t j = 0; j < p.t.size(); j += 2) v.push_back(p.t[j]);
    return v;
}

} // namespace

CapacitanceMatrix build_capacitance(const ParamVector& params) {
    if (!params.hermitian()) throw InvalidInput("Hermitian capacitance needs beta = 0; use the gauge matrix");
    return capacitance_from_theta(params.thetas(), odd_lengths(params), CapacitanceKind::hermitian);
}

double drift_weight(double x) {
    if (std::abs(x) < 1e-2) {
        // (x coth x + x) / 2
        const double x2 = x * x;
        const double xcoth = 1.0 + x2 / 3.0 - x2 * x2 / 45.0 + 2.0 * x2 * x2 * x2 / 945.0 -
                             x2 * x2 * x2 * x2 / 4725.0;
        return 0.5 * (xcoth + x);
    }
    return x / (-std::expm1(-2.0 * x));
}

CapacitanceMatrix build_gauge_capacitance(const ParamVector& params) {
    std::vector<double> theta = params.thetas();
    const std::size_t m = params.t.size();
    for (std::size_t j = 0; j <= m; ++j) {
        // Odd j sits right of resonator j, even j left of resonator j + 1.
        const std::size_t res = (j % 2 == 1) ? j : j + 1;
        const double x = params.beta_at(res) * params.t_at(res) / 2.0;
        theta[j] *= 2.0 * drift_weight(j % 2 == 1 ? x : -x);
    }
    return capacitance_from_theta(std::move(theta), odd_lengths(params), CapacitanceKind::gauge);
}

namespace {

void normalize_pair(Eigen::VectorXd& a, Eigen::VectorXd& b) {
    const double sup = a.cwiseAbs().maxCoeff();
    if (!(sup > 0.0)) throw NumericalFailure("zero eigenvector");
    a /= sup;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        if (std::abs(a(j)) > 1e-12) {
            if (a(j) < 0.0) a = -a;
            break;
        }
    }
    const double ba = b.dot(a);
    if (std::abs(ba) < 1e-14 * b.norm()) throw NumericalFailure("left and right eigenvectors are orthogonal");
    b /= ba;
}

void finish(CapacitanceSpectrum& s, double scale, const std::vector<double>* volumes = nullptr) {
    const std::size_t n = s.eigenvalues.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return s.eigenvalues[a] < s.eigenvalues[b]; });
    CapacitanceSpectrum sorted;
    for (std::size_t i : order) {
        sorted.eigenvalues.push_back(s.eigenvalues[i]);
        sorted.right.push_back(s.right[i]);
        sorted.left.push_back(s.left[i]);
    }
    const double tol = 1e-12 * std::max(1.0, scale);
    if (std::abs(sorted.eigenvalues[0]) <= tol) {
        // rows sum to zero, so the constant vector is the exact null vector
        sorted.eigenvalues[0] = 0.0;
        sorted.right[0] = Eigen::VectorXd::Ones(sorted.right[0].size());
        if (volumes) sorted.left[0] = Eigen::Map<const Eigen::VectorXd>(volumes->data(), sorted.right[0].size());
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (sorted.eigenvalues[i] - sorted.eigenvalues[i - 1] <= 1e-10 * std::max(1.0, scale)) {
            throw NumericalFailure("capacitance matrix has a repeated eigenvalue");
        }
    }
    for (std::size_t i = 0; i < n; ++i) normalize_pair(sorted.right[i], sorted.left[i]);
    s = std::move(sorted);
}

} // namespace

CapacitanceSpectrum eigensolve(const CapacitanceMatrix& c) {
    const Eigen::Index n = c.entries.rows();
    if (n == 0) throw InvalidInput("empty capacitance matrix");
    const double scale = c.entries.cwiseAbs().maxCoeff();
    CapacitanceSpectrum s;

    if (c.kind == CapacitanceKind::hermitian) {
        Eigen::VectorXd vol(n);
        for (Eigen::Index i = 0; i < n; ++i) vol(i) = c.volumes[static_cast<std::size_t>(i)];
        const Eigen::VectorXd root = vol.cwiseSqrt();
        const Eigen::VectorXd inv_root = root.cwiseInverse();
        // C = V^{-1} C_sym, so V^{1/2} C V^{-1/2} is symmetric.
        Eigen::MatrixXd w = root.asDiagonal() * c.entries * inv_root.asDiagonal();
        w = 0.5 * (w + w.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w);
        if (es.info() != Eigen::Success) throw NumericalFailure("symmetric eigensolver did not converge");
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::VectorXd wi = es.eigenvectors().col(i);
            s.eigenvalues.push_back(es.eigenvalues()(i));
            s.right.push_back(inv_root.asDiagonal() * wi);
            s.left.push_back(root.asDiagonal() * wi);
        }
        finish(s, scale, &c.volumes);
        return s;
    }

    Eigen::EigenSolver<Eigen::MatrixXd> right(c.entries);
    Eigen::EigenSolver<Eigen::MatrixXd> left(c.entries.transpose());
    if (right.info() != Eigen::Success || left.info() != Eigen::Success) {
        throw NumericalFailure("dense eigensolver did not converge");
    }
    const double imag_tol = 1e-10 * std::max(1.0, scale);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::complex<double> lam = right.eigenvalues()(i);
        if (std::abs(lam.imag()) > imag_tol) {
            throw NumericalFailure("gauge capacitance matrix has a non-real eigenvalue");
        }
        Eigen::Index best = -1;
        double best_gap = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double gap = std::abs(left.eigenvalues()(j) - lam);
            if (best < 0 || gap < best_gap) {
                best = j;
                best_gap = gap;
            }
        }
        used[static_cast<std::size_t>(best)] = true;
        const Eigen::VectorXcd a = right.eigenvectors().col(i);
        const Eigen::VectorXcd b = left.eigenvectors().col(best);
        // Rotate the complex phase away, then keep the real part.
        auto realify = [](const Eigen::VectorXcd& v) {
            Eigen::Index k;
            v.cwiseAbs().maxCoeff(&k);
            const std::complex<double> phase = v(k) / std::abs(v(k));
            return Eigen::VectorXd((v / phase).real());
        };
        s.eigenvalues.push_back(lam.real());
        s.right.push_back(realify(a));
        s.left.push_back(realify(b));
    }
    finish(s, scale);
    return s;
}

double cofactor_ratio(const CapacitanceMatrix& c, Endpoint which, double lambda) {
    // P_N is real on the real axis: complex-step derivative, no cancellation
    const double h = 1e-20 * std::max(1.0, std::abs(lambda));
    const CharPoly q = which == Endpoint::first ? CharPoly::Q_first : CharPoly::Q_last;
    const double dp = char_poly_eval(c.theta, cplx(lambda, h), CharPoly::P).imag() / h;
    // d/dlambda det(C - lambda) = -tr adj(C - lambda), hence the minus sign
    return -char_poly_eval(c.theta, lambda, q).real() / dp;
}

double residue_ratio(const CapacitanceSpectrum& spectrum, const CapacitanceMatrix& c, Endpoint which,
                     std::size_t eig_index) {
    if (eig_index == 0) throw InvalidInput("the zero eigenvalue has no residue ratio");
    if (eig_index >= spectrum.eigenvalues.size()) throw InvalidInput("eigenvalue index out of range");
    const Eigen::VectorXd& a = spectrum.right[eig_index];
    const Eigen::VectorXd& b = spectrum.left[eig_index];
    const Eigen::Index i = which == Endpoint::first ? 0 : a.size() - 1;
    const double ratio = a(i) * b(i) / b.dot(a);

    const double expected = cofactor_ratio(c, which, spectrum.eigenvalues[eig_index]);
    if (std::abs(expected - ratio) > 1e-8 * std::max(1.0, std::abs(ratio))) {
        throw NumericalFailure("eigenvector residue ratio disagrees with the cofactor formula");
    }
    return ratio;
}

} // namespace chainres
