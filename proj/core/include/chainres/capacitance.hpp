#pragma once

#include "chainres/chain.hpp"

#include <Eigen/Dense>

#include <vector>

namespace chainres {

enum class CapacitanceKind { hermitian, gauge };

// Tridiagonal N x N matrix with rows
//   (theta_1, -theta_1, 0, ...)
//   (..., -theta_{2i-2}, theta_{2i-2} + theta_{2i-1}, -theta_{2i-1}, ...)
//   (..., -theta_{2N-2}, theta_{2N-2}).
struct CapacitanceMatrix {
    Eigen::MatrixXd entries;
    std::vector<double> theta; // theta_0 .. theta_{2N-1}
    std::vector<double> volumes; // t_1, t_3, ..., t_{2N-1}
    CapacitanceKind kind = CapacitanceKind::hermitian;

    std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
};

// Rows ordered by ascending eigenvalue. right[i] has sup norm 1 and a
// positive first nonzero entry; left[i] is scaled so that left[i] . right[i] = 1.
struct CapacitanceSpectrum {
    std::vector<double> eigenvalues;
    std::vector<Eigen::VectorXd> right;
    std::vector<Eigen::VectorXd> left;
};

CapacitanceMatrix capacitance_from_theta(std::vector<double> theta, std::vector<double> volumes,
                                         CapacitanceKind kind);
CapacitanceMatrix build_capacitance(const ParamVector& params);
CapacitanceMatrix build_gauge_capacitance(const ParamVector& params);

// x e^x / (2 sinh x), with its limit 1/2 at 0.
double drift_weight(double x);

CapacitanceSpectrum eigensolve(const CapacitanceMatrix& c);

enum class Endpoint { first, last };

// a_i b_i / sum_j a_j b_j for the eigenpair eig_index (0-based; index 0 is
// the zero eigenvalue and is rejected). Cross-checked against
// -Q_N^i(lambda) / P_N'(lambda).
double residue_ratio(const CapacitanceSpectrum& spectrum, const CapacitanceMatrix& c, Endpoint which,
                     std::size_t eig_index);

// -Q_N^i(lambda) / P_N'(lambda), P_N' by a complex step.
double cofactor_ratio(const CapacitanceMatrix& c, Endpoint which, double lambda);

} // namespace chainres
