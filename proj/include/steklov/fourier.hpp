#pragma once

// Real trigonometric coefficient vectors on a circle parametrized by the
// angle theta in [0, 2pi).
//
// Coefficient layout used throughout: for a cutoff M the vector has length
// 2M+1 with
//   c[0]        -> constant term,
//   c[2m-1]     -> cos(m theta),
//   c[2m]       -> sin(m theta),   m = 1..M.
//
// Periodic trapezoid sums on n >= 2M+2 equispaced nodes are exact for such
// series, which is what makes the synthesis/analysis matrices below usable
// as exact projections for band-limited data.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace steklov {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline int trig_dim(int m_max) { return 2 * m_max + 1; }

inline int cos_index(int m) { return m == 0 ? 0 : 2 * m - 1; }
inline int sin_index(int m) { return 2 * m; }

// Highest mode representable in a coefficient vector of length dim.
inline int trig_max_mode(int dim) { return (dim - 1) / 2; }

inline double trig_eval(const Eigen::VectorXd& c, double theta) {
    double v = c[0];
    const int m_max = trig_max_mode(static_cast<int>(c.size()));
    for (int m = 1; m <= m_max; ++m) {
        v += c[cos_index(m)] * std::cos(m * theta) + c[sin_index(m)] * std::sin(m * theta);
    }
    return v;
}

// Values at n equispaced angles theta_p = 2pi p/n; rows are nodes.
inline Eigen::MatrixXd trig_synthesis_matrix(int m_max, int n_nodes) {
    Eigen::MatrixXd E(n_nodes, trig_dim(m_max));
    for (int p = 0; p < n_nodes; ++p) {
        const double theta = kTwoPi * p / n_nodes;
        E(p, 0) = 1.0;
        for (int m = 1; m <= m_max; ++m) {
            E(p, cos_index(m)) = std::cos(m * theta);
            E(p, sin_index(m)) = std::sin(m * theta);
        }
    }
    return E;
}

// Coefficients from nodal values at n equispaced angles. Exact (alias-free)
// when the sampled function is band-limited to modes < n/2.
inline Eigen::MatrixXd trig_analysis_matrix(int m_max, int n_nodes) {
    Eigen::MatrixXd A(trig_dim(m_max), n_nodes);
    for (int p = 0; p < n_nodes; ++p) {
        const double theta = kTwoPi * p / n_nodes;
        A(0, p) = 1.0 / n_nodes;
        for (int m = 1; m <= m_max; ++m) {
            A(cos_index(m), p) = 2.0 * std::cos(m * theta) / n_nodes;
            A(sin_index(m), p) = 2.0 * std::sin(m * theta) / n_nodes;
        }
    }
    return A;
}

inline Eigen::VectorXd trig_coefficients_from_samples(const Eigen::VectorXd& values, int m_max) {
    return trig_analysis_matrix(m_max, static_cast<int>(values.size())) * values;
}

// Gram diagonal of the basis in L^2(dtheta): <1,1> = 2pi, <cos m, cos m> = pi.
inline Eigen::VectorXd trig_gram_diagonal(int m_max) {
    Eigen::VectorXd d(trig_dim(m_max));
    d[0] = kTwoPi;
    for (int i = 1; i < d.size(); ++i) d[i] = kPi;
    return d;
}

// Coefficient map of pointwise multiplication by a band-limited factor
// (given by its own coefficient vector), truncated back to m_max. Built by
// exact sampling: the grid is fine enough that no aliasing occurs below the
// retained modes.
inline Eigen::MatrixXd trig_multiplication_map(const Eigen::VectorXd& factor, int m_max) {
    const int p_max = trig_max_mode(static_cast<int>(factor.size()));
    const int n = 2 * (m_max + p_max) + 2;
    const Eigen::MatrixXd E = trig_synthesis_matrix(m_max, n);
    const Eigen::MatrixXd A = trig_analysis_matrix(m_max, n);
    Eigen::VectorXd fvals(n);
    for (int p = 0; p < n; ++p) fvals[p] = trig_eval(factor, kTwoPi * p / n);
    return A * (fvals.asDiagonal() * E);
}

}  // namespace steklov
