#pragma once

// Closed-form Steklov data for the unit disk and the concentric annulus
// A(1, eps). These are the ground truth against which solver output is
// checked: eigenvalues from the per-mode quadratic, eigenfunctions
// u(r,theta) = C (r^k + beta r^{-k}) T(k theta) with beta = (k-sigma)/(k+sigma),
// per-mode Dirichlet-to-Neumann matrices, and exact nodal lengths.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <utility>

#include "steklov/errors.hpp"
#include "steklov/fourier.hpp"

namespace steklov {

struct AnnulusEigenpair {
    int k = 0;
    double sigma = 0.0;
    double beta = 0.0;   // (k - sigma)/(k + sigma)
    bool inner_branch = false;  // true for the root near k/eps
    bool degenerate_shortcut = false;  // set when eps^{2k} underflowed
};

// Both roots of p_k(sigma) = sigma^2 - sigma k ((eps+1)/eps)((1+eps^{2k})/(1-eps^{2k}))
//                            + k^2/eps,
// returned (near-k root, near-k/eps root). The larger root is computed
// directly and the smaller via the product of roots, which avoids the
// cancellation in the textbook formula. When k eps^{2k} underflows below
// machine epsilon the perturbation is invisible at double precision and the
// unperturbed pair (k, k/eps) is returned with a flag.
inline std::pair<AnnulusEigenpair, AnnulusEigenpair> annulus_eigenvalues(double eps, int k) {
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("annulus requires 0 < eps < 1");
    if (k < 1) throw ModeOutOfRange("annulus_eigenvalues requires k >= 1");
    AnnulusEigenpair lo, hi;
    lo.k = hi.k = k;
    hi.inner_branch = true;

    const double e2k = std::pow(eps, 2.0 * k);
    const double product = k * double(k) / eps;
    if (k * e2k < std::numeric_limits<double>::epsilon()) {
        lo.sigma = k;
        hi.sigma = k / eps;
        lo.degenerate_shortcut = hi.degenerate_shortcut = true;
    } else {
        const double b = k * ((eps + 1.0) / eps) * ((1.0 + e2k) / (1.0 - e2k));
        const double disc = std::sqrt(b * b - 4.0 * product);
        hi.sigma = 0.5 * (b + disc);
        lo.sigma = product / hi.sigma;
    }
    lo.beta = (k - lo.sigma) / (k + lo.sigma);
    hi.beta = (k - hi.sigma) / (k + hi.sigma);
    return {lo, hi};
}

inline double annulus_char_poly(double eps, int k, double sigma) {
    const double e2k = std::pow(eps, 2.0 * k);
    const double b = k * ((eps + 1.0) / eps) * ((1.0 + e2k) / (1.0 - e2k));
    return sigma * sigma - sigma * b + k * double(k) / eps;
}

// The perturbation f(k,eps) with p_k = ptilde_k - f sigma, ptilde having
// roots exactly k and k/eps. O(k eps^{2k}).
inline double annulus_root_perturbation(double eps, int k) {
    const double e2k = std::pow(eps, 2.0 * k);
    return k * ((eps + 1.0) / eps) * 2.0 * e2k / (1.0 - e2k);
}

// Nonzero eigenvalue of the rotation-invariant family (a + b log r):
// present in the annulus spectrum but outside the p_k family.
inline double annulus_log_mode_eigenvalue(double eps) {
    return (1.0 + 1.0 / eps) / std::log(1.0 / eps);
}

// Per-mode Dirichlet-to-Neumann matrix of the annulus: maps Dirichlet
// traces (outer, inner) of the harmonic a r^m + b r^{-m} (a + b log r for
// m = 0) on the angular mode m to outward Neumann traces. Eigenvalues of
// the m = k matrix are the roots of p_k.
inline Eigen::Matrix2d annulus_mode_dtn(double eps, int m) {
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("annulus requires 0 < eps < 1");
    if (m < 0) throw ModeOutOfRange("annulus_mode_dtn requires m >= 0");
    Eigen::Matrix2d dtn;
    if (m == 0) {
        const double le = std::log(eps);
        dtn << -1.0 / le, 1.0 / le, 1.0 / (eps * le), -1.0 / (eps * le);
        return dtn;
    }
    const double em = std::pow(eps, m), emi = std::pow(eps, -m);
    const double det = emi - em;
    dtn << m * (emi + em) / det, -2.0 * m / det,  //
        -2.0 * m / (eps * det), m * (std::pow(eps, m - 1) + std::pow(eps, -m - 1)) / det;
    return dtn;
}

// Radius of the circular nodal component (r^k + beta r^{-k} = 0), if any.
inline double annulus_nodal_circle_radius(const AnnulusEigenpair& pair) {
    if (!(pair.beta < 0.0)) return 0.0;
    return std::pow(-pair.beta, 1.0 / (2.0 * pair.k));
}

// Exact nodal length of u = C (r^k + beta r^{-k}) T(k theta) on A(1,eps):
// 2k radial segments of length 1-eps, plus the circle of radius
// r0 = (-beta)^{1/2k} when beta < 0 and eps < r0 < 1.
inline double annulus_nodal_length(double eps, const AnnulusEigenpair& pair) {
    double len = 2.0 * pair.k * (1.0 - eps);
    const double r0 = annulus_nodal_circle_radius(pair);
    if (r0 > eps && r0 < 1.0) len += kTwoPi * r0;
    return len;
}

struct DiskEigenpair {
    int n = 0;
    double eigenvalue = 0.0;   // lambda = n on the unit disk
    double nodal_length = 0.0; // n diameters, total length 2n
};

inline DiskEigenpair disk_eigenpair(int n) {
    if (n < 0) throw ModeOutOfRange("disk_eigenpair requires n >= 0");
    return DiskEigenpair{n, double(n), 2.0 * n};
}

// Pointwise eigenfunction values for the annulus pair (unit normalization
// constant; tests supply the phase in T).
inline double annulus_eigenfunction(const AnnulusEigenpair& pair, double r, double theta,
                                    double phase = 0.0) {
    const double radial = std::pow(r, pair.k) + pair.beta * std::pow(r, -pair.k);
    return radial * std::cos(pair.k * theta - phase);
}

}  // namespace steklov
