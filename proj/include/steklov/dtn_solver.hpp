#pragma once

// Discrete Steklov eigenproblem. With the kernel conventions of
// layer_ops.hpp, the single-layer identity S * DtN = (I - N)/2 turns the
// weighted Steklov condition d_nu v = lambda g v into the generalized pencil
//
//     A c = lambda B c,   A = (I - N)/2,   B = S o (multiplication by g),
//
// acting on blocked trig coefficient vectors. A annihilates the global
// constant (lambda_0 = 0) and B is positive definite once the geometry is
// rescaled away from logarithmic capacity one, which is why assembly happens
// on domain.scaled(scale_factor) and eigenvalues are rescaled back
// (Steklov eigenvalues scale inversely with length).

#include <Eigen/Dense>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "steklov/errors.hpp"
#include "steklov/fourier.hpp"
#include "steklov/geometry.hpp"
#include "steklov/layer_ops.hpp"
#include "steklov/rates.hpp"

namespace steklov {

struct SteklovProblem {
    KoebeDomain domain;   // physical geometry
    KoebeDomain scaled;   // assembly geometry
    ArclengthMap arclength;         // physical weighted lengths L_j
    ArclengthMap arclength_scaled;  // lengths on the assembly geometry
    BoundaryOperatorMatrix S, N, W;
    Eigen::MatrixXd A, B;
    Eigen::MatrixXd gram_ds;   // physical weighted Gram (normalization measure)
    Eigen::VectorXd gram_dq;   // physical Euclidean Gram diagonal
    int m_max = 0;
    std::uint64_t hash = 0;

    int dimension() const { return static_cast<int>(A.rows()); }
    int components() const { return domain.component_count(); }
};

inline SteklovProblem assemble_eigensystem(const KoebeDomain& domain, int m_max,
                                           const AssemblyOptions& opt = {}) {
    validate_domain(domain);
    SteklovProblem p;
    p.domain = domain;
    p.scaled = domain.scaled(domain.scale_factor);
    p.arclength = ArclengthMap(domain);
    p.arclength_scaled = ArclengthMap(p.scaled);
    p.m_max = m_max;
    p.hash = domain_hash(domain);
    p.S = assemble_single_layer(p.scaled, m_max, opt);
    p.N = assemble_double_layer(p.scaled, m_max, opt);
    p.W = assemble_weight_map(p.scaled, m_max);
    const int dim = static_cast<int>(p.S.mat.rows());
    p.A = 0.5 * (Eigen::MatrixXd::Identity(dim, dim) - p.N.mat);
    p.B = p.S.mat * p.W.mat;
    p.gram_ds = gram_ds_matrix(domain, m_max);
    p.gram_dq = gram_dq_diagonal(domain, m_max);
    return p;
}

struct SteklovSpectrum {
    std::vector<double> eigenvalues;  // physical units, ascending
    std::vector<BoundaryDensity> eigenfunctions;  // normalized in L^2(ds)
    std::vector<double> residuals;    // ||A c - lambda_scaled B c|| / ||c||
    std::vector<double> imag_parts;   // imaginary parts of the raw solve, scaled units
    std::vector<int> multiplicity_tag;  // shared id within 1e-8-wide eigenvalue groups
    std::vector<bool> flagged;          // residual above tolerance; kept, not dropped
    std::uint64_t domain_hash = 0;
    int m_max = 0;
    double b_condition = 0.0;
    double scale_factor = 1.0;
    int dropped_high_modes = 0;

    int size() const { return static_cast<int>(eigenvalues.size()); }
};

namespace detail {

inline double dggev_condition_estimate(Eigen::MatrixXd B) {
    const lapack_int n = static_cast<lapack_int>(B.rows());
    const double anorm = B.cwiseAbs().colwise().sum().maxCoeff();
    std::vector<lapack_int> piv(n);
    if (LAPACKE_dgetrf(LAPACK_COL_MAJOR, n, n, B.data(), n, piv.data()) != 0) return 1e300;
    double rcond = 0.0;
    if (LAPACKE_dgecon(LAPACK_COL_MAJOR, '1', n, B.data(), n, anorm, &rcond) != 0) return 1e300;
    return rcond > 0.0 ? 1.0 / rcond : 1e300;
}

}  // namespace detail

// Generalized (A, B) solve via LAPACK QZ. Returns the n_max+1 smallest
// real eigenvalues after dropping infinite pencils and truncating
// eigenvalues above the largest reliable mode (lambda > pi m_max / max L).
// Eigenvectors are normalized in L^2(ds); within any eigenvalue group of
// width < 1e-8 they are additionally Gram-Schmidt orthonormalized so
// downstream code only ever sees orthonormal bases of the degenerate
// subspaces.
inline SteklovSpectrum solve_spectrum(const SteklovProblem& p, int n_max) {
    const int dim = p.dimension();
    if (n_max + 1 > dim / 4)
        throw ConfigError("n_max must satisfy n_max <= dimension/4; increase m_max");

    Eigen::MatrixXd A = p.A, B = p.B;
    Eigen::VectorXd ar(dim), ai(dim), be(dim);
    Eigen::MatrixXd vr(dim, dim);
    const lapack_int info =
        LAPACKE_dggev(LAPACK_COL_MAJOR, 'N', 'V', dim, A.data(), dim, B.data(), dim, ar.data(),
                      ai.data(), be.data(), nullptr, 1, vr.data(), dim);
    if (info != 0) throw EigenSolveFailed("dggev failed with info=" + std::to_string(info));

    struct Raw {
        double lam, imag;
        Eigen::VectorXd vec;
    };
    std::vector<Raw> raw;
    raw.reserve(dim);
    const double beta_floor = 1e-12 * p.B.cwiseAbs().maxCoeff();
    for (int i = 0; i < dim; ++i) {
        if (std::abs(be[i]) <= beta_floor) continue;  // infinite pencil direction
        if (ai[i] == 0.0) {
            raw.push_back({ar[i] / be[i], 0.0, vr.col(i)});
        } else if (ai[i] > 0.0 && i + 1 < dim) {
            // Conjugate pair: the two real columns span the invariant plane.
            const double lam = ar[i] / be[i];
            const double im = std::abs(ai[i] / be[i]);
            raw.push_back({lam, im, vr.col(i)});
            raw.push_back({lam, im, vr.col(i + 1)});
        }
    }
    std::vector<int> order(raw.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&raw](int a, int b) { return raw[a].lam < raw[b].lam; });

    SteklovSpectrum sp;
    sp.domain_hash = p.hash;
    sp.m_max = p.m_max;
    sp.scale_factor = p.domain.scale_factor;
    sp.b_condition = detail::dggev_condition_estimate(p.B);

    double max_len = 0.0;
    for (int j = 0; j < p.components(); ++j) max_len = std::max(max_len, p.arclength.length(j));
    const double lambda_cutoff = kPi * p.m_max / max_len;

    const double lam_floor = -1e-6;
    for (int idx : order) {
        const Raw& r = raw[idx];
        const double lam_phys = r.lam * p.domain.scale_factor;
        if (lam_phys < lam_floor) continue;
        if (lam_phys > lambda_cutoff) {
            ++sp.dropped_high_modes;
            continue;
        }
        if (sp.size() >= n_max + 1) break;
        const double resid = (p.A * r.vec - r.lam * (p.B * r.vec)).norm() / r.vec.norm();
        sp.eigenvalues.push_back(lam_phys);
        sp.residuals.push_back(resid);
        sp.imag_parts.push_back(r.imag);
        sp.eigenfunctions.push_back(
            BoundaryDensity::from_stacked(r.vec, p.components(), p.m_max));
        sp.flagged.push_back(resid > 1e-8 * (1.0 + std::abs(lam_phys)));
    }
    if (sp.size() < n_max + 1)
        throw EigenSolveFailed("spectrum truncated: only " + std::to_string(sp.size()) +
                               " usable eigenpairs");

    // Group near-degenerate eigenvalues, normalize, and orthonormalize
    // within each group under the weighted Gram.
    sp.multiplicity_tag.assign(sp.size(), 0);
    int tag = 0;
    for (int i = 1; i < sp.size(); ++i) {
        if (sp.eigenvalues[i] - sp.eigenvalues[i - 1] > 1e-8) ++tag;
        sp.multiplicity_tag[i] = tag;
    }
    auto ds_inner = [&p](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return a.dot(p.gram_ds * b);
    };
    int i = 0;
    while (i < sp.size()) {
        int j = i;
        while (j < sp.size() && sp.multiplicity_tag[j] == sp.multiplicity_tag[i]) ++j;
        std::vector<Eigen::VectorXd> basis;
        for (int t = i; t < j; ++t) {
            Eigen::VectorXd v = sp.eigenfunctions[t].stacked();
            for (const Eigen::VectorXd& u : basis) v -= ds_inner(u, v) * u;
            const double nrm = std::sqrt(ds_inner(v, v));
            if (nrm > 1e-12) v /= nrm;
            basis.push_back(v);
            sp.eigenfunctions[t] = BoundaryDensity::from_stacked(v, p.components(), p.m_max);
        }
        i = j;
    }
    return sp;
}

struct ComparisonEntry {
    double mu = 0.0;
    int component = 0;
    int m = 0;
    int copy = 0;  // 0 or 1 inside the doubled pair
};

// Sorted merge of the arithmetic progressions A(2pi/L_1, ..., 2pi/L_k):
// per component, 0 once and every positive multiple of 2pi/L_j twice.
struct ComparisonSequence {
    std::vector<ComparisonEntry> entries;
    std::vector<double> lengths;

    double mu(int n) const { return entries[n].mu; }
    int size() const { return static_cast<int>(entries.size()); }
};

inline ComparisonSequence comparison_sequence(const std::vector<double>& lengths, int count) {
    for (double L : lengths)
        if (!(L > 0.0)) throw ConfigError("comparison_sequence requires positive lengths");
    ComparisonSequence seq;
    seq.lengths = lengths;
    std::vector<ComparisonEntry> all;
    const int k = static_cast<int>(lengths.size());
    for (int j = 0; j < k; ++j) {
        const double alpha = kTwoPi / lengths[j];
        all.push_back({0.0, j, 0, 0});
        const int m_hi = count + 1;  // enough terms before the global sort
        for (int m = 1; m <= m_hi; ++m) {
            all.push_back({alpha * m, j, m, 0});
            all.push_back({alpha * m, j, m, 1});
        }
    }
    std::sort(all.begin(), all.end(), [](const ComparisonEntry& a, const ComparisonEntry& b) {
        if (a.mu != b.mu) return a.mu < b.mu;
        if (a.component != b.component) return a.component < b.component;
        if (a.m != b.m) return a.m < b.m;
        return a.copy < b.copy;
    });
    if (static_cast<int>(all.size()) > count) all.resize(count);
    seq.entries = std::move(all);
    return seq;
}

struct GapReport {
    std::vector<double> gaps;  // |lambda_n - mu_n|
    RateFit fit;               // log gap vs n, above the noise floor
    bool rate_unresolvable = false;  // all gaps at residual level (disk case)
    double noise_floor = 0.0;
    int weyl_n0 = -1;  // first index from which |gap| <= half the min progression step
};

inline GapReport spectrum_gap_report(const SteklovSpectrum& sp, const ComparisonSequence& seq,
                                     double noise_floor_multiplier = 100.0) {
    GapReport rep;
    const int n = std::min<int>(sp.size(), seq.size());
    double max_resid = 0.0;
    for (int i = 0; i < n; ++i) max_resid = std::max(max_resid, sp.residuals[i]);
    rep.noise_floor = noise_floor_multiplier * std::max(max_resid, 1e-16);

    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
        rep.gaps.push_back(std::abs(sp.eigenvalues[i] - seq.mu(i)));
        xs[i] = i;
        ys[i] = rep.gaps[i];
    }
    double min_step = std::numeric_limits<double>::infinity();
    for (double L : seq.lengths) min_step = std::min(min_step, kTwoPi / L);
    rep.weyl_n0 = n;
    for (int i = n - 1; i >= 0; --i) {
        if (rep.gaps[i] > 0.5 * min_step) break;
        rep.weyl_n0 = i;
    }
    try {
        rep.fit = fit_exponential(xs, ys, rep.noise_floor);
    } catch (const TooFewSamples&) {
        rep.rate_unresolvable = true;  // exponential decay consistent, rate below noise
    }
    return rep;
}

}  // namespace steklov
