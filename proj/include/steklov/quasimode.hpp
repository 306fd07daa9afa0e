#pragma once

// Spectral clustering of lambda/mu into gap-separated intervals, the
// boundary quasimode decomposition phi = psi + f, trigonometric quasimode
// defects, coefficient-matrix near-orthogonality, and the interior
// quasimodes built from the complexified arclength.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "steklov/dtn_solver.hpp"
#include "steklov/errors.hpp"
#include "steklov/fourier.hpp"
#include "steklov/geometry.hpp"
#include "steklov/rates.hpp"

namespace steklov {

struct ClusterPartition {
    struct Interval {
        double lo = 0.0, hi = 0.0;
    };
    std::vector<Interval> intervals;  // ascending, pairwise gaps >= eps
    std::vector<int> lambda_cluster;  // index -> interval id, -1 beyond the last full interval
    std::vector<int> mu_cluster;
    double eps = 0.0;
    int first_aligned_index = 0;  // N: |lambda_n - mu_n| < eps/2 for n >= N

    int cluster_count() const { return static_cast<int>(intervals.size()); }

    std::vector<int> lambda_members(int i) const {
        std::vector<int> out;
        for (int n = 0; n < static_cast<int>(lambda_cluster.size()); ++n)
            if (lambda_cluster[n] == i) out.push_back(n);
        return out;
    }
    std::vector<int> mu_members(int i) const {
        std::vector<int> out;
        for (int n = 0; n < static_cast<int>(mu_cluster.size()); ++n)
            if (mu_cluster[n] == i) out.push_back(n);
        return out;
    }
};

// Greedy gap-scan construction. Needs eps < pi/(2 k L) with L = max_j L_j;
// mus should extend beyond the last lambda by at least pi/L so the final
// interval can close. Lambdas beyond the last complete interval are tagged -1.
inline ClusterPartition cluster_spectrum(const std::vector<double>& lambdas,
                                         const std::vector<double>& mus, double eps, int k,
                                         double max_length) {
    if (!(eps > 0.0) || !(eps < kPi / (2.0 * k * max_length)))
        throw ConfigError("cluster eps must lie in (0, pi/(2kL))");
    const int n_lam = static_cast<int>(lambdas.size());
    const int n_mu = static_cast<int>(mus.size());
    if (n_mu < n_lam) throw ConfigError("need at least as many mu as lambda entries");

    ClusterPartition part;
    part.eps = eps;

    // N: the tail where index-paired lambda and mu agree to eps/2.
    int N = n_lam;
    for (int n = n_lam - 1; n >= 0; --n) {
        if (std::abs(lambdas[n] - mus[n]) < 0.5 * eps)
            N = n;
        else
            break;
    }
    if (N >= n_lam - 2)
        throw GapScanFailed("no aligned spectral tail: |lambda_n - mu_n| >= eps/2 throughout");
    part.first_aligned_index = N;

    // m2: first index past N opening a 2-eps gap below it.
    int m2 = -1;
    for (int t = std::max(N, 1); t < n_mu; ++t) {
        if (mus[t] >= mus[t - 1] + 2.0 * eps) {
            m2 = t;
            break;
        }
    }
    if (m2 < 0) throw GapScanFailed("no 2-eps gap found in the mu sequence");

    part.intervals.push_back({std::min(0.0, mus[0]), mus[m2] - 1.5 * eps});

    const double window = kPi / max_length;
    int m_i = m2;
    while (true) {
        // First gap >= 2 eps with left endpoint inside [mu_{m_i}, mu_{m_i}+window].
        int n_i = -1;
        for (int t = m_i; t + 1 < n_mu && mus[t] <= mus[m_i] + window; ++t) {
            if (mus[t + 1] - mus[t] >= 2.0 * eps) {
                n_i = t;
                break;
            }
        }
        if (n_i < 0) break;  // ran out of extended mu data; stop cleanly
        part.intervals.push_back({mus[m_i] - 0.5 * eps, mus[n_i] + 0.5 * eps});
        m_i = n_i + 1;
        if (m_i >= n_mu) break;
    }
    // Trim intervals beyond the computed lambda range: every kept interval
    // must contain at least one lambda and one mu.
    const double lam_max = lambdas.back();
    while (part.intervals.size() > 1 && part.intervals.back().lo > lam_max)
        part.intervals.pop_back();

    auto locate = [&part](double v) {
        for (int i = 0; i < part.cluster_count(); ++i)
            if (v >= part.intervals[i].lo - 1e-12 && v <= part.intervals[i].hi + 1e-12) return i;
        return -1;
    };
    const double last_hi = part.intervals.back().hi;
    part.lambda_cluster.resize(n_lam);
    for (int n = 0; n < n_lam; ++n) {
        part.lambda_cluster[n] = locate(lambdas[n]);
        if (part.lambda_cluster[n] < 0 && lambdas[n] <= last_hi)
            throw GapScanFailed("lambda_" + std::to_string(n) + " fell between clusters");
    }
    part.mu_cluster.resize(n_mu);
    for (int j = 0; j < n_mu; ++j) part.mu_cluster[j] = locate(mus[j]);
    return part;
}

// Real eigenbasis of the comparison operator M, aligned with the entries of
// a ComparisonSequence: entry (component j, mode m, copy) is
// sqrt(2/L_j) cos(2 pi m s_j/L_j) (copy 0) or the sine partner (copy 1),
// and 1/sqrt(L_j) for m = 0. Orthonormal in L^2(ds).
struct ComparisonBasis {
    ComparisonSequence seq;
    // Nodal values on the shared inner-product grid, one column per entry,
    // restricted to the entry's component.
    Eigen::MatrixXd values;  // (n_grid) x (entries), on component seq.entries[e].component
    int n_grid = 0;

    static double norm_factor(const ComparisonEntry& e, const ArclengthMap& arc) {
        const double L = arc.length(e.component);
        return e.m == 0 ? 1.0 / std::sqrt(L) : std::sqrt(2.0 / L);
    }

    static double eval_entry(const ComparisonEntry& e, const ArclengthMap& arc, double theta) {
        const double L = arc.length(e.component);
        const double phase = kTwoPi * e.m * arc.forward(e.component, theta) / L;
        const double f = norm_factor(e, arc);
        return e.copy == 0 ? f * std::cos(phase) : f * std::sin(phase);
    }
};

inline ComparisonBasis comparison_basis(const ComparisonSequence& seq, const ArclengthMap& arc,
                                        int n_grid) {
    ComparisonBasis basis;
    basis.seq = seq;
    basis.n_grid = n_grid;
    basis.values.resize(n_grid, seq.size());
    for (int e = 0; e < seq.size(); ++e) {
        for (int p = 0; p < n_grid; ++p) {
            basis.values(p, e) =
                ComparisonBasis::eval_entry(seq.entries[e], arc, kTwoPi * p / n_grid);
        }
    }
    return basis;
}

struct CoefficientMatrix {
    Eigen::MatrixXd a;  // rows: eigenfunctions, cols: comparison entries
    ComparisonSequence seq;
    std::vector<double> row_norms;  // should be 1 up to the truncation tail
    std::vector<double> tail_mass;  // 1 - row_norm^2, clipped at 0
};

// a_{n,e} = <phi_n, ebar_e> in L^2(ds), via trapezoid on a grid fine enough
// for the band-limited eigenfunctions. Columns retained while
// mu <= 2 lambda_max (plus a floor), per the truncation policy.
inline CoefficientMatrix coefficient_matrix(const SteklovProblem& p, const SteklovSpectrum& sp) {
    const double lam_max = sp.eigenvalues.back();
    const double mu_cut = 2.0 * lam_max + 1.0;
    int count = 64;
    ComparisonSequence seq;
    std::vector<double> lengths(p.components());
    for (int j = 0; j < p.components(); ++j) lengths[j] = p.arclength.length(j);
    while (true) {
        seq = comparison_sequence(lengths, count);
        if (seq.entries.back().mu > mu_cut || count > 100000) break;
        count *= 2;
    }
    while (!seq.entries.empty() && seq.entries.back().mu > mu_cut) seq.entries.pop_back();

    const int n_grid = std::max(512, 4 * p.m_max);
    const ComparisonBasis basis = comparison_basis(seq, p.arclength, n_grid);

    CoefficientMatrix cm;
    cm.seq = seq;
    cm.a.resize(sp.size(), seq.size());

    // Per component: eigenfunction values on the grid and weighted quadrature.
    const Eigen::MatrixXd E = trig_synthesis_matrix(p.m_max, n_grid);
    for (int j = 0; j < p.components(); ++j) {
        Eigen::MatrixXd coef(trig_dim(p.m_max), sp.size());
        for (int n = 0; n < sp.size(); ++n) coef.col(n) = sp.eigenfunctions[n].comp[j];
        const Eigen::MatrixXd vals = E * coef;  // grid x eigs
        Eigen::VectorXd w(n_grid);
        const double rho = p.domain.component(j).radius;
        for (int q = 0; q < n_grid; ++q)
            w[q] = p.domain.weight(j)(kTwoPi * q / n_grid) * rho * kTwoPi / n_grid;
        for (int e = 0; e < seq.size(); ++e) {
            if (seq.entries[e].component != j) continue;
            cm.a.col(e) = vals.transpose() * (w.asDiagonal() * basis.values.col(e));
        }
    }
    for (int n = 0; n < sp.size(); ++n) {
        const double rn = cm.a.row(n).norm();
        cm.row_norms.push_back(rn);
        cm.tail_mass.push_back(std::max(0.0, 1.0 - rn * rn));
    }
    return cm;
}

struct ComponentQuasimode {
    bool present = false;      // psi restricted to this component is nonzero
    bool single_mode = true;   // false only possible inside the first cluster
    int m = 0;                 // mode in s-units: frequency 2 pi m / L_j
    double b_plus = 0.0;       // coefficient of cos(2 pi m s/L)
    double b_minus = 0.0;      // coefficient of sin(2 pi m s/L)
};

struct QuasimodeDecomposition {
    int n = 0;
    int cluster = -1;
    std::vector<ComponentQuasimode> comp;
    BoundaryDensity psi, residual;  // theta-coefficient representations
    double psi_norm = 0.0, f_norm = 0.0;  // L^2(ds)
};

// psi_n = sum_{e ~ n} a_{n,e} ebar_e, f_n = phi_n - psi_n. The per-component
// (m, b+, b-) reduction exists whenever the cluster touches one distinct
// mode per component, which the partition guarantees away from the first
// interval.
inline QuasimodeDecomposition decompose_eigenfunction(const SteklovProblem& p,
                                                      const SteklovSpectrum& sp,
                                                      const ClusterPartition& part,
                                                      const CoefficientMatrix& cm, int n) {
    if (n < 0 || n >= sp.size()) throw ModeOutOfRange("decompose: index out of range");
    QuasimodeDecomposition dec;
    dec.n = n;
    dec.cluster = part.lambda_cluster[n];
    if (dec.cluster < 0)
        throw ClusterUnderResolved("eigenvalue beyond the last complete cluster interval");
    dec.comp.resize(p.components());

    // Gather the cluster's comparison entries.
    std::vector<int> members;
    for (int e = 0; e < cm.seq.size(); ++e) {
        if (e < static_cast<int>(part.mu_cluster.size()) && part.mu_cluster[e] == dec.cluster)
            members.push_back(e);
    }

    const int dim = trig_dim(p.m_max);
    dec.psi = BoundaryDensity::zero(p.components(), p.m_max);
    double psi2 = 0.0;
    std::vector<std::set<int>> modes_per_comp(p.components());
    for (int e : members) {
        const ComparisonEntry& ent = cm.seq.entries[e];
        modes_per_comp[ent.component].insert(ent.m);
    }
    for (int j = 0; j < p.components(); ++j) {
        if (modes_per_comp[j].size() > 1) {
            if (dec.cluster >= 1)
                throw ClusterUnderResolved(
                    "cluster " + std::to_string(dec.cluster) +
                    " holds two distinct modes on one component; shrink eps");
            dec.comp[j].single_mode = false;
        }
    }

    // Accumulate psi in theta coefficients on a shared analysis grid.
    const int n_grid = std::max(512, 4 * p.m_max);
    Eigen::MatrixXd psi_vals = Eigen::MatrixXd::Zero(n_grid, p.components());
    for (int e : members) {
        const ComparisonEntry& ent = cm.seq.entries[e];
        const double a = cm.a(n, e);
        psi2 += a * a;
        for (int q = 0; q < n_grid; ++q) {
            psi_vals(q, ent.component) +=
                a * ComparisonBasis::eval_entry(ent, p.arclength, kTwoPi * q / n_grid);
        }
        ComponentQuasimode& cq = dec.comp[ent.component];
        cq.present = true;
        if (cq.single_mode) {
            cq.m = ent.m;
            const double nf = ComparisonBasis::norm_factor(ent, p.arclength);
            if (ent.copy == 0)
                cq.b_plus += a * nf;
            else
                cq.b_minus += a * nf;
        }
    }
    const Eigen::MatrixXd An = trig_analysis_matrix(p.m_max, n_grid);
    for (int j = 0; j < p.components(); ++j) dec.psi.comp[j] = An * psi_vals.col(j);

    dec.residual = BoundaryDensity::zero(p.components(), p.m_max);
    for (int j = 0; j < p.components(); ++j)
        dec.residual.comp[j] = sp.eigenfunctions[n].comp[j] - dec.psi.comp[j];

    const Eigen::VectorXd fv = dec.residual.stacked();
    dec.f_norm = std::sqrt(std::max(0.0, fv.dot(p.gram_ds * fv)));
    dec.psi_norm = std::sqrt(psi2);
    return dec;
}

// Generalized-problem defect of the trigonometric quasimode e_{m,j}:
// || A e - (2 pi |m| / L_j) B e || / || B e ||, cos and sin partners
// combined, norms in L^2(dq) on the assembly geometry.
inline double quasimode_defect(const SteklovProblem& p, int m, int j) {
    if (std::abs(m) > p.m_max / 2) throw ModeOutOfRange("quasimode_defect: |m| > m_max/2");
    if (j < 0 || j >= p.components()) throw ModeOutOfRange("quasimode_defect: bad component");
    const int n_grid = std::max(512, 4 * p.m_max);
    const Eigen::MatrixXd An = trig_analysis_matrix(p.m_max, n_grid);
    const double L = p.arclength_scaled.length(j);
    const double mu = kTwoPi * std::abs(m) / L;

    const int dim = trig_dim(p.m_max);
    Eigen::VectorXd num2 = Eigen::VectorXd::Zero(1), den2 = Eigen::VectorXd::Zero(1);
    const Eigen::VectorXd gram = gram_dq_diagonal(p.scaled, p.m_max);
    for (int copy = 0; copy < 2; ++copy) {
        Eigen::VectorXd vals(n_grid);
        for (int q = 0; q < n_grid; ++q) {
            const double phase =
                kTwoPi * m * p.arclength_scaled.forward(j, kTwoPi * q / n_grid) / L;
            vals[q] = copy == 0 ? std::cos(phase) : std::sin(phase);
        }
        Eigen::VectorXd e = Eigen::VectorXd::Zero(p.dimension());
        e.segment(j * dim, dim) = An * vals;
        const Eigen::VectorXd be = p.B * e;
        const Eigen::VectorXd r = p.A * e - mu * be;
        num2[0] += r.dot(gram.asDiagonal() * r);
        den2[0] += be.dot(gram.asDiagonal() * be);
    }
    return std::sqrt(num2[0] / den2[0]);
}

struct ClusterDeviation {
    int cluster = 0;
    double col_dev = 0.0;  // ||M_i^T M_i - I||_inf (max entry)
    double row_dev = 0.0;  // ||M_i M_i^T - I||_inf
};

struct NearOrthogonalityReport {
    std::vector<ClusterDeviation> deviations;
    RateFit fit;  // log max(col_dev,row_dev) vs cluster index
    bool fit_valid = false;
};

inline NearOrthogonalityReport near_orthogonality_report(const CoefficientMatrix& cm,
                                                         const ClusterPartition& part) {
    NearOrthogonalityReport rep;
    std::vector<double> xs, ys;
    for (int i = 0; i < part.cluster_count(); ++i) {
        std::vector<int> rows = part.lambda_members(i);
        std::vector<int> cols;
        for (int e = 0; e < cm.seq.size(); ++e)
            if (e < static_cast<int>(part.mu_cluster.size()) && part.mu_cluster[e] == i)
                cols.push_back(e);
        if (rows.empty() || cols.empty()) continue;
        Eigen::MatrixXd M(rows.size(), cols.size());
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < cols.size(); ++c) M(r, c) = cm.a(rows[r], cols[c]);
        ClusterDeviation dev;
        dev.cluster = i;
        const auto ic = Eigen::MatrixXd::Identity(cols.size(), cols.size());
        const auto ir = Eigen::MatrixXd::Identity(rows.size(), rows.size());
        dev.col_dev = (M.transpose() * M - ic).cwiseAbs().maxCoeff();
        dev.row_dev = (M * M.transpose() - ir).cwiseAbs().maxCoeff();
        rep.deviations.push_back(dev);
        xs.push_back(i);
        ys.push_back(std::max(dev.col_dev, dev.row_dev));
    }
    try {
        rep.fit = fit_exponential(xs, ys, 1e-15);
        rep.fit_valid = true;
    } catch (const TooFewSamples&) {
        rep.fit_valid = false;
    }
    return rep;
}

// delta of the interior quasimode theory, computed from the band-limited
// weight's exact continuation: delta = min_j { Gamma_j tau/2 - N_j tau^3,
// tau/2 }. tau defaults to the collar width and is halved until delta > 0.
struct RateConstants {
    double tau = 0.0;
    std::vector<double> gamma;  // per-component lower bound on s'
    std::vector<double> third_bound;
    double delta = 0.0;
    int shrink_steps = 0;
    bool tau_fitted = false;  // true when tau came from a fitted decay rate
};

inline RateConstants compute_rate_constants(const KoebeDomain& d, const ArclengthMap& arc,
                                            double tau) {
    RateConstants rc;
    rc.tau = tau;
    for (int attempt = 0; attempt < 60; ++attempt) {
        rc.gamma.clear();
        rc.third_bound.clear();
        rc.delta = std::numeric_limits<double>::infinity();
        for (int j = 0; j < d.component_count(); ++j) {
            const double g = arc.derivative_lower_bound(j);
            const double n3 = arc.third_derivative_bound(j, rc.tau);
            rc.gamma.push_back(g);
            rc.third_bound.push_back(n3);
            rc.delta = std::min({rc.delta, g * rc.tau / 2.0 - n3 * rc.tau * rc.tau * rc.tau,
                                 rc.tau / 2.0});
        }
        if (rc.delta > 0.0) return rc;
        rc.tau *= 0.5;
        ++rc.shrink_steps;
    }
    throw ConfigError("rate constant delta could not be made positive");
}

// Quintic smoothstep bump: 1 for depth <= w/2, 0 beyond w.
inline double collar_cutoff(double depth, double width) {
    if (depth <= 0.5 * width) return 1.0;
    if (depth >= width) return 0.0;
    const double t = (depth - 0.5 * width) / (0.5 * width);
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

// Interior quasimode of one component: the cutoff times
// b+ Re / b- Im of exp(+- i (2 pi m / L_j) s_j^C(z)), sign by outer/inner,
// in the strip coordinate z = theta + i xi, xi = log(rho_j / r). Agrees with
// the boundary quasimode at xi = 0 and decays into the interior.
struct InteriorQuasimode {
    int component = 0;
    int m = 0;
    double b_plus = 0.0, b_minus = 0.0;
    double collar_width = 0.2;

    double eval(const KoebeDomain& d, const ArclengthMap& arc, const Vec2& x,
                bool apply_cutoff = true) const {
        const Circle& c = d.component(component);
        const double depth = d.boundary_depth(x, component);
        if (depth < -1e-9 * c.radius || depth > collar_width)
            throw OutsideCollar("point outside the collar of component " +
                                std::to_string(component));
        const Vec2 rel = x - c.center;
        const double r = rel.norm();
        const double theta = std::atan2(rel.y(), rel.x());
        const double xi = std::log(c.radius / r);
        const std::complex<double> sc = arc.forward_complex(component, {theta, xi});
        const double omega = kTwoPi * m / arc.length(component);
        double vc, vs;
        if (!d.is_inner(component)) {
            const std::complex<double> e = std::exp(std::complex<double>(0.0, omega) * sc);
            vc = e.real();
            vs = e.imag();
        } else {
            const std::complex<double> e = std::exp(std::complex<double>(0.0, -omega) * sc);
            vc = e.real();
            vs = -e.imag();  // boundary trace must match +sin(omega s)
        }
        const double chi = apply_cutoff ? collar_cutoff(std::max(depth, 0.0), collar_width) : 1.0;
        return chi * (b_plus * vc + b_minus * vs);
    }
};

inline InteriorQuasimode interior_quasimode(const QuasimodeDecomposition& dec, int component,
                                            double collar_width) {
    const ComponentQuasimode& cq = dec.comp[component];
    if (!cq.single_mode)
        throw ClusterUnderResolved("component carries multiple modes; no interior quasimode");
    InteriorQuasimode q;
    q.component = component;
    q.m = cq.m;
    q.b_plus = cq.b_plus;
    q.b_minus = cq.b_minus;
    q.collar_width = collar_width;
    return q;
}

}  // namespace steklov
