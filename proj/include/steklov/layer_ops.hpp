#pragma once

// Boundary single/double layer operators S, N on the circle components of a
// Koebe domain, plus off-boundary evaluation of the layer potentials Sl, Dl.
//
// Kernel conventions, fixed once here and relied on everywhere else:
//   G(x,x') = -(1/2pi) log|x-x'|          (fundamental solution of -Laplace)
//   Sl f(x) =  int G(x,q)   f(q) dq       so Sl(e^{im t}) = rho/(2|m|) (r/rho)^{|m|} e^{im t}
//                                          inside a circle of radius rho
//   Dl f(x) = -int d_{nu(q)}G(x,q) f(q) dq with jump relations
//             (Dl f)_int = +f/2 + Nf/2,  (Dl f)_ext = -f/2 + Nf/2
//   S  = boundary trace of Sl;  N f(q) = -2 int d_{nu(q')}G(q,q') f(q') dq'.
//
// nu is the outward normal of the domain: radial on the outer circle,
// anti-radial on inner circles. On a single circle of radius rho this gives
// the exact Fourier diagonalization
//   S e_m = rho/(2|m|) e_m (m != 0),  S 1 = -rho log rho,
//   N e_m = 0 (m != 0),               N 1 = +-1 (outer/inner),
// and N applied to the global constant equals 1 on every component.
//
// Matrices are coefficient maps in the real trig basis of fourier.hpp,
// blocked by component. Diagonal blocks are exact; off-diagonal blocks (the
// smooth inter-circle kernels) use periodic trapezoid quadrature with a
// node-doubling stability verification.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "steklov/errors.hpp"
#include "steklov/fourier.hpp"
#include "steklov/geometry.hpp"

namespace steklov {

// Eigenvalue of the circle log-kernel operator
//   (G h)(s) = -(1/2pi) int_0^L log|e^{2pi i s/L} - e^{2pi i s'/L}| h(s') ds'
// on the mode e^{2pi i m s/L}: L/(4pi|m|) for m != 0, and 0 on constants.
inline double circle_log_multiplier(int m, double perimeter) {
    if (m == 0) return 0.0;
    return perimeter / (4.0 * kPi * std::abs(m));
}

struct BoundaryDensity {
    int m_max = 0;
    std::vector<Eigen::VectorXd> comp;  // one coefficient vector (2 m_max + 1) per component

    static BoundaryDensity zero(int components, int m_max) {
        BoundaryDensity d;
        d.m_max = m_max;
        d.comp.assign(components, Eigen::VectorXd::Zero(trig_dim(m_max)));
        return d;
    }

    Eigen::VectorXd stacked() const {
        const int dim = trig_dim(m_max);
        Eigen::VectorXd v(dim * comp.size());
        for (std::size_t j = 0; j < comp.size(); ++j) v.segment(j * dim, dim) = comp[j];
        return v;
    }

    static BoundaryDensity from_stacked(const Eigen::VectorXd& v, int components, int m_max) {
        BoundaryDensity d = zero(components, m_max);
        const int dim = trig_dim(m_max);
        for (int j = 0; j < components; ++j) d.comp[j] = v.segment(j * dim, dim);
        return d;
    }

    double eval(int j, double theta) const { return trig_eval(comp[j], theta); }
};

enum class OperatorTag { SingleLayer, DoubleLayer, Weight, SystemA, SystemB };

struct BoundaryOperatorMatrix {
    OperatorTag tag = OperatorTag::SingleLayer;
    Eigen::MatrixXd mat;
    int m_max = 0;
    int components = 0;
    std::uint64_t domain_hash = 0;

    int block_dim() const { return trig_dim(m_max); }
    Eigen::Block<Eigen::MatrixXd> block(int i, int j) {
        const int d = block_dim();
        return mat.block(i * d, j * d, d, d);
    }
    Eigen::Block<const Eigen::MatrixXd> block(int i, int j) const {
        const int d = block_dim();
        return mat.block(i * d, j * d, d, d);
    }
};

struct AssemblyOptions {
    int min_nodes = 256;
    double stability_tol = 1e-10;  // node-doubling acceptance threshold
    bool verify_node_doubling = true;
};

namespace detail {

inline Vec2 circle_point(const Circle& c, double theta) {
    return c.center + c.radius * Vec2(std::cos(theta), std::sin(theta));
}

// Outward normal of the domain along component j.
inline Vec2 boundary_normal(const KoebeDomain& d, int j, double theta) {
    const Vec2 radial(std::cos(theta), std::sin(theta));
    return d.is_inner(j) ? Vec2(-radial) : radial;
}

inline double single_kernel(const Vec2& x, const Vec2& q) {
    return -std::log((x - q).norm()) / kTwoPi;
}

// Kernel of N: -2 d_{nu(q')} G(x, q').
inline double double_kernel(const Vec2& x, const Vec2& q, const Vec2& nu_q) {
    const Vec2 r = q - x;
    return (r.dot(nu_q)) / (kPi * r.squaredNorm());
}

// Off-diagonal block of S or N between distinct circles at a given node
// count: analysis_i * [kernel values] * synthesis_j * (2 pi rho_j / n).
inline Eigen::MatrixXd smooth_block(const KoebeDomain& d, int i, int j, int m_max, int n_nodes,
                                    bool single) {
    const Circle& ci = d.component(i);
    const Circle& cj = d.component(j);
    Eigen::MatrixXd K(n_nodes, n_nodes);
    for (int p = 0; p < n_nodes; ++p) {
        const Vec2 x = circle_point(ci, kTwoPi * p / n_nodes);
        for (int l = 0; l < n_nodes; ++l) {
            const double tl = kTwoPi * l / n_nodes;
            const Vec2 q = circle_point(cj, tl);
            K(p, l) = single ? single_kernel(x, q) : double_kernel(x, q, boundary_normal(d, j, tl));
        }
    }
    const Eigen::MatrixXd E = trig_synthesis_matrix(m_max, n_nodes);
    const Eigen::MatrixXd A = trig_analysis_matrix(m_max, n_nodes);
    const double w = kTwoPi * cj.radius / n_nodes;
    return A * (K * (w * E));
}

inline Eigen::MatrixXd stable_smooth_block(const KoebeDomain& d, int i, int j, int m_max,
                                           const AssemblyOptions& opt, bool single) {
    const int n = std::max(opt.min_nodes, 4 * m_max);
    Eigen::MatrixXd coarse = smooth_block(d, i, j, m_max, n, single);
    if (!opt.verify_node_doubling) return coarse;
    Eigen::MatrixXd fine = smooth_block(d, i, j, m_max, 2 * n, single);
    const double diff = (fine - coarse).cwiseAbs().maxCoeff();
    if (diff > opt.stability_tol) {
        throw QuadratureNotConverged("off-diagonal block (" + std::to_string(i) + "," +
                                     std::to_string(j) + ") changed by " + std::to_string(diff) +
                                     " under node doubling");
    }
    return fine;
}

}  // namespace detail

// S in the component-blocked trig basis. The domain passed in is the one the
// operator lives on; callers assembling the eigensystem pass the rescaled
// geometry (see dtn_solver.hpp).
inline BoundaryOperatorMatrix assemble_single_layer(const KoebeDomain& d, int m_max,
                                                    const AssemblyOptions& opt = {}) {
    const int k = d.component_count();
    const int dim = trig_dim(m_max);
    BoundaryOperatorMatrix S;
    S.tag = OperatorTag::SingleLayer;
    S.m_max = m_max;
    S.components = k;
    S.domain_hash = domain_hash(d);
    S.mat = Eigen::MatrixXd::Zero(k * dim, k * dim);
    for (int j = 0; j < k; ++j) {
        const double rho = d.component(j).radius;
        auto blk = S.block(j, j);
        blk(0, 0) = -rho * std::log(rho);
        for (int m = 1; m <= m_max; ++m) {
            const double mult = circle_log_multiplier(m, kTwoPi * rho);
            blk(cos_index(m), cos_index(m)) = mult;
            blk(sin_index(m), sin_index(m)) = mult;
        }
    }
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (i != j) S.block(i, j) = detail::stable_smooth_block(d, i, j, m_max, opt, true);
    return S;
}

inline BoundaryOperatorMatrix assemble_double_layer(const KoebeDomain& d, int m_max,
                                                    const AssemblyOptions& opt = {}) {
    const int k = d.component_count();
    const int dim = trig_dim(m_max);
    BoundaryOperatorMatrix N;
    N.tag = OperatorTag::DoubleLayer;
    N.m_max = m_max;
    N.components = k;
    N.domain_hash = domain_hash(d);
    N.mat = Eigen::MatrixXd::Zero(k * dim, k * dim);
    // The circle double-layer kernel is constant (+-1/(2 pi rho)), so the
    // diagonal block reduces to a single entry on the constant mode.
    for (int j = 0; j < k; ++j) N.block(j, j)(0, 0) = d.is_inner(j) ? -1.0 : 1.0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (i != j) N.block(i, j) = detail::stable_smooth_block(d, i, j, m_max, opt, false);
    return N;
}

// Gram matrix of the blocked trig basis in L^2(dq) (Euclidean boundary
// measure): diagonal, rho_j * (2pi, pi, pi, ...).
inline Eigen::VectorXd gram_dq_diagonal(const KoebeDomain& d, int m_max) {
    const int dim = trig_dim(m_max);
    Eigen::VectorXd g(d.component_count() * dim);
    const Eigen::VectorXd base = trig_gram_diagonal(m_max);
    for (int j = 0; j < d.component_count(); ++j)
        g.segment(j * dim, dim) = d.component(j).radius * base;
    return g;
}

// Gram matrix in the weighted measure ds = g dq (the measure in which the
// comparison modes e_{m,j} are orthogonal). Block diagonal, symmetric.
inline Eigen::MatrixXd gram_ds_matrix(const KoebeDomain& d, int m_max) {
    const int k = d.component_count();
    const int dim = trig_dim(m_max);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(k * dim, k * dim);
    const Eigen::VectorXd base = trig_gram_diagonal(m_max);
    for (int j = 0; j < k; ++j) {
        Eigen::MatrixXd W = trig_multiplication_map(d.weight(j).coefficients(), m_max);
        Eigen::MatrixXd Gj = d.component(j).radius * (base.asDiagonal() * W);
        G.block(j * dim, j * dim, dim, dim) = 0.5 * (Gj + Gj.transpose());
    }
    return G;
}

// Blocked coefficient map of multiplication by the per-component weight g.
inline BoundaryOperatorMatrix assemble_weight_map(const KoebeDomain& d, int m_max) {
    const int k = d.component_count();
    const int dim = trig_dim(m_max);
    BoundaryOperatorMatrix W;
    W.tag = OperatorTag::Weight;
    W.m_max = m_max;
    W.components = k;
    W.domain_hash = domain_hash(d);
    W.mat = Eigen::MatrixXd::Zero(k * dim, k * dim);
    for (int j = 0; j < k; ++j)
        W.block(j, j) = trig_multiplication_map(d.weight(j).coefficients(), m_max);
    return W;
}

enum class LayerKind { Single, Double };

struct LayerEvalOptions {
    double distance_floor_factor = 0.01;  // floor = factor * outer radius
    int min_nodes = 256;
    int max_nodes = 1 << 16;
};

namespace detail {

inline int nodes_for_distance(int m_max, double rho, double dist, const LayerEvalOptions& opt) {
    // Trapezoid aliasing error decays like (1 - d/rho)^{n - m}; 24 rho/d
    // extra nodes push it below the 1e-9 target.
    const double need = 2.0 * m_max + 24.0 * rho / dist;
    int n = opt.min_nodes;
    while (n < need && n < opt.max_nodes) n *= 2;
    return n;
}

}  // namespace detail

namespace detail {

// Per-(component, node count) quadrature data reused across a point batch:
// node positions, outward normals, densities sampled at the nodes, and the
// trapezoid weight folded into the sampled density.
struct LayerNodeCache {
    Eigen::ArrayXd qx, qy, nx, ny, wf;  // wf = (2 pi rho / n) * f(theta_l)
};

class LayerEvaluator {
  public:
    LayerEvaluator(const KoebeDomain& d, const BoundaryDensity& density) : d_(d), f_(density) {}

    const LayerNodeCache& nodes(int j, int n) {
        auto key = std::make_pair(j, n);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        LayerNodeCache nc;
        const Circle& c = d_.component(j);
        nc.qx.resize(n);
        nc.qy.resize(n);
        nc.nx.resize(n);
        nc.ny.resize(n);
        const double sgn = d_.is_inner(j) ? -1.0 : 1.0;
        Eigen::VectorXd fvals(n);
        for (int l = 0; l < n; ++l) {
            const double t = kTwoPi * l / n;
            const double ct = std::cos(t), st = std::sin(t);
            nc.qx[l] = c.center.x() + c.radius * ct;
            nc.qy[l] = c.center.y() + c.radius * st;
            nc.nx[l] = sgn * ct;
            nc.ny[l] = sgn * st;
            fvals[l] = f_.eval(j, t);
        }
        nc.wf = (kTwoPi * c.radius / n) * fvals.array();
        return cache_.emplace(key, std::move(nc)).first->second;
    }

  private:
    const KoebeDomain& d_;
    const BoundaryDensity& f_;
    std::map<std::pair<int, int>, LayerNodeCache> cache_;
};

}  // namespace detail

// Value (and optionally gradient) of Sl or Dl applied to a density, at
// points off the boundary. Periodic trapezoid with node count adaptive in
// m_max and the reciprocal boundary distance; relative target 1e-9 down to
// the configured distance floor.
inline void evaluate_layer(const KoebeDomain& d, const BoundaryDensity& density, LayerKind kind,
                           const std::vector<Vec2>& points, std::vector<double>* values,
                           std::vector<Vec2>* gradients = nullptr,
                           const LayerEvalOptions& opt = {}) {
    const double floor_dist = opt.distance_floor_factor * d.outer.radius;
    values->assign(points.size(), 0.0);
    if (gradients) gradients->assign(points.size(), Vec2::Zero());
    detail::LayerEvaluator ev(d, density);

    for (std::size_t p = 0; p < points.size(); ++p) {
        const Vec2& x = points[p];
        const double dist = d.boundary_distance(x);
        if (dist < floor_dist) {
            throw TooCloseToBoundary("evaluation point at distance " + std::to_string(dist) +
                                     " below floor " + std::to_string(floor_dist));
        }
        double val = 0.0;
        double gx = 0.0, gy = 0.0;
        for (int j = 0; j < d.component_count(); ++j) {
            const double dj = std::abs(d.boundary_depth(x, j));
            const int n =
                detail::nodes_for_distance(density.m_max, d.component(j).radius, dj, opt);
            const detail::LayerNodeCache& nc = ev.nodes(j, n);
            const Eigen::ArrayXd rx = x.x() - nc.qx;
            const Eigen::ArrayXd ry = x.y() - nc.qy;
            const Eigen::ArrayXd r2 = rx.square() + ry.square();
            if (kind == LayerKind::Single) {
                val += (nc.wf * (-r2.log() / (2.0 * kTwoPi))).sum();
                if (gradients) {
                    const Eigen::ArrayXd s = nc.wf * (-1.0 / kTwoPi) / r2;
                    gx += (s * rx).sum();
                    gy += (s * ry).sum();
                }
            } else {
                const Eigen::ArrayXd rdotnu = rx * nc.nx + ry * nc.ny;
                val += (nc.wf * (-rdotnu) / (kTwoPi * r2)).sum();
                if (gradients) {
                    const Eigen::ArrayXd s = nc.wf / (kTwoPi * r2);
                    const Eigen::ArrayXd t = 2.0 * rdotnu / r2;
                    gx += (s * (-nc.nx + t * rx)).sum();
                    gy += (s * (-nc.ny + t * ry)).sum();
                }
            }
        }
        (*values)[p] = val;
        if (gradients) {
            (*gradients)[p] = Vec2(gx, gy);
        }
    }
}

inline double evaluate_layer_at(const KoebeDomain& d, const BoundaryDensity& density,
                                LayerKind kind, const Vec2& x, const LayerEvalOptions& opt = {}) {
    std::vector<double> v;
    evaluate_layer(d, density, kind, {x}, &v, nullptr, opt);
    return v[0];
}

// Max deviation from symmetry of S in the L^2(dq) inner product; the
// assembled operator must satisfy this to ~1e-10.
inline double single_layer_asymmetry(const KoebeDomain& d, const BoundaryOperatorMatrix& S) {
    const Eigen::VectorXd q = gram_dq_diagonal(d, S.m_max);
    const Eigen::MatrixXd QS = q.asDiagonal() * S.mat;
    return (QS - QS.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace steklov
