#pragma once

// Koebe-model domains: the unit-scale outer circle with disjoint inner
// circles removed, together with a strictly positive analytic boundary
// weight per component (the conformal factor g = |f'| of the uniformizing
// map, represented as a truncated Fourier series in the boundary angle).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "steklov/errors.hpp"
#include "steklov/fourier.hpp"

namespace steklov {

using Vec2 = Eigen::Vector2d;

struct Circle {
    Vec2 center{0.0, 0.0};
    double radius = 1.0;
};

// g(theta) = c[0] + sum_m c[2m-1] cos(m theta) + c[2m] sin(m theta).
// Band-limited by construction, so the holomorphic continuation to complex
// theta is an entire function given by the same finite series.
class ConformalWeight {
  public:
    ConformalWeight() : coeff_(Eigen::VectorXd::Ones(1)) {}
    explicit ConformalWeight(Eigen::VectorXd coeff) : coeff_(std::move(coeff)) {
        if (coeff_.size() == 0) coeff_ = Eigen::VectorXd::Ones(1);
    }

    static ConformalWeight unit() { return ConformalWeight(); }

    // 1 + a cos(m theta); the standard analytic non-constant test weight.
    static ConformalWeight cosine_bump(double amplitude, int mode = 1) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(trig_dim(mode));
        c[0] = 1.0;
        c[cos_index(mode)] = amplitude;
        return ConformalWeight(c);
    }

    const Eigen::VectorXd& coefficients() const { return coeff_; }
    int max_mode() const { return trig_max_mode(static_cast<int>(coeff_.size())); }
    double mean() const { return coeff_[0]; }

    double operator()(double theta) const { return trig_eval(coeff_, theta); }

    std::complex<double> eval_complex(std::complex<double> z) const {
        std::complex<double> v = coeff_[0];
        for (int m = 1; m <= max_mode(); ++m) {
            v += coeff_[cos_index(m)] * std::cos(double(m) * z) +
                 coeff_[sin_index(m)] * std::sin(double(m) * z);
        }
        return v;
    }

    double min_on_grid(int n_samples) const {
        double lo = std::numeric_limits<double>::infinity();
        for (int p = 0; p < n_samples; ++p) lo = std::min(lo, (*this)(kTwoPi * p / n_samples));
        return lo;
    }

    bool all_finite() const { return coeff_.allFinite(); }

  private:
    Eigen::VectorXd coeff_;
};

struct KoebeDomain {
    Circle outer;
    std::vector<Circle> inners;
    std::vector<ConformalWeight> weights;  // [0] outer, [1..] inner, one per component
    double scale_factor = 0.5;             // geometry rescale applied before operator assembly
    double min_gap_factor = 1e-3;          // admissible gap >= min_gap_factor * outer.radius

    int component_count() const { return 1 + static_cast<int>(inners.size()); }

    const Circle& component(int j) const { return j == 0 ? outer : inners[j - 1]; }
    bool is_inner(int j) const { return j > 0; }

    const ConformalWeight& weight(int j) const { return weights[j]; }

    // Signed distance convention: positive into the domain interior.
    double boundary_depth(const Vec2& x, int j) const {
        const double r = (x - component(j).center).norm();
        return is_inner(j) ? r - component(j).radius : component(j).radius - r;
    }

    // Distance from x to the nearest boundary circle (0 on the boundary).
    double boundary_distance(const Vec2& x) const {
        double d = std::numeric_limits<double>::infinity();
        for (int j = 0; j < component_count(); ++j)
            d = std::min(d, std::abs(boundary_depth(x, j)));
        return d;
    }

    bool contains(const Vec2& x) const {
        if ((x - outer.center).norm() >= outer.radius) return false;
        for (const Circle& c : inners)
            if ((x - c.center).norm() <= c.radius) return false;
        return true;
    }

    // Copy with all circles scaled about the origin; weights are dimensionless
    // multipliers and carry over unchanged.
    KoebeDomain scaled(double s) const {
        KoebeDomain d = *this;
        d.outer.center *= s;
        d.outer.radius *= s;
        for (Circle& c : d.inners) {
            c.center *= s;
            c.radius *= s;
        }
        return d;
    }
};

// Minimal distance between boundary circles (gap between closures).
// +infinity for the plain disk.
inline double minimal_gap(const KoebeDomain& d) {
    double gap = std::numeric_limits<double>::infinity();
    const int k = d.component_count();
    for (int i = 1; i < k; ++i) {
        const Circle& ci = d.component(i);
        gap = std::min(gap, d.outer.radius - ((ci.center - d.outer.center).norm() + ci.radius));
        for (int j = i + 1; j < k; ++j) {
            const Circle& cj = d.component(j);
            gap = std::min(gap, (ci.center - cj.center).norm() - ci.radius - cj.radius);
        }
    }
    return gap;
}

struct ValidationReport {
    double min_gap = std::numeric_limits<double>::infinity();
    double min_weight = std::numeric_limits<double>::infinity();
};

// Checks all domain invariants; throws the specific error on violation.
// Weight positivity is checked by dense sampling at >= 8x the highest
// retained mode. Idempotent: validating a validated domain changes nothing.
inline ValidationReport validate_domain(const KoebeDomain& d) {
    ValidationReport rep;
    if (!(d.outer.radius > 0.0)) throw OutsideOuter("outer radius must be positive");
    if (!(d.scale_factor > 0.0)) throw ConfigError("scale_factor must be positive");
    for (const Circle& c : d.inners) {
        if (!(c.radius > 0.0)) throw OverlapError("inner circle radius must be positive");
        const double margin =
            d.outer.radius - ((c.center - d.outer.center).norm() + c.radius);
        if (!(margin > 0.0)) throw OutsideOuter("inner circle not strictly inside the outer disk");
    }
    rep.min_gap = minimal_gap(d);
    const double required = d.min_gap_factor * d.outer.radius;
    if (!d.inners.empty() && !(rep.min_gap >= required)) {
        throw OverlapError("inter-circle gap " + std::to_string(rep.min_gap) +
                           " below required minimum " + std::to_string(required));
    }
    if (static_cast<int>(d.weights.size()) != d.component_count())
        throw ConfigError("one conformal weight required per boundary component");
    for (const ConformalWeight& w : d.weights) {
        if (!w.all_finite()) throw NonPositiveWeight("weight has non-finite coefficients");
        const int n = std::max(64, 8 * (w.max_mode() + 1));
        const double lo = w.min_on_grid(n);
        if (!(lo > 0.0)) throw NonPositiveWeight("weight not strictly positive on the boundary");
        rep.min_weight = std::min(rep.min_weight, lo);
    }
    return rep;
}

// Weighted arclength s_j(theta) = integral_0^theta g(t) rho_j dt on each
// component, with L_j = s_j(2pi). For band-limited g the antiderivative is
// the explicit finite series below, so forward, inverse, and the
// holomorphic continuation are all exact.
class ArclengthMap {
  public:
    ArclengthMap() = default;

    ArclengthMap(const KoebeDomain& d) {
        const int k = d.component_count();
        comps_.resize(k);
        for (int j = 0; j < k; ++j) {
            PerComponent& pc = comps_[j];
            pc.rho = d.component(j).radius;
            pc.g = d.weight(j).coefficients();
            pc.length = kTwoPi * pc.rho * pc.g[0];
            const int n = std::max(256, 16 * (d.weight(j).max_mode() + 1));
            pc.gamma = std::numeric_limits<double>::infinity();
            for (int p = 0; p < n; ++p)
                pc.gamma = std::min(pc.gamma, pc.rho * trig_eval(pc.g, kTwoPi * p / n));
        }
    }

    int component_count() const { return static_cast<int>(comps_.size()); }
    double length(int j) const { return comps_[j].length; }
    double euclidean_perimeter(int j) const { return kTwoPi * comps_[j].rho; }
    // Lower bound Gamma_j on d s_j / d theta.
    double derivative_lower_bound(int j) const { return comps_[j].gamma; }

    double max_length() const {
        double L = 0.0;
        for (const auto& pc : comps_) L = std::max(L, pc.length);
        return L;
    }

    double forward(int j, double theta) const {
        const PerComponent& pc = comps_[j];
        const int pm = trig_max_mode(static_cast<int>(pc.g.size()));
        double s = pc.g[0] * theta;
        for (int m = 1; m <= pm; ++m) {
            s += pc.g[cos_index(m)] * std::sin(m * theta) / m;
            s += pc.g[sin_index(m)] * (1.0 - std::cos(m * theta)) / m;
        }
        return pc.rho * s;
    }

    double derivative(int j, double theta) const {
        return comps_[j].rho * trig_eval(comps_[j].g, theta);
    }

    // theta(s) by guarded Newton; s' >= Gamma_j > 0 makes the root simple.
    double inverse(int j, double s) const {
        const PerComponent& pc = comps_[j];
        const double wraps = std::floor(s / pc.length);
        const double s0 = s - wraps * pc.length;
        double lo = 0.0, hi = kTwoPi;
        double theta = kTwoPi * s0 / pc.length;
        for (int it = 0; it < 100; ++it) {
            const double f = forward(j, theta) - s0;
            if (f > 0.0)
                hi = theta;
            else
                lo = theta;
            const double step = f / derivative(j, theta);
            double next = theta - step;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - theta) < 1e-15 * kTwoPi) {
                theta = next;
                break;
            }
            theta = next;
        }
        return theta + wraps * kTwoPi;
    }

    std::complex<double> forward_complex(int j, std::complex<double> z) const {
        const PerComponent& pc = comps_[j];
        const int pm = trig_max_mode(static_cast<int>(pc.g.size()));
        std::complex<double> s = pc.g[0] * z;
        for (int m = 1; m <= pm; ++m) {
            s += pc.g[cos_index(m)] * std::sin(double(m) * z) / double(m);
            s += pc.g[sin_index(m)] * (1.0 - std::cos(double(m) * z)) / double(m);
        }
        return pc.rho * s;
    }

    // max over the strip [0,2pi] x i[-tau,tau] of |d^3/dtheta^3 Im s^C|;
    // the maximum of the harmonic integrand sits on the strip edges.
    double third_derivative_bound(int j, double tau) const {
        const PerComponent& pc = comps_[j];
        const int pm = trig_max_mode(static_cast<int>(pc.g.size()));
        if (pm == 0) return 0.0;
        double bound = 0.0;
        const int n = 512;
        for (int side = -1; side <= 1; side += 2) {
            for (int p = 0; p < n; ++p) {
                const std::complex<double> z(kTwoPi * p / n, side * tau);
                std::complex<double> d3(0.0, 0.0);
                for (int m = 1; m <= pm; ++m) {
                    const double mm = m;
                    d3 += pc.g[cos_index(m)] * (mm * mm) * (-std::sin(mm * z));
                    d3 += pc.g[sin_index(m)] * (mm * mm) * std::cos(mm * z);
                }
                bound = std::max(bound, std::abs(std::imag(pc.rho * d3)));
            }
        }
        return bound;
    }

  private:
    struct PerComponent {
        double rho = 1.0;
        Eigen::VectorXd g;
        double length = kTwoPi;
        double gamma = 1.0;
    };
    std::vector<PerComponent> comps_;
};

inline ArclengthMap arclength_map(const KoebeDomain& d) { return ArclengthMap(d); }

// FNV-1a over the canonical parameter serialization; embedded in every
// output artifact for reproducibility.
inline std::uint64_t domain_hash(const KoebeDomain& d) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](double v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    mix(static_cast<double>(d.component_count()));
    mix(d.scale_factor);
    mix(d.min_gap_factor);
    for (int j = 0; j < d.component_count(); ++j) {
        const Circle& c = d.component(j);
        mix(c.center.x());
        mix(c.center.y());
        mix(c.radius);
        const Eigen::VectorXd& w = d.weight(j).coefficients();
        mix(static_cast<double>(w.size()));
        for (int i = 0; i < w.size(); ++i) mix(w[i]);
    }
    return h;
}

}  // namespace steklov
