#pragma once

// Shared test fixtures: reference domains, a tanh-sinh quadrature used as an
// implementation-independent oracle for singular integrals, and seeded
// random densities.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "steklov/geometry.hpp"
#include "steklov/layer_ops.hpp"

namespace testutil {

inline steklov::KoebeDomain disk_domain() {
    steklov::KoebeDomain d;
    d.outer = steklov::Circle{{0.0, 0.0}, 1.0};
    d.weights = {steklov::ConformalWeight::unit()};
    return d;
}

inline steklov::KoebeDomain annulus_domain(double eps) {
    steklov::KoebeDomain d;
    d.outer = steklov::Circle{{0.0, 0.0}, 1.0};
    d.inners = {steklov::Circle{{0.0, 0.0}, eps}};
    d.weights = {steklov::ConformalWeight::unit(), steklov::ConformalWeight::unit()};
    return d;
}

inline steklov::KoebeDomain cosine_disk_domain(double amplitude = 0.5) {
    steklov::KoebeDomain d;
    d.outer = steklov::Circle{{0.0, 0.0}, 1.0};
    d.weights = {steklov::ConformalWeight::cosine_bump(amplitude)};
    return d;
}

inline steklov::KoebeDomain two_holes_domain() {
    steklov::KoebeDomain d;
    d.outer = steklov::Circle{{0.0, 0.0}, 1.0};
    d.inners = {steklov::Circle{{-0.45, 0.0}, 0.18}, steklov::Circle{{0.42, 0.15}, 0.22}};
    d.weights = {steklov::ConformalWeight::unit(), steklov::ConformalWeight::unit(),
                 steklov::ConformalWeight::unit()};
    return d;
}

// Tanh-sinh (double exponential) rule on (a, b); handles integrable endpoint
// singularities such as the boundary log kernels. Independent of any
// quadrature in the library under test.
inline double tanh_sinh_fixed(const std::function<double(double)>& f, double a, double b,
                              int n_half = 400, double h = 4.0 / 400) {
    const double c = 0.5 * (b - a), mid = 0.5 * (a + b);
    double sum = 0.0;
    for (int i = -n_half; i <= n_half; ++i) {
        const double t = h * i;
        const double s = std::sinh(t);
        const double u = std::tanh(0.5 * steklov::kPi * s);
        const double w = 0.5 * steklov::kPi * std::cosh(t) /
                         std::pow(std::cosh(0.5 * steklov::kPi * s), 2);
        sum += w * f(mid + c * u);
    }
    return sum * h * c;
}

inline steklov::BoundaryDensity random_density(int components, int m_max, int content,
                                               unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    steklov::BoundaryDensity d = steklov::BoundaryDensity::zero(components, m_max);
    for (int j = 0; j < components; ++j) {
        d.comp[j][0] = gauss(rng);
        for (int m = 1; m <= std::min(content, m_max); ++m) {
            d.comp[j][steklov::cos_index(m)] = gauss(rng);
            d.comp[j][steklov::sin_index(m)] = gauss(rng);
        }
    }
    return d;
}

}  // namespace testutil
