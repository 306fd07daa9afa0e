#pragma once

// Least-squares rate fitting shared by the gap report, defect scans,
// residual decay, and interior decay profiles. Every exponential claim in
// the pipeline is realized as an OLS fit of log y against x.

#include <cmath>
#include <cstddef>
#include <vector>

#include "steklov/errors.hpp"

namespace steklov {

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int sample_count = 0;
    int excluded_below_floor = 0;
};

// OLS on (x, log y); samples with y <= noise_floor are excluded and counted.
// Requires at least 3 surviving samples. Deterministic: a fixed summation
// order gives bit-identical results for identical inputs.
inline RateFit fit_exponential(const std::vector<double>& xs, const std::vector<double>& ys,
                               double noise_floor = 0.0) {
    if (xs.size() != ys.size()) throw TooFewSamples("fit_exponential: size mismatch");
    RateFit fit;
    std::vector<double> x, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(ys[i] > noise_floor)) {
            ++fit.excluded_below_floor;
            continue;
        }
        x.push_back(xs[i]);
        ly.push_back(std::log(ys[i]));
    }
    const int n = static_cast<int>(x.size());
    if (n < 3) throw TooFewSamples("fit_exponential: need >= 3 samples above the noise floor");
    fit.sample_count = n;

    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += ly[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = ly[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    if (syy > 0.0) {
        double ss_res = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = ly[i] - (fit.intercept + fit.slope * x[i]);
            ss_res += r * r;
        }
        fit.r_squared = 1.0 - ss_res / syy;
        if (fit.r_squared < 0.0) fit.r_squared = 0.0;
    } else {
        fit.r_squared = 1.0;  // constant data, matched exactly by the zero slope
    }
    return fit;
}

}  // namespace steklov
