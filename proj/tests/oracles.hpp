// Copyright 2026 The wpos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Test-only reference implementations. These deliberately take different
// numerical routes than the library (Simpson quadrature, Bessel series,
// exhaustive enumeration) so they can serve as independent oracles.

#ifndef WPOS_TESTS_ORACLES_HPP
#define WPOS_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

inline double simpson(const std::function<double(double)>& f, double a, double b)
{
    const double c = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
}

inline double adaptive_simpson_impl(const std::function<double(double)>& f, double a, double b,
                                    double whole, double tol, int depth)
{
    const double c = 0.5 * (a + b);
    const double left = simpson(f, a, c);
    const double right = simpson(f, c, b);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_impl(f, a, c, left, 0.5 * tol, depth - 1)
           + adaptive_simpson_impl(f, c, b, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson quadrature of f over [a, b]. A coarse fixed pre-split
/// keeps narrow bumps from being missed by the first three samples.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10)
{
    if (a >= b) return 0.0;
    constexpr int kPanels = 64;
    double total = 0.0;
    for (int i = 0; i < kPanels; ++i) {
        const double lo = a + (b - a) * i / kPanels;
        const double hi = a + (b - a) * (i + 1) / kPanels;
        total += adaptive_simpson_impl(f, lo, hi, simpson(f, lo, hi), tol / kPanels, 44);
    }
    return total;
}

/// ln I_order(y) by the ascending series, accumulated in the log domain so
/// large arguments do not overflow.
inline double log_bessel_i(double order, double y)
{
    const double half = 0.5 * y;
    double log_term = order * std::log(half) - std::lgamma(order + 1.0);
    double log_sum = log_term;
    for (int m = 1; m < 1000000; ++m) {
        log_term += 2.0 * std::log(half) - std::log(static_cast<double>(m))
                    - std::log(order + m);
        log_sum = std::max(log_sum, log_term)
                  + std::log1p(std::exp(-std::fabs(log_term - log_sum)));
        if (log_term < log_sum - 40.0) return log_sum;
    }
    throw std::runtime_error("oracle: bessel series failed to converge");
}

/// Noncentral chi-square density with k degrees of freedom and noncentrality
/// delta, via the Bessel form (delta > 0) or the central formula (delta = 0).
inline double noncentral_chi2_pdf(double x, double k, double delta)
{
    if (x <= 0.0) return 0.0;
    if (delta == 0.0)
        return std::exp((0.5 * k - 1.0) * std::log(x) - 0.5 * x - 0.5 * k * std::log(2.0)
                        - std::lgamma(0.5 * k));
    const double log_pdf = std::log(0.5) - 0.5 * (x + delta)
                           + (0.25 * k - 0.5) * std::log(x / delta)
                           + log_bessel_i(0.5 * k - 1.0, std::sqrt(delta * x));
    return log_pdf < -745.0 ? 0.0 : std::exp(log_pdf);
}

/// Upper tail of the noncentral chi-square by direct quadrature of the
/// density; used as the Marcum-Q oracle.
inline double noncentral_chi2_sf_by_quadrature(double x, double k, double delta)
{
    // Integrate the density from x to a point far beyond the mean k + delta.
    const double upper = std::max(x, k + delta) + 40.0 * std::sqrt(2.0 * (k + 2.0 * delta)) + 60.0;
    if (x >= upper) return 0.0;
    return integrate([k, delta](double t) { return noncentral_chi2_pdf(t, k, delta); }, x, upper,
                     1e-12);
}

/// Two-sided Kolmogorov-Smirnov p-value for a sample against a CDF
/// (asymptotic Kolmogorov distribution with Stephens' small-sample factor).
inline double ks_p_value(std::vector<double> sample, const std::function<double(double)>& cdf)
{
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double c = cdf(sample[i]);
        d = std::max(d, std::fabs(c - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - c));
    }
    const double t = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * t * t);
        p += sign * term;
        sign = -sign;
        if (term < 1e-12) break;
    }
    return std::clamp(2.0 * p, 0.0, 1.0);
}

inline double mean(const std::vector<double>& xs)
{
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double variance(const std::vector<double>& xs)
{
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size());
}

} // namespace oracles

#endif // WPOS_TESTS_ORACLES_HPP
