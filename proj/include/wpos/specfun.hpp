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

#ifndef WPOS_SPECFUN_HPP
#define WPOS_SPECFUN_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace wpos {

/// ln Gamma(x) for x > 0 (Lanczos approximation, g=5, n=6).
inline double log_gamma(double x)
{
    if (!(x > 0.0)) throw std::invalid_argument("specfun: log_gamma requires x > 0");
    static const double coeff[6] = {76.18009172947146,     -86.50532032941677,
                                    24.01409824083091,     -1.231739572450155,
                                    0.1208650973866179e-2, -0.5395239384953e-5};
    const double base = x + 5.5;
    double series = 1.000000000190015;
    for (int j = 0; j < 6; ++j) series += coeff[j] / (x + 1.0 + j);
    return -base + (x + 0.5) * std::log(base) + std::log(2.5066282746310005 * series / x);
}

namespace detail {

// Lower regularized incomplete gamma by series; valid for x < s + 1.
inline double gamma_p_series(double s, double x)
{
    double term = 1.0 / s;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
        term *= x / (s + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16)
            return sum * std::exp(-x + s * std::log(x) - log_gamma(s));
    }
    throw std::runtime_error("specfun: gamma_p series failed to converge");
}

// Upper regularized incomplete gamma by Lentz continued fraction; x >= s + 1.
inline double gamma_q_cont_frac(double s, double x)
{
    const double tiny = std::numeric_limits<double>::min() * 1e10;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16)
            return h * std::exp(-x + s * std::log(x) - log_gamma(s));
    }
    throw std::runtime_error("specfun: gamma_q continued fraction failed to converge");
}

} // namespace detail

/// Lower regularized incomplete gamma P(s, x).
inline double gamma_p(double s, double x)
{
    if (!(s > 0.0) || x < 0.0) throw std::invalid_argument("specfun: gamma_p domain");
    if (x == 0.0) return 0.0;
    return (x < s + 1.0) ? detail::gamma_p_series(s, x) : 1.0 - detail::gamma_q_cont_frac(s, x);
}

/// Upper regularized incomplete gamma Q(s, x) = 1 - P(s, x).
inline double gamma_q(double s, double x)
{
    if (!(s > 0.0) || x < 0.0) throw std::invalid_argument("specfun: gamma_q domain");
    if (x == 0.0) return 1.0;
    return (x < s + 1.0) ? 1.0 - detail::gamma_p_series(s, x) : detail::gamma_q_cont_frac(s, x);
}

/// Effective scale that folds a noncentrality lambda into the central
/// chi-square form: eta^2 = sqrt((2 nu psi^4 + 4 psi^2 lambda
/// + (nu psi^2 + lambda)^2) / (nu (2 + nu))). Reduces to psi^2 at lambda = 0.
inline double effective_scale(double psi2, double lambda, double nu)
{
    if (!(psi2 > 0.0) || lambda < 0.0 || !(nu >= 1.0))
        throw std::invalid_argument("specfun: effective_scale domain");
    const double num =
        2.0 * nu * psi2 * psi2 + 4.0 * psi2 * lambda + (nu * psi2 + lambda) * (nu * psi2 + lambda);
    return std::sqrt(num / (nu * (2.0 + nu)));
}

/// Log density of the scaled central chi-square law with per-bin scale s2:
/// f(x) = (1/(2 s2))^(nu/2) x^(nu/2 - 1) / Gamma(nu/2) exp(-x/(2 s2)).
inline double chi2_log_pdf_central(double x, double s2, double nu)
{
    if (!(x > 0.0) || !(s2 > 0.0) || !(nu >= 1.0))
        throw std::invalid_argument("specfun: chi2_log_pdf_central domain");
    return -0.5 * nu * std::log(2.0 * s2) + 0.5 * (nu - 2.0) * std::log(x) - log_gamma(0.5 * nu)
           - x / (2.0 * s2);
}

/// Central approximation of the noncentral law: the central form evaluated at
/// the effective scale for (psi2, lambda).
inline double chi2_log_pdf_noncentral_approx(double x, double psi2, double lambda, double nu)
{
    return chi2_log_pdf_central(x, effective_scale(psi2, lambda, nu), nu);
}

/// CDF of the scaled central chi-square law (scale s2, nu dof) at x.
inline double chi2_cdf_scaled(double x, double s2, double nu)
{
    if (x <= 0.0) return 0.0;
    return gamma_p(0.5 * nu, x / (2.0 * s2));
}

/// Generalized Marcum Q-function Q_m(a, b) for real order m >= 0.5: the upper
/// tail at b^2 of a noncentral chi-square with 2m degrees of freedom and
/// noncentrality a^2. Poisson-weighted sum of regularized upper gamma terms,
/// expanded outward from the dominant Poisson index; truncation error < 1e-10.
inline double marcum_q(double order, double a, double b)
{
    if (!(order >= 0.5)) throw std::invalid_argument("specfun: marcum_q order must be >= 0.5");
    if (a < 0.0 || b < 0.0) throw std::invalid_argument("specfun: marcum_q arguments must be >= 0");
    if (b == 0.0) return 1.0;

    const double half_nc = 0.5 * a * a; // Poisson mean of the mixture
    const double y = 0.5 * b * b;
    if (half_nc == 0.0) return gamma_q(order, y);

    const std::int64_t start = static_cast<std::int64_t>(half_nc);
    const double log_w0 =
        -half_nc + start * std::log(half_nc) - log_gamma(static_cast<double>(start) + 1.0);
    const double w0 = std::exp(log_w0);

    // Gamma tail at the starting index plus the density term used to step the
    // recurrence Q(s+1, y) = Q(s, y) + y^s e^-y / Gamma(s+1).
    const double s0 = order + static_cast<double>(start);
    auto gamma_density = [y](double s) {
        const double lg = s * std::log(y) - y - log_gamma(s + 1.0);
        return (lg < -745.0) ? 0.0 : std::exp(lg);
    };

    double sum = w0 * gamma_q(s0, y);

    // Forward sweep (j = start+1, start+2, ...). Past the Poisson mode the
    // weights decay geometrically with ratio half_nc/(j+2), so the dropped
    // mass is bounded by wf * (j+2) / (j+2 - half_nc).
    double wf = w0;
    double qf = gamma_q(s0, y);
    double tf = gamma_density(s0);
    constexpr std::int64_t kMaxIter = 1000000;
    bool converged = false;
    for (std::int64_t j = start; j - start < kMaxIter; ++j) {
        wf *= half_nc / static_cast<double>(j + 1);
        qf += tf;
        if (qf > 1.0) qf = 1.0;
        tf *= y / (s0 + static_cast<double>(j - start) + 1.0);
        sum += wf * qf;
        const double next = static_cast<double>(j + 2);
        if (next > half_nc && wf * next / (next - half_nc) < 1e-14) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw std::runtime_error("specfun: marcum_q forward series failed to converge");

    // Backward sweep (j = start-1, ..., 0); terms shrink since start is the
    // Poisson mode.
    double wb = w0;
    double qb = gamma_q(s0, y);
    double tb = gamma_density(s0 - 1.0);
    for (std::int64_t i = start - 1; i >= 0; --i) {
        wb *= static_cast<double>(i + 1) / half_nc;
        qb -= tb;
        if (qb < 0.0) qb = 0.0;
        tb *= (s0 + static_cast<double>(i - start)) / y;
        sum += wb * qb;
        if (wb < 1e-17) break;
    }

    // Residual Poisson mass multiplies tails in [0, 1]; bound it by 1.
    if (sum > 1.0) sum = 1.0;
    if (sum < 0.0) sum = 0.0;
    return sum;
}

} // namespace wpos

#endif // WPOS_SPECFUN_HPP
