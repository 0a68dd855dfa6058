#pragma once

// Analytic kernels for drifted Brownian motion X~_t = m t + W_t (unit
// volatility) and the time-zero functionals of the jump-diffusion.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fpt/errors.hpp"
#include "fpt/jump_law.hpp"

namespace fpt {

inline double gaussian_pdf(double z, double mean, double variance) {
    const double d = z - mean;
    return std::exp(-0.5 * d * d / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// E[(mean + sd G)_+] for G standard normal.
inline double positive_part_mean(double mean, double sd) {
    if (sd <= 0.0) return mean > 0.0 ? mean : 0.0;
    const double z = mean / sd;
    return mean * standard_normal_cdf(z) + sd * gaussian_pdf(z, 0.0, 1.0);
}

/// First-passage density of X~ at level x after duration u:
/// |x| / sqrt(2 pi u^3) exp(-(x - m u)^2 / (2u)). Extended by 0 to u <= 0
/// and to x <= 0 so callers never branch on the sign of the gap.
inline double bm_fpt_density(double u, double x, double m) {
    if (!(u > 0.0) || !(x > 0.0)) return 0.0;
    const double d = x - m * u;
    return x / std::sqrt(2.0 * std::numbers::pi * u * u * u) * std::exp(-0.5 * d * d / u);
}

/// P(X~ never reaches x) = 1 - exp(m x - |m x|).
inline double bm_never_hit_prob(double x, double m) {
    if (!(x > 0.0)) throw std::domain_error("bm_never_hit_prob requires x > 0");
    return -std::expm1(m * x - std::abs(m * x));
}

/// Joint density of (sup_{s<=t} X~_s, X~_t) at (b, a).
inline double sup_endpoint_density(double b, double a, double t, double m) {
    if (!(t > 0.0)) throw std::domain_error("sup_endpoint_density requires t > 0");
    if (!(b > std::max(0.0, a))) return 0.0;
    const double y = 2.0 * b - a;
    return 2.0 * y / std::sqrt(2.0 * std::numbers::pi * t * t * t)
           * std::exp(-y * y / (2.0 * t) + m * a - 0.5 * m * m * t);
}

/// P(sup_{s<=u} X~_s < c | X~_u = a) = 1{a<c} (1 - exp(-2c(c-a)/u)).
/// Independent of the drift.
inline double no_cross_prob_given_endpoint(double a, double c, double u) {
    if (!(c > 0.0)) throw std::domain_error("no_cross_prob_given_endpoint requires c > 0");
    if (!(u > 0.0)) throw std::domain_error("no_cross_prob_given_endpoint requires u > 0");
    if (!(a < c)) return 0.0;
    return -std::expm1(-2.0 * c * (c - a) / u);
}

/// (a-z)^2/u + (a-y)^2/v == (a-center)^2/scale + residual for every a.
struct completed_square {
    double center;
    double scale;
    double residual;

    double operator()(double a) const {
        const double d = a - center;
        return d * d / scale + residual;
    }
};

inline completed_square square_completion(double u, double v, double y, double z) {
    if (!(u > 0.0 && v > 0.0)) throw std::domain_error("square_completion requires u, v > 0");
    const double d = z - y;
    return {(v * z + u * y) / (v + u), u * v / (u + v), d * d / (u + v)};
}

/// E[f~(u, mu + sigma G) 1{mu + sigma G > 0}] in closed form.
inline double gaussian_smoothed_fpt_density(double u, double mu, double sigma, double m) {
    if (!(u > 0.0)) throw std::domain_error("gaussian_smoothed_fpt_density requires u > 0");
    if (sigma < 0.0) throw std::domain_error("gaussian_smoothed_fpt_density requires sigma >= 0");
    const double total = sigma * sigma + u;
    const double gap = mu - m * u;
    const double prefactor = std::exp(-gap * gap / (2.0 * total))
                             / (std::sqrt(2.0 * std::numbers::pi) * std::sqrt(u) * total);
    const double shift = std::sqrt(u / total) * gap + m * std::sqrt(u * total);
    return prefactor * positive_part_mean(shift, sigma);
}

/// E[f~(u, mu + sigma G) 1{mu + sigma G > lo}] for lo >= 0 and sigma > 0,
/// returned as exp(log_scale) * factor so callers can fold extra exponential
/// weights into log_scale before exponentiating.
struct scaled_value {
    double log_scale;
    double factor;

    double value() const { return factor == 0.0 ? 0.0 : std::exp(log_scale) * factor; }
};

inline scaled_value truncated_smoothed_fpt_density(double u, double mu, double sigma, double lo, double m) {
    if (!(u > 0.0)) throw std::domain_error("truncated_smoothed_fpt_density requires u > 0");
    if (!(sigma > 0.0)) throw std::domain_error("truncated_smoothed_fpt_density requires sigma > 0");
    if (lo < 0.0) throw std::domain_error("truncated_smoothed_fpt_density requires lo >= 0");
    const double s2 = sigma * sigma;
    const double total = s2 + u;
    const double gap = mu - m * u;
    // Product of the two Gaussians in c is a Gaussian with this centre and variance.
    const double center = (s2 * m * u + u * mu) / total;
    const double var = u * s2 / total;
    const double sd = std::sqrt(var);
    const double z = (center - lo) / sd;
    const double partial_mean = center * standard_normal_cdf(z) + sd * gaussian_pdf(z, 0.0, 1.0);
    return {-gap * gap / (2.0 * total),
            partial_mean / (std::sqrt(2.0 * std::numbers::pi) * u * std::sqrt(total))};
}

struct gamma_series_result {
    double value;  // E[1{N_t >= 2} (t - T_{N_t})^beta]
    double bound;  // (sum_{n>=1} lambda^n e^t B(n, beta+1) / (n-1)!) t^{2+beta}
    int terms;
};

/// Exact Gamma-law series for E[1{N_t>=2}(t - T_{N_t})^beta] of a rate-lambda
/// Poisson process, together with its t^{2+beta} upper bound.
inline gamma_series_result gamma_tail_series(double lambda, double t, double beta) {
    if (!(lambda > 0.0)) throw std::domain_error("gamma_tail_series requires lambda > 0");
    if (!(t > 0.0 && t <= 1.0)) throw std::domain_error("gamma_tail_series requires 0 < t <= 1");
    if (!(beta > -1.0)) throw std::domain_error("gamma_tail_series requires beta > -1");

    constexpr int max_terms = 1000;
    constexpr double cutoff = 1e-15;
    const double log_beta_fn_tail = std::lgamma(beta + 1.0);
    // log of B(n, beta+1) / (n-1)! = lgamma(beta+1) - lgamma(n+beta+1)
    auto log_b_over_fact = [&](int n) { return log_beta_fn_tail - std::lgamma(n + beta + 1.0); };

    double value = 0.0;
    double bound_sum = 0.0;
    int n = 1;
    bool value_done = false;
    bool bound_done = false;
    for (; n <= max_terms && !(value_done && bound_done); ++n) {
        const double lb = log_b_over_fact(n);
        const double bound_term = std::exp(n * std::log(lambda) + t + lb);
        bound_sum += bound_term;
        if (n >= 3 && bound_term < cutoff * bound_sum) bound_done = true;
        if (n >= 2) {
            const double term = std::exp(n * std::log(lambda) - lambda * t + (n + beta) * std::log(t) + lb);
            value += term;
            if (term < cutoff && n > lambda * t) value_done = true;
        }
    }
    if (!(value_done && bound_done)) {
        throw numerical_failure("gamma_tail_series did not converge within 1000 terms");
    }
    const gamma_series_result out{value, bound_sum * std::pow(t, 2.0 + beta), n - 1};
    if (out.value > out.bound) {
        throw numerical_failure("gamma_tail_series value exceeds its analytic bound");
    }
    return out;
}

/// Value of the first-passage density at t = 0:
/// (lambda/2)(2 - F(x) - F(x-)) + (lambda/4)(F(x) - F(x-)).
inline double density_at_zero(const jump_law& law, double lambda, double x) {
    if (!(x > 0.0)) throw std::domain_error("density_at_zero requires x > 0");
    if (lambda < 0.0) throw std::domain_error("density_at_zero requires lambda >= 0");
    const double jump = law.jump_mass_at(x);
    // 2 - F(x) - F(x-) = 2 P(Y > x) + jump
    return 0.5 * lambda * (2.0 * law.survival(x) + jump) + 0.25 * lambda * jump;
}

struct zero_time_terms {
    double atom_term;           // (lambda/4) dF(x) phi(0) psi(0)
    double jump_over_term;      // lambda E[phi(Y - x) psi(x) 1{Y > x}]
    double boundary_atom_term;  // (lambda/2) dF(x) phi(0) psi(x)

    double total() const { return atom_term + jump_over_term + boundary_atom_term; }
};

/// lim_{h->0} (1/h) E[1{tau_x <= h} phi(K_x) psi(L_x)], split into its
/// three contributions.
template <class Phi, class Psi>
zero_time_terms zero_time_functional(const jump_law& law, double lambda, double x, const Phi& phi,
                                     const Psi& psi) {
    if (!(x > 0.0)) throw std::domain_error("zero_time_functional requires x > 0");
    const double jump = law.jump_mass_at(x);
    // integrate_image counts Y >= x; the atom at x itself belongs to the boundary term.
    const double over = law.integrate_image(x, phi) - jump * phi(0.0);
    return {0.25 * lambda * jump * phi(0.0) * psi(0.0), lambda * psi(x) * over,
            0.5 * lambda * jump * phi(0.0) * psi(x)};
}

}  // namespace fpt
