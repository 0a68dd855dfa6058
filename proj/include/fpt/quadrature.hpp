#pragma once

// Gauss-Legendre rules and an adaptive integrator built on them.
//
// The adaptive scheme compares an n-point rule on an interval with the sum
// of the same rule on its two halves; the interval with the largest
// discrepancy is bisected until the summed discrepancy drops below the
// requested tolerance.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <sstream>
#include <vector>

#include "fpt/errors.hpp"

namespace fpt::quad {

struct gauss_legendre_rule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

inline gauss_legendre_rule make_gauss_legendre(int n) {
    gauss_legendre_rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1);
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

/// Cached rules for the orders used across the library.
template <int N>
const gauss_legendre_rule& gauss_legendre() {
    static const gauss_legendre_rule rule = make_gauss_legendre(N);
    return rule;
}

template <class F>
double fixed(const F& f, double a, double b, const gauss_legendre_rule& rule) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return sum * half;
}

struct options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    std::size_t max_intervals = 20000;
};

struct result {
    double value = 0.0;
    double error = 0.0;
    std::size_t intervals = 0;
};

/// Adaptive Gauss-Legendre on a finite interval [a, b].
/// Throws numerical_failure when the interval budget is exhausted.
template <class F>
result adaptive_detail(const F& f, double a, double b, const options& opt) {
    if (a == b) return {};
    const auto& rule = gauss_legendre<10>();

    struct piece {
        double lo, hi, value, error;
        bool operator<(const piece& other) const { return error < other.error; }
    };
    auto make_piece = [&](double lo, double hi) {
        const double mid = 0.5 * (lo + hi);
        const double whole = fixed(f, lo, hi, rule);
        const double split = fixed(f, lo, mid, rule) + fixed(f, mid, hi, rule);
        return piece{lo, hi, split, std::abs(split - whole)};
    };

    std::priority_queue<piece> heap;
    heap.push(make_piece(a, b));
    double total = heap.top().value;
    double total_error = heap.top().error;

    while (total_error > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
        if (heap.size() >= opt.max_intervals) {
            std::ostringstream msg;
            msg << "adaptive quadrature on [" << a << ", " << b << "] did not converge: estimate "
                << total << ", error " << total_error << " after " << heap.size() << " intervals";
            throw numerical_failure(msg.str());
        }
        const piece worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            // Interval cannot be split further in double precision.
            heap.push(piece{worst.lo, worst.hi, worst.value, 0.0});
            total_error -= worst.error;
            continue;
        }
        const piece left = make_piece(worst.lo, mid);
        const piece right = make_piece(mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift accumulated by incremental updates.
    result out;
    out.intervals = heap.size();
    while (!heap.empty()) {
        out.value += heap.top().value;
        out.error += heap.top().error;
        heap.pop();
    }
    return out;
}

template <class F>
double adaptive(const F& f, double a, double b, const options& opt = {}) {
    return adaptive_detail(f, a, b, opt).value;
}

/// Sum of adaptive integrals over consecutive pieces [p0,p1], [p1,p2], ...
/// Use when the integrand has kinks or jumps at known points.
template <class F>
double adaptive_pieces(const F& f, std::span<const double> points, const options& opt = {}) {
    double sum = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        sum += adaptive(f, points[i - 1], points[i], opt);
    }
    return sum;
}

/// Integral over [a, +inf) through u = a + r^2, r = s / (1 - s), s in [0, 1).
/// Integrands decaying like u^{-3/2} map to bounded integrands in s.
template <class F>
double adaptive_semi_infinite(const F& f, double a, const options& opt = {}) {
    auto mapped = [&](double s) {
        const double r = s / (1.0 - s);
        const double jac = 2.0 * r / ((1.0 - s) * (1.0 - s));
        const double u = a + r * r;
        if (!std::isfinite(u) || jac == 0.0) return 0.0;
        const double v = f(u);
        return v == 0.0 ? 0.0 : v * jac;
    };
    return adaptive(mapped, 0.0, 1.0, opt);
}

/// Integral over (-inf, +inf), split at `center`.
template <class F>
double adaptive_whole_line(const F& f, double center = 0.0, const options& opt = {}) {
    auto mirrored = [&](double v) { return f(2.0 * center - v); };
    return adaptive_semi_infinite(f, center, opt) + adaptive_semi_infinite(mirrored, center, opt);
}

}  // namespace fpt::quad
