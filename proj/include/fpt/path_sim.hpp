#pragma once

// Exact simulation of X_t = m t + W_t + sum_{i<=N_t} Y_i on its jump
// skeleton. Between jumps the path is a Brownian bridge given its endpoints,
// so barrier crossings inside an interval are decided exactly from the
// conditional no-crossing probability.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpt/closed_form.hpp"
#include "fpt/errors.hpp"
#include "fpt/jump_law.hpp"
#include "fpt/random.hpp"

namespace fpt {

struct model_params {
    double drift = 0.0;      // m
    double intensity = 0.0;  // lambda; 0 switches jumps off
    jump_law law = jump_law::point_mass(0.0);
    double barrier = 1.0;    // x

    void validate() const {
        if (!std::isfinite(drift)) throw std::invalid_argument("drift must be finite");
        if (!(intensity >= 0.0) || !std::isfinite(intensity)) {
            throw std::invalid_argument("intensity must be finite and >= 0");
        }
        if (!(barrier > 0.0) || !std::isfinite(barrier)) throw std::invalid_argument("barrier must be > 0");
    }

    /// m + lambda E[Y]; tau_x is finite a.s. iff this is >= 0.
    double mean_speed() const { return drift + intensity * law.mean(); }
};

struct path_skeleton {
    std::vector<double> jump_times;
    std::vector<double> pre_jump_values;
    std::vector<double> post_jump_values;
    double horizon = 0.0;
    double end_value = 0.0;  // X at the horizon
};

enum class hit_status { hit_continuous, hit_jump, survived_horizon };

inline const char* to_string(hit_status s) {
    switch (s) {
        case hit_status::hit_continuous: return "hit_continuous";
        case hit_status::hit_jump: return "hit_jump";
        case hit_status::survived_horizon: return "survived_horizon";
    }
    return "unknown";
}

struct hitting_record {
    hit_status status = hit_status::survived_horizon;
    double tau = std::numeric_limits<double>::infinity();
    double overshoot = 0.0;   // K
    double undershoot = 0.0;  // L
    double jump = 0.0;        // size of the crossing jump (hit_jump only)
    std::size_t jumps_before = 0;

    bool hit() const noexcept { return status != hit_status::survived_horizon; }
};

/// Poisson(lambda) jump times on [0, horizon], Gaussian increments between
/// them, jumps drawn from the law.
inline path_skeleton sample_skeleton(const model_params& model, double horizon, rng_stream& rng) {
    if (!(horizon > 0.0)) throw std::domain_error("sample_skeleton requires horizon > 0");
    path_skeleton sk;
    sk.horizon = horizon;
    double t = 0.0;
    double x = 0.0;
    while (true) {
        const double gap = model.intensity > 0.0 ? rng.exponential(model.intensity)
                                                 : std::numeric_limits<double>::infinity();
        const double next = t + gap;
        const double du = std::min(next, horizon) - t;
        x += model.drift * du + std::sqrt(du) * rng.normal();
        if (next > horizon) break;
        const double y = model.law.sample(rng);
        sk.jump_times.push_back(next);
        sk.pre_jump_values.push_back(x);
        x += y;
        sk.post_jump_values.push_back(x);
        t = next;
    }
    sk.end_value = x;
    return sk;
}

/// Probability that a Brownian bridge from x_start to x_end over duration u
/// touches `barrier`. Drift-free.
inline double bridge_cross_prob(double x_start, double x_end, double barrier, double u) {
    if (x_start >= barrier || x_end >= barrier) return 1.0;
    return std::exp(-2.0 * (barrier - x_start) * (barrier - x_end) / u);
}

/// Bernoulli draw of the crossing event given the interval endpoints.
inline bool crossed_on_interval(double x_start, double x_end, double barrier, double u, rng_stream& rng) {
    if (!(u > 0.0)) throw std::domain_error("crossed_on_interval requires u > 0");
    if (x_start >= barrier || x_end >= barrier) return true;
    return rng.uniform() < bridge_cross_prob(x_start, x_end, barrier, u);
}

/// First crossing time (offset from the interval start) of a bridge known to
/// cross. Each level samples the midpoint conditionally on crossing (by
/// rejection from the unconditional bridge midpoint) and keeps the half that
/// holds the first crossing. The result is exact up to u 2^-depth; inside the
/// final subinterval it is dithered uniformly. depth = 0 returns u.
inline double sample_crossing_time(double x_start, double x_end, double barrier, double u, int depth,
                                   rng_stream& rng) {
    if (!(u > 0.0)) throw std::domain_error("sample_crossing_time requires u > 0");
    if (depth < 0) throw std::domain_error("sample_crossing_time requires depth >= 0");
    if (x_start >= barrier) return 0.0;
    if (depth == 0) return u;

    constexpr long max_proposals = 100'000'000;
    double lo = 0.0;
    double width = u;
    double a = x_start;
    double b = x_end;
    for (int level = 0; level < depth; ++level) {
        const double half = 0.5 * width;
        const double mid_sd = 0.5 * std::sqrt(width);
        // One uniform both accepts the proposal (probability p_left +
        // (1 - p_left) p_right) and picks the half holding the first crossing.
        for (long proposals = 1;; ++proposals) {
            if (proposals > max_proposals) {
                throw numerical_failure("sample_crossing_time: midpoint rejection did not terminate");
            }
            const double z = 0.5 * (a + b) + mid_sd * rng.normal();
            const double v = rng.uniform();
            const double p_left = bridge_cross_prob(a, z, barrier, half);
            if (v < p_left) {
                b = z;
                break;
            }
            if (v < p_left + (1.0 - p_left) * bridge_cross_prob(z, b, barrier, half)) {
                lo += half;
                a = z;
                break;
            }
        }
        width = half;
    }
    return lo + rng.uniform() * width;
}

/// Walks the skeleton interval by interval until the first crossing of the
/// barrier or the horizon. Jump crossings record K = Y - L and L = x - X_{T-}
/// with the crossing jump Y stored alongside.
inline hitting_record sample_hitting(const model_params& model, double horizon, int depth, rng_stream& rng) {
    if (!(horizon > 0.0)) throw std::domain_error("sample_hitting requires horizon > 0");
    const double barrier = model.barrier;
    hitting_record rec;
    double t = 0.0;
    double x = 0.0;
    while (true) {
        const double gap = model.intensity > 0.0 ? rng.exponential(model.intensity)
                                                 : std::numeric_limits<double>::infinity();
        const double next = t + gap;
        const double end = std::min(next, horizon);
        const double du = end - t;
        const double x_end = x + model.drift * du + std::sqrt(du) * rng.normal();
        if (crossed_on_interval(x, x_end, barrier, du, rng)) {
            rec.status = hit_status::hit_continuous;
            rec.tau = t + sample_crossing_time(x, x_end, barrier, du, depth, rng);
            return rec;
        }
        x = x_end;
        t = end;
        if (next > horizon) return rec;

        const double y = model.law.sample(rng);
        const double gap_below = barrier - x;  // > 0: no crossing so far
        if (y >= gap_below) {
            rec.status = hit_status::hit_jump;
            rec.tau = t;
            rec.undershoot = gap_below;
            rec.overshoot = y - gap_below;
            rec.jump = y;
            return rec;
        }
        x += y;
        ++rec.jumps_before;
    }
}

}  // namespace fpt
