#pragma once

// Brute-force references. The grid simulator steps the process on a fixed
// time grid and detects crossings by comparing grid values with the barrier;
// it never uses the bridge crossing probability, so agreement with the
// skeleton estimators is a real check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "fpt/estimators.hpp"
#include "fpt/parallel.hpp"
#include "fpt/path_sim.hpp"
#include "fpt/quadrature.hpp"
#include "fpt/random.hpp"

namespace fpt {

/// Euler-exact Gaussian steps with jumps moved to the nearest grid time. At a
/// grid time the diffusion value is checked first, then the jumps snapped
/// there, in arrival order.
inline hitting_record grid_hitting(const model_params& model, double horizon, double step, rng_stream& rng) {
    if (!(step > 0.0)) throw std::domain_error("grid_hitting requires step > 0");
    if (!(horizon > 0.0)) throw std::domain_error("grid_hitting requires horizon > 0");
    const double b = model.barrier;
    const auto last = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));

    thread_local std::vector<std::size_t> slots;
    slots.clear();
    if (model.intensity > 0.0) {
        double s = 0.0;
        while (true) {
            s += rng.exponential(model.intensity);
            if (s > horizon) break;
            slots.push_back(std::min(last, static_cast<std::size_t>(std::llround(s / step))));
        }
    }

    const double mean_step = model.drift * step;
    const double sd_step = std::sqrt(step);
    hitting_record rec;
    double x = 0.0;
    std::size_t next = 0;
    for (std::size_t k = 0; k <= last; ++k) {
        if (k > 0) {
            x += mean_step + sd_step * rng.normal();
            if (x >= b) {
                rec.status = hit_status::hit_continuous;
                rec.tau = static_cast<double>(k) * step;
                return rec;
            }
        }
        for (; next < slots.size() && slots[next] == k; ++next) {
            const double y = model.law.sample(rng);
            const double below = b - x;
            if (y >= below) {
                rec.status = hit_status::hit_jump;
                rec.tau = static_cast<double>(k) * step;
                rec.undershoot = below;
                rec.overshoot = y - below;
                rec.jump = y;
                return rec;
            }
            x += y;
            ++rec.jumps_before;
        }
    }
    return rec;
}

inline std::vector<hitting_record> grid_hitting_records(const model_params& model, double horizon, double step,
                                                        std::size_t n, const run_options& opt = {}) {
    model.validate();
    struct record_block {
        std::vector<hitting_record> rows;
        void merge(const record_block& o) { rows.insert(rows.end(), o.rows.begin(), o.rows.end()); }
    };
    auto shards = run_sharded(n, opt, stream_tag::grid, record_block{},
                              [&](record_block& acc, rng_stream& rng, std::size_t) {
                                  acc.rows.push_back(grid_hitting(model, horizon, step, rng));
                              });
    std::vector<hitting_record> out;
    out.reserve(n);
    for (const auto& s : shards) out.insert(out.end(), s.rows.begin(), s.rows.end());
    return out;
}

/// (1/h) P(t < tau <= t+h) on the grid simulator.
inline estimate grid_density(const model_params& model, double t, double h, double step, std::size_t n,
                             const run_options& opt = {}) {
    model.validate();
    if (!(t > 0.0) || !(h > 0.0)) throw std::domain_error("grid_density requires t > 0 and h > 0");
    auto shards = run_sharded(n, opt, stream_tag::grid, moments{}, [&](moments& acc, rng_stream& rng, std::size_t) {
        const auto rec = grid_hitting(model, t + h, step, rng);
        acc.add(rec.hit() && rec.tau > t && rec.tau <= t + h ? 1.0 : 0.0);
    });
    return to_estimate(merge_shards(shards), "grid", 1.0 / h);
}

/// Fraction of discretised Brownian bridges from 0 to a over [0, u] whose
/// grid values all stay below c.
inline estimate grid_bridge_no_cross(double a, double c, double u, std::size_t steps, std::size_t n,
                                     const run_options& opt = {}) {
    if (!(u > 0.0) || steps == 0) throw std::domain_error("grid_bridge_no_cross requires u > 0 and steps > 0");
    const double sd = std::sqrt(u / static_cast<double>(steps));
    auto shards = run_sharded(n, opt, stream_tag::bridge, moments{}, [&](moments& acc, rng_stream& rng, std::size_t) {
        thread_local std::vector<double> walk;
        walk.resize(steps + 1);
        walk[0] = 0.0;
        for (std::size_t k = 1; k <= steps; ++k) walk[k] = walk[k - 1] + sd * rng.normal();
        const double pull = walk[steps] - a;
        bool below = true;
        for (std::size_t k = 1; k <= steps && below; ++k) {
            const double bridge = walk[k] - pull * static_cast<double>(k) / static_cast<double>(steps);
            below = bridge < c;
        }
        acc.add(below ? 1.0 : 0.0);
    });
    return to_estimate(merge_shards(shards), "grid_bridge");
}

/// Expected excess of the grid estimate over the continuous no-cross
/// probability: discrete monitoring acts like a barrier raised by
/// beta * sqrt(step), beta = -zeta(1/2)/sqrt(2*pi).
inline constexpr double monitoring_shift = 0.5825971579390106;

inline double grid_bridge_bias(double a, double c, double u, std::size_t steps) {
    const double slope = 2.0 * (2.0 * c - a) / u * std::exp(-2.0 * c * (c - a) / u);
    return monitoring_shift * std::sqrt(u / static_cast<double>(steps)) * slope;
}

/// P(|Z| > 3): the 3 sigma level used by every test here.
inline constexpr double three_sigma_tail = 0.0026997960632601866;

struct histogram_bucket {
    double lo;
    double hi;
    double count_a;
    double count_b;  // second sample, or expected count under the density
};

struct histogram_comparison {
    std::vector<histogram_bucket> buckets;
    double statistic = 0.0;
    double threshold = 0.0;
    double dof = 0.0;
    bool pass = false;
};

namespace detail {

inline void check_edges(std::span<const double> edges) {
    if (edges.size() < 3) throw std::invalid_argument("histogram comparison needs at least two buckets");
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) throw std::invalid_argument("bucket edges must increase");
    }
}

/// Counts in (edges[i], edges[i+1]].
inline std::vector<double> bucket_counts(std::span<const double> samples, std::span<const double> edges) {
    std::vector<double> counts(edges.size() - 1, 0.0);
    for (double v : samples) {
        if (!(v > edges.front()) || v > edges.back()) continue;
        const auto it = std::lower_bound(edges.begin(), edges.end(), v);
        counts[static_cast<std::size_t>(it - edges.begin()) - 1] += 1.0;
    }
    return counts;
}

inline double chi_square_threshold(double dof) {
    const boost::math::chi_squared dist(dof);
    return boost::math::quantile(boost::math::complement(dist, three_sigma_tail));
}

}  // namespace detail

/// Two-sample chi-square on common buckets, with unequal sample sizes
/// handled by the usual sqrt(Nb/Na) scaling.
inline histogram_comparison compare_histograms(std::span<const double> a, std::span<const double> b,
                                               std::span<const double> edges) {
    detail::check_edges(edges);
    if (a.empty() || b.empty()) throw std::invalid_argument("compare_histograms: empty sample");
    const auto ca = detail::bucket_counts(a, edges);
    const auto cb = detail::bucket_counts(b, edges);
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i) {
        na += ca[i];
        nb += cb[i];
    }
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("compare_histograms: no samples inside the buckets");
    const double ka = std::sqrt(nb / na);
    const double kb = std::sqrt(na / nb);

    histogram_comparison out;
    double used = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i) {
        out.buckets.push_back({edges[i], edges[i + 1], ca[i], cb[i]});
        if (ca[i] + cb[i] == 0.0) continue;
        const double d = ka * ca[i] - kb * cb[i];
        out.statistic += d * d / (ca[i] + cb[i]);
        used += 1.0;
    }
    out.dof = std::max(1.0, used - (na == nb ? 1.0 : 0.0));
    out.threshold = detail::chi_square_threshold(out.dof);
    out.pass = out.statistic <= out.threshold;
    return out;
}

/// One-sample chi-square of samples against a (possibly defective) density.
/// Expected counts are total * integral of the density over each bucket,
/// where total counts every draw, including those that fell outside.
inline histogram_comparison compare_histogram_density(std::span<const double> samples, double total,
                                                      const std::function<double(double)>& pdf,
                                                      std::span<const double> edges) {
    detail::check_edges(edges);
    if (samples.empty() || !(total > 0.0)) throw std::invalid_argument("compare_histogram_density: empty sample");
    const auto counts = detail::bucket_counts(samples, edges);
    histogram_comparison out;
    double used = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double expected = total * quad::adaptive(pdf, edges[i], edges[i + 1], {1e-13, 1e-10, 20000});
        out.buckets.push_back({edges[i], edges[i + 1], counts[i], expected});
        if (expected <= 0.0) {
            if (counts[i] > 0.0) out.statistic = std::numeric_limits<double>::infinity();
            continue;
        }
        const double d = counts[i] - expected;
        out.statistic += d * d / expected;
        used += 1.0;
    }
    out.dof = std::max(1.0, used);
    out.threshold = detail::chi_square_threshold(out.dof);
    out.pass = out.statistic <= out.threshold;
    return out;
}

/// sup_x |F_n(x) - F(x)|.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

/// Asymptotic Kolmogorov quantile: P(sqrt(n) D_n > k) = tail.
inline double kolmogorov_quantile(double tail) {
    auto survival = [](double k) {
        double s = 0.0;
        for (int j = 1; j <= 100; ++j) s += (j % 2 ? 2.0 : -2.0) * std::exp(-2.0 * j * j * k * k);
        return s;
    };
    double lo = 0.3;
    double hi = 5.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (survival(mid) > tail ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double ks_critical_value(std::size_t n, double tail = three_sigma_tail) {
    return kolmogorov_quantile(tail) / std::sqrt(static_cast<double>(n));
}

/// (1/(h dl)) P(t < tau <= t+h, jump crossing, L in [l, l+dl)).
inline estimate finite_difference_undershoot_density(const model_params& model, double t, double h, double l,
                                                     double dl, std::size_t n, const run_options& opt = {},
                                                     int depth = 20) {
    auto shards = run_sharded(n, opt, stream_tag::direct, moments{}, [&](moments& acc, rng_stream& rng, std::size_t) {
        const auto rec = sample_hitting(model, t + h, depth, rng);
        const bool in = rec.status == hit_status::hit_jump && rec.tau > t && rec.tau <= t + h &&
                        rec.undershoot >= l && rec.undershoot < l + dl;
        acc.add(in ? 1.0 : 0.0);
    });
    return to_estimate(merge_shards(shards), "finite_difference", 1.0 / (h * dl));
}

}  // namespace fpt
