#pragma once

// Monte Carlo estimators built on the jump skeleton.
//
// Every path is walked up to the last jump T_N before t. Brownian pieces
// between jumps enter through their conditional no-crossing probability
// instead of a crossing draw, and the Brownian increment that ends at T_N is
// integrated out in closed form for the diffusion term. What remains per path
// is a bounded or mildly singular weight whose average is the target.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fpt/closed_form.hpp"
#include "fpt/jump_law.hpp"
#include "fpt/parallel.hpp"
#include "fpt/path_sim.hpp"
#include "fpt/quadrature.hpp"

namespace fpt {

namespace stream_tag {
inline constexpr std::uint64_t walk = 0x11;
inline constexpr std::uint64_t hitting = 0x22;
inline constexpr std::uint64_t direct = 0x33;
inline constexpr std::uint64_t grid = 0x44;
inline constexpr std::uint64_t bridge = 0x55;
}  // namespace stream_tag

/// Fixed-size vector of moment accumulators, one per output column.
class moment_vector {
public:
    moment_vector() = default;
    explicit moment_vector(std::size_t k) : cols_(k) {}

    moments& operator[](std::size_t i) { return cols_[i]; }
    const moments& operator[](std::size_t i) const { return cols_[i]; }
    std::size_t size() const noexcept { return cols_.size(); }

    void merge(const moment_vector& o) {
        if (cols_.empty()) cols_.resize(o.cols_.size());
        for (std::size_t i = 0; i < cols_.size(); ++i) cols_[i].merge(o.cols_[i]);
    }

private:
    std::vector<moments> cols_;
};

namespace detail {

struct walk_state {
    double jump_term = 0.0;       // lambda 1{tau>t} P(Y > x - X_t), crossing integrated out
    double diffusion_term = 0.0;  // 1{tau>T_N} f~(t - T_N, x - X_{T_N}), last increment integrated out
    bool alive = false;           // no jump crossing up to T_N; fields below are valid
    double weight = 0.0;          // P(no continuous crossing on [0, T_N] | skeleton)
    double gap = 0.0;             // x - X_{T_N}
    double remaining = 0.0;       // t - T_N
};

/// E over the Brownian increment x1 ~ N(x_prev + m g, g) ending at the last
/// jump of 1{no crossing on the increment} f~(u, x - x1 - y).
inline double smoothed_last_increment(double drift, double barrier, double x_prev, double g, double y,
                                      double u) {
    const double d = barrier - x_prev;
    const double sd = std::sqrt(g);
    const double lo = std::max(0.0, -y);
    const double mu_direct = barrier - y - x_prev - drift * g;
    const double mu_reflected = mu_direct - 2.0 * d;
    const scaled_value direct = truncated_smoothed_fpt_density(u, mu_direct, sd, lo, drift);
    scaled_value reflected = truncated_smoothed_fpt_density(u, mu_reflected, sd, lo, drift);
    reflected.log_scale += 2.0 * drift * d;
    return std::max(0.0, direct.value() - reflected.value());
}

inline void arrival_times(double intensity, double t, rng_stream& rng, std::vector<double>& times) {
    times.clear();
    if (!(intensity > 0.0)) return;
    double s = 0.0;
    while (true) {
        s += rng.exponential(intensity);
        if (s > t) return;
        times.push_back(s);
    }
}

inline walk_state walk_to(const model_params& model, double t, rng_stream& rng, std::vector<double>& times) {
    const double m = model.drift;
    const double b = model.barrier;
    walk_state r;
    arrival_times(model.intensity, t, rng, times);
    const std::size_t count = times.size();

    double x = 0.0;
    double s = 0.0;
    double w = 1.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double g = times[k] - s;
        const double z = rng.normal();
        const double y = model.law.sample(rng);
        if (k + 1 == count) r.diffusion_term = w * smoothed_last_increment(m, b, x, g, y, t - times[k]);
        const double x1 = x + m * g + std::sqrt(g) * z;
        if (x1 >= b) return r;
        w *= -std::expm1(-2.0 * (b - x) * (b - x1) / g);
        if (w == 0.0 || x1 + y >= b) return r;
        x = x1 + y;
        s = times[k];
    }
    if (count == 0) r.diffusion_term = bm_fpt_density(t, b, m);
    r.alive = true;
    r.weight = w;
    r.gap = b - x;
    r.remaining = t - s;

    const double u = t - s;
    if (u > 0.0 && model.intensity > 0.0) {
        const double x1 = x + m * u + std::sqrt(u) * rng.normal();
        if (x1 < b) {
            const double nc = -std::expm1(-2.0 * (b - x) * (b - x1) / u);
            r.jump_term = model.intensity * w * nc * model.law.survival(b - x1);
        }
    }
    return r;
}

inline void require_positive_time(double t, const char* what) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::domain_error(std::string(what) + " requires t > 0");
}

}  // namespace detail

/// Density of tau_x at t > 0: sum of the jump term and the diffusion term.
inline estimate density(const model_params& model, double t, std::size_t n, const run_options& opt = {}) {
    detail::require_positive_time(t, "density");
    model.validate();
    auto shards = run_sharded(n, opt, stream_tag::walk, moments{}, [&](moments& acc, rng_stream& rng, std::size_t) {
        thread_local std::vector<double> times;
        const auto r = detail::walk_to(model, t, rng, times);
        acc.add(r.jump_term + r.diffusion_term);
    });
    return to_estimate(merge_shards(shards), "skeleton");
}

struct density_split {
    estimate jump_term;       // lambda E[1{tau>t} (1 - F_Y)(x - X_t)]
    estimate diffusion_term;  // E[1{tau>T_N} f~(t - T_N, x - X_{T_N})]
};

/// The two terms of the density, estimated separately on the same paths.
inline density_split zero_limit_terms(const model_params& model, double t, std::size_t n,
                                      const run_options& opt = {}) {
    detail::require_positive_time(t, "zero_limit_terms");
    model.validate();
    auto shards = run_sharded(n, opt, stream_tag::walk, moment_vector(2),
                              [&](moment_vector& acc, rng_stream& rng, std::size_t) {
                                  thread_local std::vector<double> times;
                                  const auto r = detail::walk_to(model, t, rng, times);
                                  acc[0].add(r.jump_term);
                                  acc[1].add(r.diffusion_term);
                              });
    const auto total = merge_shards(shards);
    return {to_estimate(total[0], "jump_term"), to_estimate(total[1], "diffusion_term")};
}

/// Weights c_k with sum_k c_k f(s_k) = f(0) whenever f is a polynomial in
/// sqrt(s) of the given number of terms (default a + b sqrt(s) + c s); the
/// least-squares intercept functional when more points than terms are given.
inline std::vector<double> sqrt_series_intercept_weights(std::span<const double> s, std::size_t terms = 3) {
    if (terms < 2) throw std::invalid_argument("extrapolation needs at least two terms");
    if (s.size() < terms) throw std::invalid_argument("extrapolation needs at least as many points as terms");
    const auto cols = static_cast<Eigen::Index>(terms);
    Eigen::MatrixXd a(static_cast<Eigen::Index>(s.size()), cols);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s[i] > 0.0)) throw std::invalid_argument("extrapolation points must be positive");
        const auto r = static_cast<Eigen::Index>(i);
        const double root = std::sqrt(s[i]);
        double power = 1.0;
        for (Eigen::Index k = 0; k < cols; ++k, power *= root) a(r, k) = power;
    }
    const Eigen::MatrixXd normal = a.transpose() * a;
    const Eigen::VectorXd e0 = Eigen::VectorXd::Unit(cols, 0);
    const Eigen::VectorXd row = a * normal.colPivHouseholderQr().solve(e0);
    return {row.data(), row.data() + row.size()};
}

/// t -> 0 limits of both density terms, extrapolated path by path from the
/// values at the given times with the sqrt-series intercept weights. Every
/// time uses the same substream for a given path.
inline density_split extrapolated_zero_limit_terms(const model_params& model, std::span<const double> ts,
                                                   std::size_t n, const run_options& opt = {},
                                                   std::size_t terms = 3) {
    model.validate();
    for (double t : ts) detail::require_positive_time(t, "extrapolated_zero_limit_terms");
    const auto c = sqrt_series_intercept_weights(ts, terms);
    auto shards = run_sharded(n, opt, stream_tag::walk, moment_vector(2),
                              [&](moment_vector& acc, rng_stream& rng, std::size_t path) {
                                  thread_local std::vector<double> times;
                                  double jump = 0.0;
                                  double diffusion = 0.0;
                                  for (std::size_t k = 0; k < ts.size(); ++k) {
                                      rng.reseed(opt.seed, stream_tag::walk, path);
                                      const auto r = detail::walk_to(model, ts[k], rng, times);
                                      jump += c[k] * r.jump_term;
                                      diffusion += c[k] * r.diffusion_term;
                                  }
                                  acc[0].add(jump);
                                  acc[1].add(diffusion);
                              });
    const auto total = merge_shards(shards);
    return {to_estimate(total[0], "jump_term_limit"), to_estimate(total[1], "diffusion_term_limit")};
}

struct joint_density_point {
    double t;
    double l;
    estimate g;
};

namespace detail {

/// lambda w [N(c - l; m u, u) - e^{2mc} N(-c - l; m u, u)]: density in l of
/// the undershoot of a crossing jump at t, given the state after T_N.
inline double undershoot_kernel(double drift, double intensity, double w, double c, double u, double l) {
    const double mu = drift * u;
    const double direct = gaussian_pdf(l, c - mu, u);
    const double d = l + c + mu;
    const double reflected = std::exp(2.0 * drift * c - 0.5 * d * d / u) / std::sqrt(2.0 * std::numbers::pi * u);
    return intensity * w * (direct - reflected);
}

}  // namespace detail

/// g(t, l) on a grid of undershoots, all from the same paths.
inline std::vector<joint_density_point> joint_density_jump_part(const model_params& model, double t,
                                                                std::span<const double> ls, std::size_t n,
                                                                const run_options& opt = {}) {
    detail::require_positive_time(t, "joint_density_jump_part");
    model.validate();
    for (double l : ls) {
        if (!(l >= 0.0)) throw std::domain_error("joint_density_jump_part requires l >= 0");
    }
    auto shards = run_sharded(n, opt, stream_tag::walk, moment_vector(ls.size()),
                              [&](moment_vector& acc, rng_stream& rng, std::size_t) {
                                  thread_local std::vector<double> times;
                                  const auto r = detail::walk_to(model, t, rng, times);
                                  for (std::size_t i = 0; i < ls.size(); ++i) {
                                      const bool live = r.alive && r.remaining > 0.0 && model.intensity > 0.0;
                                      acc[i].add(live ? detail::undershoot_kernel(model.drift, model.intensity,
                                                                                  r.weight, r.gap, r.remaining, ls[i])
                                                      : 0.0);
                                  }
                              });
    const auto total = merge_shards(shards);
    std::vector<joint_density_point> out;
    for (std::size_t i = 0; i < ls.size(); ++i) out.push_back({t, ls[i], to_estimate(total[i], "skeleton")});
    return out;
}

namespace detail {

/// Integral over l >= 0 of f(l) N(l; center, var) e^{log_weight}, with f
/// piecewise smooth between `breaks`. Gauss-Legendre panels of width at most
/// min(3 sd, 1) over centre +- 9 sd.
template <class F>
double gaussian_window_integral(const F& f, double center, double var, double log_weight,
                                std::span<const double> breaks, double upper) {
    const double sd = std::sqrt(var);
    const double lo = std::max(0.0, center - 9.0 * sd);
    const double hi = std::min(upper, center + 9.0 * sd);
    if (!(hi > lo)) return 0.0;
    const auto& rule = quad::gauss_legendre<8>();
    const double max_width = std::min(3.0 * sd, 1.0);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * var);

    auto segment = [&](double a, double b) {
        const auto panels = static_cast<int>(std::ceil((b - a) / max_width));
        const double width = (b - a) / panels;
        double sum = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double pa = a + width * p;
            const double mid = pa + 0.5 * width;
            const double half = 0.5 * width;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double l = mid + half * rule.nodes[i];
                const double z = l - center;
                sum += rule.weights[i] * half * f(l) * std::exp(log_weight - 0.5 * z * z / var);
            }
        }
        return sum;
    };

    double total = 0.0;
    double a = lo;
    for (double br : breaks) {
        if (br <= a) continue;
        if (br >= hi) break;
        total += segment(a, br);
        a = br;
    }
    total += segment(a, hi);
    return total * norm;
}

}  // namespace detail

struct joint_functional_result {
    estimate analytic;
    estimate direct;
};

/// The joint-law representation of E-density of (tau, K, L) tested against
/// phi(K) psi(L): phi(0) psi(0) times the diffusion term plus
/// int_0^inf psi(l) g(t, l) E[phi(Y - l) 1{Y >= l}] dl, the l-integral done
/// per path.
template <class Phi, class Psi>
estimate joint_functional_analytic(const model_params& model, double t, const Phi& phi, const Psi& psi,
                                   std::size_t n, const run_options& opt = {}) {
    detail::require_positive_time(t, "joint_functional");
    model.validate();
    const image_table image(model.law, phi);
    const double upper = image.upper();
    const auto breaks = image.breakpoints();
    const double m = model.drift;
    const double corner = phi(0.0) * psi(0.0);
    auto weight_fn = [&](double l) { return psi(l) * image(l); };

    auto shards = run_sharded(n, opt, stream_tag::walk, moments{}, [&](moments& acc, rng_stream& rng, std::size_t) {
        thread_local std::vector<double> times;
        const auto r = detail::walk_to(model, t, rng, times);
        double v = corner * r.diffusion_term;
        if (r.alive && r.remaining > 0.0 && model.intensity > 0.0) {
            const double u = r.remaining;
            const double c = r.gap;
            const double direct = detail::gaussian_window_integral(weight_fn, c - m * u, u, 0.0, breaks, upper);
            const double reflected =
                detail::gaussian_window_integral(weight_fn, -c - m * u, u, 2.0 * m * c, breaks, upper);
            v += model.intensity * r.weight * (direct - reflected);
        }
        acc.add(v);
    });
    return to_estimate(merge_shards(shards), "joint_law");
}

/// (1/h) E[1{t < tau <= t+h} phi(K) psi(L)] from exact hitting samples.
template <class Phi, class Psi>
estimate direct_functional(const model_params& model, double t, double h, const Phi& phi, const Psi& psi,
                           std::size_t n, const run_options& opt = {}, int depth = 20) {
    if (!(t >= 0.0)) throw std::domain_error("direct_functional requires t >= 0");
    if (!(h > 0.0)) throw std::domain_error("direct_functional requires h > 0");
    model.validate();
    auto shards = run_sharded(n, opt, stream_tag::direct, moments{}, [&](moments& acc, rng_stream& rng, std::size_t) {
        const auto rec = sample_hitting(model, t + h, depth, rng);
        const bool in_window = rec.hit() && rec.tau > t && rec.tau <= t + h;
        acc.add(in_window ? phi(rec.overshoot) * psi(rec.undershoot) : 0.0);
    });
    return to_estimate(merge_shards(shards), "finite_difference", 1.0 / h);
}

template <class Phi, class Psi>
joint_functional_result joint_functional(const model_params& model, double t, double h, const Phi& phi,
                                         const Psi& psi, std::size_t n, const run_options& opt = {},
                                         int depth = 20) {
    if (!(h > 0.0)) throw std::domain_error("joint_functional requires h > 0");
    return {joint_functional_analytic(model, t, phi, psi, n, opt), direct_functional(model, t, h, phi, psi, n, opt, depth)};
}

/// lim_{h->0} (1/h) E[1{tau <= h} phi(K) psi(L)], extrapolated path by path
/// from nested windows h_k (one simulation up to max h_k).
template <class Phi, class Psi>
estimate extrapolated_direct_functional(const model_params& model, std::span<const double> hs, const Phi& phi,
                                        const Psi& psi, std::size_t n, const run_options& opt = {},
                                        int depth = 20) {
    model.validate();
    const auto c = sqrt_series_intercept_weights(hs);
    const double horizon = *std::max_element(hs.begin(), hs.end());
    auto shards = run_sharded(n, opt, stream_tag::direct, moments{}, [&](moments& acc, rng_stream& rng, std::size_t) {
        const auto rec = sample_hitting(model, horizon, depth, rng);
        double v = 0.0;
        if (rec.hit()) {
            const double f = phi(rec.overshoot) * psi(rec.undershoot);
            for (std::size_t k = 0; k < hs.size(); ++k) {
                if (rec.tau <= hs[k]) v += c[k] * f / hs[k];
            }
        }
        acc.add(v);
    });
    return to_estimate(merge_shards(shards), "finite_difference_limit");
}

struct mass_point {
    double horizon;
    estimate p_hit;
    double p_survived;
};

/// P(tau <= H) for each horizon H, all read off one set of paths simulated to
/// the largest horizon, so the curve is nondecreasing path by path.
inline std::vector<mass_point> total_mass_curve(const model_params& model, std::span<const double> horizons,
                                                std::size_t n, const run_options& opt = {}, int depth = 20) {
    model.validate();
    if (horizons.empty()) throw std::invalid_argument("total_mass_curve needs at least one horizon");
    for (double h : horizons) detail::require_positive_time(h, "total_mass");
    const double top = *std::max_element(horizons.begin(), horizons.end());
    auto shards = run_sharded(n, opt, stream_tag::hitting, moment_vector(horizons.size()),
                              [&](moment_vector& acc, rng_stream& rng, std::size_t) {
                                  const auto rec = sample_hitting(model, top, depth, rng);
                                  for (std::size_t i = 0; i < horizons.size(); ++i) {
                                      acc[i].add(rec.hit() && rec.tau <= horizons[i] ? 1.0 : 0.0);
                                  }
                              });
    const auto total = merge_shards(shards);
    std::vector<mass_point> out;
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        auto e = to_estimate(total[i], "exact_hitting");
        const double survived = 1.0 - e.value;
        out.push_back({horizons[i], std::move(e), survived});
    }
    return out;
}

inline mass_point total_mass(const model_params& model, double horizon, std::size_t n, const run_options& opt = {},
                             int depth = 20) {
    const double h[] = {horizon};
    return total_mass_curve(model, h, n, opt, depth).front();
}

/// Raw hitting records in path order.
inline std::vector<hitting_record> sample_records(const model_params& model, double horizon, std::size_t n,
                                                  const run_options& opt = {}, int depth = 20) {
    model.validate();
    struct record_block {
        std::vector<std::pair<std::size_t, hitting_record>> rows;
        void merge(const record_block& o) { rows.insert(rows.end(), o.rows.begin(), o.rows.end()); }
    };
    auto shards = run_sharded(n, opt, stream_tag::hitting, record_block{},
                              [&](record_block& acc, rng_stream& rng, std::size_t path) {
                                  acc.rows.emplace_back(path, sample_hitting(model, horizon, depth, rng));
                              });
    std::vector<hitting_record> out;
    out.reserve(n);
    for (const auto& s : shards) {
        for (const auto& row : s.rows) out.push_back(row.second);
    }
    return out;
}

}  // namespace fpt
