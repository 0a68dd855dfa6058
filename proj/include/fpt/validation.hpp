#pragma once

// The acceptance suite. Every criterion produces rows of
// (check, value, reference, tolerance, pass); a criterion passes when all
// of its rows do. Sample sizes scale with budget::scale.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fpt/closed_form.hpp"
#include "fpt/commands.hpp"
#include "fpt/config.hpp"
#include "fpt/estimators.hpp"
#include "fpt/oracle.hpp"
#include "fpt/quadrature.hpp"

namespace fpt {

/// near: |value - reference| <= tolerance. at_most: value <= reference +
/// tolerance. at_least: value >= reference - tolerance.
enum class check_kind { near, at_most, at_least };

struct check_row {
    std::string name;
    double value;
    double reference;
    double tolerance;
    check_kind kind;

    bool pass() const {
        switch (kind) {
            case check_kind::at_most: return value <= reference + tolerance;
            case check_kind::at_least: return value >= reference - tolerance;
            case check_kind::near: break;
        }
        return std::abs(value - reference) <= tolerance;
    }
};

struct criterion_result {
    std::string name;
    std::string summary;
    std::vector<check_row> rows;
    double seconds = 0.0;

    bool pass() const {
        return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const check_row& r) { return r.pass(); });
    }
};

struct budget {
    double scale = 1.0;
    std::uint64_t seed = 42;
    std::size_t shards = 8;
    std::size_t threads = 0;

    std::size_t paths(double full, std::size_t floor = 1000) const {
        return std::max<std::size_t>(floor, static_cast<std::size_t>(std::llround(full * scale)));
    }
    run_options options(std::uint64_t offset = 0) const {
        run_options opt;
        opt.seed = seed + offset;
        opt.shards = shards;
        opt.threads = threads;
        return opt;
    }
};

namespace detail {

inline model_params model_of(double m, double lambda, jump_law law, double x) {
    model_params p;
    p.drift = m;
    p.intensity = lambda;
    p.law = std::move(law);
    p.barrier = x;
    return p;
}

inline jump_law half_atom_half_exponential() {
    const law_term terms[] = {atom{1.0, 0.5}, continuous_component{0.5, exponential_density{1.0}}};
    return jump_law::mixture(terms);
}

inline double combined_error(const estimate& a, const estimate& b) {
    return std::hypot(a.std_error, b.std_error);
}

inline check_row near_row(std::string name, double value, double reference, double tolerance) {
    return {std::move(name), value, reference, tolerance, check_kind::near};
}

inline std::string fmt(double v) { return format_real(v); }

}  // namespace detail

/// First-passage density of drifted Brownian motion integrates to the
/// probability of ever hitting.
inline criterion_result check_mass_identity(const budget&) {
    criterion_result out{"mass_identity", "integral of the passage density equals e^{mx-|mx|}", {}, 0.0};
    for (double x : {0.5, 1.0, 2.0}) {
        for (double m : {-1.0, -0.3, 0.0, 0.7}) {
            const double mass = quad::adaptive_semi_infinite([&](double u) { return bm_fpt_density(u, x, m); }, 0.0,
                                                             {1e-12, 1e-11, 20000});
            out.rows.push_back(detail::near_row("mass_x" + detail::fmt(x) + "_m" + detail::fmt(m), mass,
                                                std::exp(m * x - std::abs(m * x)), 1e-6));
        }
    }
    return out;
}

inline criterion_result check_square_completion(const budget& b) {
    criterion_result out{"square_completion", "completed-square identity on random draws", {}, 0.0};
    std::mt19937_64 gen(b.seed);
    std::uniform_real_distribution<double> pos(0.1, 10.0);
    std::uniform_real_distribution<double> any(-5.0, 5.0);
    double worst = 0.0;
    for (int i = 0; i < 10'000; ++i) {
        const double u = pos(gen), v = pos(gen), y = any(gen), z = any(gen), a = any(gen);
        const double lhs = (a - z) * (a - z) / u + (a - y) * (a - y) / v;
        worst = std::max(worst, std::abs(lhs - square_completion(u, v, y, z)(a)));
    }
    out.rows.push_back({"max_abs_error", worst, 0.0, 1e-10, check_kind::at_most});
    return out;
}

/// Bridge no-cross probability against the reflection integral and the
/// discretely monitored bridge.
inline criterion_result check_bridge_no_cross(const budget& b) {
    criterion_result out{"bridge_no_cross", "no-cross probability vs reflection integral and grid bridges", {}, 0.0};
    double worst = 0.0;
    for (double u : {0.25, 1.0, 3.0}) {
        for (double c : {0.3, 1.0, 2.0}) {
            for (double a : {-1.0, 0.0, 0.2, 0.9 * c}) {
                for (double m : {-1.0, 0.0, 0.5}) {
                    const double integral =
                        quad::adaptive([&](double s) { return sup_endpoint_density(s, a, u, m); }, std::max(0.0, a),
                                       c, {1e-14, 1e-12, 20000});
                    const double ratio = integral / gaussian_pdf(a, m * u, u);
                    worst = std::max(worst, std::abs(ratio - no_cross_prob_given_endpoint(a, c, u)));
                }
            }
        }
    }
    out.rows.push_back({"reflection_integral_max_error", worst, 0.0, 1e-8, check_kind::at_most});

    const std::size_t steps = std::size_t{1} << 14;
    const auto grid = grid_bridge_no_cross(0.0, 1.0, 1.0, steps, b.paths(1e5), b.options());
    out.rows.push_back(detail::near_row("grid_bridge_a0_c1_u1", grid.value, no_cross_prob_given_endpoint(0.0, 1.0, 1.0),
                                        3.0 * grid.std_error + grid_bridge_bias(0.0, 1.0, 1.0, steps)));
    return out;
}

inline criterion_result check_gamma_series(const budget& b) {
    criterion_result out{"gamma_series", "last-jump-age series vs Poisson simulation and its bound", {}, 0.0};
    struct triple {
        double lambda, t, beta;
    };
    const std::size_t n = b.paths(1e6);
    std::uint64_t offset = 0;
    for (const auto [lambda, t, beta] : {triple{1.0, 0.5, -0.5}, triple{2.0, 1.0, 0.0}, triple{0.7, 0.3, 1.0}}) {
        auto shards = run_sharded(n, b.options(offset++), stream_tag::walk, moments{},
                                  [&](moments& acc, rng_stream& rng, std::size_t) {
                                      double s = 0.0;
                                      double last = 0.0;
                                      int count = 0;
                                      while ((s += rng.exponential(lambda)) <= t) {
                                          last = s;
                                          ++count;
                                      }
                                      acc.add(count >= 2 ? std::pow(t - last, beta) : 0.0);
                                  });
        const auto mc = to_estimate(merge_shards(shards), "poisson");
        out.rows.push_back(detail::near_row("series_l" + detail::fmt(lambda) + "_t" + detail::fmt(t) + "_b" +
                                                detail::fmt(beta),
                                            gamma_tail_series(lambda, t, beta).value, mc.value, 3.0 * mc.std_error));
    }
    std::mt19937_64 gen(b.seed);
    std::uniform_real_distribution<double> lam(0.5, 3.0), tt(1e-3, 1.0), be(-0.9, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double lambda = lam(gen), t = tt(gen), beta = be(gen);
        const auto r = gamma_tail_series(lambda, t, beta);
        worst = std::max(worst, r.value / r.bound);
    }
    out.rows.push_back({"max_series_over_bound", worst, 1.0, 0.0, check_kind::at_most});
    return out;
}

/// Skeleton density averaged over a 0.05 bucket against the grid-oracle
/// histogram. The grid sees continuous crossings late, roughly as if the
/// barrier sat monitoring_shift * sqrt(step) higher; the allowance is the
/// skeleton density's change under that shift, on common random numbers.
inline criterion_result check_density_vs_grid(const budget& b) {
    criterion_result out{"density_vs_grid", "density vs grid-oracle hitting-time histogram", {}, 0.0};
    const auto model = detail::model_of(0.0, 1.0, jump_law::gaussian(0.0, 1.0), 1.0);
    const double step = std::ldexp(1.0, -12);
    const double width = 0.05;
    const double ts[] = {0.5, 1.0, 2.0};
    const std::size_t n_grid = b.paths(1e6);
    const std::size_t n_skel = b.paths(1e6);

    const auto recs = grid_hitting_records(model, ts[2] + 0.5 * width, step, n_grid, b.options());
    auto shifted = model;
    shifted.barrier += monitoring_shift * std::sqrt(step);
    const auto& gl = quad::gauss_legendre<3>();

    for (double t : ts) {
        const double lo = t - 0.5 * width;
        const double hi = t + 0.5 * width;
        const auto hits = std::count_if(recs.begin(), recs.end(),
                                        [&](const hitting_record& r) { return r.hit() && r.tau > lo && r.tau <= hi; });
        const double p = static_cast<double>(hits) / static_cast<double>(n_grid);
        const double grid_value = p / width;
        const double grid_se = std::sqrt(p * (1.0 - p) / static_cast<double>(n_grid)) / width;

        double skel = 0.0;
        double skel_se = 0.0;
        double skel_shifted = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double s = t + 0.5 * width * gl.nodes[i];
            const double w = 0.5 * gl.weights[i];
            const auto e = density(model, s, n_skel, b.options(1));
            skel += w * e.value;
            skel_se += w * e.std_error;
            skel_shifted += w * density(shifted, s, n_skel, b.options(1)).value;
        }
        const double allowance = std::abs(skel_shifted - skel);
        out.rows.push_back(detail::near_row("density_t" + detail::fmt(t), skel, grid_value,
                                            3.0 * std::hypot(skel_se, grid_se) + allowance));
    }
    return out;
}

inline criterion_result check_zero_limits(const budget& b) {
    criterion_result out{"zero_limits", "t -> 0 limits of the density terms", {}, 0.0};
    // At t = 0.1 the no-jump passage density e^{-t} f~(t, 1) is still about 0.08;
    // below 0.04 the jump term still carries a visible t^{3/2} part.
    const double ts[] = {0.04, 0.02, 0.01, 0.005, 0.0025};
    const auto mixed = detail::model_of(0.0, 1.0, detail::half_atom_half_exponential(), 1.0);
    const auto& law = mixed.law;
    const double lambda = mixed.intensity;
    const double x = mixed.barrier;
    const auto lim = extrapolated_zero_limit_terms(mixed, ts, b.paths(1e7), b.options(), 4);
    const double jump_ref = 0.5 * lambda * (2.0 - law.cdf(x) - law.cdf_left(x));
    const double diffusion_ref = 0.25 * lambda * (law.cdf(x) - law.cdf_left(x));
    out.rows.push_back(detail::near_row("jump_term_limit", lim.jump_term.value, jump_ref, 3.0 * lim.jump_term.std_error));
    out.rows.push_back(detail::near_row("diffusion_term_limit", lim.diffusion_term.value, diffusion_ref,
                                        3.0 * lim.diffusion_term.std_error));

    const auto point = detail::model_of(0.0, 1.0, jump_law::point_mass(1.0), 1.0);
    out.rows.push_back(detail::near_row("density_at_zero_point_mass", density_at_zero(point.law, 1.0, 1.0), 0.75, 1e-15));
    const auto pl = extrapolated_zero_limit_terms(point, ts, b.paths(1e7), b.options(1), 4);
    out.rows.push_back(detail::near_row("extrapolated_point_mass", pl.jump_term.value + pl.diffusion_term.value, 0.75,
                                        3.0 * (pl.jump_term.std_error + pl.diffusion_term.std_error)));
    return out;
}

inline criterion_result check_marginal_consistency(const budget& b) {
    criterion_result out{"marginal_consistency", "joint functional with unit test functions equals the density", {},
                         0.0};
    const law_term atoms[] = {atom{0.5, 0.4}, atom{1.2, 0.6}};
    struct named {
        const char* name;
        model_params model;
    };
    const named models[] = {{"gaussian", detail::model_of(0.0, 1.0, jump_law::gaussian(0.0, 1.0), 1.0)},
                            {"atomic", detail::model_of(0.1, 1.5, jump_law::mixture(atoms), 1.0)},
                            {"kou", detail::model_of(-0.2, 2.0, jump_law::kou(0.6, 3.0, 2.0), 1.0)}};
    auto one = [](double) { return 1.0; };
    for (const auto& [name, model] : models) {
        const auto joint = joint_functional_analytic(model, 1.0, one, one, b.paths(2e5), b.options());
        const auto dens = density(model, 1.0, b.paths(2e5), b.options(1));
        out.rows.push_back(detail::near_row(std::string("joint_vs_density_") + name, joint.value, dens.value,
                                            3.0 * detail::combined_error(joint, dens)));
    }
    return out;
}

/// The window average (1/h) int_t^{t+h} A lies between A(t) and A(t+h)
/// for monotone A, so |A(t+h) - A(t)| bounds the window bias.
inline criterion_result check_functional_vs_finite_difference(const budget& b) {
    criterion_result out{"functional_vs_finite_difference", "joint functional vs windowed exact simulation", {}, 0.0};
    const auto model = detail::model_of(0.0, 1.0, jump_law::exponential(1.0), 1.0);
    auto phi = [](double k) { return std::exp(-k); };
    auto psi = [](double l) { return 1.0 / (1.0 + l); };
    const double t = 1.0;
    const std::size_t n = b.paths(1e6);
    const auto analytic = joint_functional_analytic(model, t, phi, psi, n, b.options());
    std::uint64_t offset = 1;
    for (double h : {0.05, 0.025}) {
        const auto later = joint_functional_analytic(model, t + h, phi, psi, n, b.options());
        const auto direct = direct_functional(model, t, h, phi, psi, n, b.options(offset++));
        out.rows.push_back(detail::near_row("h" + detail::fmt(h), analytic.value, direct.value,
                                            3.0 * detail::combined_error(analytic, direct) +
                                                std::abs(later.value - analytic.value)));
    }
    return out;
}

inline criterion_result check_zero_time_atoms(const budget& b) {
    criterion_result out{"zero_time_atoms", "t = 0 functional with an atom at the barrier", {}, 0.0};
    const auto model = detail::model_of(0.0, 1.0, detail::half_atom_half_exponential(), 1.0);
    auto phi = [](double k) { return std::exp(-k); };
    auto psi = [](double l) { return 1.0 / (1.0 + l); };
    const double hs[] = {0.02, 0.01, 0.005};
    const auto fd = extrapolated_direct_functional(model, hs, phi, psi, b.paths(2e7), b.options());
    const auto z = zero_time_functional(model.law, model.intensity, model.barrier, phi, psi);
    out.rows.push_back(detail::near_row("extrapolated_vs_total", fd.value, z.total(), 3.0 * fd.std_error));
    out.rows.push_back(detail::near_row("boundary_atom_term", z.boundary_atom_term,
                                        0.5 * model.intensity * 0.5 * phi(0.0) * psi(model.barrier), 1e-15));
    // Dropping the boundary atom contribution must be detectably wrong.
    out.rows.push_back({"gap_without_boundary_term", std::abs(fd.value - (z.total() - z.boundary_atom_term)),
                        3.0 * fd.std_error, 0.0, check_kind::at_least});
    return out;
}

inline criterion_result check_finiteness(const budget& b) {
    criterion_result out{"finiteness", "P(tau <= H) for proper and defective models", {}, 0.0};
    const double horizons[] = {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0};
    const std::size_t n = b.paths(1e5);
    struct named {
        const char* name;
        model_params model;
    };
    const named proper[] = {{"exp_jumps", detail::model_of(0.0, 1.0, jump_law::exponential(1.0), 1.0)},
                            {"diffusion", detail::model_of(0.3, 0.0, jump_law::point_mass(0.0), 1.0)},
                            {"negative_drift_exp_jumps", detail::model_of(-0.2, 2.0, jump_law::exponential(2.0), 1.0)}};
    std::uint64_t offset = 0;
    auto monotone_gap = [](const std::vector<mass_point>& curve) {
        double worst = 0.0;
        for (std::size_t i = 1; i < curve.size(); ++i) {
            worst = std::min(worst, curve[i].p_hit.value - curve[i - 1].p_hit.value);
        }
        return worst;
    };
    for (const auto& [name, model] : proper) {
        const auto curve = total_mass_curve(model, horizons, n, b.options(offset++));
        out.rows.push_back({std::string("p_hit_100_") + name, curve.back().p_hit.value, 0.99, 0.0, check_kind::at_least});
        out.rows.push_back({std::string("min_increment_") + name, monotone_gap(curve), 0.0, 0.0, check_kind::at_least});
    }
    const auto defective = detail::model_of(-1.0, 1.0, jump_law::exponential(2.0), 1.0);
    const auto curve = total_mass_curve(defective, horizons, n, b.options(offset));
    const double p50 = curve[curve.size() - 2].p_hit.value;
    const double p100 = curve.back().p_hit.value;
    out.rows.push_back({"p_hit_100_defective", p100, 0.9, 0.0, check_kind::at_most});
    out.rows.push_back({"plateau_50_to_100_defective", p100 - p50, 0.0, 0.005, check_kind::at_most});
    out.rows.push_back({"min_increment_defective", monotone_gap(curve), 0.0, 0.0, check_kind::at_least});
    return out;
}

/// Neighbour gaps net of the least-squares plane through the grid, so the
/// smooth first-order change over 0.01 is not counted as a jump.
inline criterion_result check_continuity(const budget& b) {
    criterion_result out{"continuity", "density on a 5x5 (t, x) grid around (1, 1)", {}, 0.0};
    const auto base = detail::model_of(0.0, 1.0, jump_law::gaussian(0.0, 1.0), 1.0);
    const std::size_t n = b.paths(1e5);
    double values[5][5];
    double worst_se = 0.0;
    double slope_t = 0.0;
    double slope_x = 0.0;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            auto model = base;
            model.barrier = 1.0 + 0.01 * (j - 2);
            const auto e = density(model, 1.0 + 0.01 * (i - 2), n, b.options());
            values[i][j] = e.value;
            worst_se = std::max(worst_se, e.std_error);
            slope_t += (i - 2) * e.value / 50.0;
            slope_x += (j - 2) * e.value / 50.0;
        }
    }
    double raw = 0.0;
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            if (i + 1 < 5) {
                const double d = values[i + 1][j] - values[i][j];
                raw = std::max(raw, std::abs(d));
                worst = std::max(worst, std::abs(d - slope_t));
            }
            if (j + 1 < 5) {
                const double d = values[i][j + 1] - values[i][j];
                raw = std::max(raw, std::abs(d));
                worst = std::max(worst, std::abs(d - slope_x));
            }
        }
    }
    char note[48];
    std::snprintf(note, sizeof note, ", raw max gap %.2g", raw);
    out.summary += note;
    out.rows.push_back({"max_detrended_neighbour_gap", worst, 4.0 * worst_se, 0.0, check_kind::at_most});
    return out;
}

/// Every estimator command, run twice with the same seed and shards but a
/// different thread count, must give byte-identical CSV.
inline criterion_result check_reproducibility(const budget& b) {
    criterion_result out{"reproducibility", "byte-identical CSV for fixed seed and shards", {}, 0.0};
    auto cfg = parse_config(
        "[model]\n"
        "m = 0.1\n"
        "lambda = 1.5\n"
        "jump = mix 0.3*atom@1 + 0.7*kou p=0.6 eta1=3 eta2=2\n"
        "x = 1\n"
        "[run]\n"
        "t = 0.5, 1\n"
        "l = 0.2, 0.8\n"
        "horizon = 1, 4\n"
        "phi = exp\n"
        "psi = reciprocal\n");
    cfg.seed = b.seed;
    cfg.shards = b.shards;
    cfg.paths = b.paths(2e4, 200);
    for (const char* command : {"density", "joint", "zero", "mass", "sample"}) {
        auto first = cfg;
        first.threads = 1;
        auto second = cfg;
        second.threads = 3;
        const bool same = run_command(command, first).str() == run_command(command, second).str();
        out.rows.push_back({command, same ? 1.0 : 0.0, 1.0, 0.0, check_kind::near});
    }
    for (auto method : {density_method::direct, density_method::grid}) {
        auto first = cfg;
        first.method = method;
        first.paths = std::min<std::size_t>(cfg.paths, 2000);
        first.threads = 1;
        auto second = first;
        second.threads = 3;
        const bool same = density_command(first).str() == density_command(second).str();
        out.rows.push_back({std::string("density_") + to_string(method), same ? 1.0 : 0.0, 1.0, 0.0, check_kind::near});
    }
    return out;
}

using criterion_fn = criterion_result (*)(const budget&);

inline const std::vector<criterion_fn>& acceptance_criteria() {
    static const std::vector<criterion_fn> all = {
        check_mass_identity,     check_square_completion, check_bridge_no_cross,
        check_gamma_series,      check_density_vs_grid,   check_zero_limits,
        check_marginal_consistency, check_functional_vs_finite_difference, check_zero_time_atoms,
        check_finiteness,        check_continuity,        check_reproducibility};
    return all;
}

/// Runs every criterion in order, reporting each as it finishes.
inline std::vector<criterion_result> run_acceptance(const budget& b,
                                                    const std::function<void(const criterion_result&)>& report = {}) {
    std::vector<criterion_result> results;
    for (auto fn : acceptance_criteria()) {
        const auto start = std::chrono::steady_clock::now();
        auto r = fn(b);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (report) report(r);
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace fpt
