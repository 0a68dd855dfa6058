#pragma once

// Estimator commands behind the CLI. Each one turns a run_config into a CSV
// table; the same config and seed always give the same bytes.

#include <stdexcept>
#include <string>
#include <string_view>

#include "fpt/closed_form.hpp"
#include "fpt/config.hpp"
#include "fpt/csv.hpp"
#include "fpt/estimators.hpp"
#include "fpt/oracle.hpp"

namespace fpt {

inline run_options options_of(const run_config& cfg) {
    run_options opt;
    opt.seed = cfg.seed;
    opt.shards = cfg.shards;
    opt.threads = cfg.threads;
    return opt;
}

inline csv_cell count(std::size_t n) { return static_cast<std::uint64_t>(n); }

/// t, x, estimate, stderr, n, method
inline csv_table density_command(const run_config& cfg) {
    csv_table out({"t", "x", "estimate", "stderr", "n", "method"});
    const auto opt = options_of(cfg);
    auto one = [](double) { return 1.0; };
    for (double t : cfg.times) {
        estimate e;
        switch (cfg.method) {
            case density_method::skeleton: e = density(cfg.model, t, cfg.paths, opt); break;
            case density_method::direct: e = direct_functional(cfg.model, t, cfg.h, one, one, cfg.paths, opt, cfg.depth); break;
            case density_method::grid: e = grid_density(cfg.model, t, cfg.h, cfg.step, cfg.paths, opt); break;
        }
        out.add({t, cfg.model.barrier, e.value, e.std_error, count(e.n), to_string(cfg.method)});
    }
    return out;
}

/// t, l, g, stderr, n: undershoot density of jump crossings at time t.
inline csv_table joint_command(const run_config& cfg) {
    csv_table out({"t", "l", "g", "stderr", "n"});
    const auto opt = options_of(cfg);
    for (double t : cfg.times) {
        for (const auto& p : joint_density_jump_part(cfg.model, t, cfg.undershoots, cfg.paths, opt)) {
            out.add({p.t, p.l, p.g.value, p.g.std_error, count(p.g.n)});
        }
    }
    return out;
}

/// component, value: the three t = 0 contributions to
/// lim (1/h) E[1{tau <= h} phi(K) psi(L)], their sum, and the density at 0.
inline csv_table zero_command(const run_config& cfg) {
    csv_table out({"component", "value"});
    const auto phi = [f = cfg.phi](double k) { return apply(f, k); };
    const auto psi = [f = cfg.psi](double l) { return apply(f, l); };
    const auto& m = cfg.model;
    const auto z = zero_time_functional(m.law, m.intensity, m.barrier, phi, psi);
    out.add({std::string("atom_term"), z.atom_term});
    out.add({std::string("jump_over_term"), z.jump_over_term});
    out.add({std::string("boundary_atom_term"), z.boundary_atom_term});
    out.add({std::string("functional_total"), z.total()});
    out.add({std::string("density_at_zero"), density_at_zero(m.law, m.intensity, m.barrier)});
    return out;
}

/// horizon, p_hit, stderr
inline csv_table mass_command(const run_config& cfg) {
    csv_table out({"horizon", "p_hit", "stderr"});
    for (const auto& p : total_mass_curve(cfg.model, cfg.horizons, cfg.paths, options_of(cfg), cfg.depth)) {
        out.add({p.horizon, p.p_hit.value, p.p_hit.std_error});
    }
    return out;
}

/// status, tau, K, L, n_jumps for each path, simulated to the last horizon.
inline csv_table sample_command(const run_config& cfg) {
    csv_table out({"status", "tau", "K", "L", "n_jumps"});
    const double horizon = cfg.horizons.back();
    const auto opt = options_of(cfg);
    const auto recs = cfg.method == density_method::grid
                          ? grid_hitting_records(cfg.model, horizon, cfg.step, cfg.paths, opt)
                          : sample_records(cfg.model, horizon, cfg.paths, opt, cfg.depth);
    for (const auto& r : recs) {
        out.add({std::string(to_string(r.status)), r.tau, r.overshoot, r.undershoot,
                 static_cast<std::uint64_t>(r.jumps_before)});
    }
    return out;
}

inline bool is_estimator_command(std::string_view command) {
    return command == "density" || command == "joint" || command == "zero" || command == "mass" ||
           command == "sample";
}

inline csv_table run_command(std::string_view command, const run_config& cfg) {
    if (command == "density") return density_command(cfg);
    if (command == "joint") return joint_command(cfg);
    if (command == "zero") return zero_command(cfg);
    if (command == "mass") return mass_command(cfg);
    if (command == "sample") return sample_command(cfg);
    throw std::invalid_argument("unknown command '" + std::string(command) + "'");
}

}  // namespace fpt
