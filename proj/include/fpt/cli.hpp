#pragma once

// fpt <command> --config <path> [--out <path>] [--shards N]
//
// Exit codes: 0 success, 1 usage, 2 config value, 3 numerical failure,
// 4 validation failure, 5 config syntax.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpt/commands.hpp"
#include "fpt/config.hpp"
#include "fpt/csv.hpp"
#include "fpt/errors.hpp"
#include "fpt/validation.hpp"

namespace fpt {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int config = 2;
inline constexpr int numerical = 3;
inline constexpr int validation = 4;
inline constexpr int syntax = 5;
}  // namespace exit_code

inline constexpr const char* seed_variable = "FPT_SEED";

struct command_output {
    int code = exit_code::ok;
    std::string csv;
};

/// check_name, value, reference, tolerance, pass
inline csv_table validation_table(const std::vector<criterion_result>& results) {
    csv_table out({"check_name", "value", "reference", "tolerance", "pass"});
    for (const auto& c : results) {
        for (const auto& r : c.rows) {
            out.add({c.name + "." + r.name, r.value, r.reference, r.tolerance, std::string(r.pass() ? "true" : "false")});
        }
    }
    return out;
}

inline command_output execute(const std::string& command, const run_config& cfg) {
    if (command == "validate") {
        budget b;
        b.scale = cfg.scale;
        b.seed = cfg.seed;
        b.shards = cfg.shards;
        b.threads = cfg.threads;
        const auto results = run_acceptance(b);
        const bool all = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass(); });
        return {all ? exit_code::ok : exit_code::validation, validation_table(results).str()};
    }
    return {exit_code::ok, run_command(command, cfg).str()};
}

/// Applies FPT_SEED when set. Throws config_semantic_error on a bad value.
inline void apply_seed_override(run_config& cfg, const char* value) {
    if (value == nullptr) return;
    const auto seed = detail::to_integer<std::uint64_t>(value);
    if (!seed) throw config_semantic_error(seed_variable, "expects an unsigned 64-bit integer");
    cfg.seed = *seed;
}

inline int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"First-passage time, overshoot and undershoot of jump diffusions", "fpt"};
    std::string command;
    std::string config_path;
    std::string out_path;
    std::optional<std::size_t> shards;
    app.add_option("command", command, "density | joint | zero | mass | validate | sample")
        ->required()
        ->check(CLI::IsMember({"density", "joint", "zero", "mass", "validate", "sample"}));
    app.add_option("--config", config_path, "run configuration file")->required();
    app.add_option("--out", out_path, "write CSV here instead of stdout");
    app.add_option("--shards", shards, "number of shards (overrides the config)")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_code::ok;
    } catch (const CLI::ParseError& e) {
        err << "fpt: " << e.what() << "\n" << app.help();
        return exit_code::usage;
    }

    std::ifstream in(config_path);
    if (!in) {
        err << "fpt: cannot read config '" << config_path << "'\n";
        return exit_code::usage;
    }
    std::stringstream text;
    text << in.rdbuf();

    run_config cfg;
    try {
        cfg = parse_config(text.str());
        apply_seed_override(cfg, std::getenv(seed_variable));
    } catch (const config_syntax_error& e) {
        err << "fpt: " << config_path << ": " << e.what() << "\n";
        return exit_code::syntax;
    } catch (const config_semantic_error& e) {
        err << "fpt: " << config_path << ": " << e.what() << "\n";
        return exit_code::config;
    }
    if (shards) cfg.shards = *shards;
    if (!out_path.empty()) cfg.out = out_path;

    command_output result;
    try {
        result = execute(command, cfg);
    } catch (const numerical_failure& e) {
        err << "fpt: numerical failure: " << e.what() << "\n";
        return exit_code::numerical;
    } catch (const std::exception& e) {
        err << "fpt: " << e.what() << "\n";
        return exit_code::numerical;
    }

    if (cfg.out.empty()) {
        out << result.csv;
    } else {
        std::ofstream file(cfg.out, std::ios::binary);
        file << result.csv;
        if (!file) {
            err << "fpt: cannot write '" << cfg.out << "'\n";
            return exit_code::usage;
        }
    }
    return result.code;
}

}  // namespace fpt
