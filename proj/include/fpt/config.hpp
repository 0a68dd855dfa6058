#pragma once

// Line-based run configuration:
//
//   [model]
//   m = 0
//   lambda = 1
//   jump = mix 0.5*atom@1 + 0.5*exp rate=1
//   x = 1
//   [run]
//   t = 0.5, 1, 2
//   n = 100000
//
// '#' starts a comment. Unknown sections and keys are syntax errors.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fpt/errors.hpp"
#include "fpt/jump_law.hpp"
#include "fpt/path_sim.hpp"

namespace fpt {

/// Named test functions for the overshoot and undershoot slots.
enum class test_function { one, exp, reciprocal };

inline double apply(test_function f, double v) {
    switch (f) {
        case test_function::exp: return std::exp(-v);
        case test_function::reciprocal: return 1.0 / (1.0 + v);
        case test_function::one: break;
    }
    return 1.0;
}

inline const char* to_string(test_function f) {
    switch (f) {
        case test_function::exp: return "exp";
        case test_function::reciprocal: return "reciprocal";
        case test_function::one: break;
    }
    return "one";
}

/// skeleton: conditional estimator; direct: exact hitting times counted in
/// (t, t+h]; grid: the same count on the fixed-step oracle.
enum class density_method { skeleton, direct, grid };

inline const char* to_string(density_method m) {
    switch (m) {
        case density_method::direct: return "direct";
        case density_method::grid: return "grid";
        case density_method::skeleton: break;
    }
    return "skeleton";
}

struct run_config {
    model_params model;
    std::string jump_text;
    std::vector<double> times{1.0};
    std::vector<double> undershoots{0.1, 0.5, 1.0};
    std::vector<double> horizons{10.0};
    std::size_t paths = 100'000;
    int depth = 20;
    double step = 1.0 / 4096.0;
    double h = 0.05;
    density_method method = density_method::skeleton;
    test_function phi = test_function::one;
    test_function psi = test_function::one;
    std::uint64_t seed = 42;
    std::size_t shards = 8;
    std::size_t threads = 0;
    double scale = 1.0;  // budget multiplier for validate
    std::string out;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    while (true) {
        const auto at = s.find(sep);
        parts.push_back(trim(s.substr(0, at)));
        if (at == std::string_view::npos) break;
        s.remove_prefix(at + 1);
    }
    return parts;
}

inline std::vector<std::string_view> split(std::string_view s, std::string_view sep) {
    std::vector<std::string_view> parts;
    while (true) {
        const auto at = s.find(sep);
        parts.push_back(trim(s.substr(0, at)));
        if (at == std::string_view::npos) break;
        s.remove_prefix(at + sep.size());
    }
    return parts;
}

inline std::optional<double> to_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

template <class Int>
std::optional<Int> to_integer(std::string_view s) {
    s = trim(s);
    Int v{};
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) return std::nullopt;
    return v;
}

class line_parser {
public:
    explicit line_parser(std::size_t line) : line_(line) {}

    [[noreturn]] void fail(const std::string& what) const { throw config_syntax_error(line_, what); }

    double number(std::string_view s, std::string_view key) const {
        const auto v = to_double(s);
        if (!v) fail("'" + std::string(key) + "' expects a number, got '" + std::string(s) + "'");
        return *v;
    }

    template <class Int>
    Int integer(std::string_view s, std::string_view key) const {
        const auto v = to_integer<Int>(s);
        if (!v) fail("'" + std::string(key) + "' expects a nonnegative integer, got '" + std::string(s) + "'");
        return *v;
    }

    std::vector<double> numbers(std::string_view s, std::string_view key) const {
        std::vector<double> out;
        for (auto part : split(s, ',')) out.push_back(number(part, key));
        return out;
    }

    /// name k1=v1 k2=v2 with exactly the listed keys.
    std::vector<double> family_args(std::string_view text, std::initializer_list<std::string_view> keys) const {
        std::vector<std::string_view> tokens;
        for (auto tok : split(text, ' ')) {
            if (!tok.empty()) tokens.push_back(tok);
        }
        if (tokens.size() != keys.size() + 1) fail("jump term '" + std::string(text) + "' has the wrong arguments");
        std::vector<double> values;
        std::size_t i = 1;
        for (auto key : keys) {
            const auto eq = tokens[i].find('=');
            if (eq == std::string_view::npos || tokens[i].substr(0, eq) != key) {
                fail("jump term '" + std::string(text) + "' expects " + std::string(key) + "=<value>");
            }
            values.push_back(number(tokens[i].substr(eq + 1), key));
            ++i;
        }
        return values;
    }

    law_term term(std::string_view text, double weight) const {
        text = trim(text);
        if (text.starts_with("atom@")) return atom{number(text.substr(5), "atom"), weight};
        const auto name = text.substr(0, text.find(' '));
        if (name == "exp") {
            const auto v = family_args(text, {"rate"});
            if (!(v[0] > 0.0)) throw config_semantic_error("jump", "exp rate must be > 0");
            return continuous_component{weight, exponential_density{v[0]}};
        }
        if (name == "gauss") {
            const auto v = family_args(text, {"mu", "sigma"});
            if (!(v[1] > 0.0)) throw config_semantic_error("jump", "gauss sigma must be > 0");
            return continuous_component{weight, gaussian_density{v[0], v[1]}};
        }
        if (name == "kou") {
            const auto v = family_args(text, {"p", "eta1", "eta2"});
            if (!(v[0] >= 0.0 && v[0] <= 1.0)) throw config_semantic_error("jump", "kou p must lie in [0, 1]");
            if (!(v[1] > 0.0 && v[2] > 0.0)) throw config_semantic_error("jump", "kou rates must be > 0");
            return continuous_component{weight, kou_density{v[0], v[1], v[2]}};
        }
        fail("unknown jump family '" + std::string(name) + "'");
    }

    jump_law law(std::string_view text) const {
        text = trim(text);
        std::vector<law_term> terms;
        if (text.starts_with("mix ")) {
            for (auto part : split(text.substr(4), " + ")) {
                const auto star = part.find('*');
                if (star == std::string_view::npos) fail("mix term '" + std::string(part) + "' needs <weight>*<term>");
                const double w = number(part.substr(0, star), "weight");
                if (!(w > 0.0)) throw config_semantic_error("jump", "mix weights must be > 0");
                terms.push_back(term(part.substr(star + 1), w));
            }
        } else {
            terms.push_back(term(text, 1.0));
        }
        try {
            return jump_law::mixture(terms);
        } catch (const std::invalid_argument& e) {
            throw config_semantic_error("jump", e.what());
        }
    }

    test_function function(std::string_view s, std::string_view key) const {
        if (s == "one") return test_function::one;
        if (s == "exp") return test_function::exp;
        if (s == "reciprocal") return test_function::reciprocal;
        fail("'" + std::string(key) + "' must be one, exp or reciprocal");
    }

    density_method method(std::string_view s) const {
        if (s == "skeleton") return density_method::skeleton;
        if (s == "direct") return density_method::direct;
        if (s == "grid") return density_method::grid;
        fail("'method' must be skeleton, direct or grid");
    }

private:
    std::size_t line_;
};

inline void require_increasing(const std::vector<double>& v, const char* field, bool allow_zero) {
    if (v.empty()) throw config_semantic_error(field, "list must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (allow_zero ? !(v[i] >= 0.0) : !(v[i] > 0.0)) {
            throw config_semantic_error(field, allow_zero ? "values must be >= 0" : "values must be > 0");
        }
        if (i > 0 && !(v[i] > v[i - 1])) throw config_semantic_error(field, "values must be strictly increasing");
    }
}

}  // namespace detail

/// Parses configuration text. Throws config_syntax_error for malformed
/// lines and config_semantic_error for out-of-range values.
inline run_config parse_config(std::string_view text) {
    run_config cfg;
    std::string section;
    std::set<std::string> seen;
    bool have_x = false;
    bool have_jump = false;

    std::size_t line_no = 0;
    for (auto raw : detail::split(text, '\n')) {
        ++line_no;
        const detail::line_parser p(line_no);
        auto line = detail::trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') p.fail("unterminated section header");
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (section != "model" && section != "run") p.fail("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) p.fail("expected 'key = value'");
        const std::string key(detail::trim(line.substr(0, eq)));
        const auto value = detail::trim(line.substr(eq + 1));
        if (section.empty()) p.fail("'" + key + "' appears before any section");
        if (value.empty()) p.fail("'" + key + "' has no value");
        if (!seen.insert(section + "." + key).second) p.fail("duplicate key '" + key + "'");

        if (section == "model") {
            if (key == "m") {
                cfg.model.drift = p.number(value, key);
            } else if (key == "lambda") {
                cfg.model.intensity = p.number(value, key);
            } else if (key == "x") {
                cfg.model.barrier = p.number(value, key);
                have_x = true;
            } else if (key == "jump") {
                cfg.model.law = p.law(value);
                cfg.jump_text = std::string(value);
                have_jump = true;
            } else {
                p.fail("unknown key '" + key + "' in [model]");
            }
            continue;
        }
        if (key == "seed") {
            cfg.seed = p.integer<std::uint64_t>(value, key);
        } else if (key == "shards") {
            cfg.shards = p.integer<std::size_t>(value, key);
        } else if (key == "threads") {
            cfg.threads = p.integer<std::size_t>(value, key);
        } else if (key == "n") {
            cfg.paths = p.integer<std::size_t>(value, key);
        } else if (key == "depth") {
            cfg.depth = p.integer<int>(value, key);
        } else if (key == "t") {
            cfg.times = p.numbers(value, key);
        } else if (key == "l") {
            cfg.undershoots = p.numbers(value, key);
        } else if (key == "horizon") {
            cfg.horizons = p.numbers(value, key);
        } else if (key == "step") {
            cfg.step = p.number(value, key);
        } else if (key == "h") {
            cfg.h = p.number(value, key);
        } else if (key == "method") {
            cfg.method = p.method(value);
        } else if (key == "phi") {
            cfg.phi = p.function(value, key);
        } else if (key == "psi") {
            cfg.psi = p.function(value, key);
        } else if (key == "scale") {
            cfg.scale = p.number(value, key);
        } else if (key == "out") {
            cfg.out = std::string(value);
        } else {
            p.fail("unknown key '" + key + "' in [run]");
        }
    }

    if (!have_x) throw config_semantic_error("x", "barrier level is required");
    if (!(cfg.model.barrier > 0.0)) throw config_semantic_error("x", "barrier level must be > 0");
    if (!(cfg.model.intensity >= 0.0)) throw config_semantic_error("lambda", "intensity must be >= 0");
    if (cfg.model.intensity > 0.0 && !have_jump) throw config_semantic_error("jump", "required when lambda > 0");
    detail::require_increasing(cfg.times, "t", false);
    detail::require_increasing(cfg.undershoots, "l", true);
    detail::require_increasing(cfg.horizons, "horizon", false);
    if (cfg.paths == 0) throw config_semantic_error("n", "path count must be > 0");
    if (cfg.shards == 0) throw config_semantic_error("shards", "shard count must be > 0");
    if (cfg.depth < 0 || cfg.depth > 60) throw config_semantic_error("depth", "bisection depth must lie in [0, 60]");
    if (!(cfg.step > 0.0)) throw config_semantic_error("step", "grid step must be > 0");
    if (!(cfg.h > 0.0)) throw config_semantic_error("h", "window must be > 0");
    if (!(cfg.scale > 0.0)) throw config_semantic_error("scale", "budget multiplier must be > 0");
    return cfg;
}

}  // namespace fpt
