#pragma once

// Jump-size distribution F_Y: a finite list of atoms plus an optional
// absolutely continuous part. Atoms are kept exact so that jump masses
// F(y) - F(y-) are read off the list, never differentiated numerically.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fpt/errors.hpp"
#include "fpt/quadrature.hpp"
#include "fpt/random.hpp"

namespace fpt {

struct atom {
    double location;
    double mass;
};

// Continuous families. Support bounds are truncation points beyond which
// the tail mass is below 1e-12.

struct exponential_density {
    double rate;

    double pdf(double y) const { return y < 0.0 ? 0.0 : rate * std::exp(-rate * y); }
    double cdf(double y) const { return y <= 0.0 ? 0.0 : -std::expm1(-rate * y); }
    double survival(double y) const { return y <= 0.0 ? 1.0 : std::exp(-rate * y); }
    double sample(rng_stream& rng) const { return rng.exponential(rate); }
    double mean() const { return 1.0 / rate; }
    double support_lo() const { return 0.0; }
    double support_hi() const { return 28.0 / rate; }
    std::vector<double> kinks() const { return {0.0}; }
};

struct gaussian_density {
    double mu;
    double sigma;

    double pdf(double y) const {
        const double z = (y - mu) / sigma;
        return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    }
    double cdf(double y) const { return 0.5 * std::erfc(-(y - mu) / (sigma * std::numbers::sqrt2)); }
    double survival(double y) const { return 0.5 * std::erfc((y - mu) / (sigma * std::numbers::sqrt2)); }
    double sample(rng_stream& rng) const { return mu + sigma * rng.normal(); }
    double mean() const { return mu; }
    double support_lo() const { return mu - 7.5 * sigma; }
    double support_hi() const { return mu + 7.5 * sigma; }
    std::vector<double> kinks() const { return {}; }
};

/// Kou double exponential: up with probability p at rate eta_up, down at rate eta_down.
struct kou_density {
    double p;
    double eta_up;
    double eta_down;

    double pdf(double y) const {
        return y >= 0.0 ? p * eta_up * std::exp(-eta_up * y)
                        : (1.0 - p) * eta_down * std::exp(eta_down * y);
    }
    double cdf(double y) const {
        return y >= 0.0 ? 1.0 - p * std::exp(-eta_up * y) : (1.0 - p) * std::exp(eta_down * y);
    }
    double survival(double y) const {
        return y >= 0.0 ? p * std::exp(-eta_up * y) : 1.0 - (1.0 - p) * std::exp(eta_down * y);
    }
    double sample(rng_stream& rng) const {
        return rng.uniform() < p ? rng.exponential(eta_up) : -rng.exponential(eta_down);
    }
    double mean() const { return p / eta_up - (1.0 - p) / eta_down; }
    double support_lo() const { return -28.0 / eta_down; }
    double support_hi() const { return 28.0 / eta_up; }
    std::vector<double> kinks() const { return {0.0}; }
};

using continuous_family = std::variant<exponential_density, gaussian_density, kou_density>;

struct continuous_component {
    double weight;
    continuous_family family;
};

/// A mixture term used when building laws: either an atom or a weighted
/// continuous family.
using law_term = std::variant<atom, continuous_component>;

class jump_law {
public:
    static constexpr double mass_tolerance = 1e-12;
    static constexpr double density_tolerance = 1e-9;

    static jump_law exponential(double rate) {
        if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be positive");
        return jump_law({}, {{1.0, exponential_density{rate}}});
    }
    static jump_law gaussian(double mu, double sigma) {
        if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be positive");
        return jump_law({}, {{1.0, gaussian_density{mu, sigma}}});
    }
    static jump_law kou(double p, double eta_up, double eta_down) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("kou p must lie in [0, 1]");
        if (!(eta_up > 0.0 && eta_down > 0.0)) throw std::invalid_argument("kou rates must be positive");
        return jump_law({}, {{1.0, kou_density{p, eta_up, eta_down}}});
    }
    static jump_law point_mass(double y) { return jump_law({{y, 1.0}}, {}); }

    /// General mixture. Atoms at equal locations are merged.
    static jump_law mixture(std::span<const law_term> terms) {
        std::vector<atom> atoms;
        std::vector<continuous_component> parts;
        for (const auto& term : terms) {
            if (const auto* a = std::get_if<atom>(&term)) {
                atoms.push_back(*a);
            } else {
                parts.push_back(std::get<continuous_component>(term));
            }
        }
        return jump_law(std::move(atoms), std::move(parts));
    }

    jump_law(std::vector<atom> atoms, std::vector<continuous_component> parts)
        : atoms_(std::move(atoms)), parts_(std::move(parts)) {
        std::sort(atoms_.begin(), atoms_.end(),
                  [](const atom& a, const atom& b) { return a.location < b.location; });
        std::vector<atom> merged;
        for (const auto& a : atoms_) {
            if (!(a.mass > 0.0) || !std::isfinite(a.location)) {
                throw std::invalid_argument("atom masses must be positive and locations finite");
            }
            if (!merged.empty() && merged.back().location == a.location) {
                merged.back().mass += a.mass;
            } else {
                merged.push_back(a);
            }
        }
        atoms_ = std::move(merged);
        parts_.erase(std::remove_if(parts_.begin(), parts_.end(),
                                    [](const continuous_component& c) { return c.weight == 0.0; }),
                     parts_.end());

        double total = 0.0;
        for (const auto& a : atoms_) total += a.mass;
        for (const auto& c : parts_) {
            if (!(c.weight > 0.0)) throw std::invalid_argument("component weights must be positive");
            total += c.weight;
        }
        if (std::abs(total - 1.0) > mass_tolerance) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "jump law weights sum to " << total << ", expected 1";
            throw std::invalid_argument(msg.str());
        }

        // Cumulative selection thresholds: atoms first, then continuous parts.
        double acc = 0.0;
        for (const auto& a : atoms_) thresholds_.push_back(acc += a.mass);
        for (const auto& c : parts_) thresholds_.push_back(acc += c.weight);

        for (const auto& c : parts_) check_normalized(c.family);
    }

    std::span<const atom> atoms() const noexcept { return atoms_; }
    std::span<const continuous_component> continuous_parts() const noexcept { return parts_; }

    double continuous_weight() const {
        double w = 0.0;
        for (const auto& c : parts_) w += c.weight;
        return w;
    }

    /// Analytic for every built-in family.
    double mean() const {
        double m = 0.0;
        for (const auto& a : atoms_) m += a.mass * a.location;
        for (const auto& c : parts_) {
            m += c.weight * std::visit([](const auto& f) { return f.mean(); }, c.family);
        }
        return m;
    }
    bool mean_is_analytic() const noexcept { return true; }

    /// P(Y <= y).
    double cdf(double y) const {
        double v = 0.0;
        for (const auto& a : atoms_) {
            if (a.location > y) break;
            v += a.mass;
        }
        return v + continuous_cdf(y);
    }

    /// P(Y < y), the left limit F(y-).
    double cdf_left(double y) const {
        double v = 0.0;
        for (const auto& a : atoms_) {
            if (a.location >= y) break;
            v += a.mass;
        }
        return v + continuous_cdf(y);
    }

    /// P(Y > y), computed without cancellation against 1.
    double survival(double y) const {
        double v = 0.0;
        for (const auto& a : atoms_) {
            if (a.location > y) v += a.mass;
        }
        for (const auto& c : parts_) {
            v += c.weight * std::visit([y](const auto& f) { return f.survival(y); }, c.family);
        }
        return v;
    }

    /// F(y) - F(y-): exact atom mass at y, zero off the atoms.
    double jump_mass_at(double y) const {
        for (const auto& a : atoms_) {
            if (a.location == y) return a.mass;
        }
        return 0.0;
    }

    double sample(rng_stream& rng) const {
        if (thresholds_.size() == 1) return sample_component(0, rng);
        const double u = rng.uniform();
        const auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), u);
        const auto idx = std::min<std::size_t>(it - thresholds_.begin(), thresholds_.size() - 1);
        return sample_component(idx, rng);
    }

    /// Points where the law is not smooth: atom locations, density kinks and
    /// support truncation points. Sorted, unique.
    std::vector<double> breakpoints() const {
        std::vector<double> pts;
        for (const auto& a : atoms_) pts.push_back(a.location);
        for (const auto& c : parts_) {
            std::visit(
                [&](const auto& f) {
                    pts.push_back(f.support_lo());
                    pts.push_back(f.support_hi());
                    for (double k : f.kinks()) pts.push_back(k);
                },
                c.family);
        }
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        return pts;
    }

    /// Largest point carrying mass, up to the 1e-12 tail truncation.
    double support_upper() const {
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& a : atoms_) hi = std::max(hi, a.location);
        for (const auto& c : parts_) {
            hi = std::max(hi, std::visit([](const auto& f) { return f.support_hi(); }, c.family));
        }
        return hi;
    }

    /// E[phi(Y - l) 1{Y >= l}]: the integral of phi over k >= 0 against the
    /// image of F_Y under y -> y - l. Atoms are summed exactly; the density
    /// part goes through adaptive quadrature with tolerance 1e-9.
    template <class Phi>
    double integrate_image(double l, const Phi& phi) const {
        if (l < 0.0) throw std::domain_error("integrate_image requires l >= 0");
        double v = 0.0;
        for (const auto& a : atoms_) {
            if (a.location >= l) v += a.mass * phi(a.location - l);
        }
        for (const auto& c : parts_) {
            v += c.weight * std::visit(
                                [&](const auto& f) {
                                    const double lo = std::max(l, f.support_lo());
                                    const double hi = f.support_hi();
                                    if (!(hi > lo)) return 0.0;
                                    std::vector<double> pts{lo};
                                    for (double k : f.kinks()) {
                                        if (k > lo && k < hi) pts.push_back(k);
                                    }
                                    pts.push_back(hi);
                                    auto integrand = [&](double y) { return phi(y - l) * f.pdf(y); };
                                    return quad::adaptive_pieces(integrand, pts, {1e-11, 1e-9, 20000});
                                },
                                c.family);
        }
        return v;
    }

private:
    double continuous_cdf(double y) const {
        double v = 0.0;
        for (const auto& c : parts_) {
            v += c.weight * std::visit([y](const auto& f) { return f.cdf(y); }, c.family);
        }
        return v;
    }

    double sample_component(std::size_t idx, rng_stream& rng) const {
        if (idx < atoms_.size()) return atoms_[idx].location;
        return std::visit([&](const auto& f) { return f.sample(rng); }, parts_[idx - atoms_.size()].family);
    }

    static void check_normalized(const continuous_family& family) {
        std::visit(
            [](const auto& f) {
                std::vector<double> pts{f.support_lo()};
                for (double k : f.kinks()) {
                    if (k > f.support_lo() && k < f.support_hi()) pts.push_back(k);
                }
                pts.push_back(f.support_hi());
                auto pdf = [&](double y) { return f.pdf(y); };
                const double total = quad::adaptive_pieces(pdf, pts, {1e-12, 1e-11, 20000});
                if (std::abs(total - 1.0) > density_tolerance) {
                    std::ostringstream msg;
                    msg.precision(17);
                    msg << "density part integrates to " << total;
                    throw numerical_failure(msg.str());
                }
            },
            family);
    }

    std::vector<atom> atoms_;
    std::vector<continuous_component> parts_;
    std::vector<double> thresholds_;
};

/// Tabulated l -> integrate_image(law, l, phi) on [0, support_upper], stored
/// as values at Chebyshev nodes on short panels and read back by barycentric
/// interpolation. Panels never straddle a law breakpoint, so the jumps that
/// atoms induce in l are reproduced exactly.
class image_table {
public:
    static constexpr std::size_t nodes_per_panel = 16;

    template <class Phi>
    image_table(const jump_law& law, const Phi& phi, double panel_width = 0.25) {
        upper_ = std::max(0.0, law.support_upper());
        breaks_.push_back(0.0);
        for (double b : law.breakpoints()) {
            if (b > 0.0 && b < upper_) breaks_.push_back(b);
        }
        breaks_.push_back(upper_);
        if (upper_ == 0.0) return;

        std::array<double, nodes_per_panel> cos_nodes{};
        for (std::size_t j = 0; j < nodes_per_panel; ++j) {
            const double theta = (2.0 * j + 1.0) * std::numbers::pi / (2.0 * nodes_per_panel);
            cos_nodes[j] = std::cos(theta);
            bary_[j] = ((j % 2 == 0) ? 1.0 : -1.0) * std::sin(theta);
        }
        for (std::size_t s = 1; s < breaks_.size(); ++s) {
            const double a = breaks_[s - 1];
            const double b = breaks_[s];
            const auto count = static_cast<std::size_t>(std::ceil((b - a) / panel_width));
            const double width = (b - a) / static_cast<double>(count);
            for (std::size_t k = 0; k < count; ++k) {
                panel p;
                p.lo = a + width * static_cast<double>(k);
                p.hi = (k + 1 == count) ? b : a + width * static_cast<double>(k + 1);
                const double mid = 0.5 * (p.lo + p.hi);
                const double half = 0.5 * (p.hi - p.lo);
                for (std::size_t j = 0; j < nodes_per_panel; ++j) {
                    p.nodes[j] = mid + half * cos_nodes[j];
                    p.values[j] = law.integrate_image(p.nodes[j], phi);
                }
                panels_.push_back(p);
                los_.push_back(p.lo);
            }
        }
    }

    double operator()(double l) const {
        if (l < 0.0 || l >= upper_ || panels_.empty()) return 0.0;
        const auto it = std::upper_bound(los_.begin(), los_.end(), l);
        const panel& p = panels_[static_cast<std::size_t>(it - los_.begin()) - 1];
        double num = 0.0;
        double den = 0.0;
        for (std::size_t j = 0; j < nodes_per_panel; ++j) {
            const double diff = l - p.nodes[j];
            if (diff == 0.0) return p.values[j];
            const double w = bary_[j] / diff;
            num += w * p.values[j];
            den += w;
        }
        return num / den;
    }

    /// Panel-segment boundaries (0, interior law breakpoints, upper).
    std::span<const double> breakpoints() const noexcept { return breaks_; }
    double upper() const noexcept { return upper_; }

private:
    struct panel {
        double lo = 0.0;
        double hi = 0.0;
        std::array<double, nodes_per_panel> nodes{};
        std::array<double, nodes_per_panel> values{};
    };

    double upper_ = 0.0;
    std::vector<double> breaks_;
    std::vector<panel> panels_;
    std::vector<double> los_;
    std::array<double, nodes_per_panel> bary_{};
};

}  // namespace fpt
