#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fpt/closed_form.hpp"
#include "fpt/parallel.hpp"
#include "fpt/quadrature.hpp"

using namespace fpt;

namespace {

double fpt_mass(double x, double m) {
    return quad::adaptive_semi_infinite([&](double u) { return bm_fpt_density(u, x, m); }, 0.0, {1e-12, 1e-11, 20000});
}

}  // namespace

TEST(BmFptDensity, Examples) {
    EXPECT_NEAR(bm_fpt_density(1.0, 1.0, 0.0), std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi), 1e-15);
    EXPECT_NEAR(bm_fpt_density(1.0, 1.0, 0.0), 0.241971, 1e-6);
    EXPECT_NEAR(bm_fpt_density(1.0, 2.0, 0.0), 0.107982, 1e-6);
    EXPECT_EQ(bm_fpt_density(0.0, 1.0, 0.3), 0.0);
    EXPECT_EQ(bm_fpt_density(-1.0, 1.0, 0.3), 0.0);
    EXPECT_EQ(bm_fpt_density(1.0, -1.0, 0.3), 0.0);
}

TEST(BmNeverHit, Examples) {
    EXPECT_EQ(bm_never_hit_prob(1.0, 0.3), 0.0);
    EXPECT_NEAR(bm_never_hit_prob(1.0, -0.5), 1.0 - std::exp(-1.0), 1e-15);
    EXPECT_THROW((void)bm_never_hit_prob(0.0, 1.0), std::domain_error);
    EXPECT_NEAR(fpt_mass(1.0, -0.5), std::exp(-1.0), 1e-6);
}

TEST(BmFptDensity, MassIdentityGrid) {
    for (double x : {0.5, 1.0, 2.0}) {
        for (double m : {-1.0, -0.3, 0.0, 0.7}) {
            EXPECT_NEAR(fpt_mass(x, m), 1.0 - bm_never_hit_prob(x, m), 1e-6) << x << " " << m;
        }
    }
}

TEST(SupEndpointDensity, Examples) {
    EXPECT_NEAR(sup_endpoint_density(1.0, 0.0, 1.0, 0.0), 4.0 / std::sqrt(2.0 * std::numbers::pi) * std::exp(-2.0), 1e-15);
    EXPECT_NEAR(sup_endpoint_density(1.0, 0.0, 1.0, 0.0), 0.215963, 1e-6);
    EXPECT_EQ(sup_endpoint_density(0.5, 1.0, 1.0, 0.0), 0.0);
    EXPECT_THROW((void)sup_endpoint_density(1.0, 0.0, 0.0, 0.0), std::domain_error);
}

TEST(SupEndpointDensity, IntegratesToOne) {
    const double t = 1.0;
    const double m = 0.4;
    auto inner = [&](double a) {
        return quad::adaptive_semi_infinite([&](double b) { return sup_endpoint_density(b, a, t, m); },
                                            std::max(0.0, a), {1e-12, 1e-10, 20000});
    };
    const double pts[] = {-12.0, 0.0, 12.0};
    EXPECT_NEAR(quad::adaptive_pieces(inner, pts, {1e-9, 1e-9, 20000}), 1.0, 1e-6);
}

TEST(SupEndpointDensity, MarginalIsGaussian) {
    for (double t : {0.3, 1.0, 2.5}) {
        for (double m : {-0.8, 0.0, 0.6}) {
            for (double a : {-1.5, -0.2, 0.0, 0.4, 1.3}) {
                const double marginal = quad::adaptive_semi_infinite(
                    [&](double b) { return sup_endpoint_density(b, a, t, m); }, std::max(0.0, a), {1e-13, 1e-11, 20000});
                EXPECT_NEAR(marginal, gaussian_pdf(a, m * t, t), 1e-8) << a << " " << t << " " << m;
            }
        }
    }
}

TEST(NoCrossProb, Examples) {
    EXPECT_NEAR(no_cross_prob_given_endpoint(0.0, 1.0, 1.0), 1.0 - std::exp(-2.0), 1e-15);
    EXPECT_EQ(no_cross_prob_given_endpoint(1.5, 1.0, 1.0), 0.0);
    EXPECT_THROW((void)no_cross_prob_given_endpoint(0.0, 0.0, 1.0), std::domain_error);
    EXPECT_THROW((void)no_cross_prob_given_endpoint(0.0, 1.0, 0.0), std::domain_error);
}

TEST(NoCrossProb, EqualsNormalizedReflectionIntegralForAnyDrift) {
    for (double u : {0.25, 1.0, 3.0}) {
        for (double c : {0.3, 1.0, 2.0}) {
            for (double a : {-1.0, 0.0, 0.2, 0.9 * c}) {
                for (double m : {-1.0, 0.0, 0.5}) {
                    const double lo = std::max(0.0, a);
                    const double integral = quad::adaptive(
                        [&](double b) { return sup_endpoint_density(b, a, u, m); }, lo, c, {1e-14, 1e-12, 20000});
                    EXPECT_NEAR(integral / gaussian_pdf(a, m * u, u), no_cross_prob_given_endpoint(a, c, u), 1e-8);
                }
            }
        }
    }
}

TEST(SquareCompletion, Examples) {
    const auto s = square_completion(1.0, 1.0, 0.0, 2.0);
    EXPECT_NEAR(s(1.0), 2.0, 1e-15);
    EXPECT_NEAR(s.center, 1.0, 1e-15);
    const auto t = square_completion(2.0, 3.0, 1.0, -1.0);
    const double lhs = (0.0 + 1.0) * (0.0 + 1.0) / 2.0 + (0.0 - 1.0) * (0.0 - 1.0) / 3.0;
    EXPECT_NEAR(t(0.0), lhs, 1e-12);
}

TEST(SquareCompletion, RandomSweep) {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> pos(0.1, 10.0);
    std::uniform_real_distribution<double> any(-5.0, 5.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = pos(gen), v = pos(gen), y = any(gen), z = any(gen), a = any(gen);
        const double lhs = (a - z) * (a - z) / u + (a - y) * (a - y) / v;
        worst = std::max(worst, std::abs(lhs - square_completion(u, v, y, z)(a)));
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(GaussianSmoothed, ReducesToKernelWhenSigmaIsZero) {
    for (double mu : {0.3, 1.0, 2.0}) {
        EXPECT_NEAR(gaussian_smoothed_fpt_density(0.7, mu, 0.0, 0.2), bm_fpt_density(0.7, mu, 0.2), 1e-14);
    }
}

TEST(GaussianSmoothed, MatchesMonteCarlo) {
    struct probe {
        double u, mu, sigma, m;
    };
    for (const auto& p : {probe{1.0, 1.0, 1.0, 0.0}, probe{0.5, 2.0, 0.5, -0.3}}) {
        rng_stream rng(99);
        moments acc;
        for (int i = 0; i < 1'000'000; ++i) acc.add(bm_fpt_density(p.u, p.mu + p.sigma * rng.normal(), p.m));
        EXPECT_NEAR(gaussian_smoothed_fpt_density(p.u, p.mu, p.sigma, p.m), acc.mean(), 3.0 * acc.std_error());
    }
}

TEST(TruncatedSmoothed, AgreesWithUntruncatedAtZeroAndWithQuadrature) {
    for (double m : {-0.4, 0.0, 0.9}) {
        EXPECT_NEAR(truncated_smoothed_fpt_density(0.6, 0.8, 0.7, 0.0, m).value(),
                    gaussian_smoothed_fpt_density(0.6, 0.8, 0.7, m), 1e-14);
        for (double lo : {0.0, 0.35, 1.4}) {
            const double direct = quad::adaptive_semi_infinite(
                [&](double c) { return bm_fpt_density(0.6, c, m) * gaussian_pdf(c, 0.8, 0.49); }, lo,
                {1e-14, 1e-11, 20000});
            EXPECT_NEAR(truncated_smoothed_fpt_density(0.6, 0.8, 0.7, lo, m).value(), direct, 1e-10);
        }
    }
}

TEST(GammaSeries, BetaZeroIsProbabilityOfTwoJumps) {
    const auto r = gamma_tail_series(1.0, 0.5, 0.0);
    EXPECT_NEAR(r.value, 1.0 - std::exp(-0.5) * 1.5, 1e-14);
    EXPECT_NEAR(r.value, 0.090204, 1e-6);
}

TEST(GammaSeries, MatchesMonteCarlo) {
    rng_stream rng(5);
    moments acc;
    const double lambda = 1.0, t = 0.5, beta = -0.5;
    for (int i = 0; i < 1'000'000; ++i) {
        double s = 0.0;
        double last = 0.0;
        int count = 0;
        while ((s += rng.exponential(lambda)) <= t) {
            last = s;
            ++count;
        }
        acc.add(count >= 2 ? std::pow(t - last, beta) : 0.0);
    }
    EXPECT_NEAR(gamma_tail_series(lambda, t, beta).value, acc.mean(), 3.0 * acc.std_error());
}

TEST(GammaSeries, BoundHoldsOnSweep) {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> lam(0.5, 3.0), tt(1e-3, 1.0), be(-0.9, 2.0);
    for (int i = 0; i < 100; ++i) {
        const auto r = gamma_tail_series(lam(gen), tt(gen), be(gen));
        EXPECT_LE(r.value, r.bound);
        EXPECT_GE(r.value, 0.0);
    }
}

TEST(GammaSeries, RejectsOutOfRangeArguments) {
    EXPECT_THROW((void)gamma_tail_series(1.0, 1.5, 0.0), std::domain_error);
    EXPECT_THROW((void)gamma_tail_series(1.0, 0.5, -1.0), std::domain_error);
    EXPECT_THROW((void)gamma_tail_series(0.0, 0.5, 0.0), std::domain_error);
}

TEST(DensityAtZero, Examples) {
    EXPECT_NEAR(density_at_zero(jump_law::exponential(1.0), 2.0, 1.0), 2.0 * std::exp(-1.0), 1e-15);
    for (double lambda : {0.5, 1.0, 3.0}) {
        EXPECT_NEAR(density_at_zero(jump_law::point_mass(1.3), lambda, 1.3), 0.75 * lambda, 1e-15);
    }
    const law_term terms[] = {atom{1.0, 0.5}, atom{2.0, 0.5}};
    EXPECT_NEAR(density_at_zero(jump_law::mixture(terms), 1.0, 1.0), 0.875, 1e-15);
}

TEST(ZeroTimeFunctional, ConstantFunctionsReduceToDensityAtZero) {
    auto one = [](double) { return 1.0; };
    const auto e = zero_time_functional(jump_law::exponential(1.0), 1.0, 1.0, one, one);
    EXPECT_NEAR(e.total(), std::exp(-1.0), 1e-9);
    const auto p = zero_time_functional(jump_law::point_mass(1.0), 2.0, 1.0, one, one);
    EXPECT_NEAR(p.total(), 1.5, 1e-15);
    const law_term terms[] = {atom{1.0, 0.5}, continuous_component{0.5, exponential_density{1.0}}};
    const auto law = jump_law::mixture(terms);
    EXPECT_NEAR(zero_time_functional(law, 1.0, 1.0, one, one).total(), density_at_zero(law, 1.0, 1.0), 1e-9);
}

TEST(ZeroTimeFunctional, ThreeTermsForAtomicLaw) {
    const law_term terms[] = {atom{1.0, 0.5}, continuous_component{0.5, exponential_density{1.0}}};
    const auto law = jump_law::mixture(terms);
    auto phi = [](double k) { return std::exp(-k); };
    auto psi = [](double l) { return 1.0 / (1.0 + l); };
    const auto z = zero_time_functional(law, 1.0, 1.0, phi, psi);
    EXPECT_NEAR(z.atom_term, 0.125, 1e-15);
    EXPECT_NEAR(z.boundary_atom_term, 0.125, 1e-15);
    // 0.5 * psi(1) * 0.5 * int_1^inf e^{-(y-1)} e^{-y} dy = 0.125 e^{-1}
    EXPECT_NEAR(z.jump_over_term, 0.125 * std::exp(-1.0), 1e-9);
}
