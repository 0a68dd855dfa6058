#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fpt/jump_law.hpp"
#include "fpt/oracle.hpp"

using fpt::atom;
using fpt::continuous_component;
using fpt::jump_law;
using fpt::law_term;

namespace {

jump_law half_atom_half_exp() {
    const law_term terms[] = {atom{1.0, 0.5}, continuous_component{0.5, fpt::exponential_density{1.0}}};
    return jump_law::mixture(terms);
}

std::vector<jump_law> built_in_laws() {
    const law_term two_atoms[] = {atom{0.5, 0.4}, atom{1.2, 0.6}};
    return {jump_law::exponential(1.0),     jump_law::exponential(2.5),   jump_law::gaussian(0.0, 1.0),
            jump_law::gaussian(-0.3, 0.7),  jump_law::kou(0.6, 3.0, 2.0), jump_law::point_mass(1.0),
            jump_law::mixture(two_atoms),   half_atom_half_exp()};
}

}  // namespace

TEST(JumpLawCdf, Examples) {
    EXPECT_NEAR(jump_law::exponential(1.0).cdf(1.0), 1.0 - std::exp(-1.0), 1e-15);
    const auto pm = jump_law::point_mass(1.0);
    EXPECT_EQ(pm.cdf(1.0), 1.0);
    EXPECT_EQ(pm.cdf(0.999), 0.0);
    EXPECT_NEAR(half_atom_half_exp().cdf(1.0), 0.5 + 0.5 * (1.0 - std::exp(-1.0)), 1e-15);
}

TEST(JumpLawCdfLeft, Examples) {
    EXPECT_EQ(jump_law::point_mass(1.0).cdf_left(1.0), 0.0);
    const auto e = jump_law::exponential(1.0);
    EXPECT_EQ(e.cdf_left(1.0), e.cdf(1.0));
    EXPECT_NEAR(half_atom_half_exp().cdf_left(1.0), 0.5 * (1.0 - std::exp(-1.0)), 1e-15);
}

TEST(JumpLawCdf, OrderedMonotoneAndAtomGaps) {
    for (const auto& law : built_in_laws()) {
        double prev = 0.0;
        double prev_left = 0.0;
        for (int i = 0; i <= 4000; ++i) {
            const double y = -10.0 + 20.0 * i / 4000.0;
            const double f = law.cdf(y);
            const double fl = law.cdf_left(y);
            EXPECT_LE(0.0, fl);
            EXPECT_LE(fl, f);
            EXPECT_LE(f, 1.0 + 1e-15);
            EXPECT_GE(f, prev - 1e-15);
            EXPECT_GE(fl, prev_left - 1e-15);
            prev = f;
            prev_left = fl;
        }
        for (const auto& a : law.atoms()) {
            EXPECT_NEAR(law.cdf(a.location) - law.cdf_left(a.location), a.mass, 1e-15);
            EXPECT_EQ(law.jump_mass_at(a.location), a.mass);
        }
        for (double y : {-0.77, 0.13, 0.91, 1.37, 2.71}) {
            EXPECT_EQ(law.cdf(y) - law.cdf_left(y), 0.0);
            EXPECT_EQ(law.jump_mass_at(y), 0.0);
        }
    }
}

TEST(JumpLawCdf, SurvivalComplementsCdf) {
    for (const auto& law : built_in_laws()) {
        for (double y : {-2.0, -0.5, 0.0, 0.5, 1.0, 1.2, 3.0}) {
            EXPECT_NEAR(law.survival(y), 1.0 - law.cdf(y), 1e-14);
        }
    }
}

TEST(JumpLawSample, PointMassIsDegenerate) {
    const auto law = jump_law::point_mass(1.0);
    fpt::rng_stream rng(7);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(law.sample(rng), 1.0);
}

TEST(JumpLawSample, ExponentialMean) {
    const auto law = jump_law::exponential(1.0);
    fpt::rng_stream rng(11);
    double sum = 0.0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) sum += law.sample(rng);
    EXPECT_NEAR(sum / n, 1.0, 3e-3);
}

TEST(JumpLawSample, MixtureAtomFrequency) {
    const auto law = half_atom_half_exp();
    fpt::rng_stream rng(13);
    int hits = 0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) hits += law.sample(rng) == 1.0 ? 1 : 0;
    EXPECT_NEAR(static_cast<double>(hits) / n, 0.5, 0.0015);
}

TEST(JumpLawSample, KolmogorovSmirnovForContinuousLaws) {
    const std::size_t n = 100'000;
    for (const auto& law : {jump_law::exponential(1.0), jump_law::gaussian(-0.3, 0.7), jump_law::kou(0.6, 3.0, 2.0)}) {
        fpt::rng_stream rng(17);
        std::vector<double> draws(n);
        for (auto& d : draws) d = law.sample(rng);
        const double d = fpt::ks_statistic(draws, [&](double y) { return law.cdf(y); });
        EXPECT_LT(d, fpt::ks_critical_value(n));
    }
}

TEST(JumpLawSample, ChiSquareForAtomFrequencies) {
    const law_term terms[] = {atom{0.5, 0.2}, atom{1.0, 0.3}, atom{2.0, 0.5}};
    const auto law = jump_law::mixture(terms);
    fpt::rng_stream rng(19);
    const std::size_t n = 100'000;
    std::vector<double> draws(n);
    for (auto& d : draws) d = law.sample(rng);
    const double edges[] = {0.0, 0.75, 1.5, 2.5};
    auto pdf_of_buckets = [&](double y) {
        // Piecewise constant density reproducing the atom masses bucket by bucket.
        if (y <= 0.75) return 0.2 / 0.75;
        if (y <= 1.5) return 0.3 / 0.75;
        return 0.5 / 1.0;
    };
    const auto cmp = fpt::compare_histogram_density(draws, static_cast<double>(n), pdf_of_buckets, edges);
    EXPECT_TRUE(cmp.pass) << cmp.statistic << " vs " << cmp.threshold;
}

TEST(JumpLawImage, Examples) {
    for (const auto& law : {jump_law::exponential(1.0), jump_law::point_mass(1.0), half_atom_half_exp()}) {
        EXPECT_NEAR(law.integrate_image(0.0, [](double) { return 1.0; }), 1.0, 1e-9);
    }
    EXPECT_NEAR(jump_law::exponential(1.0).integrate_image(2.0, [](double) { return 1.0; }), std::exp(-2.0), 1e-10);
    EXPECT_NEAR(jump_law::point_mass(1.0).integrate_image(0.25, [](double k) { return k; }), 0.75, 1e-15);
}

TEST(JumpLawImage, TotalMassAtZeroIsProbabilityOfNonnegativeJump) {
    for (const auto& law : built_in_laws()) {
        const double total = law.integrate_image(0.0, [](double) { return 1.0; });
        EXPECT_NEAR(total, law.survival(0.0) + law.jump_mass_at(0.0), 1e-9);
        if (law.cdf_left(0.0) == 0.0) {
            EXPECT_NEAR(total, 1.0, 1e-9);
        }
    }
}

TEST(JumpLawImage, MatchesClosedFormForExponentialPhi) {
    // E[e^{-(Y-l)} 1{Y>=l}] for Y ~ Exp(r) is r e^{-r l} / (r + 1).
    const auto law = jump_law::exponential(2.0);
    for (double l : {0.0, 0.3, 1.7}) {
        const double got = law.integrate_image(l, [](double k) { return std::exp(-k); });
        EXPECT_NEAR(got, 2.0 * std::exp(-2.0 * l) / 3.0, 1e-9);
    }
}

TEST(JumpLawImage, NegativeUndershootRejected) {
    EXPECT_THROW((void)jump_law::exponential(1.0).integrate_image(-0.1, [](double) { return 1.0; }),
                 std::domain_error);
}

TEST(JumpLawConstruction, RejectsBadWeightsAndParameters) {
    const law_term bad[] = {atom{1.0, 0.6}, continuous_component{0.5, fpt::exponential_density{1.0}}};
    EXPECT_THROW(jump_law::mixture(bad), std::invalid_argument);
    EXPECT_THROW(jump_law::exponential(0.0), std::invalid_argument);
    EXPECT_THROW(jump_law::gaussian(0.0, -1.0), std::invalid_argument);
    EXPECT_THROW(jump_law::kou(1.5, 1.0, 1.0), std::invalid_argument);
}

TEST(JumpLawConstruction, MergesAtomsAndSortsThem) {
    const law_term terms[] = {atom{2.0, 0.25}, atom{1.0, 0.5}, atom{2.0, 0.25}};
    const auto law = jump_law::mixture(terms);
    ASSERT_EQ(law.atoms().size(), 2u);
    EXPECT_EQ(law.atoms()[0].location, 1.0);
    EXPECT_EQ(law.atoms()[1].mass, 0.5);
    EXPECT_NEAR(law.mean(), 1.5, 1e-15);
}

TEST(JumpLawMean, AnalyticValues) {
    EXPECT_NEAR(jump_law::exponential(2.0).mean(), 0.5, 1e-15);
    EXPECT_NEAR(jump_law::kou(0.6, 3.0, 2.0).mean(), 0.6 / 3.0 - 0.4 / 2.0, 1e-15);
    EXPECT_NEAR(half_atom_half_exp().mean(), 1.0, 1e-15);
}

TEST(ImageTable, ReproducesDirectIntegration) {
    auto phi = [](double k) { return std::exp(-k); };
    for (const auto& law : built_in_laws()) {
        const fpt::image_table table(law, phi);
        for (double l : {0.0, 0.1, 0.49, 0.77, 1.01, 1.19, 2.3, 5.0}) {
            EXPECT_NEAR(table(l), law.integrate_image(l, phi), 1e-9) << l;
        }
        EXPECT_EQ(table(-0.5), 0.0);
    }
}
