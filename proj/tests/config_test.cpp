#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "fpt/config.hpp"

using namespace fpt;

namespace {

const char* minimal =
    "[model]\n"
    "m = 0\n"
    "lambda = 1\n"
    "jump = exp rate=1\n"
    "x = 1\n"
    "[run]\n"
    "seed = 42\n";

std::size_t syntax_line(const std::string& text) {
    try {
        (void)parse_config(text);
    } catch (const config_syntax_error& e) {
        return e.line();
    }
    ADD_FAILURE() << "no syntax error for:\n" << text;
    return 0;
}

std::string semantic_field(const std::string& text) {
    try {
        (void)parse_config(text);
    } catch (const config_semantic_error& e) {
        return e.field();
    }
    ADD_FAILURE() << "no semantic error for:\n" << text;
    return {};
}

std::string with_jump(const std::string& jump) {
    return "[model]\nlambda = 1\nx = 1\njump = " + jump + "\n";
}

}  // namespace

TEST(ParseConfig, MinimalConfig) {
    const auto cfg = parse_config(minimal);
    EXPECT_EQ(cfg.model.drift, 0.0);
    EXPECT_EQ(cfg.model.intensity, 1.0);
    EXPECT_EQ(cfg.model.barrier, 1.0);
    EXPECT_EQ(cfg.seed, 42u);
    EXPECT_NEAR(cfg.model.law.cdf(1.0), 1.0 - std::exp(-1.0), 1e-15);
    EXPECT_EQ(cfg.jump_text, "exp rate=1");
}

TEST(ParseConfig, RunSectionValuesAndComments) {
    const auto cfg = parse_config(
        "# leading comment\n"
        "[model]\n"
        "x = 2   # barrier\n"
        "\n"
        "[run]\n"
        "t = 0.5, 1,2\n"
        "l = 0, 0.3\n"
        "horizon = 1, 100\n"
        "n = 2500\n"
        "depth = 12\n"
        "step = 0.001\n"
        "h = 0.02\n"
        "method = grid\n"
        "phi = exp\n"
        "psi = reciprocal\n"
        "shards = 3\n"
        "threads = 2\n"
        "scale = 0.5\n"
        "out = result.csv\n");
    EXPECT_EQ(cfg.model.barrier, 2.0);
    EXPECT_EQ(cfg.model.intensity, 0.0);
    EXPECT_EQ(cfg.times, (std::vector<double>{0.5, 1.0, 2.0}));
    EXPECT_EQ(cfg.undershoots, (std::vector<double>{0.0, 0.3}));
    EXPECT_EQ(cfg.horizons, (std::vector<double>{1.0, 100.0}));
    EXPECT_EQ(cfg.paths, 2500u);
    EXPECT_EQ(cfg.depth, 12);
    EXPECT_EQ(cfg.step, 0.001);
    EXPECT_EQ(cfg.h, 0.02);
    EXPECT_EQ(cfg.method, density_method::grid);
    EXPECT_EQ(cfg.phi, test_function::exp);
    EXPECT_EQ(cfg.psi, test_function::reciprocal);
    EXPECT_EQ(cfg.shards, 3u);
    EXPECT_EQ(cfg.threads, 2u);
    EXPECT_EQ(cfg.scale, 0.5);
    EXPECT_EQ(cfg.out, "result.csv");
}

TEST(ParseConfig, JumpGrammar) {
    const auto g = parse_config(with_jump("gauss mu=-0.3 sigma=0.7")).model.law;
    EXPECT_NEAR(g.mean(), -0.3, 1e-15);
    EXPECT_NEAR(g.cdf(-0.3), 0.5, 1e-15);

    const auto k = parse_config(with_jump("kou p=0.6 eta1=3 eta2=2")).model.law;
    EXPECT_NEAR(k.mean(), 0.6 / 3.0 - 0.4 / 2.0, 1e-15);

    const auto a = parse_config(with_jump("atom@1.5")).model.law;
    EXPECT_EQ(a.jump_mass_at(1.5), 1.0);

    const auto mix = parse_config(with_jump("mix 0.5*atom@1 + 0.5*exp rate=1")).model.law;
    EXPECT_EQ(mix.jump_mass_at(1.0), 0.5);
    EXPECT_NEAR(mix.cdf(1.0), 0.5 + 0.5 * (1.0 - std::exp(-1.0)), 1e-15);

    const auto three = parse_config(with_jump("mix 0.2*atom@1e+0 + 0.3*gauss mu=0 sigma=1 + 0.5*kou p=1 eta1=2 eta2=1"));
    EXPECT_EQ(three.model.law.jump_mass_at(1.0), 0.2);
}

TEST(ParseConfig, MixWeightsMustSumToOne) {
    EXPECT_EQ(semantic_field(with_jump("mix 0.6*atom@1 + 0.5*exp rate=1")), "jump");
    EXPECT_EQ(semantic_field(with_jump("mix 1.2*atom@1 + -0.2*exp rate=1")), "jump");
}

TEST(ParseConfig, SemanticErrorsNameTheField) {
    EXPECT_EQ(semantic_field("[model]\nx = -1\n"), "x");
    EXPECT_EQ(semantic_field("[model]\nx = 0\n"), "x");
    EXPECT_EQ(semantic_field("[model]\nm = 1\n"), "x");
    EXPECT_EQ(semantic_field("[model]\nx = 1\nlambda = -1\n"), "lambda");
    EXPECT_EQ(semantic_field("[model]\nx = 1\nlambda = 2\n"), "jump");
    EXPECT_EQ(semantic_field(with_jump("exp rate=0")), "jump");
    EXPECT_EQ(semantic_field(with_jump("gauss mu=0 sigma=-1")), "jump");
    EXPECT_EQ(semantic_field(with_jump("kou p=1.5 eta1=1 eta2=1")), "jump");
    EXPECT_EQ(semantic_field("[model]\nx = 1\n[run]\nt = 1, 0.5\n"), "t");
    EXPECT_EQ(semantic_field("[model]\nx = 1\n[run]\nt = 0, 1\n"), "t");
    EXPECT_EQ(semantic_field("[model]\nx = 1\n[run]\nl = -0.1\n"), "l");
    EXPECT_EQ(semantic_field("[model]\nx = 1\n[run]\nhorizon = 5, 5\n"), "horizon");
    EXPECT_EQ(semantic_field("[model]\nx = 1\n[run]\nn = 0\n"), "n");
    EXPECT_EQ(semantic_field("[model]\nx = 1\n[run]\nshards = 0\n"), "shards");
    EXPECT_EQ(semantic_field("[model]\nx = 1\n[run]\ndepth = 61\n"), "depth");
    EXPECT_EQ(semantic_field("[model]\nx = 1\n[run]\nstep = 0\n"), "step");
    EXPECT_EQ(semantic_field("[model]\nx = 1\n[run]\nh = -0.1\n"), "h");
    EXPECT_EQ(semantic_field("[model]\nx = 1\n[run]\nscale = 0\n"), "scale");
}

TEST(ParseConfig, SyntaxErrorsReportTheLine) {
    EXPECT_EQ(syntax_line("[model]\nx = 1\nbarrier = 2\n"), 3u);
    EXPECT_EQ(syntax_line("[model]\nx 1\n"), 2u);
    EXPECT_EQ(syntax_line("x = 1\n"), 1u);
    EXPECT_EQ(syntax_line("[model]\nx = 1\n[extra]\n"), 3u);
    EXPECT_EQ(syntax_line("[model\n"), 1u);
    EXPECT_EQ(syntax_line("[model]\nx = one\n"), 2u);
    EXPECT_EQ(syntax_line("[model]\nx = 1\nx = 2\n"), 3u);
    EXPECT_EQ(syntax_line("[model]\nx =\n"), 2u);
    EXPECT_EQ(syntax_line("[model]\nx = 1\n[run]\nm = 0\n"), 4u);
    EXPECT_EQ(syntax_line("[model]\nx = 1\n[run]\nn = -5\n"), 4u);
    EXPECT_EQ(syntax_line("[model]\nx = 1\n[run]\nn = 2.5\n"), 4u);
    EXPECT_EQ(syntax_line("[model]\nx = 1\n[run]\nmethod = fast\n"), 4u);
    EXPECT_EQ(syntax_line("[model]\nx = 1\n[run]\nphi = sin\n"), 4u);
    EXPECT_EQ(syntax_line("[model]\nx = 1\n[run]\nt = 1,,2\n"), 4u);
    EXPECT_EQ(syntax_line("[model]\nx = inf\n"), 2u);
}

TEST(ParseConfig, MalformedJumpSpecsAreSyntaxErrors) {
    const char* bad[] = {"cauchy scale=1",       "exp",        "exp rate=1 extra=2",     "exp lambda=1",
                         "gauss sigma=1 mu=0",   "atom@",      "mix 0.5*atom@1 0.5*exp rate=1",
                         "mix 0.5 atom@1 + 0.5*exp rate=1"};
    for (const char* text : bad) EXPECT_EQ(syntax_line(with_jump(text)), 4u) << text;
}

TEST(ParseConfig, ErrorMessagesCarryPosition) {
    try {
        (void)parse_config("[model]\nx = 1\nfoo = 2\n");
        FAIL();
    } catch (const config_syntax_error& e) {
        EXPECT_EQ(std::string(e.what()).rfind("line 3:", 0), 0u) << e.what();
    }
    try {
        (void)parse_config("[model]\nx = -1\n");
        FAIL();
    } catch (const config_semantic_error& e) {
        EXPECT_EQ(std::string(e.what()).rfind("x:", 0), 0u) << e.what();
    }
}

TEST(TestFunctions, NamedFunctions) {
    EXPECT_EQ(apply(test_function::one, 3.0), 1.0);
    EXPECT_EQ(apply(test_function::exp, 0.0), 1.0);
    EXPECT_NEAR(apply(test_function::exp, 1.0), std::exp(-1.0), 1e-16);
    EXPECT_EQ(apply(test_function::reciprocal, 1.0), 0.5);
}
