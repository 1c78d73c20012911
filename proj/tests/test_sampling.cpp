#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "cltlab/sampling.hpp"
#include "cltlab/specfun.hpp"
#include "test_support.hpp"

using namespace cltlab;
using testing_support::draw;
using testing_support::mean_and_se;

namespace {

// Every catalog kind, including scaled and degenerate members.
std::vector<DistributionSpec> catalog() {
    return {DistributionSpec::rademacher(),       DistributionSpec::uniform_sym(),
            DistributionSpec::exp_centered(),     DistributionSpec::two_point(0.1),
            DistributionSpec::two_point(0.7),     DistributionSpec::normal(1.0),
            DistributionSpec::normal(0.5, 1.5),   DistributionSpec::rademacher(0.3),
            DistributionSpec::uniform_sym(2.0),   DistributionSpec::exp_centered(0.4),
            DistributionSpec::two_point(0.1, 2.5)};
}

// E[(E-1)^2; |E-1| > c] for E ~ Exp(1) by antiderivative:
// int_a^inf x^2 e^{-(x+1)} dx = e^{-(a+1)} (a^2 + 2a + 2).
double exp_centered_tail_closed_form(double c) {
    auto tail_from = [](double a) { return std::exp(-(a + 1.0)) * (a * a + 2.0 * a + 2.0); };
    double total = tail_from(c);
    if (c < 1.0) total += tail_from(-1.0) - tail_from(-c);
    return total;
}

}  // namespace

TEST_CASE("distribution strings") {
    CHECK(parse_distribution("rademacher") == DistributionSpec::rademacher());
    CHECK(parse_distribution("twopoint:0.1") == DistributionSpec::two_point(0.1));
    CHECK(parse_distribution("normal:0.5") == DistributionSpec::normal(0.5));
    CHECK(parse_distribution("normal") == DistributionSpec::normal(1.0));
    CHECK(parse_distribution("uniform*0.25") == DistributionSpec::uniform_sym(0.25));
    CHECK(parse_distribution("exp*2e-1") == DistributionSpec::exp_centered(0.2));

    CHECK_THROWS_AS(parse_distribution("twopoint:1.5"), DistributionError);
    CHECK_THROWS_AS(parse_distribution("twopoint:0.001"), DistributionError);
    CHECK_THROWS_AS(parse_distribution("twopoint"), DistributionError);
    CHECK_THROWS_AS(parse_distribution("cauchy"), DistributionError);
    CHECK_THROWS_AS(parse_distribution("uniform:0.3"), DistributionError);
    CHECK_THROWS_AS(parse_distribution("rademacher*-1"), DistributionError);
    CHECK_THROWS_AS(parse_distribution("rademacher*"), DistributionError);
    CHECK_THROWS_AS(parse_distribution("normal:-1"), DistributionError);
    CHECK_THROWS_AS(parse_distribution("normal:abc"), DistributionError);
}

TEST_CASE("to_string round-trips through the parser") {
    Rng rng(11, 0);
    for (int trial = 0; trial < 500; ++trial) {
        DistributionSpec spec;
        spec.kind = static_cast<DistKind>(static_cast<int>(rng.uniform() * 5));
        if (spec.kind == DistKind::TwoPoint) spec.param = 0.01 + 0.98 * rng.uniform();
        if (spec.kind == DistKind::Normal) spec.param = 3.0 * rng.uniform();
        spec.scale = rng.uniform() < 0.3 ? 1.0 : 0.001 + 10.0 * rng.uniform();
        CHECK(parse_distribution(to_string(spec)) == spec);
    }
}

TEST_CASE("moments of the unscaled catalog") {
    for (const auto& spec : catalog()) {
        CHECK(mean(spec) == 0.0);
    }
    CHECK(variance(DistributionSpec::rademacher(0.5)) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(variance(DistributionSpec::normal(0.5, 2.0)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(variance(DistributionSpec::normal(0.0)) == 0.0);
}

TEST_CASE("supports") {
    Rng rng(3, 0);
    for (int i = 0; i < 10000; ++i) {
        const double r = sample_dist(DistributionSpec::rademacher(), rng);
        REQUIRE((r == -1.0 || r == 1.0));
        const double u = sample_dist(DistributionSpec::uniform_sym(), rng);
        REQUIRE(std::abs(u) <= std::sqrt(3.0));
        const double e = sample_dist(DistributionSpec::exp_centered(), rng);
        REQUIRE(e >= -1.0);
        const double t = sample_dist(DistributionSpec::two_point(0.1), rng);
        REQUIRE((t == doctest::Approx(3.0) || t == doctest::Approx(-1.0 / 3.0)));
        REQUIRE(sample_dist(DistributionSpec::normal(0.0), rng) == 0.0);
    }
}

TEST_CASE("uniform consumption per kind") {
    for (const auto& spec : {DistributionSpec::rademacher(), DistributionSpec::uniform_sym(),
                             DistributionSpec::exp_centered(), DistributionSpec::two_point(0.3)}) {
        Rng rng(1, 0);
        sample_dist(spec, rng);
        CHECK(rng.counter() == 1);
    }
    Rng rng(1, 0);
    sample_dist(DistributionSpec::normal(2.0), rng);
    sample_dist(DistributionSpec::normal(2.0), rng);
    CHECK(rng.counter() == 2);
    sample_dist(DistributionSpec::normal(0.0), rng);
    CHECK(rng.counter() == 2);
}

TEST_CASE("UniformSym sample mean over 1e6 draws") {
    const auto xs = draw(DistributionSpec::uniform_sym(), 1'000'000, 42);
    CHECK(std::abs(mean_and_se(xs).mean) <= 3e-3);
}

TEST_CASE("TwoPoint(0.1) sample variance within 3 jackknife SE of 1") {
    // p a^2 + (1-p) b^2 = 0.1 * 9 + 0.9 / 9 = 1.
    const auto xs = draw(DistributionSpec::two_point(0.1), 1'000'000, 42);
    const auto v = testing_support::variance_with_jackknife_se(xs);
    CHECK(v.se > 0.0);
    CHECK(std::abs(v.mean - 1.0) <= 3.0 * v.se);
}

TEST_CASE("truncated second moment closed forms") {
    CHECK(truncated_second_moment(DistributionSpec::rademacher(), 0.0) == 1.0);
    CHECK(truncated_second_moment(DistributionSpec::rademacher(std::sqrt(1.0 / 200)), 0.1) == 0.0);
    CHECK(truncated_second_moment(DistributionSpec::uniform_sym(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    // s = 1, c = 1: 1 - (1/sqrt 3)^3.
    CHECK(truncated_second_moment(DistributionSpec::uniform_sym(), 1.0) ==
          doctest::Approx(1.0 - 1.0 / (3.0 * std::sqrt(3.0))).epsilon(1e-14));
    CHECK(truncated_second_moment(DistributionSpec::uniform_sym(), 2.0) == 0.0);
    // TwoPoint(0.1): only the point 3 exceeds 1, contributing 0.1 * 9.
    CHECK(truncated_second_moment(DistributionSpec::two_point(0.1), 1.0) == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(truncated_second_moment(DistributionSpec::normal(0.5), 0.3) == normal_truncated_second_moment(0.5, 0.3));
    CHECK_THROWS_AS(truncated_second_moment(DistributionSpec::rademacher(), -0.1), std::invalid_argument);
}

TEST_CASE("ExpCentered quadrature agrees with the antiderivative") {
    for (double c : {0.0, 0.05, 0.3, 0.999, 1.0, 1.5, 3.0, 10.0, 30.0}) {
        CAPTURE(c);
        CHECK(std::abs(truncated_second_moment(DistributionSpec::exp_centered(), c) -
                       exp_centered_tail_closed_form(c)) <= 1e-10);
    }
    for (double s : {0.1, 0.5, 2.0}) {
        for (double c : {0.0, 0.2, 0.7, 2.5}) {
            CAPTURE(s);
            CAPTURE(c);
            const double expected = s * s * exp_centered_tail_closed_form(c / s);
            CHECK(std::abs(truncated_second_moment(DistributionSpec::exp_centered(s), c) - expected) <= 1e-10);
        }
    }
}

TEST_CASE("truncated moments are monotone and start at the variance") {
    for (const auto& spec : catalog()) {
        CAPTURE(to_string(spec));
        CHECK(std::abs(truncated_second_moment(spec, 0.0) - variance(spec)) <= 1e-10);
        double previous = truncated_second_moment(spec, 0.0);
        for (int k = 1; k <= 400; ++k) {
            const double c = 0.02 * k;
            const double current = truncated_second_moment(spec, c);
            REQUIRE(current >= 0.0);
            // Quadrature noise is far below 1e-12.
            REQUIRE(current <= previous + 1e-12);
            previous = current;
        }
    }
}

TEST_CASE("Monte Carlo truncated moments match closed forms within 4 SE") {
    const std::array unit_kinds{DistributionSpec::rademacher(), DistributionSpec::uniform_sym(),
                                DistributionSpec::exp_centered(), DistributionSpec::two_point(0.1),
                                DistributionSpec::normal(1.0)};
    std::uint64_t stream = 0;
    for (const auto& spec : unit_kinds) {
        const auto xs = draw(spec, 1'000'000, 2024, stream++);
        for (double c : {0.0, 0.5, 1.0, 2.0}) {
            CAPTURE(to_string(spec));
            CAPTURE(c);
            std::vector<double> terms(xs.size());
            for (std::size_t i = 0; i < xs.size(); ++i) terms[i] = std::abs(xs[i]) > c ? xs[i] * xs[i] : 0.0;
            const auto est = mean_and_se(terms);
            const double exact = truncated_second_moment(spec, c);
            if (est.se == 0.0) {
                CHECK(est.mean == doctest::Approx(exact).epsilon(1e-12));
            } else {
                CHECK(std::abs(est.mean - exact) <= 4.0 * est.se);
            }
        }
    }
}
