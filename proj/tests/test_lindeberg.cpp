#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "cltlab/lindeberg.hpp"
#include "cltlab/specfun.hpp"

using namespace cltlab;

namespace {

const ArrayFamily kIidRademacher = ArrayFamily::iid(DistributionSpec::rademacher());
const ArrayFamily kSpikeRademacher = ArrayFamily::spike(DistributionSpec::rademacher());

std::vector<ArrayFamily> all_families() {
    return {kIidRademacher,
            kSpikeRademacher,
            ArrayFamily::iid(DistributionSpec::uniform_sym()),
            ArrayFamily::iid(DistributionSpec::two_point(0.1)),
            ArrayFamily::iid(DistributionSpec::exp_centered()),
            ArrayFamily::iid(DistributionSpec::normal(1.0)),
            ArrayFamily::spike(DistributionSpec::two_point(0.3))};
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST_CASE("row validation") {
    CHECK_NOTHROW(validate_row(kIidRademacher.row(10)));
    CHECK_NOTHROW(validate_row(kSpikeRademacher.row(5)));
    CHECK(kSpikeRademacher.row(5).size() == 6);

    TriangularRow heavy;
    heavy.entries = {DistributionSpec::rademacher(std::sqrt(0.6)), DistributionSpec::rademacher(std::sqrt(0.6))};
    CHECK_THROWS_AS(validate_row(heavy), RowValidationError);
    try {
        validate_row(heavy);
    } catch (const RowValidationError& err) {
        CHECK(std::string(err.what()).find("1.2") != std::string::npos);
    }
    CHECK_THROWS_AS(validate_row(TriangularRow{}), RowValidationError);

    TriangularRow bad_entry;
    bad_entry.entries = {DistributionSpec::two_point(1.5)};
    CHECK_THROWS_AS(validate_row(bad_entry), RowValidationError);
}

TEST_CASE("every generated row is valid") {
    for (const auto& family : all_families()) {
        for (std::uint64_t n : {1, 2, 3, 7, 10, 100, 1000, 100000}) {
            CAPTURE(family.describe());
            CAPTURE(n);
            CHECK_NOTHROW(validate_row(family.row(n)));
        }
    }
}

TEST_CASE("array families reject non-unit bases") {
    CHECK_THROWS_AS(ArrayFamily::iid(DistributionSpec::rademacher(2.0)), RowValidationError);
    CHECK_THROWS_AS(ArrayFamily::parse("iid:normal:0.5"), RowValidationError);
    CHECK_THROWS(ArrayFamily::parse("chain:rademacher"));
    CHECK_THROWS(ArrayFamily::parse("rademacher"));
    CHECK(ArrayFamily::parse("spike:twopoint:0.1").describe() == "spike:twopoint:0.1");
}

TEST_CASE("custom rows") {
    const auto path = write_temp("cltlab_custom_row.json", R"({"entries": [
        {"kind": "twopoint", "param": 0.1, "scale": 0.6},
        {"kind": "normal", "param": 0.64, "mean": 0}
    ]})");
    const auto family = ArrayFamily::parse("custom:" + path.string());
    const auto row = family.row(17);
    CHECK(row.n_index == 17);
    REQUIRE(row.size() == 2);
    CHECK(row.entries[0] == DistributionSpec::two_point(0.1, 0.6));
    CHECK(row.variance_sum() == doctest::Approx(1.0));

    CHECK_THROWS_AS(parse_custom_row(R"({"entries": [{"kind": "rademacher", "mean": 0.5}]})"), RowValidationError);
    CHECK_THROWS_AS(parse_custom_row(R"({"rows": []})"), RowValidationError);
    CHECK_THROWS_AS(parse_custom_row("not json"), RowValidationError);
    CHECK_THROWS_AS(ArrayFamily::custom({DistributionSpec::rademacher(), DistributionSpec::rademacher()}, "twice"),
                    RowValidationError);
    CHECK_THROWS_AS(load_custom_row("/nonexistent/row.json"), std::runtime_error);
}

TEST_CASE("Lindeberg tail sums") {
    // 1/sqrt(200) < 0.1 < 1/sqrt(50).
    CHECK(lindeberg_tail_sum(kIidRademacher.row(200), 0.1) == 0.0);
    CHECK(lindeberg_tail_sum(kIidRademacher.row(50), 0.1) == 1.0);
    for (std::uint64_t n : {1, 5, 100, 10000}) {
        CHECK(lindeberg_tail_sum(kSpikeRademacher.row(n), 0.5) >= 0.5);
    }
    CHECK_THROWS_AS(lindeberg_tail_sum(kIidRademacher.row(5), 0.0), std::invalid_argument);
}

TEST_CASE("bounded iid laws have vanishing tails past the support threshold") {
    // Support bounds: Rademacher 1, UniformSym sqrt 3, TwoPoint(0.1) 3.
    struct Case {
        DistributionSpec base;
        double support;
    };
    for (const auto& c : {Case{DistributionSpec::rademacher(), 1.0}, Case{DistributionSpec::uniform_sym(), std::sqrt(3.0)},
                          Case{DistributionSpec::two_point(0.1), 3.0}}) {
        const auto family = ArrayFamily::iid(c.base);
        for (double delta : {0.5, 0.2, 0.1}) {
            const auto threshold = static_cast<std::uint64_t>(std::ceil(c.support * c.support / (delta * delta)));
            CAPTURE(family.describe());
            CAPTURE(delta);
            CHECK(lindeberg_tail_sum(family.row(threshold + 1), delta) == 0.0);
            double previous = lindeberg_tail_sum(family.row(1), delta);
            for (std::uint64_t n = 2; n <= threshold + 2; ++n) {
                const double current = lindeberg_tail_sum(family.row(n), delta);
                REQUIRE(current <= previous + 1e-12);
                previous = current;
            }
        }
    }
}

TEST_CASE("max row variance bound") {
    const auto [max_var, bound] = max_row_variance_bound(kIidRademacher.row(100), 0.2);
    CHECK(max_var == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(bound == doctest::Approx(0.04).epsilon(1e-14));

    const auto [spike_max, spike_bound] = max_row_variance_bound(kSpikeRademacher.row(20), 0.1);
    CHECK(spike_max == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(spike_max <= spike_bound);

    for (const auto& family : all_families()) {
        for (std::uint64_t n : {1, 10, 500}) {
            for (double eps : {0.05, 0.3, 1.0}) {
                const auto [m, b] = max_row_variance_bound(family.row(n), eps);
                CHECK(m <= b);
                if (eps == 1.0) CHECK(b >= 1.0);
            }
        }
    }
}

TEST_CASE("companion normal rows") {
    const auto companion = companion_normal_row(kIidRademacher.row(4));
    REQUIRE(companion.size() == 4);
    for (const auto& e : companion.entries) CHECK(e == DistributionSpec::normal(0.25));
    CHECK_NOTHROW(validate_row(companion));

    const auto twice = companion_normal_row(companion);
    CHECK(twice.variances() == companion.variances());

    TriangularRow with_zero;
    with_zero.entries = {DistributionSpec::normal(0.0), DistributionSpec::rademacher()};
    const auto zero_companion = companion_normal_row(with_zero);
    CHECK(zero_companion.entries[0] == DistributionSpec::normal(0.0));
    CHECK_NOTHROW(validate_row(zero_companion));

    for (const auto& family : all_families()) CHECK_NOTHROW(validate_row(companion_normal_row(family.row(33))));
}

TEST_CASE("normal tail sum bound") {
    const auto iid = normal_tail_sum_bound(ArrayFamily::iid(DistributionSpec::uniform_sym()).row(100), 0.5);
    CHECK(iid.normal_tail_bound == doctest::Approx(0.12).epsilon(1e-14));
    CHECK(iid.normal_tail_sum <= 0.12);
    CHECK(iid.holds());

    TriangularRow single;
    single.entries = {DistributionSpec::normal(1.0)};
    CHECK(normal_tail_sum_bound(single, 0.7).normal_tail_sum == normal_truncated_second_moment(1.0, 0.7));

    // Quadrature of t^2 phi(t) over |t| > 10.
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double far_tail = 2.0 * integrator.integrate([](double t) { return t * t * phi_density(t); }, 10.0, 60.0);
    const auto far = normal_tail_sum_bound(single, 10.0);
    CHECK(far.normal_tail_sum < 1e-20);
    CHECK(far.normal_tail_sum == doctest::Approx(far_tail).epsilon(1e-8));
    CHECK(far.normal_tail_bound == doctest::Approx(0.03));

    for (const auto& family : all_families()) {
        for (std::uint64_t n : {1, 4, 50, 1000}) {
            for (double delta : {0.05, 0.1, 0.5, 1.0, 3.0}) {
                CHECK(normal_tail_sum_bound(family.row(n), delta).holds());
            }
        }
    }
}

TEST_CASE("decay verdicts") {
    const std::vector<double> vanishing{1.0, 0.5, 0.0};
    const std::vector<double> flat{0.5, 0.5, 0.5};
    const std::vector<double> dip{1.0, 0.01, 0.5};
    CHECK(classify_decay(vanishing) == DecayVerdict::Vanishing);
    CHECK(classify_decay(flat) == DecayVerdict::NonVanishing);
    CHECK(classify_decay(dip) == DecayVerdict::Inconclusive);
    CHECK(verdict_name(DecayVerdict::NonVanishing) == "non-vanishing");

    std::vector<double> spike_tails;
    for (std::uint64_t n : {10, 100, 1000}) spike_tails.push_back(lindeberg_tail_sum(kSpikeRademacher.row(n), 0.5));
    CHECK(classify_decay(spike_tails) == DecayVerdict::NonVanishing);
}

TEST_CASE("moment identities of the normal sampler") {
    const auto m = moment_identity_check(1'000'000, 42);
    CHECK(std::abs(m.second - 1.0) <= 4.0 * m.second_se);
    CHECK(std::abs(m.fourth - 3.0) <= 4.0 * m.fourth_se);

    const auto anti = moment_identity_check(20000, 7, 1, true);
    CHECK(anti.first == 0.0);
    CHECK(anti.third == 0.0);
    CHECK_THROWS_AS(moment_identity_check(100, 1), std::invalid_argument);

    const auto wide = moment_identity_check(50000, 3, 8);
    const auto narrow = moment_identity_check(50000, 3, 1);
    CHECK(wide.second == narrow.second);
    CHECK(wide.fourth_se == narrow.fourth_se);
}
