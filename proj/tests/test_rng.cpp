#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <vector>

#include "cltlab/rng.hpp"

using cltlab::Rng;

namespace {

std::vector<double> draws(Rng rng, int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(rng.uniform());
    return out;
}

}  // namespace

TEST_CASE("philox4x32-10 known answers") {
    // Reference vectors published with the Random123 library.
    SUBCASE("zero counter and key") {
        const auto out = Rng::philox({0, 0, 0, 0}, {0, 0});
        CHECK(out == Rng::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    }
    SUBCASE("all ones") {
        const auto out = Rng::philox({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                     {0xffffffffu, 0xffffffffu});
        CHECK(out == Rng::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    }
    SUBCASE("digits of pi") {
        const auto out = Rng::philox({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     {0xa4093822u, 0x299f31d0u});
        CHECK(out == Rng::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
    }
}

TEST_CASE("same seed and stream reproduce the sequence byte for byte") {
    const auto a = draws(cltlab::make_rng(42, 0), 1000);
    const auto b = draws(cltlab::make_rng(42, 0), 1000);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("distinct streams and seeds differ") {
    CHECK(draws(cltlab::make_rng(42, 0), 1000) != draws(cltlab::make_rng(42, 1), 1000));
    CHECK(draws(cltlab::make_rng(42, 0), 1000) != draws(cltlab::make_rng(43, 0), 1000));
}

TEST_CASE("uniform range and resolution") {
    Rng first(1, 0);
    const double u = first.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);

    Rng rng(7, 3);
    bool saw_low_bits = false;
    for (int i = 0; i < 10000; ++i) {
        const double v = rng.uniform();
        REQUIRE(v >= 0.0);
        REQUIRE(v < 1.0);
        // A 53-bit draw has bits below 2^-32 set most of the time.
        const double scaled = v * 0x1.0p32;
        if (scaled != static_cast<double>(static_cast<std::uint64_t>(scaled))) saw_low_bits = true;
    }
    CHECK(saw_low_bits);
}

TEST_CASE("documented consumption") {
    Rng rng(5, 0);
    CHECK(rng.counter() == 0);
    rng.uniform();
    CHECK(rng.counter() == 1);
    rng.standard_normal();
    CHECK(rng.counter() == 3);
    rng.standard_normal();  // cached partner
    CHECK(rng.counter() == 3);
    rng.standard_normal();
    CHECK(rng.counter() == 5);
    CHECK(rng.seed() == 5);
    CHECK(rng.stream() == 0);
}

TEST_CASE("skipping words matches drawing them") {
    // Two words per Philox block; the sequence is the block stream in order.
    Rng a(9, 2);
    Rng b(9, 2);
    for (int i = 0; i < 7; ++i) a.next_u64();
    for (int i = 0; i < 7; ++i) b.uniform();
    CHECK(a.next_u64() == b.next_u64());
}
