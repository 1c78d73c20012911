#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace cltlab {

/// Philox4x32-10 keyed by a 64-bit seed, with the 64-bit stream index held in
/// the upper half of the 128-bit counter. Every (seed, stream) pair therefore
/// owns a disjoint 2^64-block counter range and shares no state with any other.
///
/// Consumption contract: uniform() takes one 64-bit word, standard_normal()
/// takes two uniforms on every other call (Box-Muller pair, second value
/// cached).
class Rng {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }
    /// Number of 64-bit words consumed so far.
    std::uint64_t counter() const noexcept { return words_used_; }

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double standard_normal();

    /// The raw bijection; exposed for known-answer tests.
    static Block philox(Block counter, Key key) noexcept;

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_index_ = 0;
    std::uint64_t words_used_ = 0;
    Block buffer_{};
    int buffer_pos_ = 4;
    std::optional<double> spare_normal_;
};

Rng make_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace cltlab
