#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "cltlab/rng.hpp"

namespace cltlab {

enum class DistKind { Rademacher, UniformSym, ExpCentered, TwoPoint, Normal };

/// Admissible range for the TwoPoint success probability.
inline constexpr double kTwoPointMinP = 0.01;
inline constexpr double kTwoPointMaxP = 0.99;

/// A mean-zero law, scaled by `scale`.
///
/// Unscaled laws:
///   Rademacher   uniform on {-1, +1}
///   UniformSym   uniform on [-sqrt(3), sqrt(3)]
///   ExpCentered  Exp(1) - 1
///   TwoPoint(p)  sqrt((1-p)/p) w.p. p, -sqrt(p/(1-p)) w.p. 1-p
///   Normal(v)    sqrt(v) * N(0, 1); v = 0 is the constant 0
///
/// All but Normal have unit variance before scaling.
struct DistributionSpec {
    DistKind kind = DistKind::Rademacher;
    /// p for TwoPoint, v for Normal, unused otherwise.
    double param = 0.0;
    double scale = 1.0;

    static DistributionSpec rademacher(double scale = 1.0) { return {DistKind::Rademacher, 0.0, scale}; }
    static DistributionSpec uniform_sym(double scale = 1.0) { return {DistKind::UniformSym, 0.0, scale}; }
    static DistributionSpec exp_centered(double scale = 1.0) { return {DistKind::ExpCentered, 0.0, scale}; }
    static DistributionSpec two_point(double p, double scale = 1.0) { return {DistKind::TwoPoint, p, scale}; }
    static DistributionSpec normal(double variance, double scale = 1.0) { return {DistKind::Normal, variance, scale}; }

    DistributionSpec scaled_by(double factor) const { return {kind, param, scale * factor}; }

    friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;
};

class DistributionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Throws DistributionError when the parameters are outside their domain.
void validate(const DistributionSpec& spec);

/// Parses `kind[:param][*scale]`. Kinds: rademacher, uniform, exp,
/// twopoint:P (P in [0.01, 0.99]), normal[:V] (V >= 0, default 1).
DistributionSpec parse_distribution(std::string_view text);
/// Inverse of parse_distribution; emits shortest round-trip numerals.
std::string to_string(const DistributionSpec& spec);
std::string_view kind_name(DistKind kind);

double mean(const DistributionSpec& spec);
double variance(const DistributionSpec& spec);

/// One draw from the scaled law.
///
/// Uniform consumption per call: one for Rademacher, UniformSym, ExpCentered
/// and TwoPoint; Normal uses Rng::standard_normal (two uniforms every other
/// call, none when v = 0).
double sample_dist(const DistributionSpec& spec, Rng& rng);

/// E[X^2; |X| > c]. Closed forms except ExpCentered, which is integrated
/// numerically to 1e-10 absolute error. Throws on negative c.
double truncated_second_moment(const DistributionSpec& spec, double c);

}  // namespace cltlab
