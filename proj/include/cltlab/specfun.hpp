#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cltlab {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934381868;

double phi_density(double t);
/// Standard normal CDF, absolute error below 1e-12.
double normal_cdf(double x);
/// Upper tail 1 - Phi(x) without cancellation.
double normal_sf(double x);

/// E[Y^2; |Y| > delta] for Y ~ N(0, v).
double normal_truncated_second_moment(double v, double delta);

// Smooth transitions ---------------------------------------------------------
//
// The core is the degree-7 smoothstep S(s) = 35s^4 - 84s^5 + 70s^6 - 20s^7,
// rising from 0 to 1 on [0, 1] with S', S'', S''' vanishing at both ends.
// A transition of width eta is 1 - S((t - start) / eta).

enum class DropDirection {
    /// 1 on (-inf, x - eta], 0 on [x, inf)
    DropBefore,
    /// 1 on (-inf, x], 0 on [x + eta, inf)
    DropAfter,
};

struct TransitionFn {
    double x = 0.0;
    double eta = 1.0;
    DropDirection direction = DropDirection::DropBefore;

    double drop_start() const noexcept { return direction == DropDirection::DropBefore ? x - eta : x; }
    double drop_end() const noexcept { return direction == DropDirection::DropBefore ? x : x + eta; }
};

/// Suprema of |f'|, |f''|, |f'''| over the real line.
struct DerivBoundCert {
    double sup_f1 = 0.0;
    double sup_f2 = 0.0;
    double sup_f3 = 0.0;
};

/// max |S^(k)| on [0, 1] for k = 1, 2, 3.
inline constexpr double kCoreSup1 = 2.1875;
inline constexpr double kCoreSup2 = 7.5131884043992934;  // 3.36 * sqrt(5)
inline constexpr double kCoreSup3 = 52.5;

/// k-th derivative of the core smoothstep at s, k in 0..3; s is clamped to [0, 1].
double smoothstep7(double s, int order);

/// Maximizes |S^(k)| on [0, 1] by a uniform grid followed by nested grid
/// refinement around the best cell, until the bracket is below 1e-13.
double certified_core_supremum(int order);

/// k-th derivative of the transition at t. Throws std::out_of_range for order
/// outside 0..3 and std::invalid_argument for non-positive eta.
double transition_eval(const TransitionFn& fn, double t, int order);
DerivBoundCert transition_bounds(const TransitionFn& fn);

/// eta = eps * sqrt(2 pi): with the density bounded by 1/sqrt(2 pi) this
/// keeps Phi(x) - Phi(x - eta) and Phi(x + eta) - Phi(x) at most eps.
double eta_for_epsilon(double epsilon);
/// delta = eps / sup|f'''|, so |u - v| <= delta gives |f''(u) - f''(v)| <= eps.
double delta_for_epsilon(double epsilon, double sup_f3);

// Test functions -------------------------------------------------------------

/// A bounded C^3 function with known derivative suprema: either a smooth
/// transition or cos(omega * t).
class TestFunction {
public:
    enum class Kind { Transition, Cosine };

    static TestFunction transition(TransitionFn fn);
    static TestFunction cosine(double omega);

    /// `drop-before:X,ETA`, `drop-after:X,ETA` or `cos:OMEGA`.
    static TestFunction parse(std::string_view text);
    std::string describe() const;

    Kind kind() const noexcept { return kind_; }
    const TransitionFn& transition_fn() const noexcept { return fn_; }
    double omega() const noexcept { return omega_; }

    double operator()(double t) const { return eval(t, 0); }
    double eval(double t, int order) const;
    DerivBoundCert bounds() const;

private:
    Kind kind_ = Kind::Transition;
    TransitionFn fn_{};
    double omega_ = 1.0;
};

}  // namespace cltlab
