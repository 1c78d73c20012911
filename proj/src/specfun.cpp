#include "cltlab/specfun.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace cltlab {

double phi_density(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_truncated_second_moment(double v, double delta) {
    if (!(v >= 0.0) || !(delta >= 0.0)) {
        throw std::invalid_argument("normal_truncated_second_moment needs v >= 0 and delta >= 0");
    }
    if (v == 0.0) return 0.0;
    const double b = delta / std::sqrt(v);
    return v * (2.0 * b * phi_density(b) + 2.0 * normal_sf(b));
}

double smoothstep7(double s, int order) {
    if (order < 0 || order > 3) throw std::out_of_range("derivative order must be in 0..3");
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return order == 0 ? 1.0 : 0.0;
    const double r = 1.0 - s;
    switch (order) {
        case 0: return s * s * s * s * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s)));
        case 1: return 140.0 * s * s * s * r * r * r;
        case 2: return 420.0 * s * s * r * r * (1.0 - 2.0 * s);
        default: return 840.0 * s * r * (5.0 * s * s - 5.0 * s + 1.0);
    }
}

double certified_core_supremum(int order) {
    if (order < 1 || order > 3) throw std::out_of_range("supremum order must be in 1..3");
    auto magnitude = [order](double s) { return std::abs(smoothstep7(s, order)); };

    double lo = 0.0;
    double hi = 1.0;
    int points = 100001;
    double best = 0.0;
    while (hi - lo > 1e-13) {
        const double step = (hi - lo) / (points - 1);
        double cell_best = -1.0;
        int best_index = 0;
        for (int k = 0; k < points; ++k) {
            const double value = magnitude(lo + k * step);
            if (value > cell_best) {
                cell_best = value;
                best_index = k;
            }
        }
        best = std::max(best, cell_best);
        const double centre = lo + best_index * step;
        lo = std::max(0.0, centre - step);
        hi = std::min(1.0, centre + step);
        points = 201;
    }
    return best;
}

double transition_eval(const TransitionFn& fn, double t, int order) {
    if (order < 0 || order > 3) throw std::out_of_range("derivative order must be in 0..3");
    if (!(fn.eta > 0.0)) throw std::invalid_argument("transition width eta must be positive");
    // Exact plateau tests keep f = 0 for t >= x (DropBefore) and F = 1 for
    // t <= x (DropAfter) regardless of rounding in the affine map.
    if (t <= fn.drop_start()) return order == 0 ? 1.0 : 0.0;
    if (t >= fn.drop_end()) return 0.0;
    const double s = (t - fn.drop_start()) / fn.eta;
    if (order == 0) return std::clamp(1.0 - smoothstep7(s, 0), 0.0, 1.0);
    return -smoothstep7(s, order) / std::pow(fn.eta, order);
}

DerivBoundCert transition_bounds(const TransitionFn& fn) {
    if (!(fn.eta > 0.0)) throw std::invalid_argument("transition width eta must be positive");
    const double eta = fn.eta;
    return {kCoreSup1 / eta, kCoreSup2 / (eta * eta), kCoreSup3 / (eta * eta * eta)};
}

double eta_for_epsilon(double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    return epsilon * std::sqrt(2.0 * std::numbers::pi);
}

double delta_for_epsilon(double epsilon, double sup_f3) {
    if (!(epsilon > 0.0) || !(sup_f3 > 0.0)) {
        throw std::invalid_argument("delta_for_epsilon needs positive epsilon and sup|f'''|");
    }
    return epsilon / sup_f3;
}

// TestFunction ---------------------------------------------------------------

namespace {

double parse_real(std::string_view text, std::string_view whole) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
        throw std::invalid_argument("malformed number '" + std::string(text) + "' in test function '" +
                                    std::string(whole) + "'");
    }
    return value;
}

std::string format_real(double value) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

}  // namespace

TestFunction TestFunction::transition(TransitionFn fn) {
    if (!(fn.eta > 0.0)) throw std::invalid_argument("transition width eta must be positive");
    TestFunction out;
    out.kind_ = Kind::Transition;
    out.fn_ = fn;
    return out;
}

TestFunction TestFunction::cosine(double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("cosine frequency must be positive");
    TestFunction out;
    out.kind_ = Kind::Cosine;
    out.omega_ = omega;
    return out;
}

TestFunction TestFunction::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw std::invalid_argument("test function '" + std::string(text) +
                                    "' must look like drop-before:X,ETA, drop-after:X,ETA or cos:OMEGA");
    }
    const auto name = text.substr(0, colon);
    const auto args = text.substr(colon + 1);
    if (name == "cos") return cosine(parse_real(args, text));
    if (name == "drop-before" || name == "drop-after") {
        const auto comma = args.find(',');
        if (comma == std::string_view::npos) {
            throw std::invalid_argument("transition '" + std::string(text) + "' needs X,ETA");
        }
        TransitionFn fn;
        fn.x = parse_real(args.substr(0, comma), text);
        fn.eta = parse_real(args.substr(comma + 1), text);
        fn.direction = name == "drop-before" ? DropDirection::DropBefore : DropDirection::DropAfter;
        return transition(fn);
    }
    throw std::invalid_argument("unknown test function '" + std::string(name) + "'");
}

std::string TestFunction::describe() const {
    if (kind_ == Kind::Cosine) return "cos:" + format_real(omega_);
    const char* name = fn_.direction == DropDirection::DropBefore ? "drop-before:" : "drop-after:";
    return name + format_real(fn_.x) + "," + format_real(fn_.eta);
}

double TestFunction::eval(double t, int order) const {
    if (kind_ == Kind::Transition) return transition_eval(fn_, t, order);
    const double arg = omega_ * t;
    switch (order) {
        case 0: return std::cos(arg);
        case 1: return -omega_ * std::sin(arg);
        case 2: return -omega_ * omega_ * std::cos(arg);
        case 3: return omega_ * omega_ * omega_ * std::sin(arg);
        default: throw std::out_of_range("derivative order must be in 0..3");
    }
}

DerivBoundCert TestFunction::bounds() const {
    if (kind_ == Kind::Transition) return transition_bounds(fn_);
    return {omega_, omega_ * omega_, omega_ * omega_ * omega_};
}

}  // namespace cltlab
