#include "cltlab/sampling.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <charconv>
#include <cmath>
#include <limits>

#include "cltlab/specfun.hpp"

namespace cltlab {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;

std::string format_double(double value) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

double parse_number(std::string_view text, std::string_view what, std::string_view whole) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw DistributionError("malformed " + std::string(what) + " '" + std::string(text) +
                                "' in distribution '" + std::string(whole) + "'");
    }
    return value;
}

// (|support point|, probability) pairs of the unscaled TwoPoint(p) law.
struct TwoPointSupport {
    double upper;
    double lower;
};

TwoPointSupport two_point_support(double p) {
    return {std::sqrt((1.0 - p) / p), std::sqrt(p / (1.0 - p))};
}

// E[(E - 1)^2; |E - 1| > c] for E ~ Exp(1), by adaptive Gauss-Kronrod.
double exp_centered_truncated(double c) {
    using Integrator = boost::math::quadrature::gauss_kronrod<double, 15>;
    auto integrand = [](double x) { return x * x * std::exp(-(x + 1.0)); };
    constexpr double kTol = 1e-12;
    constexpr unsigned kDepth = 12;
    // e^{-61} * poly is far below double resolution of the result.
    const double upper = c + 60.0;
    double total = Integrator::integrate(integrand, c, upper, kDepth, kTol);
    if (c < 1.0) total += Integrator::integrate(integrand, -1.0, -c, kDepth, kTol);
    return total;
}

}  // namespace

std::string_view kind_name(DistKind kind) {
    switch (kind) {
        case DistKind::Rademacher: return "rademacher";
        case DistKind::UniformSym: return "uniform";
        case DistKind::ExpCentered: return "exp";
        case DistKind::TwoPoint: return "twopoint";
        case DistKind::Normal: return "normal";
    }
    return "unknown";
}

void validate(const DistributionSpec& spec) {
    if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) {
        throw DistributionError("scale must be positive and finite, got " + format_double(spec.scale));
    }
    if (spec.kind == DistKind::TwoPoint &&
        !(spec.param >= kTwoPointMinP && spec.param <= kTwoPointMaxP)) {
        throw DistributionError("twopoint probability must lie in [0.01, 0.99], got " +
                                format_double(spec.param));
    }
    if (spec.kind == DistKind::Normal && !(spec.param >= 0.0 && std::isfinite(spec.param))) {
        throw DistributionError("normal variance must be finite and >= 0, got " + format_double(spec.param));
    }
}

DistributionSpec parse_distribution(std::string_view text) {
    DistributionSpec spec;
    std::string_view head = text;
    if (const auto star = text.find('*'); star != std::string_view::npos) {
        head = text.substr(0, star);
        spec.scale = parse_number(text.substr(star + 1), "scale", text);
    }
    std::string_view name = head;
    std::string_view param;
    bool has_param = false;
    if (const auto colon = head.find(':'); colon != std::string_view::npos) {
        name = head.substr(0, colon);
        param = head.substr(colon + 1);
        has_param = true;
    }

    if (name == "rademacher") {
        spec.kind = DistKind::Rademacher;
    } else if (name == "uniform") {
        spec.kind = DistKind::UniformSym;
    } else if (name == "exp") {
        spec.kind = DistKind::ExpCentered;
    } else if (name == "twopoint") {
        spec.kind = DistKind::TwoPoint;
        if (!has_param) throw DistributionError("twopoint needs a probability, e.g. 'twopoint:0.1'");
    } else if (name == "normal") {
        spec.kind = DistKind::Normal;
        spec.param = 1.0;
    } else {
        throw DistributionError("unknown distribution '" + std::string(name) +
                                "' (expected rademacher, uniform, exp, twopoint:P or normal[:V])");
    }

    if (has_param) {
        if (spec.kind != DistKind::TwoPoint && spec.kind != DistKind::Normal) {
            throw DistributionError("distribution '" + std::string(name) + "' takes no parameter");
        }
        spec.param = parse_number(param, "parameter", text);
    }
    validate(spec);
    return spec;
}

std::string to_string(const DistributionSpec& spec) {
    std::string out(kind_name(spec.kind));
    if (spec.kind == DistKind::TwoPoint || spec.kind == DistKind::Normal) {
        out += ':' + format_double(spec.param);
    }
    if (spec.scale != 1.0) out += '*' + format_double(spec.scale);
    return out;
}

double mean(const DistributionSpec&) { return 0.0; }

double variance(const DistributionSpec& spec) {
    const double s2 = spec.scale * spec.scale;
    return spec.kind == DistKind::Normal ? spec.param * s2 : s2;
}

double sample_dist(const DistributionSpec& spec, Rng& rng) {
    switch (spec.kind) {
        case DistKind::Rademacher:
            return rng.uniform() < 0.5 ? -spec.scale : spec.scale;
        case DistKind::UniformSym:
            return spec.scale * kSqrt3 * (2.0 * rng.uniform() - 1.0);
        case DistKind::ExpCentered:
            return spec.scale * (-std::log1p(-rng.uniform()) - 1.0);
        case DistKind::TwoPoint: {
            const auto support = two_point_support(spec.param);
            return rng.uniform() < spec.param ? spec.scale * support.upper : -spec.scale * support.lower;
        }
        case DistKind::Normal:
            if (spec.param == 0.0) return 0.0;
            return spec.scale * std::sqrt(spec.param) * rng.standard_normal();
    }
    return 0.0;
}

double truncated_second_moment(const DistributionSpec& spec, double c) {
    if (!(c >= 0.0)) throw std::invalid_argument("truncation level must be >= 0");
    const double s = spec.scale;
    switch (spec.kind) {
        case DistKind::Rademacher:
            return s > c ? s * s : 0.0;
        case DistKind::UniformSym: {
            const double edge = s * kSqrt3;
            if (c >= edge) return 0.0;
            const double r = c / edge;
            return s * s * (1.0 - r * r * r);
        }
        case DistKind::ExpCentered:
            return s * s * exp_centered_truncated(c / s);
        case DistKind::TwoPoint: {
            const double p = spec.param;
            const auto support = two_point_support(p);
            double total = 0.0;
            if (s * support.upper > c) total += p * (s * support.upper) * (s * support.upper);
            if (s * support.lower > c) total += (1.0 - p) * (s * support.lower) * (s * support.lower);
            return total;
        }
        case DistKind::Normal:
            return normal_truncated_second_moment(variance(spec), c);
    }
    return 0.0;
}

}  // namespace cltlab
