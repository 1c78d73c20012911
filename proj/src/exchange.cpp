#include "cltlab/exchange.hpp"

#include <algorithm>
#include <cmath>

#include "cltlab/parallel.hpp"

namespace cltlab {

namespace {

constexpr std::uint64_t kHybridStreamTag = 0x485942;
constexpr std::uint64_t kScanStreamTag = 0x534341;
constexpr std::uint64_t kEstimateStreamTag = 0x455354;
constexpr double kTailSlack = 1e-10;

void validate_chain(const ChainSpec& chain) {
    validate_row(chain.row);
    if (chain.samples < 2) throw ChainError("a chain needs at least 2 samples per point");
}

double companion_draw(double variance, Rng& rng) {
    return variance == 0.0 ? 0.0 : std::sqrt(variance) * rng.standard_normal();
}

// Per-chunk accumulators of the scan.
struct ScanPart {
    std::vector<MomentAccumulator> values;
    std::vector<MomentAccumulator> diffs;

    void merge(const ScanPart& other) {
        for (std::size_t i = 0; i < values.size(); ++i) values[i].merge(other.values[i]);
        for (std::size_t i = 0; i < diffs.size(); ++i) diffs[i].merge(other.diffs[i]);
    }
};

}  // namespace

ChainSpec ChainSpec::iid(const DistributionSpec& dist, std::uint64_t n, TestFunction f, std::uint64_t samples,
                         std::uint64_t seed) {
    ChainSpec chain;
    chain.row = ArrayFamily::iid(dist).row(n);
    chain.f = std::move(f);
    chain.samples = samples;
    chain.seed = seed;
    return chain;
}

double sample_hybrid(const ChainSpec& chain, std::size_t i, bool include_x_i, Rng& rng) {
    const std::size_t m = chain.length();
    if (include_x_i ? i > m : (i < 1 || i > m)) {
        throw std::out_of_range("hybrid index " + std::to_string(i) + " outside " +
                                (include_x_i ? "0.." : "1..") + std::to_string(m));
    }
    double sum = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
        const auto& entry = chain.row.entries[j - 1];
        if (j < i || (j == i && include_x_i)) {
            sum += sample_dist(entry, rng);
        } else if (j > i) {
            sum += companion_draw(variance(entry), rng);
        }
    }
    return sum;
}

std::vector<double> draw_hybrid_samples(const ChainSpec& chain, std::size_t i, bool include_x_i,
                                        unsigned workers) {
    validate_chain(chain);
    std::vector<double> out(chain.samples);
    for_each_chunk(chunk_count(chain.samples), workers, [&](std::size_t c) {
        Rng rng(chain.seed, chunk_stream(kHybridStreamTag, c));
        const std::uint64_t begin = c * kChunkSize;
        const std::uint64_t length = chunk_length(chain.samples, c);
        for (std::uint64_t k = 0; k < length; ++k) out[begin + k] = sample_hybrid(chain, i, include_x_i, rng);
    });
    return out;
}

MCEstimate estimate_expectation(const Sampler& sampler, const ScalarFn& f, std::uint64_t n_samples,
                                std::uint64_t seed, unsigned workers) {
    if (n_samples < 2) throw std::invalid_argument("estimate_expectation needs at least 2 samples");
    const std::size_t chunks = chunk_count(n_samples);
    std::vector<MomentAccumulator> parts(chunks);
    for_each_chunk(chunks, workers, [&](std::size_t c) {
        Rng rng(seed, chunk_stream(kEstimateStreamTag, c));
        const std::uint64_t length = chunk_length(n_samples, c);
        for (std::uint64_t k = 0; k < length; ++k) parts[c].add(f(sampler(rng)));
    });
    const MomentAccumulator total = reduce_moments(parts);
    return {total.mean, total.std_error(), n_samples, seed};
}

double per_swap_bound(double var_i, double tail_x, double tail_y, double epsilon, double M) {
    if (var_i < 0.0 || tail_x < 0.0 || tail_y < 0.0 || epsilon < 0.0 || M < 0.0) {
        throw ChainError("per_swap_bound inputs must be nonnegative");
    }
    if (tail_x > var_i + kTailSlack || tail_y > var_i + kTailSlack) {
        throw ChainError("truncated second moments cannot exceed the variance");
    }
    return epsilon * var_i + M * (tail_x + tail_y);
}

SwapChainReport swap_chain_scan(const ChainSpec& chain, double epsilon, unsigned workers) {
    validate_chain(chain);
    if (!(epsilon > 0.0)) throw ChainError("epsilon must be positive");
    const std::size_t m = chain.length();
    const auto variances = chain.row.variances();
    const TestFunction& f = chain.f;

    // Common random numbers: each sample draws X_1..X_m and Y_1..Y_m once and
    // evaluates f on every Z_{n,i} built from them.
    const std::size_t chunks = chunk_count(chain.samples);
    std::vector<ScanPart> parts(chunks);
    for_each_chunk(chunks, workers, [&](std::size_t c) {
        Rng rng(chain.seed, chunk_stream(kScanStreamTag, c));
        ScanPart& part = parts[c];
        part.values.resize(m + 1);
        part.diffs.resize(m);
        std::vector<double> xs(m), ys(m), normal_suffix(m + 1), fz(m + 1);
        const std::uint64_t length = chunk_length(chain.samples, c);
        for (std::uint64_t k = 0; k < length; ++k) {
            for (std::size_t j = 0; j < m; ++j) {
                xs[j] = sample_dist(chain.row.entries[j], rng);
                ys[j] = companion_draw(variances[j], rng);
            }
            normal_suffix[m] = 0.0;
            for (std::size_t j = m; j-- > 0;) normal_suffix[j] = normal_suffix[j + 1] + ys[j];
            double prefix = 0.0;
            for (std::size_t i = 0; i <= m; ++i) {
                if (i > 0) prefix += xs[i - 1];
                fz[i] = f(prefix + normal_suffix[i]);
                part.values[i].add(fz[i]);
                if (i > 0) part.diffs[i - 1].add(fz[i] - fz[i - 1]);
            }
        }
    });
    const ScanPart total =
        pairwise_reduce(std::span<const ScanPart>(parts), [](ScanPart& a, const ScanPart& b) { a.merge(b); });

    SwapChainReport report;
    report.row_label = "row n=" + std::to_string(chain.row.n_index) + " m=" + std::to_string(m);
    report.test_function = f.describe();
    report.n_samples = chain.samples;
    report.seed = chain.seed;
    report.epsilon = epsilon;
    const DerivBoundCert cert = f.bounds();
    report.sup_f3 = cert.sup_f3;
    report.M = cert.sup_f2;
    report.delta = delta_for_epsilon(epsilon, cert.sup_f3);

    report.estimates.reserve(m + 1);
    for (const auto& acc : total.values) {
        report.estimates.push_back({acc.mean, acc.std_error(), chain.samples, chain.seed});
    }
    double bound_sum = 0.0;
    double regime_sum = 0.0;
    double se_sum = 0.0;
    for (std::size_t i = 1; i <= m; ++i) {
        const double gap = report.estimates[i].mean - report.estimates[i - 1].mean;
        const double gap_se = total.diffs[i - 1].std_error();
        const auto& entry = chain.row.entries[i - 1];
        const double tail_x = truncated_second_moment(entry, report.delta);
        const double tail_y = normal_truncated_second_moment(variances[i - 1], report.delta);
        const double bound = per_swap_bound(variances[i - 1], tail_x, tail_y, epsilon, report.M);
        report.per_swap_gaps.push_back(gap);
        report.per_swap_gap_se.push_back(gap_se);
        report.per_swap_bounds.push_back(bound);
        report.regime_bounds.push_back(2.0 * epsilon * variances[i - 1]);
        if (std::abs(gap) > bound + kStatTolerance * gap_se) report.flagged.push_back(i);
        bound_sum += bound;
        regime_sum += 2.0 * epsilon * variances[i - 1];
        se_sum += gap_se;
    }
    report.total_gap = report.estimates[m].mean - report.estimates[0].mean;
    report.total_bound = bound_sum;
    report.regime_total_bound = regime_sum;
    report.total_se = se_sum;
    report.total_within_bound = std::abs(report.total_gap) <= report.total_bound + kStatTolerance * se_sum;
    return report;
}

SandwichResult sandwich_check(std::span<const double> sorted_samples, double x, double eta) {
    if (sorted_samples.empty()) throw std::invalid_argument("sandwich_check needs at least one sample");
    if (!(eta > 0.0)) throw std::invalid_argument("sandwich_check needs eta > 0");
    const TransitionFn below{x, eta, DropDirection::DropBefore};
    const TransitionFn above{x, eta, DropDirection::DropAfter};
    double lower = 0.0;
    double count = 0.0;
    double upper = 0.0;
    // Termwise f <= 1{t <= x} <= F, and rounded addition is monotone, so the
    // ordering survives the summation exactly.
    for (const double t : sorted_samples) {
        lower += transition_eval(below, t, 0);
        count += t <= x ? 1.0 : 0.0;
        upper += transition_eval(above, t, 0);
    }
    const double n = static_cast<double>(sorted_samples.size());
    return {lower / n, count / n, upper / n};
}

}  // namespace cltlab
