#include "cltlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cltlab/parallel.hpp"
#include "cltlab/specfun.hpp"

namespace cltlab {

namespace {

constexpr std::uint64_t kConvergenceStreamTag = 0xC1 << 16;

__extension__ using Count = unsigned __int128;

void check_exact_range(std::uint64_t n) {
    if (n < 1 || n > kMaxExactRademacherN) {
        throw std::out_of_range("exact Rademacher oracle needs 1 <= n <= 64, got " + std::to_string(n));
    }
}

// Cumulative binomial counts sum_{j<=k} C(n, j) for k = 0..n.
std::vector<Count> cumulative_binomial(std::uint64_t n) {
    std::vector<Count> cumulative(n + 1);
    Count coefficient = 1;
    Count running = 0;
    for (std::uint64_t k = 0; k <= n; ++k) {
        running += coefficient;
        cumulative[k] = running;
        coefficient = coefficient * (n - k) / (k + 1);
    }
    return cumulative;
}

double to_probability(Count count, std::uint64_t n) {
    return static_cast<double>(std::ldexp(static_cast<long double>(count), -static_cast<int>(n)));
}

double lattice_point(std::uint64_t n, std::uint64_t k) {
    return (2.0 * static_cast<double>(k) - static_cast<double>(n)) / std::sqrt(static_cast<double>(n));
}

}  // namespace

EmpiricalSample::EmpiricalSample(std::vector<double> values, std::string source, std::uint64_t seed)
    : values_(std::move(values)), source_(std::move(source)), seed_(seed) {
    if (values_.empty()) throw std::invalid_argument("an empirical sample needs at least one value");
    std::sort(values_.begin(), values_.end());
}

double empirical_cdf(const EmpiricalSample& sample, double t) {
    const auto values = sample.values();
    const auto upto = std::upper_bound(values.begin(), values.end(), t) - values.begin();
    return static_cast<double>(upto) / static_cast<double>(values.size());
}

double ks_distance_to_normal(const EmpiricalSample& sample) {
    const auto values = sample.values();
    const double n = static_cast<double>(values.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double phi = normal_cdf(values[i]);
        const double above = static_cast<double>(i + 1) / n - phi;
        const double below = phi - static_cast<double>(i) / n;
        sup = std::max({sup, std::abs(above), std::abs(below)});
    }
    return sup;
}

double rademacher_exact_cdf(std::uint64_t n, double t) {
    check_exact_range(n);
    const auto cumulative = cumulative_binomial(n);
    // Support points increase with k; find the last one <= t.
    std::int64_t last = -1;
    for (std::uint64_t k = 0; k <= n; ++k) {
        if (lattice_point(n, k) <= t) last = static_cast<std::int64_t>(k);
    }
    return last < 0 ? 0.0 : to_probability(cumulative[static_cast<std::size_t>(last)], n);
}

double exact_ks_rademacher(std::uint64_t n) {
    check_exact_range(n);
    const auto cumulative = cumulative_binomial(n);
    double sup = 0.0;
    double before = 0.0;
    for (std::uint64_t k = 0; k <= n; ++k) {
        const double phi = normal_cdf(lattice_point(n, k));
        const double at = to_probability(cumulative[k], n);
        sup = std::max({sup, std::abs(at - phi), std::abs(before - phi)});
        before = at;
    }
    return sup;
}

EmpiricalSample sample_row_sums(const TriangularRow& row, std::uint64_t n_samples, std::uint64_t seed,
                                std::uint64_t stream_tag, unsigned workers) {
    validate_row(row);
    std::vector<double> sums(n_samples);
    for_each_chunk(chunk_count(n_samples), workers, [&](std::size_t c) {
        Rng rng(seed, chunk_stream(stream_tag, c));
        const std::uint64_t begin = c * kChunkSize;
        const std::uint64_t length = chunk_length(n_samples, c);
        for (std::uint64_t k = 0; k < length; ++k) {
            double sum = 0.0;
            for (const auto& entry : row.entries) sum += sample_dist(entry, rng);
            sums[begin + k] = sum;
        }
    });
    return EmpiricalSample(std::move(sums), "row n=" + std::to_string(row.n_index), seed);
}

ConvergenceReport clt_convergence_scan(const ArrayFamily& family, std::span<const std::uint64_t> n_grid,
                                       std::uint64_t n_samples, std::uint64_t seed, unsigned workers) {
    if (n_samples < 10000) throw std::invalid_argument("clt_convergence_scan needs at least 1e4 samples");
    const bool has_oracle = family.kind() == ArrayFamily::Kind::Iid &&
                            family.base() == DistributionSpec::rademacher();
    ConvergenceReport report;
    report.dist = family.describe();
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        const std::uint64_t n = n_grid[g];
        const auto sample = sample_row_sums(family.row(n), n_samples, seed, kConvergenceStreamTag | g, workers);
        ConvergenceRow row;
        row.n = n;
        row.ks_distance = ks_distance_to_normal(sample);
        row.n_samples = n_samples;
        row.seed = seed;
        if (has_oracle && n <= kMaxExactRademacherN) row.exact_ks = exact_ks_rademacher(n);
        report.rows.push_back(row);
    }
    return report;
}

ConvergenceReport clt_convergence_scan(const DistributionSpec& dist, std::span<const std::uint64_t> n_grid,
                                       std::uint64_t n_samples, std::uint64_t seed, unsigned workers) {
    return clt_convergence_scan(ArrayFamily::iid(dist), n_grid, n_samples, seed, workers);
}

bool strictly_decreasing(std::span<const double> values) {
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] < values[i - 1])) return false;
    }
    return true;
}

}  // namespace cltlab
