#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cltlab/lindeberg.hpp"
#include "cltlab/sampling.hpp"

namespace cltlab {

/// Asymptotic Kolmogorov critical values c with P(sqrt(N) D_N > c) = alpha.
inline constexpr double kKolmogorov99 = 1.63;
inline constexpr double kKolmogorov999 = 1.95;
/// Largest n for which the binomial oracle is exact in 128-bit integers.
inline constexpr std::uint64_t kMaxExactRademacherN = 64;

class EmpiricalSample {
public:
    /// Sorts `values`; throws when empty.
    EmpiricalSample(std::vector<double> values, std::string source = {}, std::uint64_t seed = 0);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    const std::string& source() const noexcept { return source_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::vector<double> values_;
    std::string source_;
    std::uint64_t seed_ = 0;
};

/// Fraction of values <= t.
double empirical_cdf(const EmpiricalSample& sample, double t);

/// sup_t |F_hat(t) - Phi(t)|, exact over the sorted values.
double ks_distance_to_normal(const EmpiricalSample& sample);

/// P((X_1 + ... + X_n)/sqrt(n) <= t) for Rademacher X_i, n <= 64.
double rademacher_exact_cdf(std::uint64_t n, double t);

/// Exact Kolmogorov distance between the normalized Rademacher sum and Phi.
double exact_ks_rademacher(std::uint64_t n);

struct ConvergenceRow {
    std::uint64_t n = 0;
    double ks_distance = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
    /// Present when an exact oracle applies (Rademacher iid, n <= 64).
    std::optional<double> exact_ks;
};

struct ConvergenceReport {
    std::string dist;
    std::vector<ConvergenceRow> rows;
};

/// N draws of the row sum X_{n,1} + ... + X_{n,m}, sorted.
EmpiricalSample sample_row_sums(const TriangularRow& row, std::uint64_t n_samples, std::uint64_t seed,
                                std::uint64_t stream_tag, unsigned workers = 1);

/// KS distance of row sums to Phi for each n on the grid. Throws for N < 1e4.
ConvergenceReport clt_convergence_scan(const ArrayFamily& family, std::span<const std::uint64_t> n_grid,
                                       std::uint64_t n_samples, std::uint64_t seed, unsigned workers = 1);

/// The iid case: normalized sums (X_1 + ... + X_n)/sqrt(n). Throws when dist
/// does not have unit variance.
ConvergenceReport clt_convergence_scan(const DistributionSpec& dist, std::span<const std::uint64_t> n_grid,
                                       std::uint64_t n_samples, std::uint64_t seed, unsigned workers = 1);

/// True when the values strictly decrease along the sequence.
bool strictly_decreasing(std::span<const double> values);

}  // namespace cltlab
