#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cltlab/lindeberg.hpp"
#include "cltlab/rng.hpp"
#include "cltlab/specfun.hpp"

namespace cltlab {

/// Pass/fail slack for every Monte Carlo comparison, in standard errors.
inline constexpr double kStatTolerance = 4.0;

/// A swap chain Z_{n,m}, ..., Z_{n,0} over one triangular row, with
/// Z_{n,i} = X_1 + ... + X_i + Y_{i+1} + ... + Y_m and Y_j ~ N(0, Var X_j).
struct ChainSpec {
    TriangularRow row;
    TestFunction f = TestFunction::transition({0.0, 0.5, DropDirection::DropBefore});
    std::uint64_t samples = 100000;
    std::uint64_t seed = 42;

    /// n copies of dist / sqrt(n).
    static ChainSpec iid(const DistributionSpec& dist, std::uint64_t n, TestFunction f, std::uint64_t samples,
                         std::uint64_t seed);

    std::size_t length() const noexcept { return row.size(); }
};

struct MCEstimate {
    double mean = 0.0;
    /// Sample standard deviation / sqrt(n_samples).
    double std_error = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
};

struct SwapChainReport {
    std::string row_label;
    std::string test_function;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;

    /// estimates[i] estimates E[f(Z_{n,i})], i = 0..m.
    std::vector<MCEstimate> estimates;
    /// Signed gaps estimates[i].mean - estimates[i-1].mean, stored at i-1.
    std::vector<double> per_swap_gaps;
    /// Standard error of each gap from the paired (common random number) differences.
    std::vector<double> per_swap_gap_se;
    /// eps Var X_i + M (E[X_i^2; |X_i| > delta] + E[Y_i^2; |Y_i| > delta]).
    std::vector<double> per_swap_bounds;
    /// 2 eps Var X_i: the large-n regime bound.
    std::vector<double> regime_bounds;
    /// 1-based swap indices with |gap| > bound + 4 se.
    std::vector<std::size_t> flagged;

    double total_gap = 0.0;
    double total_bound = 0.0;
    double total_se = 0.0;
    double regime_total_bound = 0.0;
    bool total_within_bound = true;

    double epsilon = 0.0;
    double delta = 0.0;
    double M = 0.0;
    double sup_f3 = 0.0;

    bool passed() const noexcept { return flagged.empty() && total_within_bound; }
};

class ChainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// One draw of S_{n,i} (include_x_i = false, 1 <= i <= m) or Z_{n,i}
/// (include_x_i = true, 0 <= i <= m). Terms are drawn in index order.
double sample_hybrid(const ChainSpec& chain, std::size_t i, bool include_x_i, Rng& rng);

/// N independent draws of a hybrid sum; chunk c uses substream c.
std::vector<double> draw_hybrid_samples(const ChainSpec& chain, std::size_t i, bool include_x_i,
                                        unsigned workers = 1);

using Sampler = std::function<double(Rng&)>;
using ScalarFn = std::function<double(double)>;

/// Mean and standard error of f over N seeded draws. Throws for N < 2.
MCEstimate estimate_expectation(const Sampler& sampler, const ScalarFn& f, std::uint64_t n_samples,
                                std::uint64_t seed, unsigned workers = 1);

/// eps * var_i + M * (tail_x + tail_y). Throws ChainError on negative inputs
/// or tails exceeding var_i.
double per_swap_bound(double var_i, double tail_x, double tail_y, double epsilon, double M);

/// Estimates E[f(Z_{n,i})] for every i from one shared set of draws, with
/// delta = eps / sup|f'''| and M = sup|f''| feeding the per-swap bounds.
SwapChainReport swap_chain_scan(const ChainSpec& chain, double epsilon, unsigned workers = 1);

struct SandwichResult {
    /// Empirical mean of DropBefore(x, eta).
    double lower = 0.0;
    /// Fraction of samples <= x.
    double empirical = 0.0;
    /// Empirical mean of DropAfter(x, eta).
    double upper = 0.0;
};

SandwichResult sandwich_check(std::span<const double> sorted_samples, double x, double eta);

}  // namespace cltlab
