#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cltlab/sampling.hpp"

namespace cltlab {

/// Tolerance on |sum of row variances - 1|.
inline constexpr double kRowVarianceTolerance = 1e-10;

/// One row X_{n,1}, ..., X_{n,m} of a triangular array.
struct TriangularRow {
    std::vector<DistributionSpec> entries;
    std::uint64_t n_index = 1;

    std::size_t size() const noexcept { return entries.size(); }
    std::vector<double> variances() const;
    /// Compensated sum of entry variances.
    double variance_sum() const;
};

class RowValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Throws RowValidationError when the row is empty, an entry is invalid or
/// not mean-zero, or the variances do not sum to 1.
void validate_row(const TriangularRow& row);

/// Generates row n of a named triangular array.
///
///   iid:<dist>    n copies of dist at scale 1/sqrt(n)
///   spike:<dist>  one copy at scale 1/sqrt(2), n copies at scale 1/sqrt(2n)
///   custom:<path> the same JSON-specified row for every n
///
/// The base distribution of iid and spike must have unit variance.
class ArrayFamily {
public:
    enum class Kind { Iid, Spike, Custom };

    static ArrayFamily iid(DistributionSpec base);
    static ArrayFamily spike(DistributionSpec base);
    static ArrayFamily custom(std::vector<DistributionSpec> entries, std::string label);
    /// Parses `iid:<dist>`, `spike:<dist>` or `custom:<path>` (loads the file).
    static ArrayFamily parse(std::string_view text);

    Kind kind() const noexcept { return kind_; }
    const DistributionSpec& base() const noexcept { return base_; }
    std::string describe() const;

    TriangularRow row(std::uint64_t n) const;

private:
    Kind kind_ = Kind::Iid;
    DistributionSpec base_{};
    std::vector<DistributionSpec> custom_entries_;
    std::string label_;
};

/// Reads a custom row: {"entries": [{"kind": "twopoint", "param": 0.1,
/// "scale": 0.5, "mean": 0}, ...]}. "param", "scale" (default 1) and "mean"
/// (must be 0 when present) are optional.
std::vector<DistributionSpec> load_custom_row(const std::filesystem::path& path);
std::vector<DistributionSpec> parse_custom_row(std::string_view json_text);

/// sum_i E[X_{n,i}^2; |X_{n,i}| > delta].
double lindeberg_tail_sum(const TriangularRow& row, double delta);

/// (max_i E[X_{n,i}^2], eps^2 + lindeberg_tail_sum(row, eps)); the first never
/// exceeds the second.
std::pair<double, double> max_row_variance_bound(const TriangularRow& row, double epsilon);

/// Row of Normal(v_i) entries with v_i the variances of `row`.
TriangularRow companion_normal_row(const TriangularRow& row);

struct NormalTailBound {
    /// sum_i E[Y_i^2; |Y_i| > delta] for the companion normals.
    double normal_tail_sum = 0.0;
    /// 3 delta^-2 max_i v_i.
    double normal_tail_bound = 0.0;

    bool holds() const noexcept { return normal_tail_sum <= normal_tail_bound + 1e-10; }
};

NormalTailBound normal_tail_sum_bound(const TriangularRow& row, double delta);

struct LindebergReport {
    std::uint64_t n_index = 0;
    double delta = 0.0;
    double tail_sum = 0.0;
    double max_variance = 0.0;
    double normal_tail_sum = 0.0;
    double normal_tail_bound = 0.0;
};

LindebergReport lindeberg_report(const TriangularRow& row, double delta);

enum class DecayVerdict { Vanishing, NonVanishing, Inconclusive };

std::string_view verdict_name(DecayVerdict verdict);

/// Finite-grid heuristic for the limit of the tail sums, ordered by n:
/// vanishing when the last value is at most a tenth of the first,
/// non-vanishing when every value stays above a tenth of the first,
/// inconclusive otherwise.
DecayVerdict classify_decay(std::span<const double> tail_sums_by_n);

struct MomentIdentity {
    double second = 0.0;
    double second_se = 0.0;
    double fourth = 0.0;
    double fourth_se = 0.0;
    double first = 0.0;
    double third = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
};

/// Monte Carlo E[Z^k], k = 1..4, for the library's standard normal sampler.
/// With `antithetic`, each draw z also contributes -z and the odd moments
/// are exactly zero; n_samples then counts pairs.
MomentIdentity moment_identity_check(std::uint64_t n_samples, std::uint64_t seed, unsigned workers = 1,
                                     bool antithetic = false);

}  // namespace cltlab
