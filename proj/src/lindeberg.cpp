#include "cltlab/lindeberg.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cltlab/parallel.hpp"
#include "cltlab/specfun.hpp"

namespace cltlab {

namespace {

constexpr std::uint64_t kMomentStreamTag = 0x4D4F4D;

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

// Sums g(entry) over the row, reusing the previous value for runs of equal
// entries (iid rows have one run).
template <typename Fn>
double sum_over_entries(const TriangularRow& row, Fn g) {
    CompensatedSum total;
    const DistributionSpec* previous = nullptr;
    double previous_value = 0.0;
    for (const auto& entry : row.entries) {
        if (previous == nullptr || !(entry == *previous)) {
            previous_value = g(entry);
            previous = &entry;
        }
        total.add(previous_value);
    }
    return total.value();
}

std::string format_double(double value) {
    std::ostringstream out;
    out.precision(17);
    out << value;
    return out.str();
}

void require_unit_variance(const DistributionSpec& base) {
    validate(base);
    if (std::abs(variance(base) - 1.0) > kRowVarianceTolerance) {
        throw RowValidationError("array base distribution '" + to_string(base) +
                                 "' must have variance 1, has " + format_double(variance(base)));
    }
}

}  // namespace

std::vector<double> TriangularRow::variances() const {
    std::vector<double> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(variance(e));
    return out;
}

double TriangularRow::variance_sum() const {
    return sum_over_entries(*this, [](const DistributionSpec& e) { return variance(e); });
}

void validate_row(const TriangularRow& row) {
    if (row.entries.empty()) throw RowValidationError("row " + std::to_string(row.n_index) + " has no entries");
    for (std::size_t i = 0; i < row.entries.size(); ++i) {
        const auto& e = row.entries[i];
        try {
            validate(e);
        } catch (const DistributionError& err) {
            throw RowValidationError("row entry " + std::to_string(i + 1) + ": " + err.what());
        }
        if (mean(e) != 0.0) {
            throw RowValidationError("row entry " + std::to_string(i + 1) + " has nonzero mean " +
                                     format_double(mean(e)));
        }
    }
    const double total = row.variance_sum();
    if (std::abs(total - 1.0) > kRowVarianceTolerance) {
        throw RowValidationError("row " + std::to_string(row.n_index) + " variances sum to " +
                                 format_double(total) + ", expected 1");
    }
}

// ArrayFamily ----------------------------------------------------------------

ArrayFamily ArrayFamily::iid(DistributionSpec base) {
    require_unit_variance(base);
    ArrayFamily family;
    family.kind_ = Kind::Iid;
    family.base_ = base;
    return family;
}

ArrayFamily ArrayFamily::spike(DistributionSpec base) {
    require_unit_variance(base);
    ArrayFamily family;
    family.kind_ = Kind::Spike;
    family.base_ = base;
    return family;
}

ArrayFamily ArrayFamily::custom(std::vector<DistributionSpec> entries, std::string label) {
    ArrayFamily family;
    family.kind_ = Kind::Custom;
    family.custom_entries_ = std::move(entries);
    family.label_ = std::move(label);
    validate_row(family.row(1));
    return family;
}

ArrayFamily ArrayFamily::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw std::invalid_argument("array '" + std::string(text) +
                                    "' must look like iid:<dist>, spike:<dist> or custom:<path>");
    }
    const auto kind = text.substr(0, colon);
    const auto rest = text.substr(colon + 1);
    if (kind == "iid") return iid(parse_distribution(rest));
    if (kind == "spike") return spike(parse_distribution(rest));
    if (kind == "custom") return custom(load_custom_row(std::filesystem::path(std::string(rest))), std::string(rest));
    throw std::invalid_argument("unknown array kind '" + std::string(kind) + "' (expected iid, spike or custom)");
}

std::string ArrayFamily::describe() const {
    switch (kind_) {
        case Kind::Iid: return "iid:" + to_string(base_);
        case Kind::Spike: return "spike:" + to_string(base_);
        case Kind::Custom: return "custom:" + label_;
    }
    return {};
}

TriangularRow ArrayFamily::row(std::uint64_t n) const {
    if (n == 0) throw std::invalid_argument("row index n must be positive");
    TriangularRow out;
    out.n_index = n;
    const double nd = static_cast<double>(n);
    switch (kind_) {
        case Kind::Iid:
            out.entries.assign(n, base_.scaled_by(std::sqrt(1.0 / nd)));
            break;
        case Kind::Spike:
            out.entries.reserve(n + 1);
            out.entries.push_back(base_.scaled_by(std::sqrt(0.5)));
            out.entries.insert(out.entries.end(), n, base_.scaled_by(std::sqrt(0.5 / nd)));
            break;
        case Kind::Custom:
            out.entries = custom_entries_;
            break;
    }
    return out;
}

std::vector<DistributionSpec> parse_custom_row(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& err) {
        throw RowValidationError(std::string("custom row is not valid JSON: ") + err.what());
    }
    if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
        throw RowValidationError("custom row must be an object with an \"entries\" array");
    }
    std::vector<DistributionSpec> entries;
    for (const auto& item : doc["entries"]) {
        if (!item.is_object() || !item.contains("kind") || !item["kind"].is_string()) {
            throw RowValidationError("every custom row entry needs a string \"kind\"");
        }
        std::string text = item["kind"].get<std::string>();
        if (item.contains("param")) {
            std::ostringstream param;
            param.precision(17);
            param << item["param"].get<double>();
            text += ":" + param.str();
        }
        DistributionSpec spec = parse_distribution(text);
        if (item.contains("scale")) spec.scale = item["scale"].get<double>();
        validate(spec);
        if (item.contains("mean") && item["mean"].get<double>() != 0.0) {
            throw RowValidationError("custom row entry " + std::to_string(entries.size() + 1) +
                                     " declares nonzero mean " + format_double(item["mean"].get<double>()));
        }
        entries.push_back(spec);
    }
    return entries;
}

std::vector<DistributionSpec> load_custom_row(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read custom row file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_custom_row(buffer.str());
}

// Tail sums and bounds ---------------------------------------------------------

double lindeberg_tail_sum(const TriangularRow& row, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    return sum_over_entries(row, [delta](const DistributionSpec& e) { return truncated_second_moment(e, delta); });
}

std::pair<double, double> max_row_variance_bound(const TriangularRow& row, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    double max_variance = 0.0;
    for (const auto& e : row.entries) max_variance = std::max(max_variance, variance(e));
    return {max_variance, epsilon * epsilon + lindeberg_tail_sum(row, epsilon)};
}

TriangularRow companion_normal_row(const TriangularRow& row) {
    TriangularRow out;
    out.n_index = row.n_index;
    out.entries.reserve(row.entries.size());
    for (const auto& e : row.entries) out.entries.push_back(DistributionSpec::normal(variance(e)));
    return out;
}

NormalTailBound normal_tail_sum_bound(const TriangularRow& row, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    NormalTailBound out;
    double max_variance = 0.0;
    for (const auto& e : row.entries) max_variance = std::max(max_variance, variance(e));
    out.normal_tail_sum = sum_over_entries(
        row, [delta](const DistributionSpec& e) { return normal_truncated_second_moment(variance(e), delta); });
    out.normal_tail_bound = 3.0 * max_variance / (delta * delta);
    return out;
}

LindebergReport lindeberg_report(const TriangularRow& row, double delta) {
    LindebergReport report;
    report.n_index = row.n_index;
    report.delta = delta;
    report.tail_sum = lindeberg_tail_sum(row, delta);
    for (const auto& e : row.entries) report.max_variance = std::max(report.max_variance, variance(e));
    const auto normal = normal_tail_sum_bound(row, delta);
    report.normal_tail_sum = normal.normal_tail_sum;
    report.normal_tail_bound = normal.normal_tail_bound;
    return report;
}

std::string_view verdict_name(DecayVerdict verdict) {
    switch (verdict) {
        case DecayVerdict::Vanishing: return "vanishing";
        case DecayVerdict::NonVanishing: return "non-vanishing";
        case DecayVerdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

DecayVerdict classify_decay(std::span<const double> tail_sums_by_n) {
    if (tail_sums_by_n.size() < 2) return DecayVerdict::Inconclusive;
    const double first = tail_sums_by_n.front();
    const double last = tail_sums_by_n.back();
    if (last <= 0.1 * first) return DecayVerdict::Vanishing;
    const double lowest = *std::min_element(tail_sums_by_n.begin(), tail_sums_by_n.end());
    if (lowest > 0.1 * first) return DecayVerdict::NonVanishing;
    return DecayVerdict::Inconclusive;
}

// Moment identities ------------------------------------------------------------

namespace {

struct PowerSums {
    MomentAccumulator z1, z2, z3, z4;

    void merge(const PowerSums& other) {
        z1.merge(other.z1);
        z2.merge(other.z2);
        z3.merge(other.z3);
        z4.merge(other.z4);
    }
};

}  // namespace

MomentIdentity moment_identity_check(std::uint64_t n_samples, std::uint64_t seed, unsigned workers,
                                     bool antithetic) {
    if (n_samples < 10000) throw std::invalid_argument("moment_identity_check needs at least 1e4 samples");
    const std::size_t chunks = chunk_count(n_samples);
    std::vector<PowerSums> parts(chunks);
    for_each_chunk(chunks, workers, [&](std::size_t c) {
        Rng rng(seed, chunk_stream(kMomentStreamTag, c));
        PowerSums& acc = parts[c];
        const std::uint64_t length = chunk_length(n_samples, c);
        for (std::uint64_t k = 0; k < length; ++k) {
            const double z = rng.standard_normal();
            const double z2 = z * z;
            if (antithetic) {
                // The pair (z, -z) averaged: odd powers cancel exactly.
                acc.z1.add(0.5 * (z + -z));
                acc.z3.add(0.5 * (z * z2 + -z * z2));
            } else {
                acc.z1.add(z);
                acc.z3.add(z * z2);
            }
            acc.z2.add(z2);
            acc.z4.add(z2 * z2);
        }
    });
    const PowerSums total = pairwise_reduce(std::span<const PowerSums>(parts),
                                            [](PowerSums& a, const PowerSums& b) { a.merge(b); });
    MomentIdentity out;
    out.first = total.z1.mean;
    out.second = total.z2.mean;
    out.second_se = total.z2.std_error();
    out.third = total.z3.mean;
    out.fourth = total.z4.mean;
    out.fourth_se = total.z4.std_error();
    out.n_samples = n_samples;
    out.seed = seed;
    return out;
}

}  // namespace cltlab
