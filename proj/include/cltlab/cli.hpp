#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cltlab/exchange.hpp"
#include "cltlab/lindeberg.hpp"
#include "cltlab/stats.hpp"

namespace cltlab::cli {

inline constexpr std::string_view kToolName = "cltlab";
inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr const char* kSeedEnv = "CLT_LAB_SEED";

enum class Subcommand { Phi, Transition, SwapChain, Lindeberg, CltVerify, Moments };
enum class Format { Json, Csv };
enum class Verdict { Pass, Fail, Informational };

std::string_view subcommand_name(Subcommand sub);
std::optional<Subcommand> parse_subcommand(std::string_view name);
std::string_view verdict_name(Verdict verdict);
Verdict parse_verdict(std::string_view name);

/// Exit 2. The message is a single line that ends with a remedy.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exit 3.
class IoError : public std::runtime_error {
public:
    IoError(const std::string& path, const std::string& what)
        : std::runtime_error(what + ": " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// --help or --version; the text goes to stdout with exit 0.
struct InfoRequested {
    std::string text;
};

struct RunConfig {
    Subcommand subcommand = Subcommand::Phi;
    /// Canonical string form of every result-affecting flag. This is what the
    /// report header echoes.
    std::map<std::string, std::string> parameters;
    std::uint64_t seed = kDefaultSeed;
    Format format = Format::Json;
    std::optional<std::string> out;
    unsigned workers = 1;

    const std::string& param(const std::string& key) const { return parameters.at(key); }
    bool has(const std::string& key) const { return parameters.count(key) != 0; }
};

/// args excludes the program name. env_seed is the value of CLT_LAB_SEED or
/// null. Throws UsageError, IoError (unreadable --config) or InfoRequested.
RunConfig parse_args(const std::vector<std::string>& args, const char* env_seed = nullptr);

/// Comma-separated numbers; each accepts scientific notation.
std::vector<double> parse_real_list(std::string_view text, std::string_view flag);
/// Non-negative integers, also as `1e6`; rejects fractions.
std::vector<std::uint64_t> parse_count_list(std::string_view text, std::string_view flag);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct Report {
    /// {"tool", "version", "subcommand", "seed", "parameters"}.
    nlohmann::json header;
    nlohmann::json body;
    Verdict verdict = Verdict::Informational;
    CsvTable table;

    int exit_code() const noexcept { return verdict == Verdict::Fail ? 1 : 0; }
};

Report run(const RunConfig& config);

nlohmann::json make_header(const RunConfig& config);
std::string emit_json(const Report& report);
/// Inverse of emit_json for the header, body and verdict.
Report parse_report(std::string_view json_text);
/// A `#` line carrying the header and verdict, then the table.
std::string emit_csv(const Report& report);
std::string emit(const Report& report, Format format);

/// Shortest round-trip decimal form.
std::string format_real(double value);

/// Whole command line: parse, run, write. Returns the process exit code.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               const char* env_seed = nullptr);

}  // namespace cltlab::cli

namespace cltlab {

void to_json(nlohmann::json& j, const MCEstimate& e);
void from_json(const nlohmann::json& j, MCEstimate& e);
void to_json(nlohmann::json& j, const SwapChainReport& r);
void from_json(const nlohmann::json& j, SwapChainReport& r);
void to_json(nlohmann::json& j, const LindebergReport& r);
void from_json(const nlohmann::json& j, LindebergReport& r);
void to_json(nlohmann::json& j, const ConvergenceRow& r);
void from_json(const nlohmann::json& j, ConvergenceRow& r);
void to_json(nlohmann::json& j, const ConvergenceReport& r);
void from_json(const nlohmann::json& j, ConvergenceReport& r);
void to_json(nlohmann::json& j, const MomentIdentity& m);
void from_json(const nlohmann::json& j, MomentIdentity& m);

}  // namespace cltlab
