#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "cltlab/cli.hpp"

namespace cltlab::cli {

namespace {

constexpr std::string_view kDistRemedy =
    "expected kind[:param][*scale] with kind one of rademacher, uniform, exp, twopoint:P, normal[:V]";

struct FlagSpec {
    std::string name;
    std::string help;
};

// Flags taken by every subcommand.
const std::vector<FlagSpec> kCommonFlags = {
    {"format", "json (default) or csv"},
    {"out", "write the report to PATH instead of stdout"},
    {"workers", "parallel width; results do not depend on it"},
    {"seed", "master seed (default: $CLT_LAB_SEED, else 42)"},
    {"config", "JSON object of flag values; command-line flags win"},
};

std::vector<FlagSpec> subcommand_flags(Subcommand sub) {
    switch (sub) {
        case Subcommand::Phi:
            return {{"t", "evaluation points, comma separated (default -3,-2,-1,0,1,2,3)"}};
        case Subcommand::Transition:
            return {{"x", "threshold (default 0)"},
                    {"eta", "transition width (default 1)"},
                    {"epsilon", "pick eta = epsilon * sqrt(2 pi) instead of --eta"},
                    {"direction", "drop-before (default) or drop-after"},
                    {"points", "number of grid points (default 101)"},
                    {"range", "grid interval A,B (default: transition zone widened by eta)"}};
        case Subcommand::SwapChain:
            return {{"dist", "summand law, e.g. rademacher or twopoint:0.1 (required)"},
                    {"n", "row length (default 32)"},
                    {"layout", "iid (default) or spike"},
                    {"epsilon", "accuracy parameter of the bounds (default 0.1)"},
                    {"test-fn", "drop-before:X,ETA, drop-after:X,ETA or cos:W (default drop-before:0,0.5)"},
                    {"samples", "Monte Carlo draws per chain point (default 1e5)"}};
        case Subcommand::Lindeberg:
            return {{"array", "iid:<dist>, spike:<dist> or custom:<path> (required)"},
                    {"n", "row indices (default 10,100,1000)"},
                    {"delta", "truncation levels (default 0.5,0.1)"}};
        case Subcommand::CltVerify:
            return {{"dist", "iid summand law with unit variance"},
                    {"array", "triangular array, as for lindeberg"},
                    {"n", "row indices (default 1,4,16,64)"},
                    {"samples", "draws per row, at least 1e4 (default 1e5)"}};
        case Subcommand::Moments:
            return {{"samples", "normal draws, at least 1e4 (default 1e6)"}};
    }
    return {};
}

std::string help_remedy(Subcommand sub) {
    return "run 'cltlab " + std::string(subcommand_name(sub)) + " --help' for the accepted flags";
}

std::string first_line(std::string_view text) {
    const auto end = text.find('\n');
    return std::string(text.substr(0, end));
}

std::string trim(std::string_view text) {
    const auto begin = text.find_first_not_of(" \t");
    if (begin == std::string_view::npos) return {};
    const auto end = text.find_last_not_of(" \t");
    return std::string(text.substr(begin, end - begin + 1));
}

double parse_real(std::string_view text, std::string_view flag) {
    const std::string item = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size() || !std::isfinite(value)) {
        throw UsageError("--" + std::string(flag) + ": '" + std::string(text) +
                         "' is not a number; use forms like 0.5, 1e-3 or a comma list 0.5,0.1");
    }
    return value;
}

std::uint64_t parse_count(std::string_view text, std::string_view flag) {
    const double value = parse_real(text, flag);
    // Integers up to 2^53 are exact in double.
    if (value < 0.0 || value != std::floor(value) || value > 9007199254740992.0) {
        throw UsageError("--" + std::string(flag) + ": '" + std::string(text) +
                         "' is not a non-negative integer; use forms like 1000 or 1e6");
    }
    return static_cast<std::uint64_t>(value);
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
    return out;
}

std::string canonical_reals(const std::vector<double>& values) {
    std::vector<std::string> items;
    for (double v : values) items.push_back(format_real(v));
    return join(items);
}

std::string canonical_counts(const std::vector<std::uint64_t>& values) {
    std::vector<std::string> items;
    for (auto v : values) items.push_back(std::to_string(v));
    return join(items);
}

double positive_real(std::string_view text, std::string_view flag) {
    const double v = parse_real(text, flag);
    if (!(v > 0.0)) throw UsageError("--" + std::string(flag) + " must be positive, got " + std::string(text));
    return v;
}

std::uint64_t count_at_least(std::string_view text, std::string_view flag, std::uint64_t minimum) {
    const auto v = parse_count(text, flag);
    if (v < minimum) {
        throw UsageError("--" + std::string(flag) + " must be at least " + std::to_string(minimum) + ", got " +
                         std::string(text));
    }
    return v;
}

std::string canonical_dist(std::string_view text) {
    try {
        return to_string(parse_distribution(text));
    } catch (const DistributionError& err) {
        throw UsageError("--dist: " + std::string(err.what()) + "; " + std::string(kDistRemedy));
    }
}

std::string canonical_array(std::string_view text) {
    try {
        return ArrayFamily::parse(text).describe();
    } catch (const DistributionError& err) {
        throw UsageError("--array: " + std::string(err.what()) + "; " + std::string(kDistRemedy));
    } catch (const std::invalid_argument& err) {
        throw UsageError("--array: " + std::string(err.what()) +
                         "; use iid:<dist>, spike:<dist> or custom:<path> with a unit-variance dist");
    } catch (const std::runtime_error&) {
        const auto colon = text.find(':');
        throw IoError(std::string(text.substr(colon + 1)), "cannot read custom array file");
    }
}

std::string config_value(const nlohmann::json& value, const std::string& key, const std::string& path) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer() || value.is_number_unsigned()) return value.dump();
    if (value.is_number_float()) return format_real(value.get<double>());
    if (value.is_array()) {
        std::vector<std::string> items;
        for (const auto& item : value) {
            if (item.is_array() || item.is_object()) break;
            items.push_back(config_value(item, key, path));
        }
        if (items.size() == value.size()) return join(items);
    }
    throw UsageError("config " + path + ": value of '" + key +
                     "' must be a string, a number or a list of numbers");
}

nlohmann::json read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot read config file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(buffer.str());
    } catch (const nlohmann::json::parse_error& err) {
        throw UsageError("config " + path + " is not valid JSON (" + first_line(err.what()) +
                         "); expected an object like {\"n\": [10, 100], \"seed\": 7}");
    }
    if (!doc.is_object()) {
        throw UsageError("config " + path + " must be a JSON object mapping flag names to values");
    }
    return doc;
}

// Applies defaults and validation, turning raw flag strings into canonical
// parameters.
void normalize(Subcommand sub, std::map<std::string, std::string>& raw, RunConfig& config) {
    auto take = [&](const std::string& key, std::string fallback = {}) {
        const auto it = raw.find(key);
        return it == raw.end() ? fallback : it->second;
    };
    auto require = [&](const std::string& key, std::string_view example) {
        const auto it = raw.find(key);
        if (it == raw.end()) {
            throw UsageError("missing required flag --" + key + " for " + std::string(subcommand_name(sub)) +
                             "; add e.g. --" + key + " " + std::string(example));
        }
        return it->second;
    };
    auto& p = config.parameters;

    switch (sub) {
        case Subcommand::Phi: {
            const auto ts = parse_real_list(take("t", "-3,-2,-1,0,1,2,3"), "t");
            p["t"] = canonical_reals(ts);
            break;
        }
        case Subcommand::Transition: {
            if (raw.count("eta") && raw.count("epsilon")) {
                throw UsageError("--eta and --epsilon both set the width; pass only one of them");
            }
            p["x"] = format_real(parse_real(take("x", "0"), "x"));
            if (raw.count("epsilon")) {
                p["epsilon"] = format_real(positive_real(take("epsilon"), "epsilon"));
            } else {
                p["eta"] = format_real(positive_real(take("eta", "1"), "eta"));
            }
            const auto direction = take("direction", "drop-before");
            if (direction != "drop-before" && direction != "drop-after") {
                throw UsageError("--direction must be drop-before or drop-after, got '" + direction + "'");
            }
            p["direction"] = direction;
            p["points"] = std::to_string(count_at_least(take("points", "101"), "points", 2));
            if (raw.count("range")) {
                const auto range = parse_real_list(take("range"), "range");
                if (range.size() != 2 || !(range[0] < range[1])) {
                    throw UsageError("--range needs two increasing numbers A,B, e.g. --range -2,2");
                }
                p["range"] = canonical_reals(range);
            }
            break;
        }
        case Subcommand::SwapChain: {
            const auto dist = canonical_dist(require("dist", "rademacher"));
            p["dist"] = dist;
            p["n"] = std::to_string(count_at_least(take("n", "32"), "n", 1));
            const auto layout = take("layout", "iid");
            if (layout != "iid" && layout != "spike") {
                throw UsageError("--layout must be iid or spike, got '" + layout + "'");
            }
            p["layout"] = layout;
            // Checks unit variance of the base law.
            canonical_array(layout + ":" + dist);
            p["epsilon"] = format_real(positive_real(take("epsilon", "0.1"), "epsilon"));
            try {
                p["test-fn"] = TestFunction::parse(take("test-fn", "drop-before:0,0.5")).describe();
            } catch (const std::invalid_argument& err) {
                throw UsageError("--test-fn: " + std::string(err.what()) +
                                 "; use drop-before:X,ETA, drop-after:X,ETA or cos:W");
            }
            p["samples"] = std::to_string(count_at_least(take("samples", "1e5"), "samples", 2));
            break;
        }
        case Subcommand::Lindeberg: {
            p["array"] = canonical_array(require("array", "iid:rademacher"));
            const auto ns = parse_count_list(take("n", "10,100,1000"), "n");
            for (auto n : ns) {
                if (n == 0) throw UsageError("--n entries must be at least 1");
            }
            p["n"] = canonical_counts(ns);
            const auto deltas = parse_real_list(take("delta", "0.5,0.1"), "delta");
            for (double d : deltas) {
                if (!(d > 0.0)) throw UsageError("--delta entries must be positive, e.g. --delta 0.5,0.1");
            }
            p["delta"] = canonical_reals(deltas);
            break;
        }
        case Subcommand::CltVerify: {
            const bool has_dist = raw.count("dist") != 0;
            const bool has_array = raw.count("array") != 0;
            if (has_dist == has_array) {
                throw UsageError(std::string(has_dist ? "--dist and --array are exclusive" : "missing --dist") +
                                 " for clt-verify; pass exactly one, e.g. --dist rademacher");
            }
            if (has_dist) {
                p["dist"] = canonical_dist(take("dist"));
                canonical_array("iid:" + p["dist"]);
            } else {
                p["array"] = canonical_array(take("array"));
            }
            const auto ns = parse_count_list(take("n", "1,4,16,64"), "n");
            for (auto n : ns) {
                if (n == 0) throw UsageError("--n entries must be at least 1");
            }
            p["n"] = canonical_counts(ns);
            p["samples"] = std::to_string(count_at_least(take("samples", "1e5"), "samples", 10000));
            break;
        }
        case Subcommand::Moments:
            p["samples"] = std::to_string(count_at_least(take("samples", "1e6"), "samples", 10000));
            break;
    }
}

}  // namespace

std::string_view subcommand_name(Subcommand sub) {
    switch (sub) {
        case Subcommand::Phi: return "phi";
        case Subcommand::Transition: return "transition";
        case Subcommand::SwapChain: return "swap-chain";
        case Subcommand::Lindeberg: return "lindeberg";
        case Subcommand::CltVerify: return "clt-verify";
        case Subcommand::Moments: return "moments";
    }
    return "unknown";
}

std::optional<Subcommand> parse_subcommand(std::string_view name) {
    for (auto sub : {Subcommand::Phi, Subcommand::Transition, Subcommand::SwapChain, Subcommand::Lindeberg,
                     Subcommand::CltVerify, Subcommand::Moments}) {
        if (subcommand_name(sub) == name) return sub;
    }
    return std::nullopt;
}

std::string_view verdict_name(Verdict verdict) {
    switch (verdict) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Informational: return "informational";
    }
    return "unknown";
}

Verdict parse_verdict(std::string_view name) {
    if (name == "pass") return Verdict::Pass;
    if (name == "fail") return Verdict::Fail;
    if (name == "informational") return Verdict::Informational;
    throw std::invalid_argument("unknown verdict '" + std::string(name) + "'");
}

std::vector<double> parse_real_list(std::string_view text, std::string_view flag) {
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        out.push_back(parse_real(text.substr(start, comma - start), flag));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::uint64_t> parse_count_list(std::string_view text, std::string_view flag) {
    std::vector<std::uint64_t> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        out.push_back(parse_count(text.substr(start, comma - start), flag));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

RunConfig parse_args(const std::vector<std::string>& args, const char* env_seed) {
    CLI::App app{"Finite-n diagnostics for the central limit theorem", "cltlab"};
    app.set_version_flag("--version", std::string(kToolName) + " " + std::string(kVersion));
    app.require_subcommand(1);

    struct Bound {
        CLI::App* app;
        Subcommand sub;
        std::map<std::string, std::string> values;
        std::map<std::string, CLI::Option*> options;
    };
    std::vector<Bound> bound;
    const std::vector<Subcommand> all = {Subcommand::Phi,       Subcommand::Transition, Subcommand::SwapChain,
                                         Subcommand::Lindeberg, Subcommand::CltVerify,  Subcommand::Moments};
    bound.reserve(all.size());
    for (auto sub : all) {
        auto* sub_app = app.add_subcommand(std::string(subcommand_name(sub)));
        bound.push_back({sub_app, sub, {}, {}});
        auto& b = bound.back();
        auto flags = subcommand_flags(sub);
        flags.insert(flags.end(), kCommonFlags.begin(), kCommonFlags.end());
        for (const auto& flag : flags) {
            b.options[flag.name] = sub_app->add_option("--" + flag.name, b.values[flag.name], flag.help);
        }
    }
    bound[0].app->description("normal cdf, survival function and density at given points");
    bound[1].app->description("smooth transition function and its first three derivatives on a grid");
    bound[2].app->description("swap chain estimates against the per-swap error bounds");
    bound[3].app->description("Lindeberg tail sums of a triangular array");
    bound[4].app->description("Kolmogorov distance of normalized sums to the normal law");
    bound[5].app->description("second and fourth moments of the normal sampler");
    app.footer(
        "Distributions: kind[:param][*scale], kind one of rademacher, uniform, exp, twopoint:P (0.01 <= P <= "
        "0.99), normal[:V].\nNumeric lists are comma separated; counts accept 1e6. Exit codes: 0 pass or "
        "informational, 1 fail, 2 usage error, 3 I/O error.");

    std::vector<const char*> argv = {"cltlab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        throw InfoRequested{app.help()};
    } catch (const CLI::CallForAllHelp&) {
        throw InfoRequested{app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::CallForVersion& e) {
        throw InfoRequested{std::string(e.what()) + "\n"};
    } catch (const CLI::ParseError& e) {
        std::string remedy = "run 'cltlab --help' for usage";
        const Bound* active = nullptr;
        for (const auto& b : bound) {
            if (b.app->parsed()) active = &b;
        }
        if (active == nullptr) throw UsageError(first_line(e.what()) + "; " + remedy);
        remedy = help_remedy(active->sub);
        for (const auto& arg : args) {
            if (arg.size() < 2 || arg[0] != '-' || (arg[1] != '-' && !std::isalpha(static_cast<unsigned char>(arg[1])))) {
                continue;
            }
            const auto name = arg.substr(arg.find_first_not_of('-'), arg.find('=') - arg.find_first_not_of('-'));
            if (!active->options.count(name) && name != "h" && name != "help") {
                throw UsageError("unknown flag " + arg.substr(0, arg.find('=')) + " for " +
                                 std::string(subcommand_name(active->sub)) + "; " + remedy);
            }
        }
        throw UsageError(first_line(e.what()) + "; " + remedy);
    }

    const auto it = std::find_if(bound.begin(), bound.end(), [](const Bound& b) { return b.app->parsed(); });
    auto& chosen = *it;

    std::map<std::string, std::string> raw;
    for (const auto& [name, option] : chosen.options) {
        if (option->count() > 0) raw[name] = chosen.values[name];
    }
    if (raw.count("config")) {
        const auto path = raw["config"];
        const auto doc = read_config(path);
        for (const auto& [key, value] : doc.items()) {
            if (!chosen.options.count(key) || key == "config") {
                throw UsageError("config " + path + ": unknown key '" + key + "'; " + help_remedy(chosen.sub));
            }
            if (!raw.count(key)) raw[key] = config_value(value, key, path);
        }
    }

    RunConfig config;
    config.subcommand = chosen.sub;
    normalize(chosen.sub, raw, config);

    const auto format = raw.count("format") ? raw["format"] : "json";
    if (format == "json") {
        config.format = Format::Json;
    } else if (format == "csv") {
        config.format = Format::Csv;
    } else {
        throw UsageError("--format must be json or csv, got '" + format + "'");
    }
    config.parameters["format"] = format;

    if (raw.count("out")) config.out = raw["out"];

    if (raw.count("workers")) {
        const auto w = count_at_least(raw["workers"], "workers", 1);
        if (w > 1024) throw UsageError("--workers must be at most 1024");
        config.workers = static_cast<unsigned>(w);
    } else {
        config.workers = std::max(1u, std::thread::hardware_concurrency());
    }

    if (raw.count("seed")) {
        config.seed = parse_count(raw["seed"], "seed");
    } else if (env_seed != nullptr && *env_seed != '\0') {
        try {
            config.seed = parse_count(env_seed, "seed");
        } catch (const UsageError&) {
            throw UsageError(std::string(kSeedEnv) + "='" + env_seed +
                             "' is not a non-negative integer; unset it or pass --seed N");
        }
    }
    return config;
}

}  // namespace cltlab::cli
