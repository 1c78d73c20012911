#include <algorithm>
#include <cmath>
#include <fstream>

#include "cltlab/cli.hpp"
#include "cltlab/specfun.hpp"

namespace cltlab::cli {

namespace {

constexpr double kCertificateSlack = 1e-15;

std::vector<std::string> numbers(std::initializer_list<double> values) {
    std::vector<std::string> out;
    for (double v : values) out.push_back(format_real(v));
    return out;
}

Report run_phi(const RunConfig& config) {
    Report report;
    report.table.columns = {"t", "cdf", "sf", "density"};
    nlohmann::json rows = nlohmann::json::array();
    for (double t : parse_real_list(config.param("t"), "t")) {
        const double cdf = normal_cdf(t);
        const double sf = normal_sf(t);
        const double density = phi_density(t);
        rows.push_back({{"t", t}, {"cdf", cdf}, {"sf", sf}, {"density", density}});
        report.table.rows.push_back(numbers({t, cdf, sf, density}));
    }
    report.body = {{"rows", rows}};
    report.verdict = Verdict::Informational;
    return report;
}

Report run_transition(const RunConfig& config) {
    TransitionFn fn;
    fn.x = parse_real_list(config.param("x"), "x").front();
    fn.eta = config.has("epsilon") ? eta_for_epsilon(parse_real_list(config.param("epsilon"), "epsilon").front())
                                   : parse_real_list(config.param("eta"), "eta").front();
    fn.direction = config.param("direction") == "drop-after" ? DropDirection::DropAfter : DropDirection::DropBefore;
    const auto points = parse_count_list(config.param("points"), "points").front();
    double lo = fn.drop_start() - fn.eta;
    double hi = fn.drop_end() + fn.eta;
    if (config.has("range")) {
        const auto range = parse_real_list(config.param("range"), "range");
        lo = range[0];
        hi = range[1];
    }

    const auto cert = transition_bounds(fn);
    Report report;
    report.table.columns = {"t", "f", "f1", "f2", "f3"};
    nlohmann::json rows = nlohmann::json::array();
    double max_abs[4] = {0.0, 0.0, 0.0, 0.0};
    bool in_unit_interval = true;
    for (std::uint64_t k = 0; k < points; ++k) {
        const double t = k + 1 == points ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
        double v[4];
        for (int order = 0; order < 4; ++order) {
            v[order] = transition_eval(fn, t, order);
            max_abs[order] = std::max(max_abs[order], std::abs(v[order]));
        }
        in_unit_interval = in_unit_interval && v[0] >= 0.0 && v[0] <= 1.0;
        rows.push_back({{"t", t}, {"f", v[0]}, {"f1", v[1]}, {"f2", v[2]}, {"f3", v[3]}});
        report.table.rows.push_back(numbers({t, v[0], v[1], v[2], v[3]}));
    }
    const bool within = max_abs[1] <= cert.sup_f1 * (1.0 + kCertificateSlack) &&
                        max_abs[2] <= cert.sup_f2 * (1.0 + kCertificateSlack) &&
                        max_abs[3] <= cert.sup_f3 * (1.0 + kCertificateSlack);
    report.body = {
        {"function", TestFunction::transition(fn).describe()},
        {"eta", fn.eta},
        {"bounds", {{"sup_f1", cert.sup_f1}, {"sup_f2", cert.sup_f2}, {"sup_f3", cert.sup_f3}}},
        {"grid_max", {{"f1", max_abs[1]}, {"f2", max_abs[2]}, {"f3", max_abs[3]}}},
        {"within_bounds", within},
        {"values_in_unit_interval", in_unit_interval},
        {"rows", rows},
    };
    report.verdict = within && in_unit_interval ? Verdict::Pass : Verdict::Fail;
    return report;
}

Report run_swap_chain(const RunConfig& config) {
    const auto family = ArrayFamily::parse(config.param("layout") + ":" + config.param("dist"));
    const auto n = parse_count_list(config.param("n"), "n").front();
    ChainSpec chain;
    chain.row = family.row(n);
    chain.f = TestFunction::parse(config.param("test-fn"));
    chain.samples = parse_count_list(config.param("samples"), "samples").front();
    chain.seed = config.seed;
    const double epsilon = parse_real_list(config.param("epsilon"), "epsilon").front();

    auto scan = swap_chain_scan(chain, epsilon, config.workers);
    scan.row_label = family.describe() + " n=" + std::to_string(n) + " m=" + std::to_string(chain.length());

    Report report;
    report.table.columns = {"i", "estimate", "se", "gap", "bound"};
    for (std::size_t i = 0; i < scan.estimates.size(); ++i) {
        std::vector<std::string> row = {std::to_string(i), format_real(scan.estimates[i].mean),
                                        format_real(scan.estimates[i].std_error), "", ""};
        if (i > 0) {
            row[3] = format_real(scan.per_swap_gaps[i - 1]);
            row[4] = format_real(scan.per_swap_bounds[i - 1]);
        }
        report.table.rows.push_back(std::move(row));
    }
    report.verdict = scan.passed() ? Verdict::Pass : Verdict::Fail;
    report.body = scan;
    return report;
}

Report run_lindeberg(const RunConfig& config) {
    const auto family = ArrayFamily::parse(config.param("array"));
    auto ns = parse_count_list(config.param("n"), "n");
    std::sort(ns.begin(), ns.end());
    const auto deltas = parse_real_list(config.param("delta"), "delta");

    std::vector<TriangularRow> rows;
    for (auto n : ns) rows.push_back(family.row(n));

    Report report;
    report.table.columns = {"n", "delta", "tail_sum", "max_variance", "normal_tail_sum", "normal_tail_bound",
                            "decay"};
    std::vector<LindebergReport> entries;
    nlohmann::json decay = nlohmann::json::array();
    bool bound_holds = true;
    bool any_non_vanishing = false;
    bool all_vanishing = true;
    for (double delta : deltas) {
        std::vector<LindebergReport> block;
        std::vector<double> tails;
        for (const auto& row : rows) {
            block.push_back(lindeberg_report(row, delta));
            tails.push_back(block.back().tail_sum);
            bound_holds = bound_holds && normal_tail_sum_bound(row, delta).holds();
        }
        const auto verdict = classify_decay(tails);
        any_non_vanishing = any_non_vanishing || verdict == DecayVerdict::NonVanishing;
        all_vanishing = all_vanishing && verdict == DecayVerdict::Vanishing;
        decay.push_back({{"delta", delta}, {"tail_sums", tails}, {"verdict", cltlab::verdict_name(verdict)}});
        for (const auto& e : block) {
            report.table.rows.push_back({std::to_string(e.n_index), format_real(e.delta), format_real(e.tail_sum),
                                         format_real(e.max_variance), format_real(e.normal_tail_sum),
                                         format_real(e.normal_tail_bound), std::string(cltlab::verdict_name(verdict))});
            entries.push_back(e);
        }
    }
    const auto overall = any_non_vanishing ? DecayVerdict::NonVanishing
                         : all_vanishing   ? DecayVerdict::Vanishing
                                           : DecayVerdict::Inconclusive;
    report.body = {
        {"array", family.describe()},
        {"rows", entries},
        {"decay", decay},
        {"decay_verdict", cltlab::verdict_name(overall)},
        {"decay_rule",
         "heuristic: vanishing when the tail sum at the largest n is at most 1/10 of that at the smallest n; "
         "non-vanishing when every tail sum stays above 1/10 of the first"},
        {"normal_tail_bound_holds", bound_holds},
    };
    // A failing Lindeberg condition is a finding, not a tool failure.
    report.verdict = bound_holds ? Verdict::Informational : Verdict::Fail;
    return report;
}

Report run_clt_verify(const RunConfig& config) {
    const auto grid = parse_count_list(config.param("n"), "n");
    const auto samples = parse_count_list(config.param("samples"), "samples").front();
    const auto scan = config.has("dist")
                          ? clt_convergence_scan(parse_distribution(config.param("dist")), grid, samples, config.seed,
                                                 config.workers)
                          : clt_convergence_scan(ArrayFamily::parse(config.param("array")), grid, samples,
                                                 config.seed, config.workers);
    const double tolerance = 2.0 * kKolmogorov99 / std::sqrt(static_cast<double>(samples));

    Report report;
    report.table.columns = {"n", "ks", "n_samples", "seed", "exact_ks"};
    bool any_oracle = false;
    bool agree = true;
    for (const auto& row : scan.rows) {
        report.table.rows.push_back({std::to_string(row.n), format_real(row.ks_distance),
                                     std::to_string(row.n_samples), std::to_string(row.seed),
                                     row.exact_ks ? format_real(*row.exact_ks) : ""});
        if (row.exact_ks) {
            any_oracle = true;
            agree = agree && std::abs(row.ks_distance - *row.exact_ks) <= tolerance;
        }
    }
    report.body = scan;
    report.body["oracle_tolerance"] = tolerance;
    report.verdict = !any_oracle ? Verdict::Informational : agree ? Verdict::Pass : Verdict::Fail;
    return report;
}

Report run_moments(const RunConfig& config) {
    const auto samples = parse_count_list(config.param("samples"), "samples").front();
    const auto m = moment_identity_check(samples, config.seed, config.workers);
    const bool second_ok = std::abs(m.second - 1.0) <= kStatTolerance * m.second_se;
    const bool fourth_ok = std::abs(m.fourth - 3.0) <= kStatTolerance * m.fourth_se;

    Report report;
    report.table.columns = {"k", "estimate", "expected", "se"};
    report.table.rows = {{"1", format_real(m.first), "0", ""},
                         {"2", format_real(m.second), "1", format_real(m.second_se)},
                         {"3", format_real(m.third), "0", ""},
                         {"4", format_real(m.fourth), "3", format_real(m.fourth_se)}};
    report.body = m;
    report.body["tolerance_se"] = kStatTolerance;
    report.verdict = second_ok && fourth_ok ? Verdict::Pass : Verdict::Fail;
    return report;
}

}  // namespace

Report run(const RunConfig& config) {
    Report report;
    switch (config.subcommand) {
        case Subcommand::Phi: report = run_phi(config); break;
        case Subcommand::Transition: report = run_transition(config); break;
        case Subcommand::SwapChain: report = run_swap_chain(config); break;
        case Subcommand::Lindeberg: report = run_lindeberg(config); break;
        case Subcommand::CltVerify: report = run_clt_verify(config); break;
        case Subcommand::Moments: report = run_moments(config); break;
    }
    report.header = make_header(config);
    return report;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const char* env_seed) {
    try {
        const auto config = parse_args(args, env_seed);
        const auto report = run(config);
        const auto text = emit(report, config.format);
        if (config.out) {
            std::ofstream file(*config.out, std::ios::binary);
            if (!file) throw IoError(*config.out, "cannot open output file");
            file << text;
            file.close();
            if (!file) throw IoError(*config.out, "failed writing output file");
        } else {
            out << text;
            out.flush();
        }
        return report.exit_code();
    } catch (const InfoRequested& info) {
        out << info.text;
        return 0;
    } catch (const UsageError& e) {
        err << "cltlab: error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        err << "cltlab: I/O error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        err << "cltlab: error: " << e.what() << "; run 'cltlab --help' for usage\n";
        return 2;
    } catch (const std::runtime_error& e) {
        err << "cltlab: error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace cltlab::cli
