#include <charconv>
#include <sstream>

#include "cltlab/cli.hpp"

namespace cltlab {

void to_json(nlohmann::json& j, const MCEstimate& e) {
    j = {{"mean", e.mean}, {"std_error", e.std_error}, {"n_samples", e.n_samples}, {"seed", e.seed}};
}

void from_json(const nlohmann::json& j, MCEstimate& e) {
    j.at("mean").get_to(e.mean);
    j.at("std_error").get_to(e.std_error);
    j.at("n_samples").get_to(e.n_samples);
    j.at("seed").get_to(e.seed);
}

void to_json(nlohmann::json& j, const SwapChainReport& r) {
    j = {{"row_label", r.row_label},
         {"test_function", r.test_function},
         {"n_samples", r.n_samples},
         {"seed", r.seed},
         {"estimates", r.estimates},
         {"per_swap_gaps", r.per_swap_gaps},
         {"per_swap_gap_se", r.per_swap_gap_se},
         {"per_swap_bounds", r.per_swap_bounds},
         {"regime_bounds", r.regime_bounds},
         {"flagged", r.flagged},
         {"total_gap", r.total_gap},
         {"total_bound", r.total_bound},
         {"total_se", r.total_se},
         {"regime_total_bound", r.regime_total_bound},
         {"total_within_bound", r.total_within_bound},
         {"epsilon", r.epsilon},
         {"delta", r.delta},
         {"M", r.M},
         {"sup_f3", r.sup_f3},
         {"passed", r.passed()}};
}

void from_json(const nlohmann::json& j, SwapChainReport& r) {
    j.at("row_label").get_to(r.row_label);
    j.at("test_function").get_to(r.test_function);
    j.at("n_samples").get_to(r.n_samples);
    j.at("seed").get_to(r.seed);
    j.at("estimates").get_to(r.estimates);
    j.at("per_swap_gaps").get_to(r.per_swap_gaps);
    j.at("per_swap_gap_se").get_to(r.per_swap_gap_se);
    j.at("per_swap_bounds").get_to(r.per_swap_bounds);
    j.at("regime_bounds").get_to(r.regime_bounds);
    j.at("flagged").get_to(r.flagged);
    j.at("total_gap").get_to(r.total_gap);
    j.at("total_bound").get_to(r.total_bound);
    j.at("total_se").get_to(r.total_se);
    j.at("regime_total_bound").get_to(r.regime_total_bound);
    j.at("total_within_bound").get_to(r.total_within_bound);
    j.at("epsilon").get_to(r.epsilon);
    j.at("delta").get_to(r.delta);
    j.at("M").get_to(r.M);
    j.at("sup_f3").get_to(r.sup_f3);
}

void to_json(nlohmann::json& j, const LindebergReport& r) {
    j = {{"n", r.n_index},
         {"delta", r.delta},
         {"tail_sum", r.tail_sum},
         {"max_variance", r.max_variance},
         {"normal_tail_sum", r.normal_tail_sum},
         {"normal_tail_bound", r.normal_tail_bound}};
}

void from_json(const nlohmann::json& j, LindebergReport& r) {
    j.at("n").get_to(r.n_index);
    j.at("delta").get_to(r.delta);
    j.at("tail_sum").get_to(r.tail_sum);
    j.at("max_variance").get_to(r.max_variance);
    j.at("normal_tail_sum").get_to(r.normal_tail_sum);
    j.at("normal_tail_bound").get_to(r.normal_tail_bound);
}

void to_json(nlohmann::json& j, const ConvergenceRow& r) {
    j = {{"n", r.n}, {"ks", r.ks_distance}, {"n_samples", r.n_samples}, {"seed", r.seed}};
    j["exact_ks"] = r.exact_ks ? nlohmann::json(*r.exact_ks) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ConvergenceRow& r) {
    j.at("n").get_to(r.n);
    j.at("ks").get_to(r.ks_distance);
    j.at("n_samples").get_to(r.n_samples);
    j.at("seed").get_to(r.seed);
    const auto& exact = j.at("exact_ks");
    r.exact_ks = exact.is_null() ? std::nullopt : std::optional<double>(exact.get<double>());
}

void to_json(nlohmann::json& j, const ConvergenceReport& r) { j = {{"dist", r.dist}, {"rows", r.rows}}; }

void from_json(const nlohmann::json& j, ConvergenceReport& r) {
    j.at("dist").get_to(r.dist);
    j.at("rows").get_to(r.rows);
}

void to_json(nlohmann::json& j, const MomentIdentity& m) {
    j = {{"first", m.first},   {"second", m.second},       {"second_se", m.second_se}, {"third", m.third},
         {"fourth", m.fourth}, {"fourth_se", m.fourth_se}, {"n_samples", m.n_samples}, {"seed", m.seed}};
}

void from_json(const nlohmann::json& j, MomentIdentity& m) {
    j.at("first").get_to(m.first);
    j.at("second").get_to(m.second);
    j.at("second_se").get_to(m.second_se);
    j.at("third").get_to(m.third);
    j.at("fourth").get_to(m.fourth);
    j.at("fourth_se").get_to(m.fourth_se);
    j.at("n_samples").get_to(m.n_samples);
    j.at("seed").get_to(m.seed);
}

}  // namespace cltlab

namespace cltlab::cli {

namespace {

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

void write_csv_line(std::ostringstream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv_field(fields[i]);
    out << '\n';
}

}  // namespace

std::string format_real(double value) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

nlohmann::json make_header(const RunConfig& config) {
    return {{"tool", kToolName},
            {"version", kVersion},
            {"subcommand", subcommand_name(config.subcommand)},
            {"seed", config.seed},
            {"parameters", config.parameters}};
}

std::string emit_json(const Report& report) {
    const nlohmann::json doc = {
        {"header", report.header}, {"body", report.body}, {"verdict", verdict_name(report.verdict)}};
    return doc.dump(2) + "\n";
}

Report parse_report(std::string_view json_text) {
    const auto doc = nlohmann::json::parse(json_text);
    if (!doc.is_object() || doc.size() != 3) {
        throw std::invalid_argument("a report is an object with exactly header, body and verdict");
    }
    Report report;
    report.header = doc.at("header");
    for (const char* key : {"tool", "version", "subcommand", "seed", "parameters"}) {
        if (!report.header.contains(key)) {
            throw std::invalid_argument(std::string("report header lacks '") + key + "'");
        }
    }
    if (!parse_subcommand(report.header.at("subcommand").get<std::string>())) {
        throw std::invalid_argument("report header names an unknown subcommand");
    }
    report.body = doc.at("body");
    report.verdict = parse_verdict(doc.at("verdict").get<std::string>());
    return report;
}

std::string emit_csv(const Report& report) {
    std::ostringstream out;
    const auto& h = report.header;
    out << "# tool=" << h.at("tool").get<std::string>() << " version=" << h.at("version").get<std::string>()
        << " subcommand=" << h.at("subcommand").get<std::string>() << " seed=" << h.at("seed").get<std::uint64_t>()
        << " verdict=" << verdict_name(report.verdict);
    for (const auto& [key, value] : h.at("parameters").items()) out << ' ' << key << '=' << value.get<std::string>();
    out << '\n';
    write_csv_line(out, report.table.columns);
    for (const auto& row : report.table.rows) write_csv_line(out, row);
    return out.str();
}

std::string emit(const Report& report, Format format) {
    return format == Format::Json ? emit_json(report) : emit_csv(report);
}

}  // namespace cltlab::cli
