#include "belong/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "belong/error.hpp"

namespace belong {

using nlohmann::json;

double ConfusionReport::acc() const {
    const std::size_t n = total();
    return n == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
}

ReportFormat parse_report_format(const std::string& s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    throw Error("unknown report format '" + s + "' (expected csv or json)");
}

void to_json(json& j, const ConfusionReport& r) {
    j = {{"scenario", r.scenario}, {"tp", r.tp}, {"fp", r.fp},   {"fn", r.fn},
         {"tn", r.tn},             {"acc", r.acc()}, {"mean_ms", r.mean_ms}};
}

void from_json(const json& j, ConfusionReport& r) {
    r.scenario = j.at("scenario").get<std::string>();
    r.tp = j.at("tp").get<std::size_t>();
    r.fp = j.at("fp").get<std::size_t>();
    r.fn = j.at("fn").get<std::size_t>();
    r.tn = j.at("tn").get<std::size_t>();
    r.mean_ms = j.at("mean_ms").get<double>();
}

std::string render_csv(const std::vector<ConfusionReport>& reports) {
    std::string out = "scenario,tp,fp,fn,tn,acc,mean_ms\n";
    char buf[256];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, ",%zu,%zu,%zu,%zu,%.3f,%.3f\n", r.tp, r.fp, r.fn, r.tn, r.acc(), r.mean_ms);
        out += r.scenario + buf;
    }
    return out;
}

json render_json(const std::vector<ConfusionReport>& reports) { return json{{"reports", reports}}; }

std::vector<ConfusionReport> parse_reports(const json& j) {
    return j.at("reports").get<std::vector<ConfusionReport>>();
}

void emit_report(const std::vector<ConfusionReport>& reports, ReportFormat format, const std::string& path) {
    if (reports.empty()) throw Error("emit_report: no reports to write");
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path);
    if (!out) throw Error("emit_report: cannot write " + path);
    if (format == ReportFormat::csv) {
        out << render_csv(reports);
    } else {
        out << render_json(reports).dump(2) << '\n';
    }
    if (!out) throw Error("emit_report: write to " + path + " failed");
}

}  // namespace belong
