#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

namespace belong {

/// Confusion counts with belongings as the positive class.
struct ConfusionReport {
    std::string scenario;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    double mean_ms = 0.0;

    std::size_t total() const { return tp + fp + fn + tn; }
    double acc() const;
    bool operator==(const ConfusionReport&) const = default;
};

enum class ReportFormat { csv, json };

ReportFormat parse_report_format(const std::string& s);

/// CSV header `scenario,tp,fp,fn,tn,acc,mean_ms`; acc and mean_ms with 3 decimals.
std::string render_csv(const std::vector<ConfusionReport>& reports);
nlohmann::json render_json(const std::vector<ConfusionReport>& reports);
std::vector<ConfusionReport> parse_reports(const nlohmann::json& j);

void emit_report(const std::vector<ConfusionReport>& reports, ReportFormat format, const std::string& path);

void to_json(nlohmann::json& j, const ConfusionReport& r);
void from_json(const nlohmann::json& j, ConfusionReport& r);

}  // namespace belong
