#include "untrue/stats.hpp"

#include <chrono>

namespace untrue {

StatsReport compute_stats(const std::vector<IndexedClaim>& docs) {
    StatsReport report;
    report.generated_at = std::chrono::system_clock::now();
    for (auto v : kAllVerdicts) report.by_verdict[v] = 0;
    for (const auto& doc : docs) {
        const auto& c = doc.enriched;
        ++report.total_documents;
        ++report.by_language[c.language];
        ++report.by_source[c.base.source_id];
        ++report.by_verdict[c.verdict];
        if (c.year) ++report.by_year[*c.year][c.language];
    }
    return report;
}

nlohmann::json to_json(const StatsReport& report) {
    nlohmann::json by_year = nlohmann::json::object();
    for (const auto& [year, langs] : report.by_year) by_year[std::to_string(year)] = langs;
    nlohmann::json by_verdict = nlohmann::json::object();
    for (const auto& [v, n] : report.by_verdict) by_verdict[std::string(to_string(v))] = n;
    return {{"total_documents", report.total_documents},
            {"by_language", report.by_language},
            {"by_source", report.by_source},
            {"by_year", std::move(by_year)},
            {"by_verdict", std::move(by_verdict)},
            {"generated_at", format_timestamp(report.generated_at)}};
}

}  // namespace untrue
