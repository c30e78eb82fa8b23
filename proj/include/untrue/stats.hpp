#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "untrue/dates.hpp"
#include "untrue/search_index.hpp"
#include "untrue/verdict.hpp"

namespace untrue {

struct StatsReport {
    std::size_t total_documents = 0;
    std::map<std::string, std::size_t> by_language;
    std::map<std::string, std::size_t> by_source;
    std::map<int, std::map<std::string, std::size_t>> by_year;  // year -> language -> count
    std::map<Verdict, std::size_t> by_verdict;                   // always holds all four verdicts
    Timestamp generated_at;
};

/// Documents without a year are left out of by_year only.
StatsReport compute_stats(const std::vector<IndexedClaim>& docs);
inline StatsReport compute_stats(const SearchIndex& index) { return compute_stats(index.documents()); }

nlohmann::json to_json(const StatsReport& report);

}  // namespace untrue
