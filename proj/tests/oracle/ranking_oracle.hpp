#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Brute-force reference ranking over ASCII corpora. Nothing here shares code
// with the index: every score is recomputed from the raw strings per query.

struct Doc {
    std::string text;      // claim + " " + title
    std::string claimant;  // may be empty
    std::set<std::string> entities;
    std::string verdict;
    std::string language;
    std::string source;
    std::string country;
    std::optional<int> year;
};

struct Filters {
    std::set<std::string> verdicts, languages, sources, countries;
    std::optional<int> year_from, year_to;
};

inline std::vector<std::string> tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s + " ") {
        auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else {
            if (cur.size() >= 2) out.push_back(cur);
            cur.clear();
        }
    }
    return out;
}

inline double bm25(double tf, double df, double n, double dl, double avgdl, double k1 = 1.2, double b = 0.75) {
    double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    return idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl));
}

inline bool passes(const Filters& f, const Doc& d) {
    if (!f.verdicts.empty() && !f.verdicts.count(d.verdict)) return false;
    if (!f.languages.empty() && !f.languages.count(d.language)) return false;
    if (!f.sources.empty() && !f.sources.count(d.source)) return false;
    if (!f.countries.empty() && !f.countries.count(d.country)) return false;
    if (f.year_from || f.year_to) {
        if (!d.year) return false;
        if (f.year_from && *d.year < *f.year_from) return false;
        if (f.year_to && *d.year > *f.year_to) return false;
    }
    return true;
}

// Documents whose score is positive (or every document when the query has no
// text), filtered, ordered by score descending then by position.
inline std::vector<std::pair<std::size_t, double>> rank(const std::vector<Doc>& docs, const std::string& query,
                                                        const Filters& filters,
                                                        const std::set<std::string>& extra_terms = {},
                                                        const std::set<std::string>& entity_ids = {},
                                                        double entity_bonus = 1.0) {
    auto qt = tokens(query);
    std::set<std::string> terms(qt.begin(), qt.end());
    terms.insert(extra_terms.begin(), extra_terms.end());
    bool browse = std::all_of(query.begin(), query.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });

    double n = static_cast<double>(docs.size());
    std::vector<std::vector<std::string>> text_tok, claimant_tok;
    double text_total = 0, claimant_total = 0;
    for (const auto& d : docs) {
        text_tok.push_back(tokens(d.text));
        claimant_tok.push_back(tokens(d.claimant));
        text_total += static_cast<double>(text_tok.back().size());
        claimant_total += static_cast<double>(claimant_tok.back().size());
    }

    std::map<std::size_t, double> scores;
    if (browse) {
        for (std::size_t i = 0; i < docs.size(); ++i) scores[i] = 0.0;
    } else if (!docs.empty()) {
        auto field = [&](const std::string& term, const std::vector<std::vector<std::string>>& toks, double total) {
            double avgdl = total / n;
            double df = 0;
            for (const auto& t : toks) df += std::count(t.begin(), t.end(), term) > 0 ? 1 : 0;
            if (df == 0) return;
            for (std::size_t i = 0; i < toks.size(); ++i) {
                double tf = static_cast<double>(std::count(toks[i].begin(), toks[i].end(), term));
                if (tf > 0) scores[i] += bm25(tf, df, n, static_cast<double>(toks[i].size()), avgdl);
            }
        };
        for (const auto& term : terms) {
            field(term, text_tok, text_total);
            field(term, claimant_tok, claimant_total);
        }
        for (std::size_t i = 0; i < docs.size(); ++i) {
            for (const auto& e : entity_ids) {
                if (docs[i].entities.count(e)) scores[i] += entity_bonus;
            }
        }
    }

    std::vector<std::pair<std::size_t, double>> out;
    for (const auto& [i, s] : scores) {
        if (passes(filters, docs[i])) out.emplace_back(i, s);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

}  // namespace oracle
