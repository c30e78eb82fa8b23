#include "untrue/verdict.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "untrue/errors.hpp"
#include "untrue/text.hpp"

namespace untrue {

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::True:
            return "true";
        case Verdict::False:
            return "false";
        case Verdict::Mixed:
            return "mixed";
        case Verdict::Other:
            return "other";
    }
    return "other";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
    auto key = text::to_lower(text::trim(s));
    for (auto v : kAllVerdicts) {
        if (to_string(v) == key) return v;
    }
    return std::nullopt;
}

int nearest_bucket(double p) {
    // Distances within this epsilon count as ties so that affine rescaling of a
    // scale never flips a midpoint decision through rounding noise.
    constexpr double kTieEpsilon = 1e-9;
    int best = 0;
    double best_dist = std::abs(p);
    for (int i = 1; i < 5; ++i) {
        double dist = std::abs(p - 0.25 * i);
        if (dist < best_dist - kTieEpsilon) {
            best = i;
            best_dist = dist;
        } else if (std::abs(dist - best_dist) <= kTieEpsilon && std::abs(i - 2) < std::abs(best - 2)) {
            best = i;
            best_dist = std::min(dist, best_dist);
        }
    }
    return best;
}

Verdict normalize_numeric(const RatingInfo& r, const NumericPolicy& policy) {
    if (!r.has_numeric_triple()) throw std::invalid_argument("rating triple incomplete");
    double value = *r.rating_value;
    double best = *r.best_rating;
    double worst = *r.worst_rating;
    if (!std::isfinite(value) || !std::isfinite(best) || !std::isfinite(worst)) {
        throw std::invalid_argument("rating values must be finite");
    }
    if (!(worst < best)) throw std::invalid_argument("degenerate rating scale: worst_rating must be < best_rating");
    if (value < worst || value > best) throw std::invalid_argument("rating_value outside [worst_rating, best_rating]");
    double p = std::clamp((value - worst) / (best - worst), 0.0, 1.0);
    return policy.buckets[static_cast<std::size_t>(nearest_bucket(p))];
}

std::string LabelLexicon::normalize_key(std::string_view label) {
    return text::to_lower(text::trim(label));
}

void LabelLexicon::add(std::string_view language, std::string_view label, Verdict verdict) {
    auto key = normalize_key(label);
    if (key.empty()) throw ConfigError("empty label in lexicon");
    auto [it, inserted] = labels_.emplace(key, verdict);
    if (!inserted && it->second != verdict) {
        throw ConfigError("label '" + key + "' maps to both '" + std::string(to_string(it->second)) + "' and '" +
                          std::string(to_string(verdict)) + "'");
    }
    by_language_[std::string(language)][key] = verdict;
}

std::optional<Verdict> LabelLexicon::lookup(std::string_view label) const {
    auto it = labels_.find(normalize_key(label));
    if (it == labels_.end()) return std::nullopt;
    return it->second;
}

LabelLexicon LabelLexicon::seed() {
    LabelLexicon lex;
    const std::pair<std::string_view, Verdict> english[] = {
        {"true", Verdict::True},
        {"correct", Verdict::True},
        {"accurate", Verdict::True},
        {"correct attribution", Verdict::True},
        {"truth", Verdict::True},
        {"mostly true", Verdict::Mixed},
        {"half true", Verdict::Mixed},
        {"half-true", Verdict::Mixed},
        {"mostly false", Verdict::Mixed},
        {"mixture", Verdict::Mixed},
        {"mixed", Verdict::Mixed},
        {"partly true", Verdict::Mixed},
        {"partly false", Verdict::Mixed},
        {"misleading", Verdict::Mixed},
        {"exaggerated", Verdict::Mixed},
        {"truth! & fiction!", Verdict::Mixed},
        {"false", Verdict::False},
        {"incorrect", Verdict::False},
        {"pants on fire", Verdict::False},
        {"pants on fire!", Verdict::False},
        {"fake", Verdict::False},
        {"fiction", Verdict::False},
        {"fiction!", Verdict::False},
        {"misattributed", Verdict::False},
        {"scam", Verdict::False},
        {"legend", Verdict::False},
        {"unproven", Verdict::Other},
        {"unverified", Verdict::Other},
        {"unsupported", Verdict::Other},
        {"satire", Verdict::Other},
        {"labeled satire", Verdict::Other},
        {"outdated", Verdict::Other},
        {"research in progress", Verdict::Other},
        {"no rating", Verdict::Other},
    };
    const std::pair<std::string_view, Verdict> portuguese[] = {
        {"verdadeiro", Verdict::True},
        {"verdade", Verdict::True},
        {"é verdade", Verdict::True},
        {"correto", Verdict::True},
        {"falso", Verdict::False},
        {"é falso", Verdict::False},
        {"mentira", Verdict::False},
        {"boato", Verdict::False},
        {"#fake", Verdict::False},
        {"verdadeiro, mas", Verdict::Mixed},
        {"exagerado", Verdict::Mixed},
        {"impreciso", Verdict::Mixed},
        {"distorcido", Verdict::Mixed},
        {"enganoso", Verdict::Mixed},
        {"discutível", Verdict::Mixed},
        {"sem contexto", Verdict::Mixed},
        {"subestimado", Verdict::Mixed},
        {"não é bem assim", Verdict::Mixed},
        {"meio verdade", Verdict::Mixed},
        {"contraditório", Verdict::Other},
        {"insustentável", Verdict::Other},
        {"ainda é cedo para dizer", Verdict::Other},
        {"de olho", Verdict::Other},
        {"sátira", Verdict::Other},
        {"sem evidências", Verdict::Other},
    };
    for (const auto& [label, v] : english) lex.add("en", label, v);
    for (const auto& [label, v] : portuguese) lex.add("pt", label, v);
    return lex;
}

LabelLexicon LabelLexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open lexicon: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("lexicon " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("lexicon must map language codes to label tables");
    LabelLexicon lex;
    for (const auto& [language, table] : j.items()) {
        if (!table.is_object()) throw ConfigError("lexicon language '" + language + "' is not a table");
        for (const auto& [label, value] : table.items()) {
            auto v = value.is_string() ? parse_verdict(value.get<std::string>()) : std::nullopt;
            if (!v) throw ConfigError("lexicon label '" + label + "' has an unknown verdict");
            lex.add(language, label, *v);
        }
    }
    return lex;
}

Verdict normalize_label(std::string_view label, const LabelLexicon& lexicon) {
    return lexicon.lookup(label).value_or(Verdict::Other);
}

Verdict normalize(const RatingInfo& r, const LabelLexicon& lexicon, const NumericPolicy& policy) {
    if (r.has_numeric_triple()) {
        try {
            return normalize_numeric(r, policy);
        } catch (const std::invalid_argument&) {
            // Fall through to the label.
        }
    }
    if (r.rating_label) return normalize_label(*r.rating_label, lexicon);
    return Verdict::Other;
}

}  // namespace untrue
