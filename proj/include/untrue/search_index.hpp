#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "untrue/dates.hpp"
#include "untrue/enrichment.hpp"
#include "untrue/verdict.hpp"

namespace untrue {

using DocId = std::uint32_t;

/// Lowercase, split on anything that is not a letter or digit, drop tokens
/// shorter than two characters. No stemming and no stop words, so the same
/// analyzer serves every language; `language` is accepted for symmetry.
std::vector<std::string> analyze(std::string_view text, std::string_view language = {});

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Okapi BM25 term weight with idf = ln(1 + (N - df + 0.5) / (df + 0.5)).
/// Throws std::invalid_argument unless N >= 1, df >= 1, dl >= 1, avgdl > 0, tf >= 0.
double bm25_score(double tf, double df, double n_docs, double dl, double avgdl, Bm25Params params = {});

inline constexpr std::size_t kMaxPageSize = 100;

struct QueryFilters {
    std::set<Verdict> verdicts;
    std::set<std::string> languages;
    std::set<std::string> sources;
    std::set<std::string> countries;
    std::optional<int> year_from;
    std::optional<int> year_to;

    bool empty() const {
        return verdicts.empty() && languages.empty() && sources.empty() && countries.empty() && !year_from &&
               !year_to;
    }
};

struct Query {
    std::string text;
    QueryFilters filters;
    std::optional<std::string> display_language;
    std::size_t page = 0;
    std::size_t page_size = 10;
    bool expand_entities = false;
};

/// Throws InvalidQuery naming the offending field.
void validate_query(const Query& q);

struct HitTranslation {
    std::string language;
    std::string review_title;
    std::string excerpt;
    std::string provenance;
    bool failed = false;
};

struct Hit {
    DocId doc_id = 0;
    double score = 0.0;
    std::string record_id;
    Verdict verdict = Verdict::Other;
    std::string review_title;
    std::optional<std::string> date_published;
    std::string country;
    std::string review_url;
    std::string excerpt;
    std::string language;
    std::string source_id;
    std::optional<HitTranslation> translation;
};

struct QueryExpansion {
    std::vector<std::string> entity_ids;
    std::vector<std::string> terms;
};

struct ResultPage {
    std::size_t total_hits = 0;
    double elapsed_ms = 0.0;
    std::size_t page = 0;
    std::size_t page_size = 0;
    std::vector<Hit> hits;
    /// facet -> value -> count over the filtered candidate set.
    std::map<std::string, std::map<std::string, std::size_t>> facet_counts;
    std::optional<QueryExpansion> expansion;
};

nlohmann::json to_json(const ResultPage& page);

/// Entities linked in the query text and every alias token of those entities
/// across all languages. Requires q.expand_entities.
QueryExpansion cross_language_expand(const Query& q, const EntityGazetteer& gazetteer);

inline const std::vector<std::string> kFacetNames = {"country", "language", "source", "verdict", "year"};
inline constexpr std::string_view kUnknownYear = "unknown";

struct IndexedClaim {
    DocId doc_id = 0;
    EnrichedClaim enriched;
    std::vector<std::string> tokens;           // claim_text + " " + review_title
    std::vector<std::string> claimant_tokens;  // claimant, a separate field
    std::set<std::string> entity_ids;
};

/// In-memory inverted index with snapshot persistence. Many readers, one
/// writer: searches never observe a half-applied add_document.
class SearchIndex {
public:
    struct Options {
        Bm25Params bm25;
        double entity_bonus = 1.0;
        std::size_t excerpt_chars = 240;
    };

    SearchIndex();
    SearchIndex(std::shared_ptr<const EntityGazetteer> gazetteer, std::shared_ptr<TranslationService> translator,
                Options options);

    SearchIndex(const SearchIndex&) = delete;
    SearchIndex& operator=(const SearchIndex&) = delete;

    /// Visible to every search issued after return. Re-adding a record_id
    /// replaces the stored version under the same doc_id.
    DocId add_document(const EnrichedClaim& claim);

    ResultPage search(const Query& q) const;

    std::size_t size() const;
    std::optional<EnrichedClaim> find_claim(std::string_view record_id) const;
    std::vector<IndexedClaim> documents() const;
    std::optional<Timestamp> snapshot_time() const;

    std::size_t document_frequency(std::string_view term) const;

    void save_snapshot(const std::filesystem::path& path) const;
    /// Replaces the index contents. Throws SnapshotError on a missing, foreign,
    /// or internally inconsistent file; the index is left unchanged then.
    void load_snapshot(const std::filesystem::path& path);

    const Options& options() const { return options_; }

private:
    using Postings = std::unordered_map<std::string, std::map<DocId, std::uint32_t>>;

    struct State {
        std::vector<IndexedClaim> docs;
        std::unordered_map<std::string, DocId> by_record;
        Postings text_postings;
        Postings claimant_postings;
        std::map<std::string, std::set<DocId>> entity_postings;
        std::uint64_t text_length = 0;
        std::uint64_t claimant_length = 0;
    };

    static void insert(State& state, const EnrichedClaim& claim, DocId id);
    static void remove_postings(State& state, const IndexedClaim& doc);
    static DocId add_to(State& state, const EnrichedClaim& claim);
    static nlohmann::json postings_json(const Postings& postings);

    Hit make_hit(const IndexedClaim& doc, double score, const Query& q) const;

    std::shared_ptr<const EntityGazetteer> gazetteer_;
    std::shared_ptr<TranslationService> translator_;
    Options options_;

    mutable std::shared_mutex mutex_;
    State state_;
    mutable std::mutex snapshot_mutex_;
    mutable std::optional<Timestamp> snapshot_time_;
};

}  // namespace untrue
