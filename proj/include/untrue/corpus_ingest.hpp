#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "untrue/dates.hpp"
#include "untrue/errors.hpp"

namespace untrue {

struct RawDocument {
    std::string url;
    Timestamp fetched_at;
    int http_status = 0;
    std::string content_type;
    std::string body;
};

struct ExtractionRule {
    std::string field;     // ClaimRecord field name
    std::string selector;  // see html::Selector
};

struct SourceTemplate {
    std::string source_id;
    std::vector<std::string> domain_patterns;
    std::string country;           // ISO 3166-1 alpha-2, uppercase
    std::string default_language;  // ISO 639-1
    std::vector<ExtractionRule> extraction_rules;

    /// Case-insensitive hostname match. A pattern matches the host itself and
    /// any subdomain; a leading "*." requires a subdomain.
    bool matches_host(std::string_view host) const;
};

/// Throws ConfigError when the template violates its invariants.
void validate_template(const SourceTemplate& tpl);

class TemplateRegistry {
public:
    TemplateRegistry() = default;
    explicit TemplateRegistry(std::vector<SourceTemplate> templates);

    /// Loads every *.json file in `dir`; the file stem must equal source_id.
    static TemplateRegistry load_directory(const std::filesystem::path& dir);

    const std::vector<SourceTemplate>& templates() const { return templates_; }
    const SourceTemplate* find(std::string_view source_id) const;
    bool empty() const { return templates_.empty(); }

private:
    std::vector<SourceTemplate> templates_;
};

/// Returns the unique template whose patterns match the URL's host.
/// Throws TemplateMatchError on zero or several matches.
const SourceTemplate& match_template(std::string_view url, const std::vector<SourceTemplate>& registry);

struct ClaimRecord {
    std::string record_id;
    std::string claim_text;
    std::optional<std::string> claimant;
    std::string review_title;
    std::string review_url;
    std::optional<CalendarDate> date_published;
    std::optional<double> rating_value;
    std::optional<double> best_rating;
    std::optional<double> worst_rating;
    std::optional<std::string> rating_label;
    std::string source_id;
    std::string country;

    bool operator==(const ClaimRecord&) const = default;
};

/// Lowercase hex SHA-256 over review_url + "\n" + claim_text.
std::string compute_record_id(std::string_view review_url, std::string_view claim_text);

/// Empty string when the record satisfies its invariants, otherwise the reason.
std::string check_claim_record(const ClaimRecord& record);

void to_json(nlohmann::json& j, const ClaimRecord& r);
void from_json(const nlohmann::json& j, ClaimRecord& r);

/// Compact single-line JSON with sorted keys; absent optionals are omitted.
std::string serialize_record(const ClaimRecord& r);

// --- fixture archive ------------------------------------------------------

struct ArchiveContents {
    std::vector<RawDocument> documents;
    std::size_t skipped = 0;
};

/// Reads a newline-delimited archive. An optional first line
/// {"archive": "untrue-fixture", "version": 1} acts as a header; a header with
/// another format or version makes the archive unreadable.
ArchiveContents load_archive(const std::filesystem::path& path,
                             Timestamp ingestion_time = std::chrono::system_clock::now());

/// Encodes one document as an archive line (no trailing newline).
std::string archive_line(const RawDocument& doc);

// --- extraction -----------------------------------------------------------

struct ExtractionResult {
    std::vector<ClaimRecord> records;
    std::size_t markup_blocks = 0;     // ClaimReview blocks seen
    std::size_t malformed_blocks = 0;  // JSON-LD scripts that failed to parse
    std::size_t dropped_invalid = 0;   // candidates failing ClaimRecord invariants
    bool used_rules = false;           // template rules were applied as fallback
};

/// Pulls ClaimReview records out of an HTML page or a JSON(-LD) payload.
/// JSON-LD blocks win over microdata; template rules apply only when the page
/// has no usable markup. Throws ParseError when the body is not UTF-8 or a
/// JSON payload does not parse.
ExtractionResult extract_claim_reviews(const RawDocument& doc, const SourceTemplate& tpl);

struct IngestReport {
    std::size_t documents = 0;
    std::size_t skipped_archive_records = 0;
    std::size_t unmatched_documents = 0;
    std::size_t non_ok_documents = 0;
    std::size_t parse_errors = 0;
    std::size_t malformed_blocks = 0;
    std::size_t dropped_invalid = 0;
    std::size_t duplicates = 0;
    std::size_t records = 0;
};

void to_json(nlohmann::json& j, const IngestReport& r);

struct IngestOutput {
    std::vector<ClaimRecord> records;
    IngestReport report;
};

/// Runs template matching and extraction over documents, dropping later
/// duplicates of a record_id.
IngestOutput ingest_documents(const std::vector<RawDocument>& docs, const TemplateRegistry& registry);

}  // namespace untrue
