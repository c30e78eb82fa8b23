#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "untrue/corpus_ingest.hpp"
#include "untrue/language.hpp"
#include "untrue/verdict.hpp"

namespace untrue {

// --- entity linking ---------------------------------------------------------

struct EntityMention {
    std::string surface;
    std::size_t start = 0;  // code point offsets, half-open
    std::size_t end = 0;
    std::string entity_id;
    double confidence = 1.0;

    bool operator==(const EntityMention&) const = default;
};

struct Alias {
    std::string text;
    std::string language;

    auto operator<=>(const Alias&) const = default;
};

class EntityGazetteer {
public:
    EntityGazetteer() = default;

    /// Throws ConfigError on an empty alias.
    void add(std::string_view entity_id, std::string_view alias, std::string_view language);

    /// {"<entity_id>": {"en": ["alias", ...], "pt": [...]}, ...}
    static EntityGazetteer load(const std::filesystem::path& path);
    static EntityGazetteer from_json(const nlohmann::json& j);

    const std::map<std::string, std::set<Alias>, std::less<>>& entries() const { return entries_; }
    const std::set<Alias>* aliases_of(std::string_view entity_id) const;
    bool empty() const { return entries_.empty(); }

    struct CompiledAlias {
        std::u32string folded;
        std::string entity_id;
    };
    const std::vector<CompiledAlias>& compiled() const { return compiled_; }

private:
    std::map<std::string, std::set<Alias>, std::less<>> entries_;
    std::vector<CompiledAlias> compiled_;
};

/// Case-insensitive alias scan on word boundaries. Overlaps resolve to the
/// longest span, then the leftmost; output sorted by start offset.
std::vector<EntityMention> link_entities(std::string_view text, const EntityGazetteer& gazetteer);

// --- translation ------------------------------------------------------------

inline constexpr std::string_view kTranslated = "translated";
inline constexpr std::string_view kUntranslated = "untranslated";

struct Translation {
    std::string text;
    std::string provenance;  // kTranslated or kUntranslated

    bool operator==(const Translation&) const = default;
};

class TranslationProvider {
public:
    virtual ~TranslationProvider() = default;
    virtual std::string name() const = 0;
    /// Throws TranslationError on transport or quota failure.
    virtual Translation translate(std::string_view text, std::string_view from, std::string_view to) = 0;
};

/// Returns the input unchanged, flagged untranslated.
class IdentityProvider final : public TranslationProvider {
public:
    std::string name() const override { return "identity"; }
    Translation translate(std::string_view text, std::string_view from, std::string_view to) override;
};

/// Phrase substitution from a fixed (from, to, phrase) -> phrase table.
/// Matching is case-insensitive on word boundaries, longest phrase first.
class DictionaryProvider final : public TranslationProvider {
public:
    void add(std::string_view from, std::string_view to, std::string_view phrase, std::string_view translation);

    /// {"entries": [{"from": "en", "to": "pt", "phrase": "...", "translation": "..."}]}
    static std::shared_ptr<DictionaryProvider> load(const std::filesystem::path& path);

    std::string name() const override { return "dictionary"; }
    Translation translate(std::string_view text, std::string_view from, std::string_view to) override;

private:
    struct Entry {
        std::u32string folded;
        std::string translation;
    };
    std::map<std::pair<std::string, std::string>, std::vector<Entry>> table_;
};

/// Provider plus result cache keyed by (provider, from, to, sha256(text)).
class TranslationService {
public:
    explicit TranslationService(std::shared_ptr<TranslationProvider> provider);

    /// Throws std::invalid_argument when from == to; TranslationError from the
    /// provider propagates and nothing is cached.
    Translation translate(std::string_view text, std::string_view from, std::string_view to);

    std::size_t provider_calls() const;
    std::string provider_name() const { return provider_->name(); }

private:
    std::shared_ptr<TranslationProvider> provider_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, Translation> cache_;
    std::size_t calls_ = 0;
};

inline Translation translate(std::string_view text, std::string_view from, std::string_view to,
                             TranslationService& service) {
    return service.translate(text, from, to);
}

// --- enriched claims --------------------------------------------------------

struct EnrichedClaim {
    ClaimRecord base;
    Verdict verdict = Verdict::Other;
    std::string language = std::string(kUndetermined);
    std::vector<EntityMention> entities;
    std::map<std::string, std::string> translations;
    std::optional<int> year;

    bool operator==(const EnrichedClaim&) const = default;
};

void to_json(nlohmann::json& j, const EnrichedClaim& c);
void from_json(const nlohmann::json& j, EnrichedClaim& c);

/// Empty string when the claim satisfies its invariants, else the reason.
std::string check_enriched_claim(const EnrichedClaim& c);

/// Language from the claim text, falling back to `fallback_language` when
/// detection is undetermined; entities from the gazetteer; year from the date.
EnrichedClaim enrich(const ClaimRecord& record, Verdict verdict, const EntityGazetteer& gazetteer,
                     std::string_view fallback_language = kUndetermined);

}  // namespace untrue
