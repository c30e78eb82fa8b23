#include "untrue/enrichment.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "untrue/digest.hpp"
#include "untrue/text.hpp"

namespace untrue {

using nlohmann::json;

namespace {

bool boundary_before(const std::u32string& s, std::size_t pos) { return pos == 0 || !text::is_alnum(s[pos - 1]); }
bool boundary_after(const std::u32string& s, std::size_t pos) { return pos >= s.size() || !text::is_alnum(s[pos]); }

}  // namespace

// --- gazetteer --------------------------------------------------------------

void EntityGazetteer::add(std::string_view entity_id, std::string_view alias, std::string_view language) {
    auto trimmed = std::string(text::trim(alias));
    if (entity_id.empty()) throw ConfigError("gazetteer entry with empty entity id");
    if (trimmed.empty()) throw ConfigError("empty alias for entity '" + std::string(entity_id) + "'");
    auto& aliases = entries_[std::string(entity_id)];
    if (!aliases.insert(Alias{trimmed, std::string(language)}).second) return;
    auto folded = text::to_lower(text::decode_utf8(trimmed));
    bool known = std::any_of(compiled_.begin(), compiled_.end(), [&](const CompiledAlias& c) {
        return c.folded == folded && c.entity_id == entity_id;
    });
    if (!known) compiled_.push_back({std::move(folded), std::string(entity_id)});
}

EntityGazetteer EntityGazetteer::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("gazetteer must be an object of entity ids");
    EntityGazetteer g;
    for (const auto& [entity_id, langs] : j.items()) {
        if (!langs.is_object() || langs.empty()) throw ConfigError("entity '" + entity_id + "' has no aliases");
        for (const auto& [lang, aliases] : langs.items()) {
            if (!aliases.is_array()) throw ConfigError("aliases of '" + entity_id + "' must be a list");
            for (const auto& alias : aliases) g.add(entity_id, alias.get<std::string>(), lang);
        }
    }
    return g;
}

EntityGazetteer EntityGazetteer::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open gazetteer: " + path.string());
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw ConfigError("gazetteer " + path.string() + ": " + e.what());
    }
}

const std::set<Alias>* EntityGazetteer::aliases_of(std::string_view entity_id) const {
    auto it = entries_.find(entity_id);
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<EntityMention> link_entities(std::string_view input, const EntityGazetteer& gazetteer) {
    auto original = text::decode_utf8(input);
    auto folded = text::to_lower(original);

    struct Candidate {
        std::size_t start;
        std::size_t end;
        const std::string* entity_id;
    };
    std::vector<Candidate> candidates;
    for (std::size_t start = 0; start < folded.size(); ++start) {
        if (!boundary_before(folded, start) || !text::is_alnum(folded[start])) continue;
        for (const auto& alias : gazetteer.compiled()) {
            auto len = alias.folded.size();
            if (len == 0 || start + len > folded.size()) continue;
            if (folded.compare(start, len, alias.folded) != 0) continue;
            if (!boundary_after(folded, start + len)) continue;
            candidates.push_back({start, start + len, &alias.entity_id});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        auto la = a.end - a.start;
        auto lb = b.end - b.start;
        if (la != lb) return la > lb;
        if (a.start != b.start) return a.start < b.start;
        return *a.entity_id < *b.entity_id;
    });

    std::vector<EntityMention> out;
    for (const auto& c : candidates) {
        bool overlaps = std::any_of(out.begin(), out.end(),
                                    [&](const EntityMention& m) { return c.start < m.end && m.start < c.end; });
        if (overlaps) continue;
        EntityMention m;
        m.start = c.start;
        m.end = c.end;
        m.surface = text::encode_utf8(std::u32string_view(original).substr(c.start, c.end - c.start));
        m.entity_id = *c.entity_id;
        m.confidence = 1.0;
        out.push_back(std::move(m));
    }
    std::sort(out.begin(), out.end(), [](const EntityMention& a, const EntityMention& b) { return a.start < b.start; });
    return out;
}

// --- translation ------------------------------------------------------------

Translation IdentityProvider::translate(std::string_view text, std::string_view, std::string_view) {
    return {std::string(text), std::string(kUntranslated)};
}

void DictionaryProvider::add(std::string_view from, std::string_view to, std::string_view phrase,
                             std::string_view translation) {
    auto folded = text::to_lower(text::decode_utf8(text::trim(phrase)));
    if (folded.empty()) throw ConfigError("empty phrase in translation dictionary");
    auto& entries = table_[{std::string(from), std::string(to)}];
    entries.push_back({std::move(folded), std::string(translation)});
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.folded.size() > b.folded.size(); });
}

std::shared_ptr<DictionaryProvider> DictionaryProvider::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open translation dictionary: " + path.string());
    auto provider = std::make_shared<DictionaryProvider>();
    try {
        auto j = json::parse(in);
        for (const auto& e : j.at("entries")) {
            provider->add(e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                          e.at("phrase").get<std::string>(), e.at("translation").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ConfigError("translation dictionary " + path.string() + ": " + e.what());
    }
    return provider;
}

Translation DictionaryProvider::translate(std::string_view input, std::string_view from, std::string_view to) {
    auto it = table_.find({std::string(from), std::string(to)});
    if (it == table_.end()) return {std::string(input), std::string(kUntranslated)};
    auto original = text::decode_utf8(input);
    auto folded = text::to_lower(original);

    std::string out;
    bool replaced = false;
    std::size_t pos = 0;
    while (pos < folded.size()) {
        const Entry* hit = nullptr;
        if (boundary_before(folded, pos)) {
            for (const auto& e : it->second) {
                auto len = e.folded.size();
                if (pos + len <= folded.size() && folded.compare(pos, len, e.folded) == 0 &&
                    boundary_after(folded, pos + len)) {
                    hit = &e;
                    break;
                }
            }
        }
        if (hit) {
            out += hit->translation;
            pos += hit->folded.size();
            replaced = true;
        } else {
            text::append_utf8(out, original[pos]);
            ++pos;
        }
    }
    return {out, std::string(replaced ? kTranslated : kUntranslated)};
}

TranslationService::TranslationService(std::shared_ptr<TranslationProvider> provider) : provider_(std::move(provider)) {
    if (!provider_) throw std::invalid_argument("translation provider is null");
}

Translation TranslationService::translate(std::string_view text, std::string_view from, std::string_view to) {
    if (from == to) throw std::invalid_argument("translation requires distinct languages");
    std::string key = provider_->name();
    key.append("\x1f").append(from).append("\x1f").append(to).append("\x1f").append(sha256_hex(text));
    {
        std::shared_lock lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    auto result = provider_->translate(text, from, to);
    std::unique_lock lock(mutex_);
    ++calls_;
    cache_.insert_or_assign(key, result);
    return result;
}

std::size_t TranslationService::provider_calls() const {
    std::shared_lock lock(mutex_);
    return calls_;
}

// --- enriched claims --------------------------------------------------------

void to_json(json& j, const EnrichedClaim& c) {
    j = json::object();
    j["record"] = c.base;
    j["verdict"] = to_string(c.verdict);
    j["language"] = c.language;
    json entities = json::array();
    for (const auto& m : c.entities) {
        entities.push_back({{"surface", m.surface},
                            {"start", m.start},
                            {"end", m.end},
                            {"entity_id", m.entity_id},
                            {"confidence", m.confidence}});
    }
    j["entities"] = std::move(entities);
    j["translations"] = c.translations;
    if (c.year) j["year"] = *c.year;
}

void from_json(const json& j, EnrichedClaim& c) {
    c = EnrichedClaim{};
    c.base = j.at("record").get<ClaimRecord>();
    auto v = parse_verdict(j.at("verdict").get<std::string>());
    if (!v) throw ParseError("unknown verdict in enriched claim");
    c.verdict = *v;
    c.language = j.at("language").get<std::string>();
    for (const auto& e : j.at("entities")) {
        EntityMention m;
        m.surface = e.at("surface").get<std::string>();
        m.start = e.at("start").get<std::size_t>();
        m.end = e.at("end").get<std::size_t>();
        m.entity_id = e.at("entity_id").get<std::string>();
        m.confidence = e.at("confidence").get<double>();
        c.entities.push_back(std::move(m));
    }
    if (j.contains("translations")) c.translations = j.at("translations").get<std::map<std::string, std::string>>();
    if (j.contains("year")) c.year = j.at("year").get<int>();
}

std::string check_enriched_claim(const EnrichedClaim& c) {
    if (auto why = check_claim_record(c.base); !why.empty()) return why;
    if (!is_language_code(c.language)) return "bad language code";
    auto cps = text::decode_utf8(c.base.claim_text);
    std::size_t prev_end = 0;
    for (const auto& m : c.entities) {
        if (!(m.start < m.end) || m.end > cps.size()) return "entity offsets out of bounds";
        if (m.start < prev_end) return "overlapping entity mentions";
        if (text::encode_utf8(std::u32string_view(cps).substr(m.start, m.end - m.start)) != m.surface) {
            return "entity surface does not match offsets";
        }
        if (m.confidence < 0.0 || m.confidence > 1.0) return "entity confidence out of range";
        prev_end = m.end;
    }
    if (c.translations.count(c.language)) return "translations contain the record language";
    return {};
}

EnrichedClaim enrich(const ClaimRecord& record, Verdict verdict, const EntityGazetteer& gazetteer,
                     std::string_view fallback_language) {
    EnrichedClaim out;
    out.base = record;
    out.verdict = verdict;
    auto guess = detect_language(record.claim_text);
    out.language = guess.language;
    if (out.language == kUndetermined && is_language_code(fallback_language)) out.language = fallback_language;
    out.entities = link_entities(record.claim_text, gazetteer);
    if (record.date_published) out.year = record.date_published->year;
    return out;
}

}  // namespace untrue
