#include "untrue/search_index.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "untrue/errors.hpp"
#include "untrue/text.hpp"

namespace untrue {

using nlohmann::json;

namespace {

constexpr std::string_view kSnapshotFormat = "untrue-index";
constexpr int kSnapshotVersion = 1;

bool is_identifier(std::string_view s) {
    if (s.empty() || s.size() > 64) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '-' || c == '_' || c == '.';
    });
}

std::string year_key(const EnrichedClaim& c) { return c.year ? std::to_string(*c.year) : std::string(kUnknownYear); }

bool passes(const QueryFilters& f, const EnrichedClaim& c) {
    if (!f.verdicts.empty() && !f.verdicts.count(c.verdict)) return false;
    if (!f.languages.empty() && !f.languages.count(c.language)) return false;
    if (!f.sources.empty() && !f.sources.count(c.base.source_id)) return false;
    if (!f.countries.empty() && !f.countries.count(c.base.country)) return false;
    if (f.year_from || f.year_to) {
        if (!c.year) return false;
        if (f.year_from && *c.year < *f.year_from) return false;
        if (f.year_to && *c.year > *f.year_to) return false;
    }
    return true;
}

}  // namespace

std::vector<std::string> analyze(std::string_view input, std::string_view) {
    std::vector<std::string> tokens;
    std::u32string current;
    auto flush = [&]() {
        if (current.size() >= 2) tokens.push_back(text::encode_utf8(current));
        current.clear();
    };
    for (char32_t cp : text::decode_utf8(input)) {
        if (text::is_alnum(cp)) {
            current.push_back(text::to_lower(cp));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

double bm25_score(double tf, double df, double n_docs, double dl, double avgdl, Bm25Params params) {
    if (!(n_docs >= 1) || !(df >= 1) || !(dl >= 1) || !(avgdl > 0) || !(tf >= 0)) {
        throw std::invalid_argument("bm25_score: precondition violated");
    }
    double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
    double norm = params.k1 * (1.0 - params.b + params.b * dl / avgdl);
    return idf * tf * (params.k1 + 1.0) / (tf + norm);
}

void validate_query(const Query& q) {
    if (q.page_size == 0 || q.page_size > kMaxPageSize) throw InvalidQuery("page_size must be in [1, 100]");
    for (const auto& lang : q.filters.languages) {
        if (!is_language_code(lang)) throw InvalidQuery("bad language filter '" + lang + "'");
    }
    for (const auto& src : q.filters.sources) {
        if (!is_identifier(src)) throw InvalidQuery("bad source filter '" + src + "'");
    }
    for (const auto& c : q.filters.countries) {
        bool ok = c.size() == 2 && std::isupper(static_cast<unsigned char>(c[0])) &&
                  std::isupper(static_cast<unsigned char>(c[1]));
        if (!ok) throw InvalidQuery("bad country filter '" + c + "'");
    }
    if (q.filters.year_from && q.filters.year_to && *q.filters.year_from > *q.filters.year_to) {
        throw InvalidQuery("year_from is after year_to");
    }
    if (q.display_language && (!is_language_code(*q.display_language) || *q.display_language == kUndetermined)) {
        throw InvalidQuery("bad display language '" + *q.display_language + "'");
    }
}

QueryExpansion cross_language_expand(const Query& q, const EntityGazetteer& gazetteer) {
    if (!q.expand_entities) throw std::invalid_argument("cross_language_expand requires expand_entities");
    std::set<std::string> ids;
    for (const auto& m : link_entities(q.text, gazetteer)) ids.insert(m.entity_id);
    std::set<std::string> terms;
    for (const auto& id : ids) {
        if (const auto* aliases = gazetteer.aliases_of(id)) {
            for (const auto& alias : *aliases) {
                for (auto& t : analyze(alias.text, alias.language)) terms.insert(std::move(t));
            }
        }
    }
    return {{ids.begin(), ids.end()}, {terms.begin(), terms.end()}};
}

json to_json(const ResultPage& page) {
    json hits = json::array();
    for (const auto& h : page.hits) {
        json hit = {{"doc_id", h.doc_id},
                    {"score", h.score},
                    {"record_id", h.record_id},
                    {"verdict", to_string(h.verdict)},
                    {"review_title", h.review_title},
                    {"country", h.country},
                    {"review_url", h.review_url},
                    {"excerpt", h.excerpt},
                    {"language", h.language},
                    {"source", h.source_id}};
        hit["date_published"] = h.date_published ? json(*h.date_published) : json(nullptr);
        if (h.translation) {
            const auto& t = *h.translation;
            if (t.failed) {
                hit["translation"] = {{"language", t.language}, {"status", "failed"}};
            } else {
                hit["translation"] = {{"language", t.language},
                                      {"review_title", t.review_title},
                                      {"excerpt", t.excerpt},
                                      {"status", t.provenance}};
            }
        }
        hits.push_back(std::move(hit));
    }
    json out = {{"total_hits", page.total_hits},
                {"elapsed_ms", page.elapsed_ms},
                {"page", page.page},
                {"page_size", page.page_size},
                {"hits", std::move(hits)},
                {"facets", page.facet_counts}};
    if (page.expansion) {
        out["expansion"] = {{"entity_ids", page.expansion->entity_ids}, {"terms", page.expansion->terms}};
    }
    return out;
}

// --- SearchIndex --------------------------------------------------------------

SearchIndex::SearchIndex() : SearchIndex(nullptr, nullptr, Options{}) {}

SearchIndex::SearchIndex(std::shared_ptr<const EntityGazetteer> gazetteer,
                         std::shared_ptr<TranslationService> translator, Options options)
    : gazetteer_(std::move(gazetteer)), translator_(std::move(translator)), options_(options) {}

void SearchIndex::remove_postings(State& state, const IndexedClaim& doc) {
    auto drop = [&](Postings& postings, const std::vector<std::string>& tokens) {
        for (const auto& t : std::set<std::string>(tokens.begin(), tokens.end())) {
            auto it = postings.find(t);
            if (it == postings.end()) continue;
            it->second.erase(doc.doc_id);
            if (it->second.empty()) postings.erase(it);
        }
    };
    drop(state.text_postings, doc.tokens);
    drop(state.claimant_postings, doc.claimant_tokens);
    for (const auto& e : doc.entity_ids) {
        auto it = state.entity_postings.find(e);
        if (it == state.entity_postings.end()) continue;
        it->second.erase(doc.doc_id);
        if (it->second.empty()) state.entity_postings.erase(it);
    }
    state.text_length -= doc.tokens.size();
    state.claimant_length -= doc.claimant_tokens.size();
}

void SearchIndex::insert(State& state, const EnrichedClaim& claim, DocId id) {
    IndexedClaim doc;
    doc.doc_id = id;
    doc.enriched = claim;
    doc.tokens = analyze(claim.base.claim_text + " " + claim.base.review_title, claim.language);
    if (claim.base.claimant) doc.claimant_tokens = analyze(*claim.base.claimant, claim.language);
    for (const auto& m : claim.entities) doc.entity_ids.insert(m.entity_id);

    for (const auto& t : doc.tokens) ++state.text_postings[t][id];
    for (const auto& t : doc.claimant_tokens) ++state.claimant_postings[t][id];
    for (const auto& e : doc.entity_ids) state.entity_postings[e].insert(id);
    state.text_length += doc.tokens.size();
    state.claimant_length += doc.claimant_tokens.size();

    if (id < state.docs.size()) {
        state.docs[id] = std::move(doc);
    } else {
        state.docs.push_back(std::move(doc));
    }
    state.by_record[claim.base.record_id] = id;
}

DocId SearchIndex::add_to(State& state, const EnrichedClaim& claim) {
    if (auto it = state.by_record.find(claim.base.record_id); it != state.by_record.end()) {
        auto id = it->second;
        remove_postings(state, state.docs[id]);
        insert(state, claim, id);
        return id;
    }
    auto id = static_cast<DocId>(state.docs.size());
    insert(state, claim, id);
    return id;
}

DocId SearchIndex::add_document(const EnrichedClaim& claim) {
    if (auto why = check_enriched_claim(claim); !why.empty()) {
        throw std::invalid_argument("add_document: " + why);
    }
    std::unique_lock lock(mutex_);
    return add_to(state_, claim);
}

std::size_t SearchIndex::size() const {
    std::shared_lock lock(mutex_);
    return state_.docs.size();
}

std::optional<EnrichedClaim> SearchIndex::find_claim(std::string_view record_id) const {
    std::shared_lock lock(mutex_);
    auto it = state_.by_record.find(std::string(record_id));
    if (it == state_.by_record.end()) return std::nullopt;
    return state_.docs[it->second].enriched;
}

std::vector<IndexedClaim> SearchIndex::documents() const {
    std::shared_lock lock(mutex_);
    return state_.docs;
}

std::optional<Timestamp> SearchIndex::snapshot_time() const {
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_time_;
}

std::size_t SearchIndex::document_frequency(std::string_view term) const {
    std::shared_lock lock(mutex_);
    auto it = state_.text_postings.find(std::string(term));
    return it == state_.text_postings.end() ? 0 : it->second.size();
}

Hit SearchIndex::make_hit(const IndexedClaim& doc, double score, const Query& q) const {
    const auto& c = doc.enriched;
    Hit hit;
    hit.doc_id = doc.doc_id;
    hit.score = score;
    hit.record_id = c.base.record_id;
    hit.verdict = c.verdict;
    hit.review_title = c.base.review_title;
    if (c.base.date_published) hit.date_published = c.base.date_published->str();
    hit.country = c.base.country;
    hit.review_url = c.base.review_url;
    hit.excerpt = text::excerpt(c.base.claim_text, options_.excerpt_chars);
    hit.language = c.language;
    hit.source_id = c.base.source_id;

    if (q.display_language && *q.display_language != c.language && c.language != kUndetermined) {
        HitTranslation t;
        t.language = *q.display_language;
        if (!translator_) {
            t.review_title = hit.review_title;
            t.excerpt = hit.excerpt;
            t.provenance = std::string(kUntranslated);
        } else {
            try {
                auto title = translator_->translate(c.base.review_title, c.language, t.language);
                auto claim = translator_->translate(c.base.claim_text, c.language, t.language);
                t.review_title = title.text;
                t.excerpt = text::excerpt(claim.text, options_.excerpt_chars);
                bool any = title.provenance == kTranslated || claim.provenance == kTranslated;
                t.provenance = std::string(any ? kTranslated : kUntranslated);
            } catch (const TranslationError&) {
                t = HitTranslation{};
                t.language = *q.display_language;
                t.failed = true;
            }
        }
        hit.translation = std::move(t);
    }
    return hit;
}

ResultPage SearchIndex::search(const Query& q) const {
    auto started = std::chrono::steady_clock::now();
    validate_query(q);

    std::set<std::string> terms;
    for (auto& t : analyze(q.text)) terms.insert(std::move(t));
    std::optional<QueryExpansion> expansion;
    if (q.expand_entities) {
        expansion = gazetteer_ ? cross_language_expand(q, *gazetteer_) : QueryExpansion{};
        terms.insert(expansion->terms.begin(), expansion->terms.end());
    }
    bool browse = text::trim(q.text).empty();

    std::shared_lock lock(mutex_);
    const auto& st = state_;
    double n_docs = static_cast<double>(st.docs.size());

    std::map<DocId, double> scores;
    if (browse) {
        for (const auto& d : st.docs) scores.emplace(d.doc_id, 0.0);
    } else if (n_docs > 0) {
        double avg_text = static_cast<double>(st.text_length) / n_docs;
        double avg_claimant = static_cast<double>(st.claimant_length) / n_docs;
        auto score_field = [&](const Postings& postings, const std::string& term, bool claimant, double avgdl) {
            auto it = postings.find(term);
            if (it == postings.end()) return;
            double df = static_cast<double>(it->second.size());
            for (const auto& [doc, tf] : it->second) {
                const auto& d = st.docs[doc];
                double dl = static_cast<double>(claimant ? d.claimant_tokens.size() : d.tokens.size());
                scores[doc] += bm25_score(tf, df, n_docs, dl, avgdl, options_.bm25);
            }
        };
        for (const auto& term : terms) {
            score_field(st.text_postings, term, false, avg_text);
            score_field(st.claimant_postings, term, true, avg_claimant);
        }
        if (expansion) {
            for (const auto& e : expansion->entity_ids) {
                auto it = st.entity_postings.find(e);
                if (it == st.entity_postings.end()) continue;
                for (auto doc : it->second) scores[doc] += options_.entity_bonus;
            }
        }
    }

    std::vector<std::pair<DocId, double>> ranked;
    ranked.reserve(scores.size());
    for (const auto& [doc, score] : scores) {
        if (passes(q.filters, st.docs[doc].enriched)) ranked.emplace_back(doc, score);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    ResultPage page;
    page.total_hits = ranked.size();
    page.page = q.page;
    page.page_size = q.page_size;
    page.expansion = std::move(expansion);
    for (const auto& name : kFacetNames) page.facet_counts[name];
    for (const auto& [doc, score] : ranked) {
        const auto& c = st.docs[doc].enriched;
        ++page.facet_counts["verdict"][std::string(to_string(c.verdict))];
        ++page.facet_counts["language"][c.language];
        ++page.facet_counts["source"][c.base.source_id];
        ++page.facet_counts["country"][c.base.country];
        ++page.facet_counts["year"][year_key(c)];
    }
    std::size_t first = std::min(ranked.size(), q.page * q.page_size);
    std::size_t last = std::min(ranked.size(), first + q.page_size);
    for (std::size_t i = first; i < last; ++i) {
        page.hits.push_back(make_hit(st.docs[ranked[i].first], ranked[i].second, q));
    }
    lock.unlock();

    page.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return page;
}

// --- snapshots ----------------------------------------------------------------

json SearchIndex::postings_json(const Postings& postings) {
    std::map<std::string, json> ordered;
    for (const auto& [term, docs] : postings) {
        json list = json::array();
        for (const auto& [doc, tf] : docs) list.push_back({doc, tf});
        ordered.emplace(term, std::move(list));
    }
    json out = json::object();
    for (auto& [term, list] : ordered) out[term] = std::move(list);
    return out;
}

void SearchIndex::save_snapshot(const std::filesystem::path& path) const {
    json snap;
    auto now = std::chrono::system_clock::now();
    {
        std::shared_lock lock(mutex_);
        snap["format"] = kSnapshotFormat;
        snap["version"] = kSnapshotVersion;
        snap["saved_at"] = format_timestamp(now);
        json docs = json::array();
        for (const auto& d : state_.docs) docs.push_back({{"doc_id", d.doc_id}, {"claim", d.enriched}});
        snap["documents"] = std::move(docs);
        snap["postings"] = postings_json(state_.text_postings);
        snap["claimant_postings"] = postings_json(state_.claimant_postings);
        std::map<std::string, std::map<std::string, std::size_t>> facets;
        for (const auto& d : state_.docs) {
            const auto& c = d.enriched;
            ++facets["verdict"][std::string(to_string(c.verdict))];
            ++facets["language"][c.language];
            ++facets["source"][c.base.source_id];
            ++facets["country"][c.base.country];
            ++facets["year"][year_key(c)];
        }
        snap["facets"] = std::move(facets);
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw SnapshotError("cannot write snapshot: " + tmp.string());
        out << snap.dump() << '\n';
        if (!out) throw SnapshotError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
    std::lock_guard lock(snapshot_mutex_);
    snapshot_time_ = now;
}

void SearchIndex::load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError("snapshot not found: " + path.string());
    State fresh;
    Timestamp saved_at{};
    try {
        auto snap = json::parse(in);
        if (snap.value("format", "") != kSnapshotFormat || snap.value("version", 0) != kSnapshotVersion) {
            throw SnapshotError("unsupported snapshot format: " + path.string());
        }
        auto ts = parse_timestamp(snap.at("saved_at").get<std::string>());
        if (!ts) throw SnapshotError("bad saved_at in snapshot");
        saved_at = *ts;
        DocId expected = 0;
        for (const auto& d : snap.at("documents")) {
            if (d.at("doc_id").get<DocId>() != expected) throw SnapshotError("snapshot doc ids are not dense");
            auto claim = d.at("claim").get<EnrichedClaim>();
            if (auto why = check_enriched_claim(claim); !why.empty()) throw SnapshotError("invalid claim: " + why);
            if (add_to(fresh, claim) != expected) throw SnapshotError("duplicate record in snapshot");
            ++expected;
        }
        if (postings_json(fresh.text_postings) != snap.at("postings") ||
            postings_json(fresh.claimant_postings) != snap.at("claimant_postings")) {
            throw SnapshotError("snapshot postings do not match its documents");
        }
    } catch (const json::exception& e) {
        throw SnapshotError("corrupt snapshot " + path.string() + ": " + e.what());
    } catch (const ParseError& e) {
        throw SnapshotError("corrupt snapshot " + path.string() + ": " + e.what());
    }
    {
        std::unique_lock lock(mutex_);
        state_ = std::move(fresh);
    }
    std::lock_guard lock(snapshot_mutex_);
    snapshot_time_ = saved_at;
}

}  // namespace untrue
