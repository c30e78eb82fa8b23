#include "untrue/corpus_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "untrue/digest.hpp"
#include "untrue/html.hpp"
#include "untrue/text.hpp"
#include "untrue/url.hpp"

namespace untrue {

using nlohmann::json;

namespace {

constexpr std::string_view kArchiveFormat = "untrue-fixture";
constexpr int kArchiveVersion = 1;

const std::set<std::string, std::less<>> kRuleFields = {
    "claim_text",  "claimant",     "review_title", "review_url", "date_published",
    "rating_value", "best_rating", "worst_rating", "rating_label"};

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_upper2(std::string_view s) {
    return s.size() == 2 && std::isupper(static_cast<unsigned char>(s[0])) &&
           std::isupper(static_cast<unsigned char>(s[1]));
}

bool is_lower2(std::string_view s) {
    return s.size() == 2 && std::islower(static_cast<unsigned char>(s[0])) &&
           std::islower(static_cast<unsigned char>(s[1]));
}

std::optional<double> parse_number(std::string_view s) {
    s = text::trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::optional<double> number_field(const json& obj, std::string_view key) {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (it->is_number()) {
        double v = it->get<double>();
        return std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
    }
    if (it->is_string()) return parse_number(it->get_ref<const std::string&>());
    return std::nullopt;
}

std::optional<std::string> string_field(const json& obj, std::string_view key) {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    const json* v = &*it;
    if (v->is_array()) {
        if (v->empty()) return std::nullopt;
        v = &v->front();
    }
    if (!v->is_string()) return std::nullopt;
    auto s = text::collapse_whitespace(v->get_ref<const std::string&>());
    if (s.empty()) return std::nullopt;
    return s;
}

bool type_is(const json& obj, std::string_view wanted) {
    auto matches = [&](const json& t) {
        if (!t.is_string()) return false;
        std::string_view name = t.get_ref<const std::string&>();
        auto cut = name.find_last_of("/:#");
        if (cut != std::string_view::npos) name = name.substr(cut + 1);
        return name == wanted;
    };
    auto it = obj.find("@type");
    if (it == obj.end()) return false;
    if (it->is_array()) return std::any_of(it->begin(), it->end(), matches);
    return matches(*it);
}

void collect_claim_reviews(const json& node, std::vector<json>& out) {
    if (node.is_array()) {
        for (const auto& item : node) collect_claim_reviews(item, out);
        return;
    }
    if (!node.is_object()) return;
    if (type_is(node, "ClaimReview")) {
        out.push_back(node);
        return;
    }
    if (auto graph = node.find("@graph"); graph != node.end()) collect_claim_reviews(*graph, out);
}

std::optional<std::string> claimant_of(const json& review) {
    auto item = review.find("itemReviewed");
    if (item == review.end() || !item->is_object()) return std::nullopt;
    auto author = item->find("author");
    if (author == item->end()) return std::nullopt;
    const json* a = &*author;
    if (a->is_array()) {
        if (a->empty()) return std::nullopt;
        a = &a->front();
    }
    if (a->is_string()) {
        auto s = text::collapse_whitespace(a->get_ref<const std::string&>());
        return s.empty() ? std::nullopt : std::optional<std::string>(s);
    }
    if (a->is_object()) return string_field(*a, "name");
    return std::nullopt;
}

// Page-level context used when markup leaves a field out.
struct PageContext {
    const RawDocument* doc = nullptr;
    const SourceTemplate* tpl = nullptr;
    std::optional<Url> base;
    std::optional<std::string> page_title;
};

std::string resolve_review_url(const PageContext& ctx, const std::optional<std::string>& candidate) {
    if (candidate && ctx.base) {
        if (auto resolved = resolve_url(*ctx.base, *candidate)) return *resolved;
    }
    return ctx.doc->url;
}

ClaimRecord finish_record(ClaimRecord r, const PageContext& ctx) {
    r.source_id = ctx.tpl->source_id;
    r.country = ctx.tpl->country;
    if (r.review_title.empty()) r.review_title = ctx.page_title.value_or(r.claim_text);
    r.record_id = compute_record_id(r.review_url, r.claim_text);
    return r;
}

ClaimRecord record_from_review(const json& review, const PageContext& ctx) {
    ClaimRecord r;
    r.claim_text = string_field(review, "claimReviewed").value_or("");
    r.claimant = claimant_of(review);
    r.review_title = string_field(review, "name").value_or(string_field(review, "headline").value_or(""));
    r.review_url = resolve_review_url(ctx, string_field(review, "url"));
    if (auto date = string_field(review, "datePublished")) r.date_published = parse_date(*date);
    if (auto rating = review.find("reviewRating"); rating != review.end()) {
        const json* rr = &*rating;
        if (rr->is_array() && !rr->empty()) rr = &rr->front();
        if (rr->is_object()) {
            r.rating_value = number_field(*rr, "ratingValue");
            r.best_rating = number_field(*rr, "bestRating");
            r.worst_rating = number_field(*rr, "worstRating");
            r.rating_label = string_field(*rr, "alternateName");
        }
    }
    return finish_record(std::move(r), ctx);
}

// --- microdata -----------------------------------------------------------

std::string itemtype_name(std::string_view itemtype) {
    auto first = itemtype.substr(0, itemtype.find(' '));
    auto cut = first.find_last_of("/:#");
    return std::string(cut == std::string_view::npos ? first : first.substr(cut + 1));
}

json microdata_value(const html::Document& doc, html::Document::NodeId id);

void microdata_properties(const html::Document& doc, html::Document::NodeId id, json& item) {
    for (auto child : doc.node(id).children) {
        const auto& n = doc.node(child);
        if (n.is_text) continue;
        if (auto prop = doc.attribute(child, "itemprop")) {
            json value = microdata_value(doc, child);
            std::istringstream names{std::string(*prop)};
            std::string name;
            while (names >> name) {
                if (!item.contains(name)) item[name] = value;
            }
        }
        // Nested items own their own properties.
        if (!doc.has_attribute(child, "itemscope")) microdata_properties(doc, child, item);
    }
}

json microdata_item(const html::Document& doc, html::Document::NodeId id) {
    json item = json::object();
    if (auto type = doc.attribute(id, "itemtype")) item["@type"] = itemtype_name(*type);
    microdata_properties(doc, id, item);
    return item;
}

json microdata_value(const html::Document& doc, html::Document::NodeId id) {
    if (doc.has_attribute(id, "itemscope")) return microdata_item(doc, id);
    const auto& tag = doc.node(id).tag;
    auto attr = [&](std::string_view name) -> json {
        auto v = doc.attribute(id, name);
        return v ? json(std::string(text::trim(*v))) : json("");
    };
    if (tag == "meta") return attr("content");
    if (tag == "a" || tag == "link" || tag == "area") return attr("href");
    if (tag == "img" || tag == "audio" || tag == "video" || tag == "source" || tag == "iframe" || tag == "embed") {
        return attr("src");
    }
    if (tag == "time" && doc.has_attribute(id, "datetime")) return attr("datetime");
    if ((tag == "data" || tag == "meter") && doc.has_attribute(id, "value")) return attr("value");
    if (doc.has_attribute(id, "content")) return attr("content");
    return doc.text_content(id);
}

bool inside_item(const html::Document& doc, html::Document::NodeId id) {
    for (auto p = doc.node(id).parent; p != html::Document::kRoot; p = doc.node(p).parent) {
        if (doc.has_attribute(p, "itemscope")) return true;
    }
    return false;
}

std::vector<json> microdata_claim_reviews(const html::Document& doc) {
    std::vector<json> out;
    for (auto id : doc.elements()) {
        if (!doc.has_attribute(id, "itemscope")) continue;
        auto type = doc.attribute(id, "itemtype");
        if (!type || itemtype_name(*type) != "ClaimReview") continue;
        // A ClaimReview used as a property value of another item is not a top-level review.
        if (doc.has_attribute(id, "itemprop") && inside_item(doc, id)) continue;
        out.push_back(microdata_item(doc, id));
    }
    return out;
}

std::optional<std::string> page_title(const html::Document& doc) {
    static const auto og = html::Selector::parse("meta[property=og:title]@content");
    if (auto v = og->first_value(doc); v && !v->empty()) return text::collapse_whitespace(*v);
    for (auto id : doc.elements_by_tag("title")) {
        auto t = doc.text_content(id);
        if (!t.empty()) return t;
    }
    return std::nullopt;
}

std::vector<ClaimRecord> apply_rules(const html::Document& doc, const PageContext& ctx) {
    std::map<std::string, std::string, std::less<>> values;
    for (const auto& rule : ctx.tpl->extraction_rules) {
        if (values.count(rule.field)) continue;
        auto sel = html::Selector::parse(rule.selector);
        if (!sel) continue;
        if (auto v = sel->first_value(doc); v && !v->empty()) values[rule.field] = text::collapse_whitespace(*v);
    }
    auto claim = values.find("claim_text");
    if (claim == values.end()) return {};

    auto get = [&](std::string_view field) -> std::optional<std::string> {
        auto it = values.find(field);
        return it == values.end() ? std::nullopt : std::optional<std::string>(it->second);
    };
    auto num = [&](std::string_view field) -> std::optional<double> {
        auto v = get(field);
        return v ? parse_number(*v) : std::nullopt;
    };

    ClaimRecord r;
    r.claim_text = claim->second;
    r.claimant = get("claimant");
    r.review_title = get("review_title").value_or("");
    r.review_url = resolve_review_url(ctx, get("review_url"));
    if (auto d = get("date_published")) r.date_published = parse_date(*d);
    r.rating_value = num("rating_value");
    r.best_rating = num("best_rating");
    r.worst_rating = num("worst_rating");
    r.rating_label = get("rating_label");
    return {finish_record(std::move(r), ctx)};
}

bool is_json_content_type(std::string_view content_type) {
    auto ct = lower_ascii(content_type.substr(0, content_type.find(';')));
    ct = std::string(text::trim(ct));
    return ct == "application/json" || ct == "application/ld+json" || ct.ends_with("+json");
}

}  // namespace

// --- templates ------------------------------------------------------------

bool SourceTemplate::matches_host(std::string_view host) const {
    auto h = lower_ascii(host);
    for (const auto& raw : domain_patterns) {
        auto p = lower_ascii(raw);
        if (p.starts_with("*.")) {
            auto suffix = p.substr(1);
            if (h.size() > suffix.size() && h.ends_with(suffix)) return true;
            continue;
        }
        if (h == p) return true;
        if (h.size() > p.size() && h.ends_with(p) && h[h.size() - p.size() - 1] == '.') return true;
    }
    return false;
}

void validate_template(const SourceTemplate& tpl) {
    auto fail = [&](const std::string& why) { throw ConfigError("template '" + tpl.source_id + "': " + why); };
    if (tpl.source_id.empty()) throw ConfigError("template with empty source_id");
    if (tpl.domain_patterns.empty()) fail("domain_patterns is empty");
    for (const auto& p : tpl.domain_patterns) {
        if (p.empty() || p.find('/') != std::string::npos) fail("bad domain pattern '" + p + "'");
    }
    if (!is_upper2(tpl.country)) fail("country must be an uppercase ISO 3166-1 alpha-2 code");
    if (!is_lower2(tpl.default_language)) fail("default_language must be an ISO 639-1 code");
    bool has_claim = false;
    bool has_url = false;
    for (const auto& rule : tpl.extraction_rules) {
        if (!kRuleFields.count(rule.field)) fail("unknown rule field '" + rule.field + "'");
        if (!html::Selector::parse(rule.selector)) fail("bad selector '" + rule.selector + "'");
        has_claim |= rule.field == "claim_text";
        has_url |= rule.field == "review_url";
    }
    if (!has_claim || !has_url) fail("rules must cover claim_text and review_url");
}

TemplateRegistry::TemplateRegistry(std::vector<SourceTemplate> templates) : templates_(std::move(templates)) {
    std::set<std::string> seen;
    for (const auto& tpl : templates_) {
        validate_template(tpl);
        if (!seen.insert(tpl.source_id).second) throw ConfigError("duplicate source_id '" + tpl.source_id + "'");
    }
}

TemplateRegistry TemplateRegistry::load_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("template directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<SourceTemplate> templates;
    for (const auto& file : files) {
        std::ifstream in(file);
        json j;
        try {
            j = json::parse(in);
            SourceTemplate tpl;
            tpl.source_id = j.at("source_id").get<std::string>();
            tpl.domain_patterns = j.at("domain_patterns").get<std::vector<std::string>>();
            tpl.country = j.at("country").get<std::string>();
            tpl.default_language = j.at("default_language").get<std::string>();
            for (const auto& rule : j.at("extraction_rules")) {
                tpl.extraction_rules.push_back({rule.at("field").get<std::string>(), rule.at("selector").get<std::string>()});
            }
            if (tpl.source_id != file.stem().string()) {
                throw ConfigError("file name does not match source_id '" + tpl.source_id + "'");
            }
            templates.push_back(std::move(tpl));
        } catch (const json::exception& e) {
            throw ConfigError(file.string() + ": " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError(file.string() + ": " + e.what());
        }
    }
    return TemplateRegistry(std::move(templates));
}

const SourceTemplate* TemplateRegistry::find(std::string_view source_id) const {
    for (const auto& tpl : templates_) {
        if (tpl.source_id == source_id) return &tpl;
    }
    return nullptr;
}

const SourceTemplate& match_template(std::string_view url, const std::vector<SourceTemplate>& registry) {
    if (registry.empty()) throw TemplateMatchError("template registry is empty");
    auto parsed = Url::parse(url);
    if (!parsed) throw TemplateMatchError("not an absolute URL: " + std::string(url));
    const SourceTemplate* found = nullptr;
    for (const auto& tpl : registry) {
        if (!tpl.matches_host(parsed->host)) continue;
        if (found) {
            throw TemplateMatchError("host '" + parsed->host + "' matches both '" + found->source_id + "' and '" +
                                     tpl.source_id + "'");
        }
        found = &tpl;
    }
    if (!found) throw TemplateMatchError("no template for host '" + parsed->host + "'");
    return *found;
}

// --- records --------------------------------------------------------------

std::string compute_record_id(std::string_view review_url, std::string_view claim_text) {
    std::string payload;
    payload.reserve(review_url.size() + claim_text.size() + 1);
    payload.append(review_url).append("\n").append(claim_text);
    return sha256_hex(payload);
}

std::string check_claim_record(const ClaimRecord& r) {
    if (text::trim(r.claim_text).empty()) return "empty claim_text";
    if (!is_absolute_url(r.review_url)) return "review_url is not absolute";
    if (r.record_id != compute_record_id(r.review_url, r.claim_text)) return "record_id mismatch";
    if (r.source_id.empty()) return "missing source_id";
    if (!is_upper2(r.country)) return "bad country code";
    if (r.best_rating && r.worst_rating && !(*r.worst_rating < *r.best_rating)) return "worst_rating >= best_rating";
    if (r.rating_value && r.worst_rating && *r.rating_value < *r.worst_rating) return "rating below worst_rating";
    if (r.rating_value && r.best_rating && *r.rating_value > *r.best_rating) return "rating above best_rating";
    return {};
}

void to_json(json& j, const ClaimRecord& r) {
    j = json::object();
    j["record_id"] = r.record_id;
    j["claim_text"] = r.claim_text;
    if (r.claimant) j["claimant"] = *r.claimant;
    j["review_title"] = r.review_title;
    j["review_url"] = r.review_url;
    if (r.date_published) j["date_published"] = r.date_published->str();
    if (r.rating_value) j["rating_value"] = *r.rating_value;
    if (r.best_rating) j["best_rating"] = *r.best_rating;
    if (r.worst_rating) j["worst_rating"] = *r.worst_rating;
    if (r.rating_label) j["rating_label"] = *r.rating_label;
    j["source_id"] = r.source_id;
    j["country"] = r.country;
}

void from_json(const json& j, ClaimRecord& r) {
    r = ClaimRecord{};
    r.record_id = j.at("record_id").get<std::string>();
    r.claim_text = j.at("claim_text").get<std::string>();
    if (j.contains("claimant")) r.claimant = j.at("claimant").get<std::string>();
    r.review_title = j.at("review_title").get<std::string>();
    r.review_url = j.at("review_url").get<std::string>();
    if (j.contains("date_published")) {
        r.date_published = parse_date(j.at("date_published").get<std::string>());
        if (!r.date_published) throw ParseError("bad date_published in record " + r.record_id);
    }
    if (j.contains("rating_value")) r.rating_value = j.at("rating_value").get<double>();
    if (j.contains("best_rating")) r.best_rating = j.at("best_rating").get<double>();
    if (j.contains("worst_rating")) r.worst_rating = j.at("worst_rating").get<double>();
    if (j.contains("rating_label")) r.rating_label = j.at("rating_label").get<std::string>();
    r.source_id = j.at("source_id").get<std::string>();
    r.country = j.at("country").get<std::string>();
}

std::string serialize_record(const ClaimRecord& r) { return json(r).dump(); }

// --- archive --------------------------------------------------------------

ArchiveContents load_archive(const std::filesystem::path& path, Timestamp ingestion_time) {
    if (!std::filesystem::exists(path)) throw ArchiveError("archive not found: " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArchiveError("cannot open archive: " + path.string());

    ArchiveContents out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        auto trimmed = text::trim(line);
        if (trimmed.empty()) continue;
        if (first) {
            first = false;
            if (!text::is_valid_utf8(trimmed)) throw ArchiveError("unreadable archive header: not UTF-8 text");
            auto head = json::parse(trimmed, nullptr, false);
            if (head.is_object() && head.contains("archive")) {
                if (head["archive"] != kArchiveFormat || head.value("version", 0) != kArchiveVersion) {
                    throw ArchiveError("unreadable archive header: unsupported format or version");
                }
                continue;
            }
        }
        auto rec = json::parse(trimmed, nullptr, false);
        try {
            if (!rec.is_object()) throw ArchiveError("not an object");
            RawDocument doc;
            doc.url = rec.at("url").get<std::string>();
            auto fetched = parse_timestamp(rec.at("fetched_at").get<std::string>());
            const auto& status = rec.at("http_status");
            if (!status.is_number_integer()) throw ArchiveError("http_status");
            doc.http_status = status.get<int>();
            doc.content_type = rec.at("content_type").get<std::string>();
            auto body = base64_decode(rec.at("body_base64").get<std::string>());
            if (!is_absolute_url(doc.url) || !fetched || *fetched > ingestion_time || !body ||
                doc.http_status < 100 || doc.http_status > 599 || (doc.http_status == 200 && body->empty())) {
                throw ArchiveError("invalid record");
            }
            doc.fetched_at = *fetched;
            doc.body = std::move(*body);
            out.documents.push_back(std::move(doc));
        } catch (const std::exception&) {
            ++out.skipped;
        }
    }
    if (in.bad()) throw ArchiveError("read error on archive: " + path.string());
    return out;
}

std::string archive_line(const RawDocument& doc) {
    json j;
    j["url"] = doc.url;
    j["fetched_at"] = format_timestamp(doc.fetched_at);
    j["http_status"] = doc.http_status;
    j["content_type"] = doc.content_type;
    j["body_base64"] = base64_encode(doc.body);
    return j.dump();
}

// --- extraction -----------------------------------------------------------

ExtractionResult extract_claim_reviews(const RawDocument& doc, const SourceTemplate& tpl) {
    if (!text::is_valid_utf8(doc.body)) throw ParseError("document body is not valid UTF-8: " + doc.url);
    if (doc.body.find('\0') != std::string::npos) throw ParseError("document body contains NUL bytes: " + doc.url);

    PageContext ctx;
    ctx.doc = &doc;
    ctx.tpl = &tpl;
    ctx.base = Url::parse(doc.url);

    ExtractionResult result;
    std::vector<json> reviews;
    std::optional<html::Document> page;

    if (is_json_content_type(doc.content_type)) {
        auto payload = json::parse(doc.body, nullptr, false);
        if (payload.is_discarded()) throw ParseError("unparseable JSON payload: " + doc.url);
        collect_claim_reviews(payload, reviews);
    } else {
        page = html::Document::parse(doc.body);
        ctx.page_title = page_title(*page);
        for (auto id : page->elements_by_tag("script")) {
            auto type = page->attribute(id, "type");
            if (!type || lower_ascii(text::trim(*type)) != "application/ld+json") continue;
            auto block = json::parse(page->node(id).text, nullptr, false);
            if (block.is_discarded()) {
                ++result.malformed_blocks;
                continue;
            }
            collect_claim_reviews(block, reviews);
        }
        if (reviews.empty()) reviews = microdata_claim_reviews(*page);
    }

    result.markup_blocks = reviews.size();
    std::vector<ClaimRecord> candidates;
    for (const auto& review : reviews) candidates.push_back(record_from_review(review, ctx));
    if (reviews.empty() && page) {
        candidates = apply_rules(*page, ctx);
        result.used_rules = true;
    }
    for (auto& c : candidates) {
        if (check_claim_record(c).empty()) {
            result.records.push_back(std::move(c));
        } else {
            ++result.dropped_invalid;
        }
    }
    return result;
}

void to_json(json& j, const IngestReport& r) {
    j = json{{"documents", r.documents},
             {"skipped_archive_records", r.skipped_archive_records},
             {"unmatched_documents", r.unmatched_documents},
             {"non_ok_documents", r.non_ok_documents},
             {"parse_errors", r.parse_errors},
             {"malformed_blocks", r.malformed_blocks},
             {"dropped_invalid", r.dropped_invalid},
             {"duplicates", r.duplicates},
             {"records", r.records}};
}

IngestOutput ingest_documents(const std::vector<RawDocument>& docs, const TemplateRegistry& registry) {
    IngestOutput out;
    std::unordered_set<std::string> seen;
    for (const auto& doc : docs) {
        ++out.report.documents;
        if (doc.http_status != 200) {
            ++out.report.non_ok_documents;
            continue;
        }
        const SourceTemplate* tpl = nullptr;
        try {
            tpl = &match_template(doc.url, registry.templates());
        } catch (const TemplateMatchError&) {
            ++out.report.unmatched_documents;
            continue;
        }
        ExtractionResult extracted;
        try {
            extracted = extract_claim_reviews(doc, *tpl);
        } catch (const ParseError&) {
            ++out.report.parse_errors;
            continue;
        }
        out.report.malformed_blocks += extracted.malformed_blocks;
        out.report.dropped_invalid += extracted.dropped_invalid;
        for (auto& rec : extracted.records) {
            if (!seen.insert(rec.record_id).second) {
                ++out.report.duplicates;
                continue;
            }
            out.records.push_back(std::move(rec));
        }
    }
    out.report.records = out.records.size();
    return out;
}

}  // namespace untrue
