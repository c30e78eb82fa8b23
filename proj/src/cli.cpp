#include "untrue/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "untrue/api_service.hpp"
#include "untrue/errors.hpp"
#include "untrue/pipeline.hpp"
#include "untrue/stats.hpp"
#include "untrue/text.hpp"

namespace untrue {

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string format = "text";
    std::string config;

    std::string archive, templates, out, in, lexicon, gazetteer, dictionary, index, claims;

    std::string q;
    std::vector<std::string> verdicts, languages, sources, countries;
    std::optional<int> year_from, year_to;
    std::string display_lang;
    bool expand = false;
    std::size_t page = 0;
    std::size_t page_size = 10;
};

void add_format(CLI::App* cmd, Options& o) {
    cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));
}

std::string config_path(const Options& o) {
    if (!o.config.empty()) return o.config;
    if (const char* env = std::getenv("UNTRUE_CONFIG"); env && *env) return env;
    throw UsageError("no config given: pass --config or set UNTRUE_CONFIG");
}

void print_json(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

std::string upper(std::string_view s) {
    std::string r(s);
    for (auto& c : r) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return r;
}

std::string pad(std::string_view s, std::size_t width) {
    std::string cell(s);
    auto len = text::codepoint_length(cell);
    if (len > width) {
        cell = text::substr_codepoints(cell, 0, width - 1) + "…";
        len = width;
    }
    return cell + std::string(width - len, ' ');
}

void print_table(std::ostream& out, const ResultPage& page) {
    out << page.total_hits << " result" << (page.total_hits == 1 ? "" : "s") << " (" << std::fixed
        << std::setprecision(1) << page.elapsed_ms << " ms), page " << page.page << '\n';
    if (page.hits.empty()) return;
    out << pad("#", 4) << pad("VERDICT", 9) << pad("CTRY", 6) << pad("DATE", 12) << pad("SCORE", 8) << "TITLE\n";
    std::size_t n = page.page * page.page_size;
    for (const auto& h : page.hits) {
        std::ostringstream score;
        score << std::fixed << std::setprecision(3) << h.score;
        out << pad(std::to_string(++n), 4) << pad(upper(to_string(h.verdict)), 9) << pad(h.country, 6)
            << pad(h.date_published.value_or("-"), 12) << pad(score.str(), 8) << h.review_title << '\n';
        out << std::string(4, ' ') << "claim: " << h.excerpt << '\n';
        if (h.translation && !h.translation->failed) {
            out << std::string(4, ' ') << "[" << h.translation->language << ", " << h.translation->provenance
                << "] " << h.translation->review_title << '\n';
            out << std::string(4, ' ') << "[" << h.translation->language << "] " << h.translation->excerpt << '\n';
        } else if (h.translation) {
            out << std::string(4, ' ') << "[translation to " << h.translation->language << " failed]\n";
        }
        out << std::string(4, ' ') << h.review_url << '\n';
    }
}

void print_stats(std::ostream& out, const StatsReport& s) {
    out << "documents: " << s.total_documents << '\n';
    out << "by verdict:\n";
    for (const auto& [v, n] : s.by_verdict) out << "  " << pad(upper(to_string(v)), 8) << n << '\n';
    out << "by language:\n";
    for (const auto& [l, n] : s.by_language) out << "  " << pad(l, 8) << n << '\n';
    out << "by source:\n";
    for (const auto& [src, n] : s.by_source) out << "  " << pad(src, 24) << n << '\n';
    out << "by year:\n";
    for (const auto& [year, langs] : s.by_year) {
        out << "  " << year << ':';
        for (const auto& [l, n] : langs) out << ' ' << l << '=' << n;
        out << '\n';
    }
}

// Accepts claim records, normalized records or enriched claims, one per line.
std::vector<IndexedClaim> load_claims_any(const Options& o) {
    std::ifstream in(o.claims);
    if (!in) throw Error("cannot open " + o.claims);
    auto lexicon = load_lexicon_or_seed(o.lexicon);
    auto gazetteer = load_gazetteer_or_empty(o.gazetteer);
    std::optional<TemplateRegistry> registry;
    if (!o.templates.empty()) registry = TemplateRegistry::load_directory(o.templates);

    std::vector<IndexedClaim> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        auto j = json::parse(line, nullptr, false);
        if (!j.is_object()) throw ParseError(o.claims + ":" + std::to_string(line_no) + ": not a JSON object");
        IndexedClaim doc;
        doc.doc_id = static_cast<DocId>(docs.size());
        if (j.contains("record") && j.contains("language")) {
            doc.enriched = j.get<EnrichedClaim>();
        } else {
            NormalizedRecord n;
            if (j.contains("record")) {
                n.record = j.at("record").get<ClaimRecord>();
                auto v = parse_verdict(j.at("verdict").get<std::string>());
                if (!v) throw ParseError(o.claims + ":" + std::to_string(line_no) + ": unknown verdict");
                n.verdict = *v;
            } else {
                n.record = j.get<ClaimRecord>();
                n.verdict = normalize(rating_of(n.record), lexicon);
            }
            std::string fallback(kUndetermined);
            if (registry) {
                if (const auto* tpl = registry->find(n.record.source_id)) fallback = tpl->default_language;
            }
            doc.enriched = enrich(n.record, n.verdict, gazetteer, fallback);
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

int cmd_ingest(const Options& o, std::ostream& out) {
    auto registry = TemplateRegistry::load_directory(o.templates);
    auto report = run_ingest_stage(o.archive, registry, o.out);
    if (o.format == "json") {
        print_json(out, json(report));
    } else {
        json j = report;
        out << "ingest: " << o.archive << " -> " << o.out << '\n';
        for (const auto& [k, v] : j.items()) {
            if (v.is_number()) out << "  " << pad(k, 22) << v.dump() << '\n';
        }
    }
    return 0;
}

int cmd_normalize(const Options& o, std::ostream& out) {
    auto lexicon = load_lexicon_or_seed(o.lexicon);
    auto records = normalize_records(read_claim_records(o.in), lexicon);
    write_normalized(o.out, records);
    std::map<std::string, std::size_t> counts;
    for (auto v : kAllVerdicts) counts[std::string(to_string(v))] = 0;
    for (const auto& r : records) ++counts[std::string(to_string(r.verdict))];
    if (o.format == "json") {
        print_json(out, json{{"records", records.size()}, {"by_verdict", counts}, {"out", o.out}});
    } else {
        out << "normalized " << records.size() << " records -> " << o.out << '\n';
        for (const auto& [v, n] : counts) out << "  " << pad(upper(v), 8) << n << '\n';
    }
    return 0;
}

int cmd_enrich(const Options& o, std::ostream& out) {
    auto registry = TemplateRegistry::load_directory(o.templates);
    auto gazetteer = load_gazetteer_or_empty(o.gazetteer);
    auto claims = enrich_records(read_normalized(o.in), registry, gazetteer);
    write_enriched(o.out, claims);
    std::size_t mentions = 0;
    std::map<std::string, std::size_t> langs;
    for (const auto& c : claims) {
        mentions += c.entities.size();
        ++langs[c.language];
    }
    if (o.format == "json") {
        print_json(out, json{{"records", claims.size()}, {"entity_mentions", mentions}, {"by_language", langs},
                             {"out", o.out}});
    } else {
        out << "enriched " << claims.size() << " records (" << mentions << " entity mentions) -> " << o.out << '\n';
    }
    return 0;
}

int cmd_index(const Options& o, std::ostream& out) {
    SearchIndex index;
    for (const auto& c : read_enriched(o.in)) index.add_document(c);
    auto target = std::filesystem::path(o.out);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    index.save_snapshot(target);
    if (o.format == "json") {
        print_json(out, json{{"documents", index.size()}, {"snapshot", o.out}});
    } else {
        out << "indexed " << index.size() << " documents -> " << o.out << '\n';
    }
    return 0;
}

int cmd_pipeline_run(const Options& o, std::ostream& out) {
    auto config = PipelineConfig::load(config_path(o));
    auto run = run_pipeline(config, "cli-run");
    bool ok = !run.aborted && std::all_of(run.task_states.begin(), run.task_states.end(),
                                          [](const auto& kv) { return kv.second == TaskState::Success; });
    if (o.format == "json") {
        print_json(out, to_json(run));
    } else {
        for (const auto& id : run.start_order) {
            out << pad(id, 12) << pad(to_string(run.task_states.at(id)), 9) << "attempts=" << run.attempt_counts[id];
            if (auto e = run.errors.find(id); e != run.errors.end()) out << "  error: " << e->second;
            out << '\n';
        }
        for (const auto& [id, state] : run.task_states) {
            if (std::find(run.start_order.begin(), run.start_order.end(), id) == run.start_order.end()) {
                out << pad(id, 12) << to_string(state) << '\n';
            }
        }
        out << (ok ? "pipeline succeeded" : "pipeline failed") << '\n';
    }
    return ok ? 0 : 2;
}

int cmd_serve(const Options& o, std::ostream& out) {
    auto config = ApiConfig::load(config_path(o));
    ApiService service(config);
    out << "serving /v1 on " << config.bind << ':' << config.port << std::endl;
    service.serve_forever();
    return 0;
}

int cmd_stats(const Options& o, std::ostream& out) {
    if (o.index.empty() == o.claims.empty()) throw UsageError("stats needs exactly one of --index or --claims");
    StatsReport report;
    if (!o.index.empty()) {
        SearchIndex index;
        index.load_snapshot(o.index);
        report = compute_stats(index);
    } else {
        report = compute_stats(load_claims_any(o));
    }
    if (o.format == "json") {
        print_json(out, to_json(report));
    } else {
        print_stats(out, report);
    }
    return 0;
}

int cmd_search(const Options& o, std::ostream& out) {
    std::shared_ptr<const EntityGazetteer> gazetteer;
    if (!o.gazetteer.empty()) gazetteer = std::make_shared<EntityGazetteer>(EntityGazetteer::load(o.gazetteer));
    std::shared_ptr<TranslationProvider> provider;
    if (!o.dictionary.empty()) {
        provider = DictionaryProvider::load(o.dictionary);
    } else {
        provider = std::make_shared<IdentityProvider>();
    }
    SearchIndex index(gazetteer, std::make_shared<TranslationService>(provider), SearchIndex::Options{});
    index.load_snapshot(o.index);

    Query q;
    q.text = o.q;
    for (const auto& v : o.verdicts) {
        auto verdict = parse_verdict(v);
        if (!verdict) throw UsageError("unknown verdict '" + v + "'");
        q.filters.verdicts.insert(*verdict);
    }
    q.filters.languages.insert(o.languages.begin(), o.languages.end());
    q.filters.sources.insert(o.sources.begin(), o.sources.end());
    for (const auto& c : o.countries) q.filters.countries.insert(upper(c));
    q.filters.year_from = o.year_from;
    q.filters.year_to = o.year_to;
    if (!o.display_lang.empty()) q.display_language = o.display_lang;
    q.expand_entities = o.expand;
    q.page = o.page;
    q.page_size = o.page_size;
    try {
        validate_query(q);
    } catch (const InvalidQuery& e) {
        throw UsageError(e.what());
    }
    auto page = index.search(q);
    if (o.format == "json") {
        print_json(out, api_result_json(page));
    } else {
        print_table(out, page);
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Untrue News: fact-check claim search engine", "untrue"};
    app.require_subcommand(1);
    Options o;

    auto* ingest = app.add_subcommand("ingest", "Extract ClaimReview records from a page archive");
    ingest->add_option("--archive", o.archive, "Page archive (JSON lines)")->required();
    ingest->add_option("--templates", o.templates, "Source template directory")->required();
    ingest->add_option("--out", o.out, "Claim records output (JSON lines)")->required();
    add_format(ingest, o);

    auto* normalize_cmd = app.add_subcommand("normalize", "Map ratings onto TRUE/FALSE/MIXED/OTHER");
    normalize_cmd->add_option("--in", o.in, "Claim records")->required();
    normalize_cmd->add_option("--out", o.out, "Normalized records output")->required();
    normalize_cmd->add_option("--lexicon", o.lexicon, "Label lexicon (default: built-in)");
    add_format(normalize_cmd, o);

    auto* enrich_cmd = app.add_subcommand("enrich", "Detect language and link entities");
    enrich_cmd->add_option("--in", o.in, "Normalized records")->required();
    enrich_cmd->add_option("--out", o.out, "Enriched claims output")->required();
    enrich_cmd->add_option("--templates", o.templates, "Source template directory")->required();
    enrich_cmd->add_option("--gazetteer", o.gazetteer, "Entity gazetteer");
    add_format(enrich_cmd, o);

    auto* index_cmd = app.add_subcommand("index", "Build a search index snapshot");
    index_cmd->add_option("--in", o.in, "Enriched claims")->required();
    index_cmd->add_option("--out", o.out, "Snapshot output")->required();
    add_format(index_cmd, o);

    auto* pipeline = app.add_subcommand("pipeline", "Run the ingestion workflow");
    pipeline->require_subcommand(1);
    auto* pipeline_run_cmd = pipeline->add_subcommand("run", "Run every pipeline task in dependency order");
    pipeline_run_cmd->add_option("--config", o.config, "Pipeline config (or UNTRUE_CONFIG)");
    add_format(pipeline_run_cmd, o);

    auto* serve = app.add_subcommand("serve", "Serve the /v1 HTTP API");
    serve->add_option("--config", o.config, "Service config (or UNTRUE_CONFIG)");
    add_format(serve, o);

    auto* stats = app.add_subcommand("stats", "Corpus statistics");
    stats->add_option("--index", o.index, "Index snapshot");
    stats->add_option("--claims", o.claims, "Claim, normalized or enriched records (JSON lines)");
    stats->add_option("--templates", o.templates, "Source templates, for language fallback with --claims");
    stats->add_option("--lexicon", o.lexicon, "Label lexicon, for raw claim records with --claims");
    stats->add_option("--gazetteer", o.gazetteer, "Entity gazetteer, with --claims");
    add_format(stats, o);

    auto* search = app.add_subcommand("search", "Query an index snapshot");
    search->add_option("--index", o.index, "Index snapshot")->required();
    search->add_option("--q", o.q, "Query text")->required();
    search->add_option("--verdict", o.verdicts, "true, false, mixed or other")->delimiter(',');
    search->add_option("--lang", o.languages, "Language filter")->delimiter(',');
    search->add_option("--source", o.sources, "Source filter")->delimiter(',');
    search->add_option("--country", o.countries, "Country filter")->delimiter(',');
    search->add_option("--year-from", o.year_from, "Earliest publication year");
    search->add_option("--year-to", o.year_to, "Latest publication year");
    search->add_option("--display-lang", o.display_lang, "Translate titles and excerpts");
    search->add_flag("--expand", o.expand, "Expand linked entities across languages");
    search->add_option("--page", o.page, "Page number (from 0)");
    search->add_option("--page-size", o.page_size, "Hits per page")->check(CLI::Range(1, 100));
    search->add_option("--gazetteer", o.gazetteer, "Entity gazetteer for --expand");
    search->add_option("--dictionary", o.dictionary, "Phrase dictionary for --display-lang");
    add_format(search, o);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (args.empty()) {
            err << app.help();
        } else {
            err << "error: " << e.what() << '\n';
            err << "run 'untrue --help' for usage\n";
        }
        return 1;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(o, out);
        if (normalize_cmd->parsed()) return cmd_normalize(o, out);
        if (enrich_cmd->parsed()) return cmd_enrich(o, out);
        if (index_cmd->parsed()) return cmd_index(o, out);
        if (pipeline_run_cmd->parsed()) return cmd_pipeline_run(o, out);
        if (serve->parsed()) return cmd_serve(o, out);
        if (stats->parsed()) return cmd_stats(o, out);
        if (search->parsed()) return cmd_search(o, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    err << app.help();
    return 1;
}

}  // namespace untrue
