#include "untrue/pipeline.hpp"

#include <fstream>

#include "untrue/errors.hpp"

namespace untrue {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const json& j, const char* key, bool required) {
    if (!j.contains(key)) {
        if (required) throw ConfigError(std::string("pipeline config is missing '") + key + "'");
        return {};
    }
    std::filesystem::path p = j.at(key).get<std::string>();
    return p.is_absolute() ? p : base / p;
}

template <typename T, typename Parse>
std::vector<T> read_jsonl(const std::filesystem::path& path, Parse parse) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<T> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        try {
            out.push_back(parse(json::parse(line)));
        } catch (const json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

template <typename T, typename Dump>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& items, Dump dump) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        for (const auto& item : items) out << dump(item) << '\n';
        if (!out) throw Error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

std::vector<TaskSpec> default_pipeline_tasks() {
    return {
        {"ingest", {}, "ingest", 1, std::chrono::milliseconds(200)},
        {"normalize", {"ingest"}, "normalize", 1, std::chrono::milliseconds(200)},
        {"enrich", {"normalize"}, "enrich", 1, std::chrono::milliseconds(200)},
        {"index", {"enrich"}, "index", 1, std::chrono::milliseconds(200)},
    };
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open pipeline config: " + path.string());
    auto base = std::filesystem::absolute(path).parent_path();
    PipelineConfig cfg;
    try {
        auto j = json::parse(in);
        cfg.archive = resolve(base, j, "archive", true);
        cfg.templates_dir = resolve(base, j, "templates", true);
        cfg.lexicon = resolve(base, j, "lexicon", false);
        cfg.gazetteer = resolve(base, j, "gazetteer", false);
        cfg.work_dir = resolve(base, j, "work_dir", true);
        cfg.snapshot = resolve(base, j, "snapshot", true);
        cfg.run_log = resolve(base, j, "run_log", false);
        cfg.workers = j.value("workers", std::size_t{1});
        if (cfg.workers == 0) throw ConfigError("pipeline workers must be >= 1");
        if (j.contains("tasks")) {
            for (const auto& t : j.at("tasks")) {
                TaskSpec spec;
                spec.task_id = t.at("id").get<std::string>();
                spec.action = t.value("action", spec.task_id);
                for (const auto& d : t.value("deps", json::array())) spec.deps.insert(d.get<std::string>());
                spec.max_retries = t.value("max_retries", 0);
                spec.retry_delay = std::chrono::milliseconds(t.value("retry_delay_ms", 0));
                cfg.tasks.push_back(std::move(spec));
            }
        } else {
            cfg.tasks = default_pipeline_tasks();
        }
    } catch (const json::exception& e) {
        throw ConfigError("pipeline config " + path.string() + ": " + e.what());
    }
    validate_dag(cfg.tasks);
    return cfg;
}

RatingInfo rating_of(const ClaimRecord& r) {
    return RatingInfo{r.rating_value, r.best_rating, r.worst_rating, r.rating_label};
}

std::vector<ClaimRecord> read_claim_records(const std::filesystem::path& path) {
    return read_jsonl<ClaimRecord>(path, [](const json& j) { return j.get<ClaimRecord>(); });
}

void write_claim_records(const std::filesystem::path& path, const std::vector<ClaimRecord>& records) {
    write_jsonl(path, records, [](const ClaimRecord& r) { return serialize_record(r); });
}

std::vector<NormalizedRecord> read_normalized(const std::filesystem::path& path) {
    return read_jsonl<NormalizedRecord>(path, [](const json& j) {
        auto v = parse_verdict(j.at("verdict").get<std::string>());
        if (!v) throw ParseError("unknown verdict");
        return NormalizedRecord{j.at("record").get<ClaimRecord>(), *v};
    });
}

void write_normalized(const std::filesystem::path& path, const std::vector<NormalizedRecord>& records) {
    write_jsonl(path, records, [](const NormalizedRecord& r) {
        return json{{"record", r.record}, {"verdict", to_string(r.verdict)}}.dump();
    });
}

std::vector<EnrichedClaim> read_enriched(const std::filesystem::path& path) {
    return read_jsonl<EnrichedClaim>(path, [](const json& j) { return j.get<EnrichedClaim>(); });
}

void write_enriched(const std::filesystem::path& path, const std::vector<EnrichedClaim>& claims) {
    write_jsonl(path, claims, [](const EnrichedClaim& c) { return json(c).dump(); });
}

IngestReport run_ingest_stage(const std::filesystem::path& archive, const TemplateRegistry& registry,
                              const std::filesystem::path& out) {
    auto contents = load_archive(archive);
    auto result = ingest_documents(contents.documents, registry);
    result.report.skipped_archive_records = contents.skipped;
    write_claim_records(out, result.records);
    return result.report;
}

std::vector<NormalizedRecord> normalize_records(const std::vector<ClaimRecord>& records, const LabelLexicon& lexicon) {
    std::vector<NormalizedRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back({r, normalize(rating_of(r), lexicon)});
    return out;
}

std::vector<EnrichedClaim> enrich_records(const std::vector<NormalizedRecord>& records,
                                          const TemplateRegistry& registry, const EntityGazetteer& gazetteer) {
    std::vector<EnrichedClaim> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        const auto* tpl = registry.find(r.record.source_id);
        out.push_back(enrich(r.record, r.verdict, gazetteer, tpl ? tpl->default_language : kUndetermined));
    }
    return out;
}

LabelLexicon load_lexicon_or_seed(const std::filesystem::path& path) {
    return path.empty() ? LabelLexicon::seed() : LabelLexicon::load(path);
}

EntityGazetteer load_gazetteer_or_empty(const std::filesystem::path& path) {
    return path.empty() ? EntityGazetteer{} : EntityGazetteer::load(path);
}

ActionRegistry make_pipeline_actions(const PipelineConfig& config, SearchIndex* live_index) {
    ActionRegistry actions;
    actions.add("ingest", [config](const TaskContext&) {
        auto registry = TemplateRegistry::load_directory(config.templates_dir);
        run_ingest_stage(config.archive, registry, config.claims_file());
    });
    actions.add("normalize", [config](const TaskContext&) {
        auto lexicon = load_lexicon_or_seed(config.lexicon);
        write_normalized(config.normalized_file(), normalize_records(read_claim_records(config.claims_file()), lexicon));
    });
    actions.add("enrich", [config](const TaskContext&) {
        auto registry = TemplateRegistry::load_directory(config.templates_dir);
        auto gazetteer = load_gazetteer_or_empty(config.gazetteer);
        write_enriched(config.enriched_file(),
                       enrich_records(read_normalized(config.normalized_file()), registry, gazetteer));
    });
    actions.add("index", [config, live_index](const TaskContext&) {
        auto claims = read_enriched(config.enriched_file());
        if (config.snapshot.has_parent_path()) std::filesystem::create_directories(config.snapshot.parent_path());
        if (live_index) {
            for (const auto& c : claims) live_index->add_document(c);
            live_index->save_snapshot(config.snapshot);
            return;
        }
        SearchIndex index;
        for (const auto& c : claims) index.add_document(c);
        index.save_snapshot(config.snapshot);
    });
    return actions;
}

DagRun run_pipeline(const PipelineConfig& config, const std::string& run_id, SearchIndex* live_index,
                    const std::function<void(const DagRun&)>& on_update) {
    std::filesystem::create_directories(config.work_dir);
    auto actions = make_pipeline_actions(config, live_index);
    WorkerPool pool(config.workers);
    std::unique_ptr<RunLog> log;
    TransitionSink sink;
    if (!config.run_log.empty()) {
        if (config.run_log.has_parent_path()) std::filesystem::create_directories(config.run_log.parent_path());
        log = std::make_unique<RunLog>(config.run_log);
        sink = log->sink();
    }
    return execute_dag(config.tasks, actions, pool, run_id, sink, on_update);
}

}  // namespace untrue
