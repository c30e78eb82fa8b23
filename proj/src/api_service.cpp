#include "untrue/api_service.hpp"

#include <charconv>
#include <iomanip>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "untrue/errors.hpp"
#include "untrue/pipeline.hpp"
#include "untrue/stats.hpp"
#include "untrue/text.hpp"

namespace untrue {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const json& j, const char* key) {
    if (!j.contains(key)) return {};
    std::filesystem::path p = j.at(key).get<std::string>();
    return p.is_absolute() ? p : base / p;
}

std::vector<std::string> param_values(const ApiRequest& r, const std::string& key) {
    std::vector<std::string> out;
    auto [lo, hi] = r.params.equal_range(key);
    for (auto it = lo; it != hi; ++it) {
        std::string_view rest = it->second;
        while (true) {
            auto comma = rest.find(',');
            auto item = text::trim(rest.substr(0, comma));
            if (!item.empty()) out.emplace_back(item);
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
    }
    return out;
}

std::optional<std::string> param(const ApiRequest& r, const std::string& key) {
    auto it = r.params.find(key);
    if (it == r.params.end()) return std::nullopt;
    return it->second;
}

template <typename T>
std::optional<T> int_param(const ApiRequest& r, const std::string& key) {
    auto v = param(r, key);
    if (!v) return std::nullopt;
    auto s = text::trim(*v);
    T out{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InvalidQuery("parameter '" + key + "' must be an integer");
    }
    return out;
}

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

Query query_from(const ApiRequest& r, std::size_t default_page_size) {
    Query q;
    auto text = param(r, "q");
    if (!text || text::trim(*text).empty()) throw InvalidQuery("query 'q' must not be empty");
    q.text = std::string(text::trim(*text));
    for (const auto& v : param_values(r, "verdict")) {
        auto verdict = parse_verdict(v);
        if (!verdict) throw InvalidQuery("unknown verdict '" + v + "'");
        q.filters.verdicts.insert(*verdict);
    }
    for (const auto& v : param_values(r, "lang")) q.filters.languages.insert(lower(v));
    for (const auto& v : param_values(r, "source")) q.filters.sources.insert(v);
    for (const auto& v : param_values(r, "country")) q.filters.countries.insert(upper(v));
    q.filters.year_from = int_param<int>(r, "year_from");
    q.filters.year_to = int_param<int>(r, "year_to");
    if (auto d = param(r, "display_lang"); d && !text::trim(*d).empty()) q.display_language = lower(std::string(text::trim(*d)));
    if (auto e = param(r, "expand")) {
        auto v = lower(std::string(text::trim(*e)));
        if (v == "1" || v == "true" || v == "yes") {
            q.expand_entities = true;
        } else if (v == "0" || v == "false" || v == "no" || v.empty()) {
            q.expand_entities = false;
        } else {
            throw InvalidQuery("parameter 'expand' must be a boolean");
        }
    }
    if (auto p = int_param<long long>(r, "page")) {
        if (*p < 0) throw InvalidQuery("page must be non-negative");
        q.page = static_cast<std::size_t>(*p);
    }
    q.page_size = default_page_size;
    if (auto ps = int_param<long long>(r, "page_size")) {
        if (*ps < 1 || *ps > static_cast<long long>(kMaxPageSize)) throw InvalidQuery("page_size must be in [1, 100]");
        q.page_size = static_cast<std::size_t>(*ps);
    }
    return q;
}

}  // namespace

// --- config -------------------------------------------------------------------

ApiConfig ApiConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open service config: " + path.string());
    auto base = std::filesystem::absolute(path).parent_path();
    ApiConfig cfg;
    try {
        auto j = json::parse(in);
        cfg.bind = j.value("bind", cfg.bind);
        cfg.port = j.value("port", cfg.port);
        cfg.default_page_size = j.value("page_size", cfg.default_page_size);
        cfg.log_retention = std::chrono::hours(j.value("log_retention_hours", 24));
        cfg.access_log = resolve(base, j, "access_log");
        cfg.snapshot = resolve(base, j, "snapshot");
        cfg.pipeline_config = resolve(base, j, "pipeline_config");
        cfg.gazetteer = resolve(base, j, "gazetteer");
        cfg.cors_origin = j.value("cors_origin", "");
        if (j.contains("translation")) {
            const auto& t = j.at("translation");
            cfg.translation_provider = t.value("provider", cfg.translation_provider);
            cfg.translation_dictionary = resolve(base, t, "dictionary");
        }
    } catch (const json::exception& e) {
        throw ConfigError("service config " + path.string() + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

void ApiConfig::validate() const {
    if (port < 0 || port > 65535) throw ConfigError("port out of range");
    if (default_page_size == 0 || default_page_size > kMaxPageSize) throw ConfigError("page_size must be in [1, 100]");
    if (log_retention.count() <= 0 || log_retention > std::chrono::hours(24 * 30)) {
        throw ConfigError("log retention must be between 1 hour and 30 days");
    }
    if (translation_provider != "identity" && translation_provider != "dictionary") {
        throw ConfigError("unknown translation provider '" + translation_provider + "'");
    }
    if (translation_provider == "dictionary" && translation_dictionary.empty()) {
        throw ConfigError("dictionary provider needs translation.dictionary");
    }
}

// --- access log ---------------------------------------------------------------

AccessLog::AccessLog(std::filesystem::path path, std::chrono::hours retention)
    : path_(std::move(path)), retention_(retention) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

void AccessLog::record(std::string_view method, std::string_view path, bool had_query, int status,
                       double elapsed_ms, Timestamp at) {
    json entry = {{"at", format_timestamp(at)},
                  {"method", method},
                  {"path", path},
                  {"status", status},
                  {"elapsed_ms", elapsed_ms}};
    if (had_query) entry["query"] = "redacted";
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    out << entry.dump() << '\n';
}

std::size_t AccessLog::scrub(Timestamp now) {
    std::lock_guard lock(mutex_);
    std::ifstream in(path_);
    if (!in) return 0;
    std::vector<std::string> keep;
    std::size_t removed = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto entry = json::parse(line, nullptr, false);
        std::optional<Timestamp> at;
        if (entry.is_object() && entry.contains("at") && entry["at"].is_string()) {
            at = parse_timestamp(entry["at"].get<std::string>());
        }
        if (!at || now - *at > retention_) {
            ++removed;
            continue;
        }
        keep.push_back(line);
    }
    in.close();
    std::ofstream out(path_, std::ios::trunc);
    for (const auto& l : keep) out << l << '\n';
    return removed;
}

// --- JSON shapes --------------------------------------------------------------

json api_hit_json(const Hit& h) {
    json hit = {{"record_id", h.record_id},
                {"verdict", to_string(h.verdict)},
                {"review_title", h.review_title},
                {"country", h.country},
                {"review_url", h.review_url},
                {"excerpt", h.excerpt}};
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
    return hit;
}

json api_result_json(const ResultPage& page) {
    json hits = json::array();
    for (const auto& h : page.hits) hits.push_back(api_hit_json(h));
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

// --- service ------------------------------------------------------------------

ApiService::ApiService(ApiConfig config) : ApiService(std::move(config), nullptr) {}

ApiService::ApiService(ApiConfig config, std::shared_ptr<SearchIndex> index) : config_(std::move(config)) {
    config_.validate();
    if (!config_.gazetteer.empty()) {
        gazetteer_ = std::make_shared<EntityGazetteer>(EntityGazetteer::load(config_.gazetteer));
    }
    std::shared_ptr<TranslationProvider> provider;
    if (config_.translation_provider == "dictionary") {
        provider = DictionaryProvider::load(config_.translation_dictionary);
    } else {
        provider = std::make_shared<IdentityProvider>();
    }
    translator_ = std::make_shared<TranslationService>(std::move(provider));

    if (index) {
        index_ = std::move(index);
    } else {
        index_ = std::make_shared<SearchIndex>(gazetteer_, translator_, SearchIndex::Options{});
        if (!config_.snapshot.empty() && std::filesystem::exists(config_.snapshot)) {
            try {
                index_->load_snapshot(config_.snapshot);
            } catch (const SnapshotError&) {
                index_available_ = false;
            }
        }
    }
    if (!config_.access_log.empty()) {
        access_log_ = std::make_unique<AccessLog>(config_.access_log, config_.log_retention);
        access_log_->scrub();
    }
}

ApiService::~ApiService() {
    stop();
    wait_for_pipeline();
}

ApiResponse ApiService::json_response(int status, const json& body) const {
    ApiResponse r;
    r.status = status;
    r.body = body.dump();
    r.headers.emplace_back("Cache-Control", "no-store");
    if (!config_.cors_origin.empty()) r.headers.emplace_back("Access-Control-Allow-Origin", config_.cors_origin);
    return r;
}

ApiResponse ApiService::error_response(int status, std::string_view message) const {
    return json_response(status, json{{"error", message}, {"status", status}});
}

ApiResponse ApiService::handle(const ApiRequest& request) {
    auto started = std::chrono::steady_clock::now();
    ApiResponse response;
    const std::string& p = request.path;
    auto is = [&](std::string_view method) { return request.method == method; };

    if (p == "/v1/search") {
        response = is("GET") ? search(request) : error_response(405, "method not allowed");
    } else if (p.starts_with("/v1/claims/") && p.size() > 11) {
        response = is("GET") ? claim(std::string_view(p).substr(11)) : error_response(405, "method not allowed");
    } else if (p == "/v1/stats") {
        response = is("GET") ? stats() : error_response(405, "method not allowed");
    } else if (p == "/v1/health") {
        response = is("GET") ? health() : error_response(405, "method not allowed");
    } else if (p == "/v1/pipeline/run") {
        response = is("POST") ? trigger_pipeline() : error_response(405, "method not allowed");
    } else if (p.starts_with("/v1/pipeline/runs/") && p.size() > 18) {
        response = is("GET") ? pipeline_run(std::string_view(p).substr(18)) : error_response(405, "method not allowed");
    } else {
        response = error_response(404, "not found");
    }

    if (access_log_) {
        double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        // Claim ids in the path are content identifiers, not user input worth keeping.
        std::string logged_path = p.starts_with("/v1/claims/") ? "/v1/claims/{id}" : p;
        access_log_->record(request.method, logged_path, !request.params.empty(), response.status, ms);
    }
    return response;
}

ApiResponse ApiService::search(const ApiRequest& request) {
    if (!index_available_) return error_response(503, "index unavailable");
    try {
        auto q = query_from(request, config_.default_page_size);
        return json_response(200, api_result_json(index_->search(q)));
    } catch (const InvalidQuery& e) {
        return error_response(400, e.what());
    }
}

ApiResponse ApiService::claim(std::string_view record_id) {
    if (!index_available_) return error_response(503, "index unavailable");
    auto found = index_->find_claim(record_id);
    if (!found) return error_response(404, "unknown record id");
    return json_response(200, json(*found));
}

ApiResponse ApiService::stats() {
    if (!index_available_) return error_response(503, "index unavailable");
    return json_response(200, to_json(compute_stats(*index_)));
}

ApiResponse ApiService::health() {
    auto ts = index_->snapshot_time();
    json body = {{"status", "ok"},
                 {"index_available", index_available_.load()},
                 {"documents", index_available_ ? index_->size() : 0}};
    body["snapshot_time"] = ts ? json(format_timestamp(*ts)) : json(nullptr);
    return json_response(200, body);
}

ApiResponse ApiService::trigger_pipeline() {
    if (config_.pipeline_config.empty()) return error_response(503, "no pipeline configured");
    PipelineConfig pipeline;
    try {
        pipeline = PipelineConfig::load(config_.pipeline_config);
    } catch (const std::exception& e) {
        return error_response(503, std::string("pipeline config unusable: ") + e.what());
    }
    std::string run_id;
    {
        std::lock_guard lock(runs_mutex_);
        if (active_run_) return error_response(409, "a pipeline run is already active");
        std::ostringstream id;
        id << "run-" << std::setw(6) << std::setfill('0') << ++run_counter_;
        run_id = id.str();
        DagRun initial;
        initial.run_id = run_id;
        for (const auto& t : pipeline.tasks) initial.task_states[t.task_id] = TaskState::Pending;
        runs_[run_id] = initial;
        active_run_ = run_id;
    }
    if (pipeline_thread_.joinable()) pipeline_thread_.join();
    pipeline_thread_ = std::thread([this, pipeline, run_id]() {
        auto update = [this, &run_id](const DagRun& run) {
            std::lock_guard lock(runs_mutex_);
            runs_[run_id] = run;
        };
        DagRun final_run;
        try {
            final_run = run_pipeline(pipeline, run_id, index_.get(), update);
        } catch (const std::exception& e) {
            final_run.run_id = run_id;
            final_run.aborted = true;
            final_run.finished_at = std::chrono::system_clock::now();
            for (const auto& t : pipeline.tasks) {
                final_run.task_states[t.task_id] = TaskState::Failed;
                final_run.errors[t.task_id] = e.what();
            }
        }
        bool indexed = final_run.task_states.count("index") && final_run.task_states.at("index") == TaskState::Success;
        if (indexed) index_available_ = true;
        std::lock_guard lock(runs_mutex_);
        runs_[run_id] = final_run;
        active_run_.reset();
    });
    return json_response(202, json{{"run_id", run_id}});
}

ApiResponse ApiService::pipeline_run(std::string_view run_id) {
    std::lock_guard lock(runs_mutex_);
    auto it = runs_.find(std::string(run_id));
    if (it == runs_.end()) return error_response(404, "unknown run id");
    return json_response(200, to_json(it->second));
}

void ApiService::wait_for_pipeline() {
    if (pipeline_thread_.joinable()) pipeline_thread_.join();
}

// --- HTTP binding -------------------------------------------------------------

void ApiService::configure_server() {
    server_ = std::make_unique<httplib::Server>();
    auto adapt = [this](const httplib::Request& req, httplib::Response& res) {
        ApiRequest r;
        r.method = req.method;
        r.path = req.path;
        for (const auto& [k, v] : req.params) r.params.emplace(k, v);
        for (const auto& [k, v] : req.headers) r.headers[k] = v;
        r.remote_addr = req.remote_addr;
        auto out = handle(r);
        res.status = out.status;
        for (const auto& [k, v] : out.headers) res.set_header(k, v);
        res.set_content(out.body, out.content_type + "; charset=utf-8");
    };
    server_->Get(R"(/.*)", adapt);
    server_->Post(R"(/.*)", adapt);
    server_->Put(R"(/.*)", adapt);
    server_->Delete(R"(/.*)", adapt);
    server_->Options(R"(/.*)", [this](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        if (!config_.cors_origin.empty()) {
            res.set_header("Access-Control-Allow-Origin", config_.cors_origin);
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        }
    });
}

int ApiService::start() {
    configure_server();
    int port = config_.port;
    if (port == 0) {
        port = server_->bind_to_any_port(config_.bind);
    } else if (!server_->bind_to_port(config_.bind, port)) {
        port = -1;
    }
    if (port < 0) throw Error("cannot bind " + config_.bind + ":" + std::to_string(config_.port));
    server_thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port;
}

void ApiService::serve_forever() {
    configure_server();
    if (!server_->listen(config_.bind, config_.port)) {
        throw Error("cannot listen on " + config_.bind + ":" + std::to_string(config_.port));
    }
}

void ApiService::stop() {
    if (server_) server_->stop();
    if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace untrue
