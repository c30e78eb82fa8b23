#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "untrue/dates.hpp"
#include "untrue/enrichment.hpp"
#include "untrue/search_index.hpp"
#include "untrue/workflow.hpp"

namespace httplib {
class Server;
}

namespace untrue {

struct ApiConfig {
    std::string bind = "127.0.0.1";
    int port = 8080;
    std::size_t default_page_size = 10;
    std::chrono::hours log_retention{24};
    std::filesystem::path access_log;  // empty: no access log
    std::string translation_provider = "identity";
    std::filesystem::path translation_dictionary;
    std::filesystem::path snapshot;
    std::filesystem::path pipeline_config;
    std::filesystem::path gazetteer;
    std::string cors_origin;

    /// Relative paths resolve against the config file's directory.
    static ApiConfig load(const std::filesystem::path& path);
    /// Throws ConfigError.
    void validate() const;
};

/// Transport-independent request. Headers are carried so that tests can show
/// they have no effect on responses.
struct ApiRequest {
    std::string method = "GET";
    std::string path;
    std::multimap<std::string, std::string> params;
    std::map<std::string, std::string> headers;
    std::string remote_addr;
};

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;
};

/// Access log that never stores query text: only method, path, status and
/// timing are written. scrub() drops entries older than the retention window.
class AccessLog {
public:
    AccessLog(std::filesystem::path path, std::chrono::hours retention);

    void record(std::string_view method, std::string_view path, bool had_query, int status, double elapsed_ms,
                Timestamp at = std::chrono::system_clock::now());
    /// Returns the number of entries removed.
    std::size_t scrub(Timestamp now = std::chrono::system_clock::now());

    const std::filesystem::path& path() const { return path_; }

private:
    std::mutex mutex_;
    std::filesystem::path path_;
    std::chrono::hours retention_;
};

/// The /v1 HTTP API. Every response is a function of the request path and
/// parameters plus server state; client headers and addresses are ignored and
/// no per-client state is kept.
class ApiService {
public:
    explicit ApiService(ApiConfig config);
    ApiService(ApiConfig config, std::shared_ptr<SearchIndex> index);
    ~ApiService();

    ApiService(const ApiService&) = delete;
    ApiService& operator=(const ApiService&) = delete;

    ApiResponse handle(const ApiRequest& request);

    /// Binds and serves in a background thread; returns the bound port.
    int start();
    void stop();
    /// Binds and serves on the calling thread until stop().
    void serve_forever();

    /// Blocks until the active pipeline run (if any) finishes.
    void wait_for_pipeline();

    std::shared_ptr<SearchIndex> index() const { return index_; }

private:
    ApiResponse search(const ApiRequest& request);
    ApiResponse claim(std::string_view record_id);
    ApiResponse stats();
    ApiResponse health();
    ApiResponse trigger_pipeline();
    ApiResponse pipeline_run(std::string_view run_id);

    ApiResponse json_response(int status, const nlohmann::json& body) const;
    ApiResponse error_response(int status, std::string_view message) const;

    void configure_server();

    ApiConfig config_;
    std::shared_ptr<const EntityGazetteer> gazetteer_;
    std::shared_ptr<TranslationService> translator_;
    std::shared_ptr<SearchIndex> index_;
    std::atomic<bool> index_available_{true};
    std::unique_ptr<AccessLog> access_log_;

    std::mutex runs_mutex_;
    std::map<std::string, DagRun> runs_;
    std::optional<std::string> active_run_;
    std::size_t run_counter_ = 0;
    std::thread pipeline_thread_;

    std::unique_ptr<httplib::Server> server_;
    std::thread server_thread_;
};

/// Hit fields shown to users: record_id plus verdict, title, date, country,
/// link and excerpt (and a translation block when requested).
nlohmann::json api_hit_json(const Hit& hit);
nlohmann::json api_result_json(const ResultPage& page);

}  // namespace untrue
