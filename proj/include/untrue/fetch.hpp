#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "untrue/corpus_ingest.hpp"
#include "untrue/url.hpp"

namespace untrue {

inline constexpr std::string_view kDefaultUserAgent = "UntrueNewsBot/1.0 (fact-check metadata collector)";

struct Politeness {
    std::chrono::milliseconds delay{1000};
    std::string user_agent{kDefaultUserAgent};
    std::chrono::milliseconds timeout{30000};
};

struct HttpReply {
    int status = 0;
    std::string content_type;
    std::string body;
};

/// Transport seam for live fetching. Implementations throw FetchError or
/// TimeoutError.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpReply get(const Url& url, std::string_view user_agent, std::chrono::milliseconds timeout) = 0;
};

/// Plain GET over cpp-httplib.
class HttplibTransport final : public HttpTransport {
public:
    HttpReply get(const Url& url, std::string_view user_agent, std::chrono::milliseconds timeout) override;
};

/// Fetches white-listed pages, keeping consecutive requests to one host at
/// least `politeness.delay` apart. Different hosts proceed independently.
class PageFetcher {
public:
    using Clock = std::chrono::steady_clock;

    PageFetcher(const TemplateRegistry& registry, HttpTransport& transport, Politeness politeness);

    /// Throws WhitelistError before any network activity when no template
    /// matches the host.
    RawDocument fetch(std::string_view url);

private:
    struct HostSlot {
        std::mutex mutex;
        bool used = false;
        Clock::time_point last_request{};
    };

    HostSlot& slot_for(const std::string& host);

    const TemplateRegistry& registry_;
    HttpTransport& transport_;
    Politeness politeness_;
    std::mutex slots_mutex_;
    std::map<std::string, std::unique_ptr<HostSlot>> slots_;
};

}  // namespace untrue
