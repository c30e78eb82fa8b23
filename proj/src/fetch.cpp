#include "untrue/fetch.hpp"

#include <thread>

#include <httplib.h>

namespace untrue {

HttpReply HttplibTransport::get(const Url& url, std::string_view user_agent, std::chrono::milliseconds timeout) {
    httplib::Client client(url.origin());
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_follow_location(false);
    httplib::Headers headers{{"User-Agent", std::string(user_agent)}};
    auto res = client.Get(url.target, headers);
    if (!res) {
        auto err = res.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
            throw TimeoutError("timeout fetching " + url.str());
        }
        throw FetchError("network failure fetching " + url.str() + ": " + httplib::to_string(err));
    }
    HttpReply reply;
    reply.status = res->status;
    reply.content_type = res->get_header_value("Content-Type");
    reply.body = res->body;
    return reply;
}

PageFetcher::PageFetcher(const TemplateRegistry& registry, HttpTransport& transport, Politeness politeness)
    : registry_(registry), transport_(transport), politeness_(std::move(politeness)) {
    if (politeness_.delay.count() < 0) throw ConfigError("politeness delay must be non-negative");
}

PageFetcher::HostSlot& PageFetcher::slot_for(const std::string& host) {
    std::lock_guard lock(slots_mutex_);
    auto& slot = slots_[host];
    if (!slot) slot = std::make_unique<HostSlot>();
    return *slot;
}

RawDocument PageFetcher::fetch(std::string_view url) {
    auto parsed = Url::parse(url);
    if (!parsed) throw WhitelistError("not an absolute http(s) URL: " + std::string(url));
    try {
        match_template(url, registry_.templates());
    } catch (const TemplateMatchError& e) {
        throw WhitelistError(std::string("refusing to fetch ") + std::string(url) + ": " + e.what());
    }

    auto& slot = slot_for(parsed->host);
    std::lock_guard host_lock(slot.mutex);
    if (slot.used) {
        auto ready_at = slot.last_request + politeness_.delay;
        std::this_thread::sleep_until(ready_at);
    }
    slot.used = true;
    slot.last_request = Clock::now();

    auto reply = transport_.get(*parsed, politeness_.user_agent, politeness_.timeout);
    RawDocument doc;
    doc.url = std::string(url);
    doc.fetched_at = std::chrono::system_clock::now();
    doc.http_status = reply.status;
    doc.content_type = std::move(reply.content_type);
    doc.body = std::move(reply.body);
    return doc;
}

}  // namespace untrue
