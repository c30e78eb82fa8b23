#include "untrue/url.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>

namespace untrue {

namespace {

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool valid_host(std::string_view host) {
    if (host.empty() || host.front() == '.' || host.back() == '.') return false;
    return std::all_of(host.begin(), host.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '-' || c == '.' || c == '_';
    });
}

}  // namespace

std::optional<Url> Url::parse(std::string_view text) {
    auto sep = text.find("://");
    if (sep == std::string_view::npos) return std::nullopt;
    Url url;
    url.scheme = lower_ascii(text.substr(0, sep));
    if (url.scheme != "http" && url.scheme != "https") return std::nullopt;

    auto rest = text.substr(sep + 3);
    auto path_start = rest.find_first_of("/?#");
    auto authority = rest.substr(0, path_start);
    if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);

    auto colon = authority.rfind(':');
    if (colon != std::string_view::npos) {
        auto port_text = authority.substr(colon + 1);
        int port = 0;
        auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
        if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port <= 0 || port > 65535) {
            return std::nullopt;
        }
        url.port = port;
        authority = authority.substr(0, colon);
    }
    url.host = lower_ascii(authority);
    if (!valid_host(url.host)) return std::nullopt;

    if (path_start == std::string_view::npos) {
        url.target = "/";
    } else {
        auto target = rest.substr(path_start);
        if (auto hash = target.find('#'); hash != std::string_view::npos) target = target.substr(0, hash);
        url.target = target.empty() || target.front() != '/' ? "/" + std::string(target) : std::string(target);
    }
    if (std::any_of(url.target.begin(), url.target.end(), [](unsigned char c) { return c <= 0x20; })) {
        return std::nullopt;
    }
    return url;
}

int Url::effective_port() const {
    if (port != 0) return port;
    return scheme == "https" ? 443 : 80;
}

std::string Url::origin() const {
    std::string out = scheme + "://" + host;
    if (port != 0) out += ":" + std::to_string(port);
    return out;
}

std::string Url::str() const { return origin() + target; }

bool is_absolute_url(std::string_view text) { return Url::parse(text).has_value(); }

std::optional<std::string> resolve_url(const Url& base, std::string_view ref) {
    if (ref.empty()) return std::nullopt;
    if (is_absolute_url(ref)) return std::string(ref);
    if (ref.substr(0, 2) == "//") {
        auto candidate = base.scheme + ":" + std::string(ref);
        return is_absolute_url(candidate) ? std::optional<std::string>(candidate) : std::nullopt;
    }
    if (ref.find("://") != std::string_view::npos) return std::nullopt;
    if (ref.front() == '/') return base.origin() + std::string(ref);
    auto path = base.target.substr(0, base.target.find('?'));
    path = path.substr(0, path.rfind('/') + 1);
    return base.origin() + path + std::string(ref);
}

}  // namespace untrue
