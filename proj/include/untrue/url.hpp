#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace untrue {

/// An absolute http(s) URL split into the parts the crawler needs.
struct Url {
    std::string scheme;  // lowercase
    std::string host;    // lowercase, no port
    int port = 0;        // 0 means scheme default
    std::string target;  // path + query, always starts with '/'

    /// Parses an absolute URL; nullopt for relative or malformed input.
    static std::optional<Url> parse(std::string_view text);

    int effective_port() const;
    std::string origin() const;
    std::string str() const;
};

bool is_absolute_url(std::string_view text);

/// Resolves `ref` against `base`. Handles absolute refs, scheme-relative refs,
/// absolute paths and plain relative paths; returns nullopt otherwise.
std::optional<std::string> resolve_url(const Url& base, std::string_view ref);

}  // namespace untrue
