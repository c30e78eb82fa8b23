#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace untrue {

/// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

/// Standard base64 (RFC 4648) decoding; whitespace is not allowed.
std::optional<std::string> base64_decode(std::string_view encoded);
std::string base64_encode(std::string_view bytes);

}  // namespace untrue
