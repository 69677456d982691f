#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace geobind {

/// Absolute http/https URL split into its parts. Construction validates;
/// a Url value is always well formed.
class Url {
public:
    /// Throws Error(MalformedUrl) unless `text` is an absolute http or https
    /// URL with a non-empty host and no whitespace or control characters.
    static Url parse(std::string_view text);

    const std::string& scheme() const { return scheme_; }
    const std::string& host() const { return host_; }
    int port() const { return port_; }
    /// Path including the leading slash; "/" when the URL had none.
    const std::string& path() const { return path_; }
    /// Raw query without the '?', possibly empty.
    const std::string& query() const { return query_; }
    const std::string& text() const { return text_; }

    /// scheme://host[:port] with the port omitted when it was not given.
    std::string origin() const;
    bool is_loopback() const;

private:
    std::string text_;
    std::string scheme_;
    std::string host_;
    std::string authority_;
    int port_ = 0;
    std::string path_;
    std::string query_;
};

using QueryParams = std::vector<std::pair<std::string, std::string>>;

/// Unreserved characters (RFC 3986) are kept; everything else becomes %XX.
std::string percent_encode(std::string_view text);
/// `keep` lists extra characters to leave unescaped.
std::string percent_encode(std::string_view text, std::string_view keep);
/// Decodes %XX and '+' (as space). Malformed escapes are kept literally.
std::string percent_decode(std::string_view text);

/// Appends already-encoded `key=value` pairs to a URL, preserving any
/// query that is already there.
std::string append_query(std::string_view url, std::string_view encoded_pairs);

/// Splits a raw query string into decoded pairs, in order.
QueryParams parse_query(std::string_view query);

/// Case-insensitive lookup, as OGC KVP parameter names are case-insensitive.
const std::string* find_param(const QueryParams& params, std::string_view name);

bool iequals(std::string_view a, std::string_view b) noexcept;

std::string base64_encode(std::string_view bytes);
/// Skips whitespace; throws Error(InvalidParameter) on other non-alphabet bytes.
std::string base64_decode(std::string_view text);

} // namespace geobind
