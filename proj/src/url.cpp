#include "geobind/url.hpp"

#include "geobind/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>

namespace geobind {

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_unreserved(unsigned char c)
{
    return std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~';
}

int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

Url Url::parse(std::string_view text)
{
    auto fail = [&](const char* why) {
        return Error(Errc::MalformedUrl, "'" + std::string(text) + "': " + why);
    };
    for (unsigned char c : text) {
        if (c <= 0x20 || c == 0x7f)
            throw fail("contains whitespace or control characters");
    }
    auto sep = text.find("://");
    if (sep == std::string_view::npos)
        throw fail("not an absolute URL");

    Url url;
    url.text_ = std::string(text);
    url.scheme_ = lower(text.substr(0, sep));
    if (url.scheme_ != "http" && url.scheme_ != "https")
        throw fail("scheme must be http or https");

    auto rest = text.substr(sep + 3);
    auto auth_end = rest.find_first_of("/?#");
    auto authority = rest.substr(0, auth_end);
    rest = auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);
    url.authority_ = std::string(authority);

    if (auto at = authority.rfind('@'); at != std::string_view::npos)
        authority = authority.substr(at + 1);

    std::string_view host = authority;
    std::string_view port;
    if (!authority.empty() && authority.front() == '[') {
        auto close = authority.find(']');
        if (close == std::string_view::npos)
            throw fail("unterminated IPv6 literal");
        host = authority.substr(1, close - 1);
        auto after = authority.substr(close + 1);
        if (!after.empty()) {
            if (after.front() != ':')
                throw fail("garbage after IPv6 literal");
            port = after.substr(1);
        }
    } else if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
        host = authority.substr(0, colon);
        port = authority.substr(colon + 1);
    }
    if (host.empty())
        throw fail("empty host");
    url.host_ = lower(host);

    if (!port.empty()) {
        auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), url.port_);
        if (ec != std::errc{} || ptr != port.data() + port.size() || url.port_ <= 0 || url.port_ > 65535)
            throw fail("invalid port");
    } else {
        url.port_ = url.scheme_ == "https" ? 443 : 80;
    }

    auto frag = rest.find('#');
    if (frag != std::string_view::npos)
        rest = rest.substr(0, frag);
    auto q = rest.find('?');
    url.path_ = std::string(rest.substr(0, q));
    if (url.path_.empty())
        url.path_ = "/";
    if (q != std::string_view::npos)
        url.query_ = std::string(rest.substr(q + 1));
    return url;
}

std::string Url::origin() const
{
    return scheme_ + "://" + authority_;
}

bool Url::is_loopback() const
{
    return host_ == "localhost" || host_ == "::1" || host_.rfind("127.", 0) == 0;
}

std::string percent_encode(std::string_view text)
{
    return percent_encode(text, {});
}

std::string percent_encode(std::string_view text, std::string_view keep)
{
    static constexpr char digits[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(text.size());
    for (unsigned char c : text) {
        if (is_unreserved(c) || keep.find(static_cast<char>(c)) != std::string_view::npos) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(digits[c >> 4]);
            out.push_back(digits[c & 0xf]);
        }
    }
    return out;
}

std::string percent_decode(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '+') {
            out.push_back(' ');
        } else if (c == '%' && i + 2 < text.size() &&hex_value(text[i + 1]) >= 0 && hex_value(text[i + 2]) >= 0) {
            out.push_back(static_cast<char>(hex_value(text[i + 1]) * 16 + hex_value(text[i + 2])));
            i += 2;
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string append_query(std::string_view url, std::string_view encoded_pairs)
{
    std::string out(url);
    auto frag = out.find('#');
    std::string fragment;
    if (frag != std::string::npos) {
        fragment = out.substr(frag);
        out.erase(frag);
    }
    if (encoded_pairs.empty())
        return out + fragment;
    auto q = out.find('?');
    if (q == std::string::npos)
        out.push_back('?');
    else if (q + 1 != out.size() && out.back() != '&')
        out.push_back('&');
    out.append(encoded_pairs);
    return out + fragment;
}

QueryParams parse_query(std::string_view query)
{
    QueryParams params;
    while (!query.empty()) {
        auto amp = query.find('&');
        auto pair = query.substr(0, amp);
        query = amp == std::string_view::npos ? std::string_view{} : query.substr(amp + 1);
        if (pair.empty())
            continue;
        auto eq = pair.find('=');
        if (eq == std::string_view::npos)
            params.emplace_back(percent_decode(pair), std::string{});
        else
            params.emplace_back(percent_decode(pair.substr(0, eq)), percent_decode(pair.substr(eq + 1)));
    }
    return params;
}

const std::string* find_param(const QueryParams& params, std::string_view name)
{
    for (const auto& [key, value] : params) {
        if (iequals(key, name))
            return &value;
    }
    return nullptr;
}

bool iequals(std::string_view a, std::string_view b) noexcept
{
    return a.size() == b.size()
        && std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

namespace {

constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

} // namespace

std::string base64_encode(std::string_view bytes)
{
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) | (static_cast<unsigned char>(bytes[i + 1]) << 8)
                   | static_cast<unsigned char>(bytes[i + 2]);
        out += kB64[(v >> 18) & 63];
        out += kB64[(v >> 12) & 63];
        out += kB64[(v >> 6) & 63];
        out += kB64[v & 63];
    }
    if (auto rest = bytes.size() - i; rest > 0) {
        unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        if (rest == 2)
            v |= static_cast<unsigned char>(bytes[i + 1]) << 8;
        out += kB64[(v >> 18) & 63];
        out += kB64[(v >> 12) & 63];
        out += rest == 2 ? kB64[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

std::string base64_decode(std::string_view text)
{
    std::string out;
    unsigned acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == ' ' || c == '\n' || c == '\r' || c == '\t')
            continue;
        if (c == '=')
            break;
        const char* pos = std::strchr(kB64, c);
        if (!pos || c == '\0')
            throw Error(Errc::InvalidParameter, "invalid base64 data");
        acc = (acc << 6) | static_cast<unsigned>(pos - kB64);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<char>((acc >> bits) & 0xff));
        }
    }
    return out;
}

} // namespace geobind
