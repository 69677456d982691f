#include "geobind/config.hpp"

#include "geobind/error.hpp"
#include "geobind/url.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace geobind {

namespace {

using Json = nlohmann::json;

class TomlReader {
public:
    explicit TomlReader(std::string_view text) : s_(text) {}

    Json document()
    {
        Json root = Json::object();
        Json* table = &root;
        while (true) {
            skip_blank_lines();
            if (at_end())
                break;
            if (peek() == '[') {
                bool array = s_.substr(pos_, 2) == "[[";
                pos_ += array ? 2 : 1;
                auto name = key();
                expect(']');
                if (array)
                    expect(']');
                end_of_line();
                auto& slot = root[name];
                if (array) {
                    if (slot.is_null())
                        slot = Json::array();
                    if (!slot.is_array())
                        fail("'" + name + "' is not a table array");
                    slot.push_back(Json::object());
                    table = &slot.back();
                } else {
                    if (!slot.is_null())
                        fail("table '" + name + "' defined twice");
                    slot = Json::object();
                    table = &slot;
                }
                continue;
            }
            auto k = key();
            skip_space();
            expect('=');
            skip_space();
            if (table->contains(k))
                fail("duplicate key '" + k + "'");
            (*table)[k] = value();
            end_of_line();
        }
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        int line = 1;
        for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i)
            line += s_[i] == '\n';
        throw Error(Errc::ConfigError, "line " + std::to_string(line) + ": " + what);
    }

    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return at_end() ? '\0' : s_[pos_]; }

    void expect(char c)
    {
        if (peek() != c)
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_space()
    {
        while (peek() == ' ' || peek() == '\t')
            ++pos_;
    }

    void skip_comment()
    {
        if (peek() == '#')
            while (!at_end() && peek() != '\n')
                ++pos_;
    }

    // Whitespace, newlines and comments, as allowed inside arrays.
    void skip_all()
    {
        while (true) {
            skip_space();
            skip_comment();
            if (peek() == '\n' || peek() == '\r')
                ++pos_;
            else
                return;
        }
    }

    void skip_blank_lines() { skip_all(); }

    void end_of_line()
    {
        skip_space();
        skip_comment();
        if (peek() == '\r')
            ++pos_;
        if (!at_end() && peek() != '\n')
            fail("unexpected text after value");
    }

    std::string key()
    {
        skip_space();
        if (peek() == '"')
            return string();
        std::size_t start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
            ++pos_;
        if (start == pos_)
            fail("expected a key");
        auto k = std::string(s_.substr(start, pos_ - start));
        skip_space();
        return k;
    }

    std::string string()
    {
        char quote = peek();
        ++pos_;
        std::string out;
        while (true) {
            if (at_end() || peek() == '\n')
                fail("unterminated string");
            char c = s_[pos_++];
            if (c == quote)
                return out;
            if (c == '\\' && quote == '"') {
                char e = s_[pos_++];
                switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(std::string("unsupported escape \\") + e);
                }
            } else {
                out += c;
            }
        }
    }

    Json value()
    {
        char c = peek();
        if (c == '"' || c == '\'')
            return string();
        if (c == '[') {
            ++pos_;
            Json arr = Json::array();
            skip_all();
            while (peek() != ']') {
                arr.push_back(value());
                skip_all();
                if (peek() == ',') {
                    ++pos_;
                    skip_all();
                } else if (peek() != ']') {
                    fail("expected ',' or ']'");
                }
            }
            ++pos_;
            return arr;
        }
        if (c == '{') {
            ++pos_;
            Json obj = Json::object();
            skip_space();
            while (peek() != '}') {
                auto k = key();
                expect('=');
                skip_space();
                obj[k] = value();
                skip_space();
                if (peek() == ',') {
                    ++pos_;
                    skip_space();
                } else if (peek() != '}') {
                    fail("expected ',' or '}'");
                }
            }
            ++pos_;
            return obj;
        }
        std::size_t start = pos_;
        while (!at_end() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' && peek() != ']'
               && peek() != '}' && peek() != '#')
            ++pos_;
        auto word = s_.substr(start, pos_ - start);
        if (word == "true")
            return true;
        if (word == "false")
            return false;
        long long n = 0;
        std::string w(word);
        std::size_t used = 0;
        try {
            n = std::stoll(w, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (word.empty() || used != w.size())
            fail("unsupported value '" + w + "'");
        return n;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

std::string as_string(const Json& v, const char* key)
{
    if (!v.is_string())
        throw Error(Errc::ConfigError, std::string(key) + " must be a string");
    return v.get<std::string>();
}

} // namespace

Config parse_config(std::string_view text)
{
    Json doc = TomlReader(text).document();
    Config cfg;
    for (auto& [key, v] : doc.items()) {
        if (key == "listen_address") {
            cfg.listen_address = as_string(v, "listen_address");
        } else if (key == "allowed_upstreams") {
            if (!v.is_array())
                throw Error(Errc::ConfigError, "allowed_upstreams must be an array");
            for (const auto& e : v)
                cfg.allowed_upstreams.push_back(as_string(e, "allowed_upstreams entry"));
        } else if (key == "describe_cache_seconds") {
            if (!v.is_number_integer() || v.get<long long>() < 0)
                throw Error(Errc::ConfigError, "describe_cache_seconds must be a non-negative integer");
            cfg.describe_cache_seconds = v.get<int>();
        } else if (key == "default_endpoints") {
            if (!v.is_array())
                throw Error(Errc::ConfigError, "default_endpoints must be an array of tables");
            std::set<std::string> names;
            for (const auto& e : v) {
                if (!e.is_object() || !e.contains("name") || !e.contains("url"))
                    throw Error(Errc::ConfigError, "default_endpoints entries need name and url");
                NamedEndpoint ep{as_string(e["name"], "name"), as_string(e["url"], "url")};
                if (!names.insert(ep.name).second)
                    throw Error(Errc::ConfigError, "duplicate endpoint name '" + ep.name + "'");
                try {
                    Url::parse(ep.url);
                } catch (const Error& err) {
                    throw Error(Errc::ConfigError, err.what());
                }
                cfg.default_endpoints.push_back(std::move(ep));
            }
        } else if (key == "static_dir") {
            cfg.static_dir = as_string(v, "static_dir");
        } else if (key == "output_format") {
            cfg.output_format = as_string(v, "output_format");
            if (cfg.output_format != "geojson" && cfg.output_format != "gml")
                throw Error(Errc::ConfigError, "output_format must be geojson or gml");
        } else {
            throw Error(Errc::ConfigError, "unknown key '" + key + "'");
        }
    }
    return cfg;
}

Config load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::ConfigError, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const Error& e) {
        throw Error(Errc::ConfigError, path.string() + ": " + e.what());
    }
}

std::optional<std::filesystem::path> find_config(const std::optional<std::string>& flag, const char* preferred_env)
{
    auto must_exist = [](std::filesystem::path p) {
        if (!std::filesystem::exists(p))
            throw Error(Errc::ConfigError, "config file " + p.string() + " does not exist");
        return p;
    };
    if (flag)
        return must_exist(*flag);
    if (const char* env = preferred_env ? std::getenv(preferred_env) : nullptr; env && *env)
        return must_exist(env);
    if (const char* env = std::getenv("GEOBIND_CONFIG"); env && *env)
        return must_exist(env);
    if (std::filesystem::exists("geobind.toml"))
        return std::filesystem::path("geobind.toml");
    return std::nullopt;
}

std::string Config::resolve_endpoint(std::string_view arg) const
{
    if (arg.empty() || arg.front() != '@')
        return std::string(arg);
    auto name = arg.substr(1);
    for (const auto& ep : default_endpoints)
        if (ep.name == name)
            return ep.url;
    throw Error(Errc::ConfigError, "no endpoint named '" + std::string(name) + "'");
}

bool Config::upstream_allowed(std::string_view text) const
{
    Url url = Url::parse(text);
    if (url.is_loopback())
        return true;
    auto host_port = url.host() + ":" + std::to_string(url.port());
    for (const auto& entry : allowed_upstreams) {
        if (entry == "*" || iequals(entry, url.host()) || iequals(entry, host_port) || iequals(entry, url.origin()))
            return true;
    }
    return false;
}

} // namespace geobind
