#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

/// Settings shared by the bridge and the CLI, read from a TOML file.
namespace geobind {

struct NamedEndpoint {
    std::string name;
    std::string url;

    bool operator==(const NamedEndpoint&) const = default;
};

struct Config {
    std::string listen_address = "127.0.0.1:8080";
    /// Hosts, host:port pairs or origins the bridge may contact besides
    /// loopback, which is always allowed. "*" allows anything.
    std::vector<std::string> allowed_upstreams;
    int describe_cache_seconds = 60;
    std::vector<NamedEndpoint> default_endpoints;
    std::optional<std::string> static_dir;
    /// "geojson" or "gml".
    std::string output_format = "geojson";

    /// URL for "@name", or the argument itself when it is not an alias.
    /// Throws ConfigError for an unknown alias.
    std::string resolve_endpoint(std::string_view arg) const;
    bool upstream_allowed(std::string_view url) const;
};

/// Reads the TOML subset used here: key = value pairs with strings,
/// integers, booleans, arrays and inline tables, plus [[default_endpoints]]
/// table arrays. Throws Error(ConfigError) with a line number.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

/// --config flag, then $preferred_env when given, then $GEOBIND_CONFIG, then
/// ./geobind.toml. A path named by the flag or a variable must exist; the
/// default may be absent.
std::optional<std::filesystem::path> find_config(const std::optional<std::string>& flag,
                                                 const char* preferred_env = nullptr);

} // namespace geobind
