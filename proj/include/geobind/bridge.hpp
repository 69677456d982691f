#pragma once

#include "geobind/config.hpp"
#include "geobind/geojson.hpp"
#include "geobind/transport.hpp"
#include "geobind/wps_model.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

/// JSON facade over WPS/WFS. Every response body is {"ok": ...} or
/// {"error": {"code", "message", "remote"?, "violations"?}}.
namespace geobind::bridge {

using Json = geojson::Json;

/// Description as served by /api/process.
Json description_to_json(const wps::ProcessDescription& d);
/// Exact /api/process success body.
std::string process_body(const wps::ProcessDescription& d);

class Bridge {
public:
    Bridge(Config config, Transport upstream);

    HttpResponse handle(const HttpRequest& req) const;

    const Config& config() const { return config_; }

private:
    HttpResponse capabilities(const HttpRequest& req) const;
    HttpResponse process(const HttpRequest& req) const;
    HttpResponse execute(const HttpRequest& req) const;
    HttpResponse wfs_layers(const HttpRequest& req) const;
    HttpResponse wfs_features(const HttpRequest& req) const;
    HttpResponse endpoints() const;

    wps::ProcessDescription describe(const std::string& url, const std::string& id) const;
    void require_allowed(const std::string& url) const;

    Config config_;
    Transport upstream_;

    struct CacheEntry {
        std::chrono::steady_clock::time_point stored;
        wps::ProcessDescription description;
    };
    mutable std::mutex cache_mutex_;
    mutable std::map<std::pair<std::string, std::string>, CacheEntry> cache_;
};

/// "host:port" from the config; throws ConfigError.
std::pair<std::string, int> split_listen_address(const std::string& address);

/// Serves the bridge, plus config.static_dir under "/" when set.
std::unique_ptr<HttpServer> start_bridge(std::shared_ptr<const Bridge> bridge, const std::string& host, int port);

} // namespace geobind::bridge
