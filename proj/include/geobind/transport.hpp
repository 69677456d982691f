#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace geobind {

using Headers = std::vector<std::pair<std::string, std::string>>;

struct HttpRequest {
    std::string method = "GET";
    /// Absolute URL including the query.
    std::string url;
    Headers headers;
    std::string body;

    /// Case-insensitive; empty when absent.
    std::string header(std::string_view name) const;
};

struct HttpResponse {
    int status = 200;
    Headers headers;
    std::string body;

    std::string header(std::string_view name) const;
    std::string content_type() const { return header("Content-Type"); }
};

/// Blocking request/response capability. Implementations throw
/// TransportError(0, ...) when no HTTP response was received; non-2xx
/// statuses are returned, not thrown.
using Transport = std::function<HttpResponse(const HttpRequest&)>;

/// Plain-HTTP client transport. https URLs fail with TransportError.
Transport http_transport(std::chrono::milliseconds timeout = std::chrono::seconds(10));

/// Dispatches to the handler whose prefix is the longest match of the URL;
/// anything else fails as unreachable. For tests without sockets.
Transport in_process_transport(std::vector<std::pair<std::string, Transport>> routes);

/// Small HTTP server running one handler on a background thread pool.
class HttpServer {
public:
    /// Binds immediately; throws Error(PortInUse). Port 0 picks a free one.
    HttpServer(Transport handler, std::string host, int port);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Serves files from `dir` under `prefix`. For GET, an existing file
    /// wins over the handler. Call before start().
    void mount_static(std::string prefix, std::string dir);

    void start();
    /// Idempotent.
    void stop();

    int port() const { return port_; }
    const std::string& host() const { return host_; }
    /// http://host:port
    std::string base_url() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::string host_;
    int port_ = 0;
};

} // namespace geobind
