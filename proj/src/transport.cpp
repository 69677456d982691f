#include "geobind/transport.hpp"

#include "geobind/error.hpp"
#include "geobind/url.hpp"

#include <httplib.h>

#include <sys/socket.h>

#include <thread>

namespace geobind {

namespace {

std::string find_header(const Headers& headers, std::string_view name)
{
    for (const auto& [k, v] : headers)
        if (iequals(k, name))
            return v;
    return {};
}

std::string path_and_query(const Url& url)
{
    return url.query().empty() ? url.path() : url.path() + "?" + url.query();
}

} // namespace

std::string HttpRequest::header(std::string_view name) const { return find_header(headers, name); }
std::string HttpResponse::header(std::string_view name) const { return find_header(headers, name); }

Transport http_transport(std::chrono::milliseconds timeout)
{
    return [timeout](const HttpRequest& req) {
        Url url = [&] {
            try {
                return Url::parse(req.url);
            } catch (const Error& e) {
                throw TransportError(0, e.what());
            }
        }();
        if (url.scheme() != "http")
            throw TransportError(0, "only plain http is supported: " + req.url);

        httplib::Client client(url.host(), url.port());
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        // Targets arrive encoded; re-encoding would turn KVP list commas into %2C.
        client.set_url_encode(false);

        httplib::Headers headers;
        std::string content_type = "application/octet-stream";
        for (const auto& [k, v] : req.headers) {
            if (iequals(k, "Content-Type"))
                content_type = v;
            else
                headers.emplace(k, v);
        }
        auto target = path_and_query(url);
        httplib::Result res = req.method == "POST"
            ? client.Post(target, headers, req.body, content_type)
            : client.Get(target, headers);
        if (!res)
            throw TransportError(0, "cannot reach " + req.url + ": " + httplib::to_string(res.error()));

        HttpResponse out;
        out.status = res->status;
        out.body = std::move(res->body);
        for (const auto& [k, v] : res->headers)
            out.headers.emplace_back(k, v);
        return out;
    };
}

Transport in_process_transport(std::vector<std::pair<std::string, Transport>> routes)
{
    return [routes = std::move(routes)](const HttpRequest& req) {
        const Transport* best = nullptr;
        std::size_t best_len = 0;
        for (const auto& [prefix, handler] : routes) {
            if (req.url.compare(0, prefix.size(), prefix) == 0 && prefix.size() >= best_len) {
                best = &handler;
                best_len = prefix.size();
            }
        }
        if (!best)
            throw TransportError(0, "cannot reach " + req.url);
        return (*best)(req);
    };
}

struct HttpServer::Impl {
    httplib::Server server;
    std::thread thread;
    bool started = false;
};

HttpServer::HttpServer(Transport handler, std::string host, int port)
    : impl_(std::make_unique<Impl>()), host_(std::move(host))
{
    auto& srv = impl_->server;
    // Without SO_REUSEPORT so a second bind to a taken port fails.
    srv.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    srv.set_payload_max_length(64u << 20);

    auto dispatch = [this, handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
        HttpRequest in;
        in.method = req.method;
        in.url = base_url() + req.target;
        in.body = req.body;
        for (const auto& [k, v] : req.headers)
            in.headers.emplace_back(k, v);
        HttpResponse out;
        try {
            out = handler(in);
        } catch (const std::exception& e) {
            out.status = 500;
            out.headers = {{"Content-Type", "text/plain"}};
            out.body = e.what();
        }
        res.status = out.status;
        std::string type = "application/octet-stream";
        for (const auto& [k, v] : out.headers) {
            if (iequals(k, "Content-Type"))
                type = v;
            else
                res.set_header(k, v);
        }
        res.set_content(std::move(out.body), type);
    };
    srv.Get(".*", dispatch);
    srv.Post(".*", dispatch);

    if (port == 0) {
        port_ = srv.bind_to_any_port(host_);
        if (port_ < 0)
            throw Error(Errc::PortInUse, "cannot bind " + host_);
    } else {
        if (!srv.bind_to_port(host_, port))
            throw Error(Errc::PortInUse, "port " + std::to_string(port) + " on " + host_ + " is not available");
        port_ = port;
    }
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::mount_static(std::string prefix, std::string dir)
{
    if (!impl_->server.set_mount_point(prefix, dir))
        throw Error(Errc::ConfigError, "static directory '" + dir + "' does not exist");
}

void HttpServer::start()
{
    if (impl_->started)
        return;
    impl_->started = true;
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void HttpServer::stop()
{
    if (!impl_)
        return;
    impl_->server.stop();
    if (impl_->thread.joinable())
        impl_->thread.join();
}

std::string HttpServer::base_url() const
{
    bool v6 = host_.find(':') != std::string::npos;
    return "http://" + (v6 ? "[" + host_ + "]" : host_) + ":" + std::to_string(port_);
}

} // namespace geobind
