#pragma once

#include "geobind/geometry.hpp"
#include "geobind/transport.hpp"
#include "geobind/wps_model.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>

/// Offline WPS (Buffer, Centroid, Envelope) and WFS (one layer) servers.
namespace geobind::mock {

/// Server side of Execute: the inverse of wps::encode_execute. Request
/// faults are thrown as ServiceReportedException carrying the OWS report
/// the server answers with.
wps::ExecuteRequest parse_execute_request(std::string_view body);

std::string exception_report(const ExceptionInfo& info);

class WpsService {
public:
    /// `fetch` dereferences Reference inputs. Unless `remote_references`
    /// is set, only loopback hrefs are fetched.
    explicit WpsService(Transport fetch, int latency_ms = 0, bool remote_references = false);

    HttpResponse handle(const HttpRequest& req) const;

private:
    Transport fetch_;
    int latency_ms_;
    bool remote_references_;
};

class WfsService {
public:
    WfsService(FeatureCollection data, std::string layer);

    HttpResponse handle(const HttpRequest& req) const;

    const std::string& layer() const { return layer_; }

private:
    FeatureCollection data_;
    std::string layer_;
};

/// GeoJSON file to features; the layer is named after the file stem.
/// Throws DatasetLoadError.
FeatureCollection load_dataset(const std::string& path);

struct MockConfig {
    int wps_port = 0;
    int wfs_port = 0;
    std::optional<std::string> dataset_path;
    int latency_ms = 0;
    std::string host = "127.0.0.1";
};

class MockStack {
public:
    MockStack(std::unique_ptr<HttpServer> wps, std::unique_ptr<HttpServer> wfs);
    ~MockStack();

    const std::string& wps_url() const { return wps_url_; }
    const std::string& wfs_url() const { return wfs_url_; }
    /// Stops both servers and releases the ports. Idempotent.
    void shutdown();

private:
    std::unique_ptr<HttpServer> wps_;
    std::unique_ptr<HttpServer> wfs_;
    std::string wps_url_;
    std::string wfs_url_;
};

/// Throws PortInUse, DatasetLoadError, InvalidParameter (equal fixed ports).
std::unique_ptr<MockStack> start_mock_stack(const MockConfig& cfg);

} // namespace geobind::mock
