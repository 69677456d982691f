#include "geobind/mock_services.hpp"

#include "geobind/error.hpp"
#include "geobind/fixtures.hpp"

#include <filesystem>

namespace geobind::mock {

MockStack::MockStack(std::unique_ptr<HttpServer> wps, std::unique_ptr<HttpServer> wfs)
    : wps_(std::move(wps)), wfs_(std::move(wfs))
{
    wps_url_ = wps_->base_url() + "/wps";
    wfs_url_ = wfs_->base_url() + "/wfs";
}

MockStack::~MockStack() { shutdown(); }

void MockStack::shutdown()
{
    if (wps_)
        wps_->stop();
    if (wfs_)
        wfs_->stop();
}

std::unique_ptr<MockStack> start_mock_stack(const MockConfig& cfg)
{
    if (cfg.wps_port != 0 && cfg.wps_port == cfg.wfs_port)
        throw Error(Errc::InvalidParameter, "WPS and WFS ports must differ");
    FeatureCollection data;
    std::string layer = "roads";
    if (cfg.dataset_path) {
        data = load_dataset(*cfg.dataset_path);
        layer = std::filesystem::path(*cfg.dataset_path).stem().string();
    } else {
        data = fixtures::roads();
    }
    auto wfs_service = std::make_shared<WfsService>(std::move(data), layer);
    auto wps_service = std::make_shared<WpsService>(http_transport(), cfg.latency_ms);

    auto wps = std::make_unique<HttpServer>([wps_service](const HttpRequest& r) { return wps_service->handle(r); },
                                            cfg.host, cfg.wps_port);
    auto wfs = std::make_unique<HttpServer>([wfs_service](const HttpRequest& r) { return wfs_service->handle(r); },
                                            cfg.host, cfg.wfs_port);
    wps->start();
    wfs->start();
    return std::make_unique<MockStack>(std::move(wps), std::move(wfs));
}

} // namespace geobind::mock
