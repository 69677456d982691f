#include "geobind/fixtures.hpp"
#include "geobind/geojson.hpp"
#include "geobind/gml.hpp"
#include "geobind/kernel.hpp"
#include "geobind/mock_services.hpp"
#include "geobind/url.hpp"
#include "geobind/wfs_client.hpp"
#include "geobind/wps_client.hpp"
#include "geobind/wps_codec.hpp"
#include "geobind/xml.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace geobind;

namespace {

Errc code_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return Errc::ConfigError;
}

HttpResponse get(const Transport& t, const std::string& url) { return t(HttpRequest{"GET", url, {}, {}}); }

HttpResponse post(const Transport& t, const std::string& url, std::string body)
{
    return t(HttpRequest{"POST", url, {{"Content-Type", "text/xml"}}, std::move(body)});
}

Geometry road(std::size_t i)
{
    auto fc = fixtures::roads();
    return fc.features.at(i).geometry;
}

wps::ExecuteRequest buffer_request(wps::DataEnvelope geometry, std::string distance = "1")
{
    wps::ExecuteRequest r;
    r.process_id = "Buffer";
    r.inputs.emplace_back("geometry", std::move(geometry));
    r.inputs.emplace_back("distance", wps::InlineLiteral{std::move(distance), wps::LiteralType::Double});
    r.outputs = {"result"};
    return r;
}

wps::InlineComplex inline_gml(const Geometry& g)
{
    return wps::InlineComplex{gml::serialize_geometry(g), "text/xml", std::nullopt, std::nullopt};
}

Geometry result_geometry(const wps::ExecuteResult& r)
{
    REQUIRE(r.status == wps::ExecuteResult::Status::Succeeded);
    const auto* out = r.output("result");
    REQUIRE(out);
    return gml::parse_geometry(std::get<wps::InlineComplex>(*out).payload);
}

ExceptionInfo report_of(const HttpResponse& res)
{
    CHECK(res.status >= 400);
    return wps::decode_exception_report(res.body);
}

// Offline WPS whose reference fetches land on an offline WFS.
struct Offline {
    std::string wps_url = "http://127.0.0.1:7/wps";
    std::string wfs_url = "http://127.0.0.1:8/wfs";
    std::shared_ptr<mock::WfsService> wfs = std::make_shared<mock::WfsService>(fixtures::roads(), "roads");
    Transport wfs_t = in_process_transport({{wfs_url, [w = wfs](const HttpRequest& r) { return w->handle(r); }}});
    std::shared_ptr<mock::WpsService> wps = std::make_shared<mock::WpsService>(wfs_t);
    Transport all = in_process_transport({{wfs_url, wfs_t}, {wps_url, [w = wps](const HttpRequest& r) { return w->handle(r); }}});
};

} // namespace

TEST_CASE("start_mock_stack")
{
    auto stack = mock::start_mock_stack({});
    auto t = http_transport();
    auto caps = get(t, stack->wps_url() + "?service=WPS&request=GetCapabilities");
    CHECK(caps.status == 200);
    CHECK(caps.body == fixtures::capabilities());
    CHECK(Url::parse(stack->wps_url()).is_loopback());
    CHECK(Url::parse(stack->wfs_url()).is_loopback());

    auto second = mock::start_mock_stack({});
    CHECK(second->wps_url() != stack->wps_url());
    CHECK(get(t, second->wps_url() + "?service=WPS&request=GetCapabilities").body == fixtures::capabilities());
    CHECK(get(t, stack->wfs_url() + "?service=WFS&request=GetCapabilities").status == 200);

    int taken = Url::parse(stack->wps_url()).port();
    CHECK(code_of([&] { mock::start_mock_stack({taken, 0, std::nullopt, 0, "127.0.0.1"}); }) == Errc::PortInUse);
    CHECK(code_of([] { mock::start_mock_stack({5555, 5555, std::nullopt, 0, "127.0.0.1"}); })
          == Errc::InvalidParameter);
    CHECK(code_of([] { mock::start_mock_stack({0, 0, std::string("/nonexistent/roads.geojson"), 0, "127.0.0.1"}); })
          == Errc::DatasetLoadError);

    stack->shutdown();
    stack->shutdown();
    try {
        get(t, stack->wps_url() + "?service=WPS&request=GetCapabilities");
        FAIL("server still answering");
    } catch (const TransportError& e) {
        CHECK(e.status() == 0);
    }
    // The port is free again.
    auto again = mock::start_mock_stack({taken, 0, std::nullopt, 0, "127.0.0.1"});
    CHECK(again->wps_url() == stack->wps_url());
}

TEST_CASE("dataset override")
{
    auto dir = std::filesystem::temp_directory_path() / "geobind_mock_test";
    std::filesystem::create_directories(dir);
    auto path = dir / "lakes.geojson";
    {
        std::ofstream(path) << R"({"type":"FeatureCollection","features":[
{"type":"Feature","id":"lake.1","properties":{"name":"L"},"geometry":{"type":"Point","coordinates":[3,4]}}]})";
    }
    auto data = mock::load_dataset(path.string());
    REQUIRE(data.features.size() == 1);
    CHECK(data.features[0].id == "lake.1");

    auto stack = mock::start_mock_stack({0, 0, path.string(), 0, "127.0.0.1"});
    auto t = http_transport();
    auto layers = wfs::fetch_layers(t, stack->wfs_url());
    REQUIRE(layers.size() == 1);
    CHECK(layers[0].name == "lakes");

    auto bad = dir / "bad.geojson";
    {
        std::ofstream(bad) << "{not json";
    }
    CHECK(code_of([&] { mock::load_dataset(bad.string()); }) == Errc::DatasetLoadError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("Execute Buffer matches the kernel directly")
{
    Offline o;
    auto expect = kernel::buffer(road(0), {1.0, 16});
    auto inline_result = result_geometry(wps::send_execute(o.all, o.wps_url, buffer_request(inline_gml(road(0)))));
    CHECK(inline_result == expect);
    CHECK(area(inline_result) == area(expect));

    wfs::WfsQuery q{o.wfs_url, "roads", std::nullopt, std::vector<std::string>{"road.1"}, {}, std::nullopt};
    auto ref = wfs::as_reference(q);
    auto by_reference = result_geometry(wps::send_execute(o.all, o.wps_url, buffer_request(ref)));
    CHECK(by_reference == inline_result);

    // Over real sockets too.
    auto stack = mock::start_mock_stack({});
    auto t = http_transport();
    q.service_url = stack->wfs_url();
    CHECK(result_geometry(wps::send_execute(t, stack->wps_url(), buffer_request(wfs::as_reference(q)))) == expect);

    auto raw = buffer_request(inline_gml(road(0)));
    raw.raw = true;
    auto raw_res = post(t, stack->wps_url(), wps::encode_execute(raw));
    CHECK(raw_res.status == 200);
    CHECK(gml::parse_geometry(raw_res.body) == expect);
}

TEST_CASE("Centroid and Envelope")
{
    Offline o;
    auto g = road(1);
    auto req = buffer_request(inline_gml(g));
    req.inputs.pop_back();
    req.outputs.clear();

    req.process_id = "Centroid";
    auto c = wps::send_execute(o.all, o.wps_url, req);
    REQUIRE(c.status == wps::ExecuteResult::Status::Succeeded);
    auto pos = kernel::centroid_position(g);
    CHECK(gml::parse_geometry(std::get<wps::InlineComplex>(*c.output("result")).payload)
          == Geometry{Point{pos}, g.srs});
    CHECK(std::get<wps::InlineLiteral>(*c.output("coordinates")).value
          == gml::format_number(pos.x) + " " + gml::format_number(pos.y));

    req.process_id = "Envelope";
    auto e = wps::send_execute(o.all, o.wps_url, req);
    REQUIRE(e.status == wps::ExecuteResult::Status::Succeeded);
    auto box = std::get<wps::InlineBBox>(*e.output("bbox")).bbox;
    auto expect = compute_bbox(g);
    CHECK(box.min_x == expect.min_x);
    CHECK(box.max_y == expect.max_y);
}

TEST_CASE("request faults")
{
    Offline o;
    auto reproject = get(o.all, o.wps_url + "?service=WPS&version=1.0.0&request=DescribeProcess&identifier=Reproject");
    auto info = report_of(reproject);
    CHECK(info.code == "InvalidParameterValue");
    CHECK(info.locator == "identifier");

    CHECK(report_of(get(o.all, o.wps_url + "?service=WPS")).code == "MissingParameterValue");
    CHECK(report_of(get(o.all, o.wps_url + "?service=WPS&request=Nope")).code == "OperationNotSupported");
    CHECK(report_of(post(o.all, o.wps_url, "<broken")).code == "NoApplicableCode");

    auto missing = buffer_request(inline_gml(road(0)));
    missing.inputs.pop_back();
    auto m = report_of(post(o.all, o.wps_url, wps::encode_execute(missing)));
    CHECK(m.code == "MissingParameterValue");
    CHECK(m.locator == "distance");

    auto external = buffer_request(wps::Reference{"http://example.com/wfs?request=GetFeature", wps::HttpMethod::Get,
                                                  std::nullopt, std::nullopt});
    auto ext = report_of(post(o.all, o.wps_url, wps::encode_execute(external)));
    CHECK(ext.code == "InvalidParameterValue");
    CHECK(ext.locator == "geometry");

    // A sound request whose process fails reports ProcessFailed.
    auto bad_distance = buffer_request(inline_gml(road(0)), "-1");
    auto res = wps::send_execute(o.all, o.wps_url, bad_distance);
    CHECK(res.status == wps::ExecuteResult::Status::Failed);
    REQUIRE(res.failure);
}

TEST_CASE("DescribeProcess by KVP and by XML POST is byte-identical")
{
    Offline o;
    for (const auto& id : fixtures::process_ids()) {
        auto kvp = get(o.all, o.wps_url + "?service=WPS&version=1.0.0&request=DescribeProcess&identifier=" + id);
        std::string body = R"(<?xml version="1.0" encoding="UTF-8"?>)"
                            R"(<wps:DescribeProcess xmlns:wps="http://www.opengis.net/wps/1.0.0" xmlns:ows="http://www.opengis.net/ows/1.1" service="WPS" version="1.0.0">)"
                            "<ows:Identifier>" + id + "</ows:Identifier></wps:DescribeProcess>";
        auto xml_post = post(o.all, o.wps_url, body);
        CHECK(kvp.status == 200);
        CHECK(xml_post.status == 200);
        CHECK(kvp.body == xml_post.body);
        CHECK(kvp.body == fixtures::describe(id));
    }
}

TEST_CASE("WFS GetFeature examples")
{
    Offline o;
    auto base = o.wfs_url + "?service=WFS&version=1.1.0&request=GetFeature&typeName=roads";
    auto ids = [&](const std::string& url) {
        auto res = get(o.wfs_t, url);
        REQUIRE(res.status == 200);
        std::vector<std::string> out;
        for (const auto& f : gml::parse_feature_collection(res.body).features)
            out.push_back(f.id);
        return out;
    };
    CHECK(ids(base).size() == 3);
    CHECK(ids(base + "&featureId=road.2") == std::vector<std::string>{"road.2"});
    auto filter = wfs::equality_filter({{"name", "C"}});
    CHECK(ids(base + "&filter=" + percent_encode(filter)) == std::vector<std::string>{"road.3"});
    auto unknown = get(o.wfs_t, o.wfs_url + "?service=WFS&request=GetFeature&typeName=rivers");
    CHECK(unknown.status >= 400);
    CHECK_NOTHROW(wps::decode_exception_report(unknown.body));
}

TEST_CASE("every WPS response decodes, and identical requests answer identically")
{
    Offline o;
    std::mt19937_64 rng(3);
    std::vector<std::string> ids{"Buffer", "Centroid", "Envelope", "Reproject", ""};
    for (int i = 0; i < 400; ++i) {
        wps::ExecuteRequest r;
        r.process_id = ids[rng() % ids.size()];
        auto g = road(rng() % 3);
        switch (rng() % 4) {
        case 0:
            r.inputs.emplace_back("geometry", inline_gml(g));
            break;
        case 1:
            r.inputs.emplace_back("geometry",
                                  wps::Reference{o.wfs_url + "?service=WFS&request=GetFeature&typeName=roads&featureId=road."
                                                     + std::to_string(1 + rng() % 4),
                                                 wps::HttpMethod::Get, std::nullopt, std::nullopt});
            break;
        case 2:
            r.inputs.emplace_back("geometry", wps::InlineComplex{"<junk/>", "text/xml", std::nullopt, std::nullopt});
            break;
        default:
            break;
        }
        if (rng() % 3)
            r.inputs.emplace_back("distance",
                                  wps::InlineLiteral{std::to_string(int(rng() % 5) - 1), wps::LiteralType::Double});
        if (rng() % 4 == 0)
            r.inputs.emplace_back("extra", wps::InlineLiteral{"x", wps::LiteralType::String});
        if (rng() % 2)
            r.outputs = {rng() % 4 ? "result" : "nope"};
        r.raw = !r.outputs.empty() && rng() % 3 == 0;

        auto body = wps::encode_execute(r);
        auto a = post(o.all, o.wps_url, body);
        auto b = post(o.all, o.wps_url, body);
        CHECK(a.body == b.body);
        CHECK(a.status == b.status);
        if (a.status >= 400) {
            CHECK_NOTHROW(wps::decode_exception_report(a.body));
        } else {
            auto decoded = wps::decode_execute_response(a.body, a.content_type(), r.raw ? r.outputs.front() : "");
            if (decoded.status == wps::ExecuteResult::Status::Succeeded)
                CHECK_FALSE(decoded.outputs.empty());
        }
    }
}

TEST_CASE("multi-valued KVP parameters survive the socket transport")
{
    auto stack = mock::start_mock_stack({});
    auto t = http_transport();
    wfs::WfsQuery q{stack->wfs_url(), "roads", std::nullopt, std::vector<std::string>{"road.3", "road.1"}, {},
                    std::nullopt};
    auto fc = wfs::fetch_features(q, t);
    REQUIRE(fc.features.size() == 2);
    CHECK(fc.features[0].id == "road.1");
    CHECK(fc.features[1].id == "road.3");
}
