#include "geobind/bridge.hpp"
#include "geobind/fixtures.hpp"
#include "geobind/geojson.hpp"
#include "geobind/gml.hpp"
#include "geobind/kernel.hpp"
#include "geobind/mock_services.hpp"
#include "geobind/url.hpp"
#include "geobind/wfs_client.hpp"
#include "geobind/wps_codec.hpp"

#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

using namespace geobind;
using bridge::Json;

namespace {

const std::string kWps = "http://127.0.0.1:7/wps";
const std::string kWfs = "http://127.0.0.1:8/wfs";
const std::string kBridge = "http://bridge.local";

// Bridge over offline mock services, recording what it sends upstream.
struct Harness {
    std::shared_ptr<mock::WfsService> wfs = std::make_shared<mock::WfsService>(fixtures::roads(), "roads");
    Transport wfs_t = in_process_transport({{kWfs, [w = wfs](const HttpRequest& r) { return w->handle(r); }}});
    std::shared_ptr<mock::WpsService> wps = std::make_shared<mock::WpsService>(wfs_t);
    std::atomic<int> describe_calls{0};
    std::mutex mutex;
    std::vector<HttpRequest> sent;
    std::unique_ptr<bridge::Bridge> b;

    explicit Harness(Config cfg = {})
    {
        Transport routes = in_process_transport(
            {{kWfs, wfs_t}, {kWps, [w = wps](const HttpRequest& r) { return w->handle(r); }}});
        Transport recording = [this, routes](const HttpRequest& r) {
            if (r.url.find("request=DescribeProcess") != std::string::npos)
                ++describe_calls;
            {
                std::lock_guard lock(mutex);
                sent.push_back(r);
            }
            return routes(r);
        };
        b = std::make_unique<bridge::Bridge>(std::move(cfg), recording);
    }

    HttpResponse get(const std::string& path) const { return b->handle(HttpRequest{"GET", kBridge + path, {}, {}}); }
    HttpResponse post(const std::string& path, const Json& body) const
    {
        return b->handle(HttpRequest{"POST", kBridge + path, {{"Content-Type", "application/json"}}, body.dump()});
    }
};

std::string q(const std::string& s) { return percent_encode(s); }

Json body_of(const HttpResponse& r)
{
    CHECK(r.content_type().find("application/json") != std::string::npos);
    return Json::parse(r.body);
}

Json ok_of(const HttpResponse& r)
{
    auto j = body_of(r);
    CHECK_MESSAGE(r.status == 200, r.body);
    REQUIRE(j.contains("ok"));
    CHECK_FALSE(j.contains("error"));
    return j["ok"];
}

Json error_of(const HttpResponse& r, int status, const std::string& code)
{
    auto j = body_of(r);
    CHECK_MESSAGE(r.status == status, r.body);
    REQUIRE(j.contains("error"));
    CHECK_FALSE(j.contains("ok"));
    CHECK(j["error"]["code"] == code);
    CHECK(j["error"]["message"].is_string());
    return j["error"];
}

Geometry road(std::size_t i)
{
    auto fc = fixtures::roads();
    return fc.features.at(i).geometry;
}

Json buffer_body(Json geometry_input, std::optional<double> distance = 1.0)
{
    Json inputs = Json::array();
    inputs.push_back(std::move(geometry_input));
    if (distance)
        inputs.push_back({{"id", "distance"}, {"literal", *distance}});
    return Json{{"url", kWps}, {"process", "Buffer"}, {"inputs", inputs}};
}

Json inline_road(std::size_t i)
{
    return Json{{"id", "geometry"}, {"geometryGeoJson", geojson::geometry_to_json(road(i))}};
}

Json wfs_reference(const std::string& wfs_url, std::size_t i, const std::string& mode)
{
    auto href = wfs_url + "?service=WFS&version=1.1.0&request=GetFeature&typeName=roads&featureId=road."
                + std::to_string(i + 1);
    return Json{{"id", "geometry"}, {"reference", {{"href", href}, {"fetchMode", mode}}}};
}

Geometry single_polygon(const Json& ok)
{
    CHECK(ok["status"] == "succeeded");
    REQUIRE(ok["outputs"].size() == 1);
    CHECK(ok["outputs"][0]["id"] == "result");
    return geojson::geometry_from_json(ok["outputs"][0]["geojson"]);
}

} // namespace

TEST_CASE("GET /api/capabilities")
{
    Harness h;
    auto ok = ok_of(h.get("/api/capabilities?url=" + q(kWps)));
    CHECK(ok["processCount"] == 3);
    std::vector<std::string> ids;
    for (const auto& p : ok["processes"])
        ids.push_back(p["id"]);
    CHECK(ids == std::vector<std::string>{"Buffer", "Centroid", "Envelope"});
    CHECK(ok["version"] == "1.0.0");
    CHECK(ok["title"].is_string());
    CHECK(ok["abstract"].is_string());

    error_of(h.get("/api/capabilities"), 400, "MissingUrl");
    error_of(h.get("/api/capabilities?url=" + q("http://127.0.0.1:9/wps")), 502, "UpstreamUnreachable");
    error_of(h.get("/api/capabilities?url=" + q("http://example.com/wps")), 403, "UpstreamNotAllowed");
    error_of(h.get("/api/capabilities?url=notaurl"), 400, "MalformedUrl");
    // A WFS capabilities document is not a WPS one.
    error_of(h.get("/api/capabilities?url=" + q(kWfs + "?service=WFS")), 502, "InvalidUpstreamResponse");
}

TEST_CASE("GET /api/process")
{
    Harness h;
    auto ok = ok_of(h.get("/api/process?url=" + q(kWps) + "&id=Buffer"));
    CHECK(ok["id"] == "Buffer");
    REQUIRE(ok["inputs"].size() == 2);
    CHECK(ok["inputs"][0]["id"] == "geometry");
    CHECK(ok["inputs"][0]["kind"] == "Complex");
    CHECK(ok["inputs"][0]["formats"].size() >= 1);
    CHECK(ok["inputs"][1]["id"] == "distance");
    CHECK(ok["inputs"][1]["kind"] == "Literal");
    CHECK(ok["inputs"][1]["datatype"] == "double");
    CHECK(ok["inputs"][1]["minOccurs"] == 1);
    CHECK(ok["inputs"][1]["maxOccurs"] == 1);
    CHECK(ok["outputs"][0]["id"] == "result");

    // The body is the shared serializer's output verbatim.
    auto d = wps::decode_process_description(fixtures::describe("Buffer"));
    CHECK(h.get("/api/process?url=" + q(kWps) + "&id=Buffer").body == bridge::process_body(d));

    auto err = error_of(h.get("/api/process?url=" + q(kWps) + "&id=Reproject"), 404, "UnknownProcess");
    CHECK(err["remote"]["code"] == "InvalidParameterValue");
    CHECK(err["remote"]["locator"] == "identifier");
    error_of(h.get("/api/process?url=" + q(kWps)), 400, "MissingId");
    error_of(h.get("/api/process?id=Buffer"), 400, "MissingUrl");
}

TEST_CASE("describe cache")
{
    Harness h;
    for (int i = 0; i < 3; ++i)
        ok_of(h.post("/api/execute", buffer_body(inline_road(0))));
    ok_of(h.get("/api/process?url=" + q(kWps) + "&id=Buffer"));
    CHECK(h.describe_calls == 1);
    ok_of(h.get("/api/process?url=" + q(kWps) + "&id=Centroid"));
    CHECK(h.describe_calls == 2);

    Config no_cache;
    no_cache.describe_cache_seconds = 0;
    Harness u(no_cache);
    for (int i = 0; i < 3; ++i)
        ok_of(u.get("/api/process?url=" + q(kWps) + "&id=Buffer"));
    CHECK(u.describe_calls == 3);
}

TEST_CASE("POST /api/execute inline geometry equals the kernel")
{
    Harness h;
    for (std::size_t i = 0; i < 3; ++i) {
        auto got = single_polygon(ok_of(h.post("/api/execute", buffer_body(inline_road(i)))));
        CHECK(got == kernel::buffer(road(i), {1.0, 16}));
    }

    // A Feature wrapper and a one-feature collection are accepted too.
    Json feature{{"type", "Feature"}, {"properties", Json::object()}, {"geometry", geojson::geometry_to_json(road(0))}};
    auto via_feature = single_polygon(ok_of(h.post("/api/execute", buffer_body({{"id", "geometry"}, {"geometryGeoJson", feature}}))));
    CHECK(via_feature == kernel::buffer(road(0), {1.0, 16}));
    Json two{{"type", "FeatureCollection"}, {"features", {feature, feature}}};
    error_of(h.post("/api/execute", buffer_body({{"id", "geometry"}, {"geometryGeoJson", two}})), 422, "AmbiguousGeometry");
}

TEST_CASE("POST /api/execute reference modes agree with inline")
{
    Harness h;
    for (std::size_t i = 0; i < 3; ++i) {
        auto inline_poly = single_polygon(ok_of(h.post("/api/execute", buffer_body(inline_road(i)))));
        auto sent = single_polygon(ok_of(h.post("/api/execute", buffer_body(wfs_reference(kWfs, i, "sendReference")))));
        auto fetched = single_polygon(ok_of(h.post("/api/execute", buffer_body(wfs_reference(kWfs, i, "fetchClientSide")))));
        CHECK(sent == inline_poly);
        CHECK(fetched == inline_poly);
    }

    // fetchClientSide means the Execute carries the data, not the href.
    h.sent.clear();
    ok_of(h.post("/api/execute", buffer_body(wfs_reference(kWfs, 0, "fetchClientSide"))));
    auto execute = std::find_if(h.sent.begin(), h.sent.end(), [](const HttpRequest& r) { return r.method == "POST"; });
    REQUIRE(execute != h.sent.end());
    auto req = mock::parse_execute_request(execute->body);
    CHECK(std::holds_alternative<wps::InlineComplex>(req.inputs[0].second));

    error_of(h.post("/api/execute", buffer_body(wfs_reference("http://example.com/wfs", 0, "fetchClientSide"))), 403,
             "UpstreamNotAllowed");
    auto missing = buffer_body(wfs_reference(kWfs, 8, "fetchClientSide"));
    error_of(h.post("/api/execute", missing), 422, "AmbiguousGeometry");
}

TEST_CASE("the emitted Execute equals one built through the session directly")
{
    Harness h;
    auto desc = wps::decode_process_description(fixtures::describe("Buffer"));
    auto direct_session = [&] {
        auto s = wps::begin_session(kWps);
        s = wps::load_capabilities(s, wps::ServiceMetadata{{}, {}, "1.0.0", {}}, {desc.brief});
        return wps::select_process(s, desc);
    };
    const auto& fmt = desc.inputs[0].formats.front();

    for (std::size_t i = 0; i < 3; ++i) {
        h.sent.clear();
        ok_of(h.post("/api/execute", buffer_body(inline_road(i), 2.5)));
        auto s = direct_session();
        s = wps::bind_input(s, "geometry",
                            wps::InlineComplex{gml::serialize_geometry(road(i)), fmt.mime_type, fmt.encoding, fmt.schema});
        s = wps::bind_input(s, "distance", wps::InlineLiteral{"2.5", wps::LiteralType::Double});
        auto expect = wps::build_execute(s);
        auto execute = std::find_if(h.sent.begin(), h.sent.end(), [](const HttpRequest& r) { return r.method == "POST"; });
        REQUIRE(execute != h.sent.end());
        CHECK(mock::parse_execute_request(execute->body) == expect);

        h.sent.clear();
        auto ref_body = buffer_body(wfs_reference(kWfs, i, "sendReference"), 2.5);
        ref_body["raw"] = "result";
        auto raw = ok_of(h.post("/api/execute", ref_body));
        // Raw output is handed over as the upstream bytes.
        CHECK(raw["outputs"][0]["mime"].get<std::string>().rfind("text/xml", 0) == 0);
        CHECK(gml::parse_geometry(base64_decode(raw["outputs"][0]["rawBase64"].get<std::string>()))
              == kernel::buffer(road(i), {2.5, 16}));
        auto r = direct_session();
        r = wps::bind_input(r, "geometry",
                            wps::Reference{ref_body["inputs"][0]["reference"]["href"], wps::HttpMethod::Get,
                                           std::nullopt, std::nullopt});
        r = wps::set_fetch_mode(r, "geometry", wps::FetchMode::SendReference);
        r = wps::bind_input(r, "distance", wps::InlineLiteral{"2.5", wps::LiteralType::Double});
        execute = std::find_if(h.sent.begin(), h.sent.end(), [](const HttpRequest& x) { return x.method == "POST"; });
        REQUIRE(execute != h.sent.end());
        CHECK(mock::parse_execute_request(execute->body) == wps::build_execute(r, std::string("result")));
    }
}

TEST_CASE("POST /api/execute errors")
{
    Harness h;
    auto v = error_of(h.post("/api/execute", buffer_body(inline_road(0), std::nullopt)), 422, "BindingViolations");
    CHECK(v["violations"] == Json::parse(R"([{"input":"distance","violation":"MissingRequired"}])"));

    auto nothing = Json{{"url", kWps}, {"process", "Buffer"}, {"inputs", Json::array()}};
    auto both = error_of(h.post("/api/execute", nothing), 422, "BindingViolations");
    CHECK(both["violations"].size() == 2);
    CHECK(both["violations"][0]["input"] == "geometry");
    CHECK(both["violations"][1]["input"] == "distance");

    auto malformed = h.b->handle(HttpRequest{"POST", kBridge + "/api/execute", {}, "{nope"});
    error_of(malformed, 400, "MalformedBody");
    error_of(h.post("/api/execute", Json::array()), 400, "MalformedBody");
    error_of(h.post("/api/execute", Json{{"process", "Buffer"}}), 400, "MalformedBody");
    error_of(h.post("/api/execute", buffer_body({{"id", "geometry"}})), 400, "MalformedBody");

    error_of(h.post("/api/execute", buffer_body({{"id", "nope"}, {"literal", 1}})), 422, "UnknownInput");
    error_of(h.post("/api/execute", buffer_body({{"id", "geometry"}, {"literal", 1}})), 422, "KindMismatch");
    error_of(h.post("/api/execute", buffer_body(inline_road(0), -1.0)), 502, "RemoteException");
    auto unknown = buffer_body(inline_road(0));
    unknown["process"] = "Reproject";
    error_of(h.post("/api/execute", unknown), 404, "UnknownProcess");

    // A remote report keeps its original code.
    auto junk = buffer_body({{"id", "geometry"}, {"reference", {{"href", kWfs + "?service=WFS&request=GetFeature&typeName=rivers"}}}});
    auto remote = error_of(h.post("/api/execute", junk), 502, "RemoteException");
    CHECK(remote["remote"]["code"] == "InvalidParameterValue");
    CHECK(remote["remote"]["locator"] == "geometry");
}

TEST_CASE("WFS endpoints")
{
    Harness h;
    auto layers = ok_of(h.get("/api/wfs/layers?url=" + q(kWfs)));
    REQUIRE(layers.size() == 1);
    CHECK(layers[0]["name"] == "roads");
    error_of(h.get("/api/wfs/layers"), 400, "MissingUrl");

    auto one = ok_of(h.post("/api/wfs/features", Json{{"url", kWfs}, {"typeName", "roads"}, {"featureIds", {"road.1"}}}));
    CHECK(one["type"] == "FeatureCollection");
    REQUIRE(one["features"].size() == 1);
    CHECK(one["features"][0]["id"] == "road.1");

    auto b = ok_of(h.post("/api/wfs/features",
                          Json{{"url", kWfs}, {"typeName", "roads"},
                               {"attributeFilters", Json::array({{{"property", "name"}, {"value", "B"}}})}}));
    REQUIRE(b["features"].size() == 1);
    CHECK(b["features"][0]["id"] == "road.2");
    CHECK(geojson::feature_collection_from_json(b).features[0] == fixtures::roads().features[1]);

    auto all = ok_of(h.post("/api/wfs/features", Json{{"url", kWfs}, {"typeName", "roads"}}));
    CHECK(geojson::feature_collection_from_json(all) == fixtures::roads());

    error_of(h.post("/api/wfs/features",
                    Json{{"url", kWfs}, {"typeName", "roads"}, {"featureIds", {"road.1"}},
                         {"attributeFilters", Json::array({{{"property", "name"}, {"value", "B"}}})}}),
             400, "ConflictingFilters");
    error_of(h.post("/api/wfs/features", Json{{"url", kWfs}, {"typeName", "roads"}, {"maxFeatures", 0}}), 400,
             "InvalidQuery");
    auto rivers = error_of(h.post("/api/wfs/features", Json{{"url", kWfs}, {"typeName", "rivers"}}), 502, "RemoteException");
    CHECK(rivers["remote"]["code"].is_string());
}

TEST_CASE("routing and endpoints")
{
    Config cfg;
    cfg.default_endpoints = {{"mock", kWps}, {"demo", "http://demo.example.org/wps"}};
    Harness h(cfg);
    auto eps = ok_of(h.get("/api/endpoints"));
    CHECK(eps == Json::parse(R"([{"name":"mock","url":"http://127.0.0.1:7/wps"},{"name":"demo","url":"http://demo.example.org/wps"}])"));
    error_of(h.get("/api/nothing"), 404, "NotFound");
    error_of(h.get("/api/execute"), 405, "MethodNotAllowed");
    error_of(h.post("/api/capabilities", Json::object()), 405, "MethodNotAllowed");

    Config open;
    open.allowed_upstreams = {"example.com"};
    Harness o(open);
    // Allowed, but nothing answers there in the offline harness.
    error_of(o.get("/api/capabilities?url=" + q("http://example.com/wps")), 502, "UpstreamUnreachable");
}

TEST_CASE("concurrent shuffled replay is byte-identical")
{
    Harness h;
    std::vector<std::pair<std::string, Json>> calls;
    for (std::size_t i = 0; i < 3; ++i) {
        calls.emplace_back("/api/execute", buffer_body(inline_road(i), 0.5 + double(i)));
        calls.emplace_back("/api/execute", buffer_body(wfs_reference(kWfs, i, "fetchClientSide")));
        calls.emplace_back("/api/wfs/features", Json{{"url", kWfs}, {"typeName", "roads"}, {"maxFeatures", i + 1}});
    }
    calls.emplace_back("/api/execute", buffer_body(inline_road(0), std::nullopt));
    calls.emplace_back("GET /api/process?url=" + q(kWps) + "&id=Centroid", Json());
    calls.emplace_back("GET /api/capabilities?url=" + q(kWps), Json());

    auto run = [&](const std::pair<std::string, Json>& c) {
        if (c.first.rfind("GET ", 0) == 0)
            return h.get(c.first.substr(4));
        return h.post(c.first, c.second);
    };
    std::vector<std::string> expected;
    for (const auto& c : calls)
        expected.push_back(run(c).body);

    std::vector<std::size_t> order;
    for (int rep = 0; rep < 8; ++rep)
        for (std::size_t i = 0; i < calls.size(); ++i)
            order.push_back(i);
    std::shuffle(order.begin(), order.end(), std::mt19937_64(4));

    std::vector<std::string> got(order.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < 8; ++t)
        pool.emplace_back([&] {
            for (std::size_t k; (k = next++) < order.size();)
                got[k] = run(calls[order[k]]).body;
        });
    for (auto& t : pool)
        t.join();
    for (std::size_t k = 0; k < order.size(); ++k)
        CHECK(got[k] == expected[order[k]]);
}

TEST_CASE("served over HTTP with static files")
{
    auto dir = std::filesystem::temp_directory_path() / "geobind_bridge_static";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "index.html") << "<html>geobind</html>";
    }
    auto stack = mock::start_mock_stack({});
    Config cfg;
    cfg.static_dir = dir.string();
    auto server = bridge::start_bridge(std::make_shared<bridge::Bridge>(cfg, http_transport()), "127.0.0.1", 0);
    auto t = http_transport();
    auto base = server->base_url();

    auto index = t(HttpRequest{"GET", base + "/index.html", {}, {}});
    CHECK(index.status == 200);
    CHECK(index.body == "<html>geobind</html>");
    CHECK(t(HttpRequest{"GET", base + "/", {}, {}}).body == "<html>geobind</html>");

    auto caps = t(HttpRequest{"GET", base + "/api/capabilities?url=" + q(stack->wps_url()), {}, {}});
    CHECK(ok_of(caps)["processCount"] == 3);

    Json body = buffer_body(wfs_reference(stack->wfs_url(), 0, "sendReference"));
    body["url"] = stack->wps_url();
    auto res = t(HttpRequest{"POST", base + "/api/execute", {{"Content-Type", "application/json"}}, body.dump()});
    CHECK(single_polygon(ok_of(res)) == kernel::buffer(road(0), {1.0, 16}));

    server->stop();
    std::filesystem::remove_all(dir);

    CHECK(bridge::split_listen_address("127.0.0.1:8080") == std::pair<std::string, int>{"127.0.0.1", 8080});
    CHECK(bridge::split_listen_address("[::1]:0") == std::pair<std::string, int>{"::1", 0});
    for (const char* bad : {"8080", "host:", ":80", "h:99999", "h:x"}) {
        try {
            bridge::split_listen_address(bad);
            FAIL(bad);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::ConfigError);
        }
    }
}
