#include "geobind/bridge.hpp"

#include "geobind/error.hpp"
#include "geobind/gml.hpp"
#include "geobind/url.hpp"
#include "geobind/wfs_client.hpp"
#include "geobind/wps_client.hpp"
#include "geobind/xml.hpp"

#include <charconv>

namespace geobind::bridge {

namespace {

constexpr std::size_t kCacheLimit = 256;

// Failure already shaped for the wire.
struct ApiError {
    int status;
    std::string code;
    std::string message;
    std::optional<ExceptionInfo> remote;
    std::vector<wps::Violation> violations;
};

Json remote_json(const ExceptionInfo& info)
{
    Json j{{"code", info.code}};
    if (info.locator)
        j["locator"] = *info.locator;
    j["messages"] = info.messages;
    return j;
}

HttpResponse json_response(int status, const Json& body)
{
    return HttpResponse{status, {{"Content-Type", "application/json"}}, body.dump()};
}

HttpResponse ok(Json value) { return json_response(200, Json{{"ok", std::move(value)}}); }

HttpResponse error_response(const ApiError& e)
{
    Json err{{"code", e.code}, {"message", e.message}};
    if (e.remote)
        err["remote"] = remote_json(*e.remote);
    if (!e.violations.empty()) {
        Json list = Json::array();
        for (const auto& v : e.violations)
            list.push_back({{"input", v.input_id}, {"violation", wps::to_string(v.kind)}});
        err["violations"] = std::move(list);
    }
    return json_response(e.status, Json{{"error", std::move(err)}});
}

[[noreturn]] void fail(int status, std::string code, std::string message)
{
    throw ApiError{status, std::move(code), std::move(message), std::nullopt, {}};
}

// Library errors to HTTP.
ApiError translate(const Error& e)
{
    std::string msg = e.what();
    if (const auto* t = dynamic_cast<const TransportError*>(&e))
        return t->status() == 0 ? ApiError{502, "UpstreamUnreachable", msg, std::nullopt, {}}
                                : ApiError{502, "UpstreamError", msg, std::nullopt, {}};
    if (const auto* r = dynamic_cast<const ServiceReportedException*>(&e))
        return ApiError{502, "RemoteException", msg, r->info(), {}};
    if (const auto* v = dynamic_cast<const wps::BindingViolations*>(&e))
        return ApiError{422, "BindingViolations", msg, std::nullopt, v->violations()};

    auto name = std::string(errc_name(e.code()));
    switch (e.code()) {
    case Errc::MalformedUrl:
    case Errc::InvalidQuery:
    case Errc::ConflictingFilters:
    case Errc::EmptyIdentifier:
        return {400, name, msg, std::nullopt, {}};
    case Errc::UnsupportedVersion:
    case Errc::AmbiguousGeometry:
    case Errc::UnknownInput:
    case Errc::UnknownOutput:
    case Errc::LiteralParseError:
    case Errc::GeoJsonSyntax:
    case Errc::UnsupportedGeometry:
    case Errc::InvalidGeometry:
    case Errc::MalformedCoordinates:
    case Errc::InvalidParameter:
    case Errc::KindMismatch:
    case Errc::OccurrenceExceeded:
        return {422, name, msg, std::nullopt, {}};
    case Errc::XmlSyntax:
    case Errc::NotACapabilitiesDocument:
    case Errc::NotADescriptionDocument:
    case Errc::NotAWfsCapabilities:
    case Errc::UnknownParameterKind:
    case Errc::NoGeometryProperty:
    case Errc::MixedSrs:
        return {502, "InvalidUpstreamResponse", msg, std::nullopt, {}};
    default:
        return {500, name, msg, std::nullopt, {}};
    }
}

std::string required_param(const QueryParams& params, std::string_view name, std::string_view code)
{
    const auto* v = find_param(params, name);
    if (!v || v->empty())
        fail(400, std::string(code), "query parameter '" + std::string(name) + "' is required");
    return *v;
}

Json parse_body(const HttpRequest& req)
{
    try {
        auto j = Json::parse(req.body);
        if (!j.is_object())
            fail(400, "MalformedBody", "request body must be a JSON object");
        return j;
    } catch (const Json::exception& e) {
        fail(400, "MalformedBody", std::string("invalid JSON: ") + e.what());
    }
}

std::string body_string(const Json& body, const char* key)
{
    if (!body.contains(key) || !body[key].is_string() || body[key].get<std::string>().empty())
        fail(400, "MalformedBody", std::string("'") + key + "' must be a non-empty string");
    return body[key].get<std::string>();
}

std::string literal_text(const Json& v)
{
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_boolean())
        return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer())
        return v.dump();
    if (v.is_number())
        return gml::format_number(v.get<double>());
    fail(400, "MalformedBody", "literal must be a string, number or boolean");
}

Json format_json(const wps::Format& f)
{
    Json j{{"mimeType", f.mime_type}};
    if (f.encoding)
        j["encoding"] = *f.encoding;
    if (f.schema)
        j["schema"] = *f.schema;
    return j;
}

template <class D>
void describe_kind(Json& j, const D& d)
{
    j["kind"] = wps::to_string(d.kind);
    if (d.literal_datatype)
        j["datatype"] = wps::to_string(*d.literal_datatype);
    if (!d.formats.empty()) {
        Json formats = Json::array();
        for (const auto& f : d.formats)
            formats.push_back(format_json(f));
        j["formats"] = std::move(formats);
    }
}

wfs::WfsQuery query_from_json(const Json& body)
{
    wfs::WfsQuery q;
    q.service_url = body_string(body, "url");
    q.type_name = body_string(body, "typeName");
    try {
        if (body.contains("maxFeatures") && !body["maxFeatures"].is_null())
            q.max_features = body["maxFeatures"].get<unsigned>();
        if (body.contains("featureIds") && !body["featureIds"].is_null())
            q.feature_ids = body["featureIds"].get<std::vector<std::string>>();
        if (body.contains("attributeFilters") && !body["attributeFilters"].is_null())
            for (const auto& f : body["attributeFilters"])
                q.attribute_filters.emplace_back(f.at("property").get<std::string>(), literal_text(f.at("value")));
        if (body.contains("bbox") && !body["bbox"].is_null()) {
            auto v = body["bbox"].get<std::vector<double>>();
            if (v.size() != 4)
                fail(400, "MalformedBody", "bbox needs four numbers");
            q.bbox = BBox{v[0], v[1], v[2], v[3], std::string(kDefaultSrs)};
        }
    } catch (const Json::exception& e) {
        fail(400, "MalformedBody", e.what());
    }
    return q;
}

Json output_json(const std::string& id, const wps::DataEnvelope& value, bool raw)
{
    Json j{{"id", id}};
    if (const auto* lit = std::get_if<wps::InlineLiteral>(&value)) {
        j["literal"] = lit->value;
    } else if (const auto* bb = std::get_if<wps::InlineBBox>(&value)) {
        j["bbox"] = {bb->bbox.min_x, bb->bbox.min_y, bb->bbox.max_x, bb->bbox.max_y};
        j["crs"] = bb->bbox.srs;
    } else if (const auto* ref = std::get_if<wps::Reference>(&value)) {
        j["href"] = ref->href;
    } else if (const auto* cx = std::get_if<wps::InlineComplex>(&value)) {
        if (!raw) {
            try {
                auto doc = xml::parse(cx->payload);
                if (gml::is_geometry_element(doc.root)) {
                    j["geojson"] = geojson::geometry_to_json(gml::parse_geometry(doc.root));
                    return j;
                }
                if (doc.root.local == "FeatureCollection") {
                    j["geojson"] = geojson::feature_collection_to_json(gml::parse_feature_collection(doc.root));
                    return j;
                }
            } catch (const Error&) {
            }
        }
        j["rawBase64"] = base64_encode(cx->payload);
        j["mime"] = cx->mime_type;
    }
    return j;
}

Geometry geometry_from_input(const Json& g)
{
    if (!g.is_object())
        fail(400, "MalformedBody", "geometryGeoJson must be an object");
    auto type = g.value("type", "");
    if (type == "Feature" || type == "FeatureCollection") {
        auto fc = geojson::feature_collection_from_json(g);
        if (fc.features.size() != 1)
            throw Error(Errc::AmbiguousGeometry, "geometryGeoJson holds " + std::to_string(fc.features.size())
                                                     + " features; expected one");
        return fc.features.front().geometry;
    }
    return geojson::geometry_from_json(g);
}

} // namespace

Json description_to_json(const wps::ProcessDescription& d)
{
    Json j{{"id", d.brief.identifier}, {"title", d.brief.title}};
    if (d.brief.abstract)
        j["abstract"] = *d.brief.abstract;
    Json inputs = Json::array();
    for (const auto& in : d.inputs) {
        Json i{{"id", in.identifier}, {"title", in.title}};
        describe_kind(i, in);
        i["minOccurs"] = in.min_occurs;
        i["maxOccurs"] = in.max_occurs;
        if (in.default_value)
            i["default"] = *in.default_value;
        inputs.push_back(std::move(i));
    }
    j["inputs"] = std::move(inputs);
    Json outputs = Json::array();
    for (const auto& out : d.outputs) {
        Json o{{"id", out.identifier}, {"title", out.title}};
        describe_kind(o, out);
        outputs.push_back(std::move(o));
    }
    j["outputs"] = std::move(outputs);
    return j;
}

std::string process_body(const wps::ProcessDescription& d)
{
    return Json{{"ok", description_to_json(d)}}.dump();
}

Bridge::Bridge(Config config, Transport upstream) : config_(std::move(config)), upstream_(std::move(upstream)) {}

void Bridge::require_allowed(const std::string& url) const
{
    bool allowed = false;
    try {
        allowed = config_.upstream_allowed(url);
    } catch (const Error& e) {
        fail(400, "MalformedUrl", e.what());
    }
    if (!allowed)
        fail(403, "UpstreamNotAllowed", "upstream '" + url + "' is not in allowed_upstreams");
}

wps::ProcessDescription Bridge::describe(const std::string& url, const std::string& id) const
{
    auto key = std::make_pair(url, id);
    auto ttl = std::chrono::seconds(config_.describe_cache_seconds);
    auto now = std::chrono::steady_clock::now();
    if (ttl.count() > 0) {
        std::lock_guard lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end() && now - it->second.stored < ttl)
            return it->second.description;
    }
    wps::ProcessDescription d;
    try {
        d = wps::fetch_description(upstream_, url, id);
    } catch (const ServiceReportedException& e) {
        const auto& loc = e.info().locator;
        if (loc && iequals(*loc, "identifier"))
            throw ApiError{404, "UnknownProcess", "process '" + id + "' is not offered by " + url, e.info(), {}};
        throw;
    }
    if (ttl.count() > 0) {
        std::lock_guard lock(cache_mutex_);
        if (cache_.size() >= kCacheLimit) {
            auto oldest = cache_.begin();
            for (auto it = cache_.begin(); it != cache_.end(); ++it)
                if (it->second.stored < oldest->second.stored)
                    oldest = it;
            cache_.erase(oldest);
        }
        cache_[key] = CacheEntry{now, d};
    }
    return d;
}

HttpResponse Bridge::handle(const HttpRequest& req) const
{
    try {
        Url url = Url::parse(req.url);
        const auto& path = url.path();
        auto only = [&](const char* method) {
            if (req.method != method)
                fail(405, "MethodNotAllowed", std::string(path) + " expects " + method);
        };
        if (path == "/api/capabilities") {
            only("GET");
            return capabilities(req);
        }
        if (path == "/api/process") {
            only("GET");
            return process(req);
        }
        if (path == "/api/execute") {
            only("POST");
            return execute(req);
        }
        if (path == "/api/wfs/layers") {
            only("GET");
            return wfs_layers(req);
        }
        if (path == "/api/wfs/features") {
            only("POST");
            return wfs_features(req);
        }
        if (path == "/api/endpoints") {
            only("GET");
            return endpoints();
        }
        fail(404, "NotFound", "no route for " + path);
    } catch (const ApiError& e) {
        return error_response(e);
    } catch (const Error& e) {
        return error_response(translate(e));
    } catch (const std::exception& e) {
        return error_response(ApiError{500, "InternalError", e.what(), std::nullopt, {}});
    }
}

HttpResponse Bridge::capabilities(const HttpRequest& req) const
{
    auto params = parse_query(Url::parse(req.url).query());
    auto url = required_param(params, "url", "MissingUrl");
    require_allowed(url);
    auto caps = wps::fetch_capabilities(upstream_, url);
    Json processes = Json::array();
    for (const auto& p : caps.processes) {
        Json j{{"id", p.identifier}, {"title", p.title}};
        if (p.abstract)
            j["abstract"] = *p.abstract;
        processes.push_back(std::move(j));
    }
    Json body{{"title", caps.metadata.title},
              {"abstract", caps.metadata.abstract},
              {"version", caps.metadata.version},
              {"operations", caps.metadata.operations},
              {"processCount", caps.processes.size()},
              {"processes", std::move(processes)}};
    return ok(std::move(body));
}

HttpResponse Bridge::process(const HttpRequest& req) const
{
    auto params = parse_query(Url::parse(req.url).query());
    auto url = required_param(params, "url", "MissingUrl");
    auto id = required_param(params, "id", "MissingId");
    require_allowed(url);
    return HttpResponse{200, {{"Content-Type", "application/json"}}, process_body(describe(url, id))};
}

HttpResponse Bridge::execute(const HttpRequest& req) const
{
    auto body = parse_body(req);
    auto url = body_string(body, "url");
    auto process_id = body_string(body, "process");
    std::optional<std::string> raw;
    if (body.contains("raw") && !body["raw"].is_null()) {
        if (!body["raw"].is_string())
            fail(400, "MalformedBody", "'raw' must name an output");
        raw = body["raw"].get<std::string>();
    }
    const Json inputs = body.value("inputs", Json::array());
    if (!inputs.is_array())
        fail(400, "MalformedBody", "'inputs' must be an array");
    require_allowed(url);

    auto description = describe(url, process_id);
    // The bridge keeps no sessions: each call replays the binding stages.
    auto session = wps::begin_session(url);
    session = wps::load_capabilities(session, wps::ServiceMetadata{{}, {}, std::string(wps::kVersion), {}},
                                     {description.brief});
    session = wps::select_process(session, description);

    for (const auto& in : inputs) {
        if (!in.is_object() || !in.contains("id") || !in["id"].is_string())
            fail(400, "MalformedBody", "each input needs a string 'id'");
        auto id = in["id"].get<std::string>();
        const auto* d = description.input(id);
        if (in.contains("literal")) {
            auto type = d && d->literal_datatype ? *d->literal_datatype : wps::LiteralType::String;
            session = wps::bind_input(session, id, wps::InlineLiteral{literal_text(in["literal"]), type});
        } else if (in.contains("geometryGeoJson")) {
            auto g = geometry_from_input(in["geometryGeoJson"]);
            wps::InlineComplex cx;
            cx.payload = gml::serialize_geometry(g);
            cx.mime_type = "text/xml";
            if (d && !d->formats.empty()) {
                cx.mime_type = d->formats.front().mime_type;
                cx.encoding = d->formats.front().encoding;
                cx.schema = d->formats.front().schema;
            }
            session = wps::bind_input(session, id, cx);
        } else if (in.contains("bbox")) {
            std::vector<double> v;
            try {
                v = in["bbox"].get<std::vector<double>>();
            } catch (const Json::exception&) {
            }
            if (v.size() != 4)
                fail(400, "MalformedBody", "bbox needs four numbers");
            BBox box{v[0], v[1], v[2], v[3], in.value("crs", std::string(kDefaultSrs))};
            session = wps::bind_input(session, id, wps::InlineBBox{box});
        } else if (in.contains("reference")) {
            const auto& r = in["reference"];
            if (!r.is_object() || !r.contains("href") || !r["href"].is_string())
                fail(400, "MalformedBody", "reference needs an 'href'");
            wps::Reference ref;
            ref.href = r["href"].get<std::string>();
            if (r.value("method", "GET") == "POST") {
                ref.method = wps::HttpMethod::Post;
                ref.body = r.value("body", "");
            }
            if (r.contains("mimeType"))
                ref.mime_type = r["mimeType"].get<std::string>();
            auto mode = r.value("fetchMode", "sendReference");
            if (mode != "sendReference" && mode != "fetchClientSide")
                fail(400, "MalformedBody", "fetchMode must be sendReference or fetchClientSide");
            session = wps::bind_input(session, id, ref);
            if (mode == "fetchClientSide") {
                session = wps::set_fetch_mode(session, id, wps::FetchMode::FetchClientSide);
                require_allowed(ref.href);
                wps::DataEnvelope resolved;
                auto href = Url::parse(ref.href);
                auto href_params = parse_query(href.query());
                const auto* request = find_param(href_params, "request");
                if (ref.method == wps::HttpMethod::Get && request && iequals(*request, "GetFeature")) {
                    resolved = wfs::resolve_reference(wfs::parse_get_feature_url(ref.href), upstream_,
                                                      r.value("geometryOnly", true));
                } else {
                    HttpRequest fetch;
                    fetch.url = ref.href;
                    if (ref.method == wps::HttpMethod::Post) {
                        fetch.method = "POST";
                        fetch.body = *ref.body;
                    }
                    auto res = upstream_(fetch);
                    if (res.status < 200 || res.status >= 300)
                        throw TransportError(res.status, "reference answered HTTP " + std::to_string(res.status));
                    resolved = wps::InlineComplex{res.body, ref.mime_type.value_or(res.content_type()), std::nullopt,
                                                  std::nullopt};
                }
                session = wps::resolve_input(session, id, {resolved});
            } else {
                session = wps::set_fetch_mode(session, id, wps::FetchMode::SendReference);
            }
        } else {
            fail(400, "MalformedBody", "input '" + id + "' needs literal, geometryGeoJson, bbox or reference");
        }
    }

    auto request = wps::build_execute(session, raw);
    auto result = wps::send_execute(upstream_, url, request);
    session = wps::accept_result(session, result);
    if (result.status == wps::ExecuteResult::Status::Failed)
        throw ApiError{502, "RemoteException", "process failed", result.failure, {}};

    Json outputs = Json::array();
    for (const auto& [id, value] : result.outputs)
        outputs.push_back(output_json(id, value, request.raw));
    return ok(Json{{"status", "succeeded"}, {"outputs", std::move(outputs)}});
}

HttpResponse Bridge::wfs_layers(const HttpRequest& req) const
{
    auto params = parse_query(Url::parse(req.url).query());
    auto url = required_param(params, "url", "MissingUrl");
    require_allowed(url);
    Json list = Json::array();
    for (const auto& l : wfs::fetch_layers(upstream_, url))
        list.push_back({{"name", l.name}, {"title", l.title}, {"defaultSrs", l.default_srs}});
    return ok(std::move(list));
}

HttpResponse Bridge::wfs_features(const HttpRequest& req) const
{
    auto q = query_from_json(parse_body(req));
    require_allowed(q.service_url);
    return ok(geojson::feature_collection_to_json(wfs::fetch_features(q, upstream_)));
}

HttpResponse Bridge::endpoints() const
{
    Json list = Json::array();
    for (const auto& e : config_.default_endpoints)
        list.push_back({{"name", e.name}, {"url", e.url}});
    return ok(std::move(list));
}

std::pair<std::string, int> split_listen_address(const std::string& address)
{
    auto colon = address.rfind(':');
    if (colon == std::string::npos)
        throw Error(Errc::ConfigError, "listen_address must be host:port, got '" + address + "'");
    auto host = address.substr(0, colon);
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']')
        host = host.substr(1, host.size() - 2);
    int port = -1;
    auto p = address.substr(colon + 1);
    auto [end, ec] = std::from_chars(p.data(), p.data() + p.size(), port);
    if (ec != std::errc{} || end != p.data() + p.size() || port < 0 || port > 65535 || host.empty())
        throw Error(Errc::ConfigError, "listen_address must be host:port, got '" + address + "'");
    return {host, port};
}

std::unique_ptr<HttpServer> start_bridge(std::shared_ptr<const Bridge> bridge, const std::string& host, int port)
{
    auto server = std::make_unique<HttpServer>([bridge](const HttpRequest& r) { return bridge->handle(r); }, host, port);
    if (bridge->config().static_dir)
        server->mount_static("/", *bridge->config().static_dir);
    server->start();
    return server;
}

} // namespace geobind::bridge
