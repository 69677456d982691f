#include "geobind/mock_services.hpp"

#include "geobind/geojson.hpp"
#include "geobind/gml.hpp"
#include "geobind/url.hpp"
#include "geobind/wfs_client.hpp"
#include "geobind/xml.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace geobind::mock {

namespace {

HttpResponse xml_ok(std::string body)
{
    return HttpResponse{200, {{"Content-Type", "text/xml; subtype=gml/3.1.1; charset=UTF-8"}}, std::move(body)};
}

HttpResponse report(std::string code, std::optional<std::string> locator, std::string message)
{
    return HttpResponse{400, {{"Content-Type", "text/xml; charset=UTF-8"}},
                        exception_report(ExceptionInfo{std::move(code), std::move(locator), {std::move(message)}})};
}

std::string capabilities_doc(const std::string& layer, const FeatureCollection& data)
{
    xml::Writer w;
    w.declaration();
    w.start("wfs:WFS_Capabilities")
        .attr("xmlns:wfs", xml::kWfsNs)
        .attr("xmlns:ows", "http://www.opengis.net/ows")
        .attr("xmlns:app", gml::kAppNs)
        .attr("version", "1.1.0");
    w.start("ows:ServiceIdentification");
    w.element("ows:Title", "Mock Feature Service");
    w.element("ows:ServiceType", "WFS");
    w.element("ows:ServiceTypeVersion", "1.1.0");
    w.end();
    w.start("wfs:FeatureTypeList");
    w.start("wfs:FeatureType");
    w.element("wfs:Name", layer);
    w.element("wfs:Title", layer);
    w.element("wfs:DefaultSRS", data.srs);
    w.end();
    w.end();
    w.end();
    return w.take();
}

bool has_attribute(const Feature& f, const std::string& name, const std::string& value)
{
    for (const auto& [k, v] : f.attributes)
        if (k == name && v == value)
            return true;
    return false;
}

bool intersects(const BBox& a, const BBox& b)
{
    return a.min_x <= b.max_x && b.min_x <= a.max_x && a.min_y <= b.max_y && b.min_y <= a.max_y;
}

std::string local_part(std::string_view name)
{
    auto colon = name.rfind(':');
    return std::string(colon == std::string_view::npos ? name : name.substr(colon + 1));
}

} // namespace

FeatureCollection load_dataset(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::DatasetLoadError, "cannot read dataset " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return geojson::read_features(buf.str());
    } catch (const Error& e) {
        throw Error(Errc::DatasetLoadError, path + ": " + e.what());
    }
}

WfsService::WfsService(FeatureCollection data, std::string layer) : data_(std::move(data)), layer_(std::move(layer))
{
}

HttpResponse WfsService::handle(const HttpRequest& req) const
{
    if (req.method != "GET")
        return report("OperationNotSupported", "request", "only KVP GET is supported");
    QueryParams params;
    try {
        params = parse_query(Url::parse(req.url).query());
    } catch (const Error& e) {
        return report("InvalidParameterValue", std::nullopt, e.what());
    }
    const auto* request = find_param(params, "request");
    if (!request)
        return report("MissingParameterValue", "request", "request is required");
    if (iequals(*request, "GetCapabilities"))
        return xml_ok(capabilities_doc(layer_, data_));
    if (!iequals(*request, "GetFeature"))
        return report("OperationNotSupported", "request", "request '" + *request + "' is not supported");

    wfs::WfsQuery q;
    try {
        q = wfs::parse_get_feature_url(req.url);
    } catch (const Error& e) {
        return report("InvalidParameterValue", std::nullopt, e.what());
    }
    if (local_part(q.type_name) != layer_)
        return report("InvalidParameterValue", "typeName", "unknown feature type '" + q.type_name + "'");

    FeatureCollection out;
    out.srs = data_.srs;
    for (const auto& f : data_.features) {
        if (q.feature_ids && std::find(q.feature_ids->begin(), q.feature_ids->end(), f.id) == q.feature_ids->end())
            continue;
        bool match = std::all_of(q.attribute_filters.begin(), q.attribute_filters.end(),
                                 [&](const auto& clause) { return has_attribute(f, clause.first, clause.second); });
        if (!match)
            continue;
        if (q.bbox && !intersects(compute_bbox(f.geometry), *q.bbox))
            continue;
        out.features.push_back(f);
    }
    if (q.max_features && out.features.size() > *q.max_features)
        out.features.resize(*q.max_features);
    return xml_ok(gml::serialize_feature_collection(out, layer_));
}

} // namespace geobind::mock
