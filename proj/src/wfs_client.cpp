#include "geobind/wfs_client.hpp"

#include "geobind/error.hpp"
#include "geobind/gml.hpp"
#include "geobind/url.hpp"
#include "geobind/wps_codec.hpp"
#include "geobind/xml.hpp"
#include "wps_wire.hpp"

#include <charconv>

namespace geobind::wfs {

using xml::kOgcNs;
using xml::kWfsNs;

namespace {

bool ok(int status) { return status >= 200 && status < 300; }

// Raw (still percent-encoded) value of a KVP parameter.
std::optional<std::string_view> raw_param(std::string_view query, std::string_view name)
{
    while (!query.empty()) {
        auto amp = query.find('&');
        auto pair = query.substr(0, amp);
        query = amp == std::string_view::npos ? std::string_view{} : query.substr(amp + 1);
        auto eq = pair.find('=');
        auto key = percent_decode(pair.substr(0, eq));
        if (iequals(key, name))
            return eq == std::string_view::npos ? std::string_view{} : pair.substr(eq + 1);
    }
    return std::nullopt;
}

double parse_double(std::string_view s)
{
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw Error(Errc::InvalidQuery, "bad number '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    while (true) {
        auto pos = s.find(sep);
        out.push_back(s.substr(0, pos));
        if (pos == std::string_view::npos)
            break;
        s.remove_prefix(pos + 1);
    }
    return out;
}

HttpResponse get(const Transport& transport, std::string url)
{
    HttpRequest req;
    req.url = std::move(url);
    auto res = transport(req);
    bool report = false;
    try {
        report = wps::detail::is_exception_report(xml::parse(res.body).root);
    } catch (const Error&) {
    }
    if (report)
        throw ServiceReportedException(wps::decode_exception_report(res.body));
    if (!ok(res.status))
        throw TransportError(res.status, "HTTP " + std::to_string(res.status) + " from " + req.url);
    return res;
}

std::string local_name(std::string_view type_name)
{
    auto colon = type_name.rfind(':');
    return std::string(colon == std::string_view::npos ? type_name : type_name.substr(colon + 1));
}

} // namespace

void check(const WfsQuery& q)
{
    if (q.type_name.empty())
        throw Error(Errc::InvalidQuery, "typeName is empty");
    if (q.feature_ids && q.feature_ids->empty())
        throw Error(Errc::InvalidQuery, "featureId list is empty");
    if (q.max_features && *q.max_features == 0)
        throw Error(Errc::InvalidQuery, "maxFeatures must be positive");
    int families = (q.feature_ids ? 1 : 0) + (q.attribute_filters.empty() ? 0 : 1) + (q.bbox ? 1 : 0);
    if (families > 1)
        throw Error(Errc::ConflictingFilters, "featureId, attribute filters and bbox are mutually exclusive");
}

std::string equality_filter(const std::vector<std::pair<std::string, std::string>>& clauses)
{
    xml::Writer w;
    w.start("ogc:Filter").attr("xmlns:ogc", kOgcNs);
    if (clauses.size() > 1)
        w.start("ogc:And");
    for (const auto& [prop, value] : clauses) {
        w.start("ogc:PropertyIsEqualTo");
        w.element("ogc:PropertyName", prop);
        w.element("ogc:Literal", value);
        w.end();
    }
    if (clauses.size() > 1)
        w.end();
    w.end();
    return w.take();
}

std::vector<std::pair<std::string, std::string>> parse_equality_filter(std::string_view filter_xml)
{
    auto doc = [&] {
        try {
            return xml::parse(filter_xml);
        } catch (const Error& e) {
            throw Error(Errc::InvalidQuery, std::string("filter: ") + e.what());
        }
    }();
    if (!doc.root.is(kOgcNs, "Filter"))
        throw Error(Errc::InvalidQuery, "filter root must be ogc:Filter");
    const xml::Element* scope = &doc.root;
    if (const auto* conj = doc.root.child(kOgcNs, "And"))
        scope = conj;
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& c : scope->children) {
        if (!c.is(kOgcNs, "PropertyIsEqualTo"))
            throw Error(Errc::InvalidQuery, "unsupported filter operator '" + c.local + "'");
        const auto* name = c.child(kOgcNs, "PropertyName");
        const auto* lit = c.child(kOgcNs, "Literal");
        if (!name || !lit)
            throw Error(Errc::InvalidQuery, "PropertyIsEqualTo needs PropertyName and Literal");
        out.emplace_back(name->trimmed_text(), lit->text);
    }
    if (out.empty())
        throw Error(Errc::InvalidQuery, "empty filter");
    return out;
}

std::string build_get_feature_url(const WfsQuery& q)
{
    check(q);
    auto base = Url::parse(q.service_url);
    std::string kvp = "service=WFS&version=1.1.0&request=GetFeature&typeName=" + percent_encode(q.type_name, ":");
    if (q.max_features)
        kvp += "&maxFeatures=" + std::to_string(*q.max_features);
    if (q.feature_ids) {
        kvp += "&featureId=";
        for (std::size_t i = 0; i < q.feature_ids->size(); ++i) {
            if (i)
                kvp += ',';
            kvp += percent_encode((*q.feature_ids)[i]);
        }
    }
    if (!q.attribute_filters.empty())
        kvp += "&filter=" + percent_encode(equality_filter(q.attribute_filters));
    if (q.bbox) {
        const auto& b = *q.bbox;
        kvp += "&bbox=" + gml::format_number(b.min_x) + "," + gml::format_number(b.min_y) + ","
             + gml::format_number(b.max_x) + "," + gml::format_number(b.max_y);
    }
    return append_query(base.text(), kvp);
}

WfsQuery parse_get_feature_url(std::string_view text)
{
    auto url = [&] {
        try {
            return Url::parse(text);
        } catch (const Error& e) {
            throw Error(Errc::InvalidQuery, e.what());
        }
    }();
    const auto& query = url.query();
    auto param = [&](std::string_view name) -> std::optional<std::string> {
        auto raw = raw_param(query, name);
        if (!raw)
            return std::nullopt;
        return percent_decode(*raw);
    };

    WfsQuery q;
    q.service_url = url.origin() + url.path();
    q.type_name = param("typeName").value_or("");
    if (q.type_name.empty())
        q.type_name = param("typeNames").value_or("");
    if (auto max = param("maxFeatures")) {
        unsigned n = 0;
        auto [p, ec] = std::from_chars(max->data(), max->data() + max->size(), n);
        if (ec != std::errc{} || p != max->data() + max->size())
            throw Error(Errc::InvalidQuery, "bad maxFeatures '" + *max + "'");
        q.max_features = n;
    }
    if (auto raw = raw_param(query, "featureId")) {
        q.feature_ids.emplace();
        for (auto id : split(*raw, ','))
            q.feature_ids->push_back(percent_decode(id));
    }
    if (auto filter = param("filter"))
        q.attribute_filters = parse_equality_filter(*filter);
    if (auto bbox = param("bbox")) {
        auto parts = split(*bbox, ',');
        if (parts.size() != 4 && parts.size() != 5)
            throw Error(Errc::InvalidQuery, "bbox needs four numbers");
        BBox b;
        b.min_x = parse_double(parts[0]);
        b.min_y = parse_double(parts[1]);
        b.max_x = parse_double(parts[2]);
        b.max_y = parse_double(parts[3]);
        if (parts.size() == 5)
            b.srs = std::string(parts[4]);
        q.bbox = b;
    }
    check(q);
    return q;
}

std::string get_capabilities_url(std::string_view service_url)
{
    return append_query(Url::parse(service_url).text(), "service=WFS&version=1.1.0&request=GetCapabilities");
}

std::vector<LayerInfo> list_layers(std::string_view capabilities_doc)
{
    auto doc = xml::parse(capabilities_doc);
    if (!doc.root.is(kWfsNs, "WFS_Capabilities"))
        throw Error(Errc::NotAWfsCapabilities, "root element is '" + doc.root.local + "'");
    std::vector<LayerInfo> out;
    if (const auto* list = doc.root.child(kWfsNs, "FeatureTypeList")) {
        for (const auto* ft : list->children_named(kWfsNs, "FeatureType")) {
            LayerInfo layer;
            layer.name = ft->child_text(kWfsNs, "Name");
            layer.title = ft->child_text(kWfsNs, "Title");
            layer.default_srs = ft->child_text(kWfsNs, "DefaultSRS");
            if (!layer.name.empty())
                out.push_back(std::move(layer));
        }
    }
    return out;
}

std::vector<LayerInfo> fetch_layers(const Transport& transport, std::string_view service_url)
{
    return list_layers(get(transport, get_capabilities_url(service_url)).body);
}

FeatureCollection fetch_features(const WfsQuery& q, const Transport& transport)
{
    return gml::parse_feature_collection(get(transport, build_get_feature_url(q)).body);
}

wps::DataEnvelope as_reference(const WfsQuery& q)
{
    wps::Reference ref;
    ref.href = build_get_feature_url(q);
    ref.method = wps::HttpMethod::Get;
    ref.mime_type = "text/xml";
    return ref;
}

wps::DataEnvelope resolve_reference(const WfsQuery& q, const Transport& transport, bool geometry_only)
{
    auto fc = fetch_features(q, transport);
    wps::InlineComplex out;
    out.mime_type = "text/xml";
    if (geometry_only) {
        if (fc.features.size() != 1)
            throw Error(Errc::AmbiguousGeometry, "query matched " + std::to_string(fc.features.size())
                                                     + " features; geometry extraction needs exactly one");
        out.payload = gml::serialize_geometry(fc.features.front().geometry);
    } else {
        out.payload = gml::serialize_feature_collection(fc, local_name(q.type_name));
    }
    return out;
}

} // namespace geobind::wfs
