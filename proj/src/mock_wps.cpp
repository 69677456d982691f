#include "geobind/mock_services.hpp"

#include "geobind/fixtures.hpp"
#include "geobind/geojson.hpp"
#include "geobind/gml.hpp"
#include "geobind/kernel.hpp"
#include "geobind/url.hpp"
#include "geobind/wps_codec.hpp"
#include "geobind/xml.hpp"
#include "wps_wire.hpp"

#include <charconv>
#include <map>
#include <thread>

namespace geobind::mock {

using xml::kOwsNs;
using xml::kWpsNs;

namespace {

constexpr std::string_view kXmlType = "text/xml; charset=UTF-8";

[[noreturn]] void fault(std::string code, std::optional<std::string> locator, std::string message)
{
    throw ServiceReportedException(ExceptionInfo{std::move(code), std::move(locator), {std::move(message)}});
}

int status_for(const ExceptionInfo& info)
{
    return info.code == "NoApplicableCode" ? 500 : 400;
}

HttpResponse xml_response(int status, std::string body)
{
    return HttpResponse{status, {{"Content-Type", std::string(kXmlType)}}, std::move(body)};
}

HttpResponse report_response(const ExceptionInfo& info)
{
    return xml_response(status_for(info), exception_report(info));
}

const std::map<std::string, wps::ProcessDescription, std::less<>>& descriptions()
{
    static const auto table = [] {
        std::map<std::string, wps::ProcessDescription, std::less<>> m;
        for (const auto& id : fixtures::process_ids())
            m.emplace(id, wps::decode_process_description(fixtures::describe(id)));
        return m;
    }();
    return table;
}

const std::string& describe_or_fault(std::string_view id)
{
    if (id.empty())
        fault("MissingParameterValue", "identifier", "identifier is required");
    if (!descriptions().count(id))
        fault("InvalidParameterValue", "identifier", "no process named '" + std::string(id) + "'");
    return fixtures::describe(id);
}

bool is_collection(const xml::Element& root)
{
    return root.local == "FeatureCollection";
}

Geometry geometry_from_payload(const wps::InlineComplex& cx, const std::string& input_id)
{
    try {
        if (cx.mime_type.find("json") != std::string::npos) {
            auto fc = geojson::read_features(cx.payload);
            if (fc.features.size() != 1)
                fault("InvalidParameterValue", input_id, "expected exactly one feature");
            return fc.features.front().geometry;
        }
        auto doc = xml::parse(cx.payload);
        if (is_collection(doc.root)) {
            auto fc = gml::parse_feature_collection(doc.root);
            if (fc.features.size() != 1)
                fault("InvalidParameterValue", input_id,
                      "expected exactly one feature, got " + std::to_string(fc.features.size()));
            return fc.features.front().geometry;
        }
        return gml::parse_geometry(doc.root);
    } catch (const ServiceReportedException&) {
        throw;
    } catch (const Error& e) {
        fault("InvalidParameterValue", input_id, e.what());
    }
}

class Execution {
public:
    Execution(const Transport& fetch, bool remote_references) : fetch_(fetch), remote_references_(remote_references) {}

    wps::DataEnvelope dereference(const std::string& input_id, const wps::Reference& ref) const
    {
        Url url = [&] {
            try {
                return Url::parse(ref.href);
            } catch (const Error& e) {
                fault("InvalidParameterValue", input_id, e.what());
            }
        }();
        if (!remote_references_ && !url.is_loopback())
            fault("InvalidParameterValue", input_id, "references are only fetched from loopback addresses");
        HttpRequest req;
        req.url = ref.href;
        if (ref.method == wps::HttpMethod::Post) {
            req.method = "POST";
            req.body = ref.body.value_or("");
            req.headers = {{"Content-Type", ref.mime_type.value_or("text/xml")}};
        }
        HttpResponse res;
        try {
            res = fetch_(req);
        } catch (const Error& e) {
            fault("InvalidParameterValue", input_id, std::string("cannot fetch reference: ") + e.what());
        }
        if (res.status < 200 || res.status >= 300)
            fault("InvalidParameterValue", input_id, "reference answered HTTP " + std::to_string(res.status));
        auto type = ref.mime_type.value_or(res.content_type());
        return wps::InlineComplex{std::move(res.body), type.empty() ? "text/xml" : type, std::nullopt, std::nullopt};
    }

    Geometry geometry(const std::vector<std::pair<std::string, wps::DataEnvelope>>& inputs) const
    {
        const auto* env = single(inputs, "geometry");
        if (const auto* ref = std::get_if<wps::Reference>(env))
            return geometry_from_payload(std::get<wps::InlineComplex>(dereference("geometry", *ref)), "geometry");
        if (const auto* cx = std::get_if<wps::InlineComplex>(env))
            return geometry_from_payload(*cx, "geometry");
        fault("InvalidParameterValue", "geometry", "geometry must be complex data");
    }

    double number(const std::vector<std::pair<std::string, wps::DataEnvelope>>& inputs, const std::string& id) const
    {
        const auto* env = single(inputs, id);
        std::string text;
        if (const auto* lit = std::get_if<wps::InlineLiteral>(env))
            text = lit->value;
        else if (const auto* ref = std::get_if<wps::Reference>(env))
            text = std::get<wps::InlineComplex>(dereference(id, *ref)).payload;
        else if (const auto* cx = std::get_if<wps::InlineComplex>(env))
            text = cx->payload;
        else
            fault("InvalidParameterValue", id, id + " must be a literal");
        auto first = text.find_first_not_of(" \t\r\n");
        auto last = text.find_last_not_of(" \t\r\n");
        std::string_view s = first == std::string::npos ? std::string_view{}
                                                        : std::string_view(text).substr(first, last - first + 1);
        if (!s.empty() && s.front() == '+')
            s.remove_prefix(1);
        double v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc{} || p != s.data() + s.size())
            fault("InvalidParameterValue", id, "'" + text + "' is not a number");
        return v;
    }

private:
    static const wps::DataEnvelope* single(const std::vector<std::pair<std::string, wps::DataEnvelope>>& inputs,
                                           const std::string& id)
    {
        const wps::DataEnvelope* found = nullptr;
        for (const auto& [k, v] : inputs) {
            if (k != id)
                continue;
            if (found)
                fault("InvalidParameterValue", id, id + " may occur once");
            found = &v;
        }
        if (!found)
            fault("MissingParameterValue", id, id + " is required");
        return found;
    }

    const Transport& fetch_;
    bool remote_references_;
};

struct OutputValue {
    std::string id;
    wps::DataEnvelope value;
};

std::string gml_schema() { return "http://schemas.opengis.net/gml/3.1.1/base/geometryAll.xsd"; }

wps::InlineComplex gml_output(const Geometry& g)
{
    return wps::InlineComplex{gml::serialize_geometry(g), "text/xml", "UTF-8", gml_schema()};
}

std::vector<OutputValue> run(const wps::ExecuteRequest& req, const Execution& ex)
{
    const auto& desc = descriptions().at(req.process_id);
    for (const auto& [id, env] : req.inputs)
        if (!desc.input(id))
            fault("InvalidParameterValue", id, "process " + req.process_id + " has no input '" + id + "'");

    Geometry g = ex.geometry(req.inputs);
    if (req.process_id == "Buffer") {
        double d = ex.number(req.inputs, "distance");
        if (!(d > 0))
            fault("InvalidParameterValue", "distance", "distance must be positive");
        return {{"result", gml_output(kernel::buffer(g, {d, 16}))}};
    }
    if (req.process_id == "Centroid") {
        auto c = kernel::centroid_position(g);
        Geometry point{Point{c}, g.srs};
        return {{"result", gml_output(point)},
                {"coordinates",
                 wps::InlineLiteral{gml::format_number(c.x) + " " + gml::format_number(c.y), wps::LiteralType::String}}};
    }
    Geometry env = kernel::envelope(g);
    BBox box = compute_bbox(g);
    box.srs = g.srs;
    return {{"result", gml_output(env)}, {"bbox", wps::InlineBBox{box}}};
}

void write_value(xml::Writer& w, const wps::DataEnvelope& value)
{
    w.start("wps:Data");
    if (const auto* lit = std::get_if<wps::InlineLiteral>(&value)) {
        w.start("wps:LiteralData").attr("dataType", wps::to_string(lit->datatype)).text(lit->value).end();
    } else if (const auto* cx = std::get_if<wps::InlineComplex>(&value)) {
        w.start("wps:ComplexData").attr("mimeType", cx->mime_type);
        if (cx->encoding)
            w.attr("encoding", *cx->encoding);
        if (cx->schema)
            w.attr("schema", *cx->schema);
        w.raw(cx->payload).end();
    } else if (const auto* bb = std::get_if<wps::InlineBBox>(&value)) {
        w.start("wps:BoundingBoxData").attr("crs", bb->bbox.srs).attr("dimensions", "2");
        w.element("ows:LowerCorner", gml::format_number(bb->bbox.min_x) + " " + gml::format_number(bb->bbox.min_y));
        w.element("ows:UpperCorner", gml::format_number(bb->bbox.max_x) + " " + gml::format_number(bb->bbox.max_y));
        w.end();
    }
    w.end();
}

void write_report(xml::Writer& w, const ExceptionInfo& info, bool declare)
{
    w.start("ows:ExceptionReport");
    if (declare)
        w.attr("xmlns:ows", kOwsNs);
    w.attr("version", "1.0.0").attr("xml:lang", "en-US");
    w.start("ows:Exception").attr("exceptionCode", info.code);
    if (info.locator)
        w.attr("locator", *info.locator);
    for (const auto& m : info.messages)
        w.element("ows:ExceptionText", m);
    w.end();
    w.end();
}

void start_response(xml::Writer& w, const std::string& service_url, const wps::ProcessDescription& desc)
{
    w.declaration();
    w.start("wps:ExecuteResponse")
        .attr("xmlns:wps", kWpsNs)
        .attr("xmlns:ows", kOwsNs)
        .attr("xmlns:xlink", xml::kXlinkNs)
        .attr("service", "WPS")
        .attr("version", "1.0.0")
        .attr("xml:lang", "en-US")
        .attr("serviceInstance", append_query(service_url, "service=WPS&request=GetCapabilities"));
    w.start("wps:Process").attr("wps:processVersion", "1.0.0");
    w.element("ows:Identifier", desc.brief.identifier);
    w.element("ows:Title", desc.brief.title);
    w.end();
}

std::string failed_response(const std::string& service_url, const wps::ProcessDescription& desc,
                            const ExceptionInfo& info)
{
    xml::Writer w;
    start_response(w, service_url, desc);
    w.start("wps:Status").start("wps:ProcessFailed");
    write_report(w, info, false);
    w.end().end();
    w.end();
    return w.take();
}

HttpResponse execute(const Transport& fetch, bool remote, const HttpRequest& http,
                     std::string_view body)
{
    auto req = parse_execute_request(body);
    auto it = descriptions().find(req.process_id);
    if (it == descriptions().end())
        fault("InvalidParameterValue", "identifier", "no process named '" + req.process_id + "'");
    const auto& desc = it->second;
    for (const auto& id : req.outputs)
        if (!desc.output(id))
            fault("InvalidParameterValue", id, "process " + req.process_id + " has no output '" + id + "'");

    Url url = Url::parse(http.url);
    std::string service_url = url.origin() + url.path();

    Execution ex(fetch, remote);
    std::vector<OutputValue> values;
    try {
        values = run(req, ex);
    } catch (const ServiceReportedException&) {
        throw;
    } catch (const Error& e) {
        // The request was sound; the process itself failed.
        ExceptionInfo info{"NoApplicableCode", std::nullopt, {e.what()}};
        return xml_response(200, failed_response(service_url, desc, info));
    }

    if (req.raw) {
        std::string wanted = req.outputs.empty() ? desc.outputs.front().identifier : req.outputs.front();
        for (const auto& v : values) {
            if (v.id != wanted)
                continue;
            if (const auto* cx = std::get_if<wps::InlineComplex>(&v.value))
                return xml_response(200, cx->payload);
            if (const auto* lit = std::get_if<wps::InlineLiteral>(&v.value))
                return HttpResponse{200, {{"Content-Type", "text/plain; charset=UTF-8"}}, lit->value};
            if (const auto* bb = std::get_if<wps::InlineBBox>(&v.value)) {
                xml::Writer w;
                w.start("ows:BoundingBox").attr("xmlns:ows", kOwsNs).attr("crs", bb->bbox.srs).attr("dimensions", "2");
                w.element("ows:LowerCorner", gml::format_number(bb->bbox.min_x) + " " + gml::format_number(bb->bbox.min_y));
                w.element("ows:UpperCorner", gml::format_number(bb->bbox.max_x) + " " + gml::format_number(bb->bbox.max_y));
                w.end();
                return xml_response(200, w.take());
            }
        }
    }

    xml::Writer w;
    start_response(w, service_url, desc);
    w.start("wps:Status").element("wps:ProcessSucceeded", "Process completed").end();
    w.start("wps:ProcessOutputs");
    for (const auto& v : values) {
        if (!req.outputs.empty() && std::find(req.outputs.begin(), req.outputs.end(), v.id) == req.outputs.end())
            continue;
        w.start("wps:Output");
        w.element("ows:Identifier", v.id);
        w.element("ows:Title", desc.output(v.id)->title);
        write_value(w, v.value);
        w.end();
    }
    w.end();
    w.end();
    return xml_response(200, w.take());
}

std::vector<std::string> identifiers_of(const xml::Element& root)
{
    std::vector<std::string> ids;
    for (const auto& c : root.children)
        if (c.is(kOwsNs, "Identifier"))
            ids.push_back(c.trimmed_text());
    return ids;
}

const std::string& describe_one(const std::vector<std::string>& ids)
{
    if (ids.size() > 1)
        fault("InvalidParameterValue", "identifier", "one identifier per request");
    return describe_or_fault(ids.empty() ? std::string_view{} : std::string_view(ids.front()));
}

std::vector<std::string> split_ids(const std::string& text)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        auto id = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!id.empty())
            out.push_back(id);
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

} // namespace

std::string exception_report(const ExceptionInfo& info)
{
    xml::Writer w;
    w.declaration();
    write_report(w, info, true);
    return w.take();
}

wps::ExecuteRequest parse_execute_request(std::string_view body)
{
    auto doc = [&] {
        try {
            return xml::parse(body);
        } catch (const Error& e) {
            fault("NoApplicableCode", std::nullopt, e.what());
        }
    }();
    const auto& root = doc.root;
    if (!root.is(kWpsNs, "Execute"))
        fault("OperationNotSupported", "request", "expected wps:Execute, got '" + root.local + "'");

    wps::ExecuteRequest req;
    req.process_id = wps::detail::ows_text(root, "Identifier");
    if (req.process_id.empty())
        fault("MissingParameterValue", "identifier", "Execute without ows:Identifier");

    if (const auto* inputs = root.child(kWpsNs, "DataInputs")) {
        for (const auto* in : inputs->children_named(kWpsNs, "Input")) {
            auto id = wps::detail::ows_text(*in, "Identifier");
            if (id.empty())
                fault("MissingParameterValue", "Input", "input without ows:Identifier");
            try {
                if (const auto* data = in->child(kWpsNs, "Data"))
                    req.inputs.emplace_back(id, wps::detail::read_data(doc, *data));
                else if (const auto* ref = in->child(kWpsNs, "Reference"))
                    req.inputs.emplace_back(id, wps::detail::read_reference(doc, *ref));
                else
                    fault("MissingParameterValue", id, "input has neither wps:Data nor wps:Reference");
            } catch (const ServiceReportedException&) {
                throw;
            } catch (const Error& e) {
                fault("InvalidParameterValue", id, e.what());
            }
        }
    }
    if (const auto* form = root.child(kWpsNs, "ResponseForm")) {
        if (const auto* raw = form->child(kWpsNs, "RawDataOutput")) {
            req.raw = true;
            auto id = wps::detail::ows_text(*raw, "Identifier");
            if (!id.empty())
                req.outputs.push_back(id);
        } else if (const auto* docf = form->child(kWpsNs, "ResponseDocument")) {
            for (const auto* out : docf->children_named(kWpsNs, "Output"))
                req.outputs.push_back(wps::detail::ows_text(*out, "Identifier"));
        }
    }
    return req;
}

WpsService::WpsService(Transport fetch, int latency_ms, bool remote_references)
    : fetch_(std::move(fetch)), latency_ms_(latency_ms), remote_references_(remote_references)
{
}

HttpResponse WpsService::handle(const HttpRequest& req) const
{
    if (latency_ms_ > 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(latency_ms_));
    try {
        if (req.method == "POST") {
            auto doc = [&] {
                try {
                    return xml::parse(req.body);
                } catch (const Error& e) {
                    fault("NoApplicableCode", std::nullopt, e.what());
                }
            }();
            const auto& root = doc.root;
            if (root.is(kWpsNs, "GetCapabilities"))
                return xml_response(200, fixtures::capabilities());
            if (root.is(kWpsNs, "DescribeProcess"))
                return xml_response(200, describe_one(identifiers_of(root)));
            if (root.is(kWpsNs, "Execute"))
                return execute(fetch_, remote_references_, req, req.body);
            fault("OperationNotSupported", "request", "unsupported request '" + root.local + "'");
        }
        if (req.method != "GET")
            fault("OperationNotSupported", "request", "method " + req.method + " is not supported");

        auto params = parse_query(Url::parse(req.url).query());
        const auto* request = find_param(params, "request");
        if (!request)
            fault("MissingParameterValue", "request", "request is required");
        if (const auto* service = find_param(params, "service"); service && !iequals(*service, "WPS"))
            fault("InvalidParameterValue", "service", "service must be WPS");
        if (iequals(*request, "GetCapabilities"))
            return xml_response(200, fixtures::capabilities());
        if (iequals(*request, "DescribeProcess")) {
            if (const auto* version = find_param(params, "version"); version && *version != wps::kVersion)
                fault("VersionNegotiationFailed", "version", "only 1.0.0 is supported");
            const auto* id = find_param(params, "identifier");
            return xml_response(200, describe_one(id ? split_ids(*id) : std::vector<std::string>{}));
        }
        fault("OperationNotSupported", "request", "request '" + *request + "' is not supported over GET");
    } catch (const ServiceReportedException& e) {
        return report_response(e.info());
    } catch (const std::exception& e) {
        return report_response(ExceptionInfo{"NoApplicableCode", std::nullopt, {e.what()}});
    }
}

} // namespace geobind::mock
