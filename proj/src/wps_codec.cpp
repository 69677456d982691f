#include "geobind/wps_codec.hpp"

#include "geobind/gml.hpp"
#include "geobind/url.hpp"
#include "geobind/xml.hpp"
#include "wps_wire.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

namespace geobind::wps {

using xml::Element;
using xml::kOwsNs;
using xml::kWpsNs;
using xml::kXlinkNs;

using detail::is_exception_report;

namespace {

constexpr std::string_view kOws10Ns = "http://www.opengis.net/ows";

bool is_ows(const Element& e, std::string_view name)
{
    return (e.ns == kOwsNs || e.ns == kOws10Ns) && e.local == name;
}

// Children of ProcessDescription are unqualified in WPS 1.0.0; some servers
// qualify them anyway.
bool is_wps(const Element& e, std::string_view name)
{
    return (e.ns.empty() || e.ns == kWpsNs) && e.local == name;
}

const Element* wchild(const Element& e, std::string_view name)
{
    for (const auto& c : e.children)
        if (is_wps(c, name))
            return &c;
    return nullptr;
}

std::vector<const Element*> wchildren(const Element& e, std::string_view name)
{
    std::vector<const Element*> out;
    for (const auto& c : e.children)
        if (is_wps(c, name))
            out.push_back(&c);
    return out;
}

const Element* ochild(const Element& e, std::string_view name)
{
    for (const auto& c : e.children)
        if (is_ows(c, name))
            return &c;
    return nullptr;
}

std::string otext(const Element& e, std::string_view name)
{
    const Element* c = ochild(e, name);
    return c ? c->trimmed_text() : std::string{};
}

unsigned parse_occurs(const std::optional<std::string>& v, unsigned fallback)
{
    if (!v)
        return fallback;
    if (*v == "unbounded")
        return std::numeric_limits<unsigned>::max();
    unsigned out = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || p != v->data() + v->size())
        throw Error(Errc::InvalidParameter, "bad occurrence value '" + *v + "'");
    return out;
}

Format read_format(const Element& f)
{
    Format out;
    out.mime_type = f.child_text({}, "MimeType");
    if (out.mime_type.empty())
        out.mime_type = f.child_text(kWpsNs, "MimeType");
    for (auto [name, slot] : {std::pair{"Encoding", &out.encoding}, std::pair{"Schema", &out.schema}}) {
        const Element* c = wchild(f, name);
        if (c && !c->trimmed_text().empty())
            *slot = c->trimmed_text();
    }
    return out;
}

std::vector<Format> read_formats(const Element& data)
{
    std::vector<Format> out;
    if (const Element* d = wchild(data, "Default"))
        if (const Element* f = wchild(*d, "Format"))
            out.push_back(read_format(*f));
    if (const Element* s = wchild(data, "Supported"))
        for (const Element* f : wchildren(*s, "Format")) {
            Format fmt = read_format(*f);
            if (std::find(out.begin(), out.end(), fmt) == out.end())
                out.push_back(std::move(fmt));
        }
    return out;
}

LiteralType read_datatype(const Element& literal)
{
    const Element* dt = ochild(literal, "DataType");
    if (!dt)
        return LiteralType::String;
    auto text = dt->trimmed_text();
    if (!text.empty())
        return literal_type_from_name(text);
    if (auto ref = dt->attribute("reference", kOwsNs))
        return literal_type_from_name(*ref);
    if (auto ref = dt->attribute("reference", kOws10Ns))
        return literal_type_from_name(*ref);
    if (auto ref = dt->attribute("reference"))
        return literal_type_from_name(*ref);
    return LiteralType::String;
}

ProcessDescription read_description(const Element& pd)
{
    ProcessDescription d;
    d.brief.identifier = otext(pd, "Identifier");
    d.brief.title = otext(pd, "Title");
    if (ochild(pd, "Abstract"))
        d.brief.abstract = otext(pd, "Abstract");
    if (d.brief.identifier.empty())
        throw Error(Errc::NotADescriptionDocument, "ProcessDescription without ows:Identifier");

    if (const Element* inputs = wchild(pd, "DataInputs")) {
        for (const Element* in : wchildren(*inputs, "Input")) {
            InputDescriptor id;
            id.identifier = otext(*in, "Identifier");
            id.title = otext(*in, "Title");
            id.min_occurs = parse_occurs(in->attribute("minOccurs"), 1);
            id.max_occurs = parse_occurs(in->attribute("maxOccurs"), 1);
            if (const Element* lit = wchild(*in, "LiteralData")) {
                id.kind = DataKind::Literal;
                id.literal_datatype = read_datatype(*lit);
                if (const Element* dv = wchild(*lit, "DefaultValue"))
                    id.default_value = dv->trimmed_text();
            } else if (const Element* cx = wchild(*in, "ComplexData")) {
                id.kind = DataKind::Complex;
                id.formats = read_formats(*cx);
            } else if (const Element* bb = wchild(*in, "BoundingBoxData")) {
                id.kind = DataKind::BoundingBox;
                (void)bb;
            } else {
                throw Error(Errc::UnknownParameterKind, "input '" + id.identifier + "' has no known data element");
            }
            d.inputs.push_back(std::move(id));
        }
    }
    if (const Element* outputs = wchild(pd, "ProcessOutputs")) {
        for (const Element* out : wchildren(*outputs, "Output")) {
            OutputDescriptor od;
            od.identifier = otext(*out, "Identifier");
            od.title = otext(*out, "Title");
            if (const Element* lit = wchild(*out, "LiteralOutput")) {
                od.kind = DataKind::Literal;
                od.literal_datatype = read_datatype(*lit);
            } else if (const Element* cx = wchild(*out, "ComplexOutput")) {
                od.kind = DataKind::Complex;
                od.formats = read_formats(*cx);
            } else if (wchild(*out, "BoundingBoxOutput")) {
                od.kind = DataKind::BoundingBox;
            } else {
                throw Error(Errc::UnknownParameterKind, "output '" + od.identifier + "' has no known data element");
            }
            d.outputs.push_back(std::move(od));
        }
    }
    check(d);
    return d;
}

} // namespace

namespace detail {

ExceptionInfo read_exception_report(const Element& root)
{
    ExceptionInfo info;
    bool first = true;
    for (const auto& ex : root.children) {
        if (!is_ows(ex, "Exception"))
            continue;
        if (first) {
            info.code = ex.attribute("exceptionCode").value_or("");
            info.locator = ex.attribute("locator");
            first = false;
        }
        for (const auto& t : ex.children)
            if (is_ows(t, "ExceptionText"))
                info.messages.push_back(t.trimmed_text());
    }
    if (info.code.empty())
        info.code = "NoApplicableCode";
    return info;
}

} // namespace detail

namespace {

using detail::read_exception_report;

bool parses_as_xml(std::string_view bytes)
{
    try {
        xml::parse(bytes);
        return true;
    } catch (const Error&) {
        return false;
    }
}

// Element content as embedded bytes: verbatim when the slice is a
// standalone document, otherwise re-serialized so inherited namespace
// declarations come along.
std::string embedded_xml(const xml::Document& doc, const Element& holder)
{
    auto bytes = doc.inner_bytes(holder);
    if (parses_as_xml(bytes))
        return std::string(bytes);
    const Element* c = holder.first_child();
    return c ? xml::serialize(*c) : std::string(bytes);
}

void write_bbox(xml::Writer& w, const BBox& b)
{
    w.start("wps:BoundingBoxData").attr("crs", b.srs).attr("dimensions", "2");
    w.element("ows:LowerCorner", gml::format_number(b.min_x) + " " + gml::format_number(b.min_y));
    w.element("ows:UpperCorner", gml::format_number(b.max_x) + " " + gml::format_number(b.max_y));
    w.end();
}

std::pair<double, double> read_corner(const std::string& text)
{
    double v[2];
    const char* p = text.data();
    const char* end = p + text.size();
    for (double& d : v) {
        while (p < end && (*p == ' ' || *p == '\t' || *p == '\n' || *p == '\r'))
            ++p;
        auto [q, ec] = std::from_chars(p, end, d);
        if (ec != std::errc{})
            throw Error(Errc::MalformedCoordinates, "bad corner '" + text + "'");
        p = q;
    }
    return {v[0], v[1]};
}

} // namespace

namespace detail {

BBox read_bbox(const Element& e)
{
    BBox b;
    b.srs = e.attribute("crs").value_or("EPSG:4326");
    std::tie(b.min_x, b.min_y) = read_corner(otext(e, "LowerCorner"));
    std::tie(b.max_x, b.max_y) = read_corner(otext(e, "UpperCorner"));
    return b;
}

DataEnvelope read_data(const xml::Document& doc, const Element& data)
{
    for (const auto& c : data.children) {
        if (c.is(kWpsNs, "LiteralData")) {
            return InlineLiteral{c.text, literal_type_from_name(c.attribute("dataType").value_or("string"))};
        }
        if (c.is(kWpsNs, "ComplexData")) {
            InlineComplex cx;
            cx.mime_type = c.attribute("mimeType").value_or("");
            cx.encoding = c.attribute("encoding");
            cx.schema = c.attribute("schema");
            if (cx.encoding && iequals(*cx.encoding, "base64"))
                cx.payload = base64_decode(c.text);
            else if (c.first_child())
                cx.payload = embedded_xml(doc, c);
            else
                cx.payload = c.text;
            return cx;
        }
        if (c.is(kWpsNs, "BoundingBoxData"))
            return InlineBBox{read_bbox(c)};
    }
    throw Error(Errc::UnknownParameterKind, "wps:Data without a known data element");
}

Reference read_reference(const xml::Document& doc, const Element& r)
{
    Reference ref;
    ref.href = r.attribute("href", kXlinkNs).value_or(r.attribute("href").value_or(""));
    ref.method = iequals(r.attribute("method").value_or("GET"), "POST") ? HttpMethod::Post : HttpMethod::Get;
    ref.mime_type = r.attribute("mimeType");
    if (const Element* body = r.child(kWpsNs, "Body"))
        ref.body = body->first_child() ? std::string(doc.inner_bytes(*body)) : body->text;
    return ref;
}

bool is_exception_report(const Element& e) { return is_ows(e, "ExceptionReport"); }

std::string ows_text(const Element& e, std::string_view name) { return otext(e, name); }

} // namespace detail

using detail::read_bbox;
using detail::read_data;
using detail::read_reference;

bool is_xml_mime(std::string_view mime)
{
    auto semi = mime.find(';');
    auto base = mime.substr(0, semi);
    while (!base.empty() && base.back() == ' ')
        base.remove_suffix(1);
    std::string lower(base);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    return lower == "text/xml" || lower == "application/xml"
        || (lower.size() > 4 && lower.compare(lower.size() - 4, 4, "+xml") == 0);
}

WpsDocument classify(std::string body, std::string mime_type)
{
    WpsDocument doc{DocumentKind::RawOutput, std::move(body), std::move(mime_type)};
    try {
        auto parsed = xml::parse(doc.body);
        const auto& r = parsed.root;
        if (r.is(kWpsNs, "Capabilities"))
            doc.kind = DocumentKind::Capabilities;
        else if (r.is(kWpsNs, "ProcessDescriptions"))
            doc.kind = DocumentKind::ProcessDescriptions;
        else if (r.is(kWpsNs, "ExecuteResponse"))
            doc.kind = DocumentKind::ExecuteResponse;
        else if (is_exception_report(r))
            doc.kind = DocumentKind::ExceptionReport;
    } catch (const Error&) {
    }
    return doc;
}

std::string encode_get_capabilities(const ServiceEndpoint& endpoint)
{
    auto url = Url::parse(endpoint.base_url);
    return append_query(url.text(), "service=WPS&request=GetCapabilities");
}

std::string encode_describe_process(const ServiceEndpoint& endpoint, std::string_view process_id)
{
    if (process_id.empty())
        throw Error(Errc::EmptyIdentifier, "process identifier is empty");
    auto url = Url::parse(endpoint.base_url);
    return append_query(url.text(), "service=WPS&request=DescribeProcess&version=1.0.0&identifier="
                                        + percent_encode(process_id));
}

Capabilities decode_capabilities(std::string_view body)
{
    auto doc = xml::parse(body);
    const auto& root = doc.root;
    if (is_exception_report(root))
        throw ServiceReportedException(read_exception_report(root));
    if (!root.is(kWpsNs, "Capabilities"))
        throw Error(Errc::NotACapabilitiesDocument, "root element is '" + root.local + "'");

    Capabilities caps;
    const Element* ident = ochild(root, "ServiceIdentification");
    auto version = root.attribute("version");
    if (!version && ident)
        version = otext(*ident, "ServiceTypeVersion");
    caps.metadata.version = version.value_or("");
    if (caps.metadata.version != kVersion)
        throw Error(Errc::UnsupportedVersion, "service version '" + caps.metadata.version + "'");
    if (ident) {
        caps.metadata.title = otext(*ident, "Title");
        caps.metadata.abstract = otext(*ident, "Abstract");
    }
    if (const Element* ops = ochild(root, "OperationsMetadata"))
        for (const auto& op : ops->children)
            if (is_ows(op, "Operation"))
                if (auto name = op.attribute("name"))
                    caps.metadata.operations.insert(*name);
    if (const Element* offerings = root.child(kWpsNs, "ProcessOfferings")) {
        for (const Element* p : offerings->children_named(kWpsNs, "Process")) {
            ProcessBrief b;
            b.identifier = otext(*p, "Identifier");
            b.title = otext(*p, "Title");
            if (ochild(*p, "Abstract"))
                b.abstract = otext(*p, "Abstract");
            caps.processes.push_back(std::move(b));
        }
    }
    return caps;
}

std::vector<ProcessDescription> decode_process_descriptions(std::string_view body)
{
    auto doc = xml::parse(body);
    const auto& root = doc.root;
    if (is_exception_report(root))
        throw ServiceReportedException(read_exception_report(root));
    if (!root.is(kWpsNs, "ProcessDescriptions"))
        throw Error(Errc::NotADescriptionDocument, "root element is '" + root.local + "'");
    std::vector<ProcessDescription> out;
    for (const Element* pd : wchildren(root, "ProcessDescription"))
        out.push_back(read_description(*pd));
    if (out.empty())
        throw Error(Errc::NotADescriptionDocument, "no ProcessDescription element");
    return out;
}

ProcessDescription decode_process_description(std::string_view body)
{
    return decode_process_descriptions(body).front();
}

std::string encode_execute(const ExecuteRequest& request)
{
    xml::Writer w;
    w.declaration();
    w.start("wps:Execute")
        .attr("service", "WPS")
        .attr("version", kVersion)
        .attr("xmlns:wps", kWpsNs)
        .attr("xmlns:ows", kOwsNs)
        .attr("xmlns:xlink", kXlinkNs);
    w.element("ows:Identifier", request.process_id);
    if (!request.inputs.empty()) {
        w.start("wps:DataInputs");
        for (const auto& [id, env] : request.inputs) {
            w.start("wps:Input");
            w.element("ows:Identifier", id);
            if (const auto* ref = std::get_if<Reference>(&env)) {
                w.start("wps:Reference").attr("xlink:href", ref->href);
                w.attr("method", ref->method == HttpMethod::Post ? "POST" : "GET");
                if (ref->mime_type)
                    w.attr("mimeType", *ref->mime_type);
                if (ref->body) {
                    w.start("wps:Body");
                    if (!ref->body->empty() && ref->body->front() == '<' && parses_as_xml(*ref->body))
                        w.raw(*ref->body);
                    else
                        w.text(*ref->body);
                    w.end();
                }
                w.end();
            } else {
                w.start("wps:Data");
                if (const auto* lit = std::get_if<InlineLiteral>(&env)) {
                    w.start("wps:LiteralData").attr("dataType", to_string(lit->datatype)).text(lit->value).end();
                } else if (const auto* cx = std::get_if<InlineComplex>(&env)) {
                    w.start("wps:ComplexData").attr("mimeType", cx->mime_type);
                    if (cx->encoding)
                        w.attr("encoding", *cx->encoding);
                    if (cx->schema)
                        w.attr("schema", *cx->schema);
                    if (cx->encoding && iequals(*cx->encoding, "base64")) {
                        w.text(base64_encode(cx->payload));
                    } else {
                        // A payload carrying its own XML declaration cannot sit inside
                        // this document, so it travels as text to keep its bytes.
                        const auto& body = cx->payload;
                        if (is_xml_mime(cx->mime_type) && !body.empty() && body.front() == '<'
                            && body.rfind("<?xml", 0) != 0 && parses_as_xml(body))
                            w.raw(body);
                        else
                            w.text(body);
                    }
                    w.end();
                } else if (const auto* bb = std::get_if<InlineBBox>(&env)) {
                    write_bbox(w, bb->bbox);
                }
                w.end();
            }
            w.end();
        }
        w.end();
    }
    w.start("wps:ResponseForm");
    if (request.raw) {
        w.start("wps:RawDataOutput");
        if (!request.outputs.empty())
            w.element("ows:Identifier", request.outputs.front());
        w.end();
    } else {
        w.start("wps:ResponseDocument").attr("storeExecuteResponse", "false").attr("lineage", "false").attr("status", "false");
        for (const auto& out : request.outputs)
            w.start("wps:Output").element("ows:Identifier", out).end();
        w.end();
    }
    w.end();
    w.end();
    return w.take();
}

ExecuteResult decode_execute_response(std::string_view body, std::string_view declared_mime,
                                      std::string_view raw_output_id)
{
    auto raw = [&] {
        ExecuteResult r;
        r.outputs.emplace_back(raw_output_id.empty() ? "raw" : std::string(raw_output_id),
                               InlineComplex{std::string(body), std::string(declared_mime), std::nullopt, std::nullopt});
        return r;
    };
    auto failed = [](ExceptionInfo info) {
        ExecuteResult r;
        r.status = ExecuteResult::Status::Failed;
        r.failure = std::move(info);
        return r;
    };

    std::optional<xml::Document> doc;
    try {
        doc = xml::parse(body);
    } catch (const Error&) {
        if (is_xml_mime(declared_mime))
            throw;
        return raw();
    }
    const auto& root = doc->root;
    if (is_exception_report(root))
        return failed(read_exception_report(root));
    if (!root.is(kWpsNs, "ExecuteResponse"))
        return raw();

    try {
        const Element* status = root.child(kWpsNs, "Status");
        if (!status)
            return failed({"NoApplicableCode", std::nullopt, {"ExecuteResponse without wps:Status"}});
        if (const Element* pf = status->child(kWpsNs, "ProcessFailed")) {
            const Element* report = pf->first_child();
            if (report && is_exception_report(*report))
                return failed(read_exception_report(*report));
            return failed({"NoApplicableCode", std::nullopt, {"process failed"}});
        }
        if (!status->child(kWpsNs, "ProcessSucceeded"))
            return failed({"NoApplicableCode", std::nullopt, {"asynchronous execution is not supported"}});

        ExecuteResult result;
        if (const Element* outs = root.child(kWpsNs, "ProcessOutputs")) {
            for (const Element* o : outs->children_named(kWpsNs, "Output")) {
                auto id = otext(*o, "Identifier");
                if (const Element* data = o->child(kWpsNs, "Data"))
                    result.outputs.emplace_back(id, read_data(*doc, *data));
                else if (const Element* ref = o->child(kWpsNs, "Reference"))
                    result.outputs.emplace_back(id, read_reference(*doc, *ref));
            }
        }
        if (result.outputs.empty())
            return failed({"NoApplicableCode", std::nullopt, {"service returned no outputs"}});
        return result;
    } catch (const Error& e) {
        return failed({"NoApplicableCode", std::nullopt, {std::string("malformed ExecuteResponse: ") + e.what()}});
    }
}

ExceptionInfo decode_exception_report(std::string_view body)
{
    auto doc = xml::parse(body);
    if (!is_exception_report(doc.root))
        throw Error(Errc::NotAnExceptionReport, "root element is '" + doc.root.local + "'");
    return read_exception_report(doc.root);
}

} // namespace geobind::wps
