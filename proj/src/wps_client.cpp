#include "geobind/wps_client.hpp"

#include "geobind/url.hpp"

namespace geobind::wps {

namespace {

bool ok(int status) { return status >= 200 && status < 300; }

HttpResponse get(const Transport& transport, std::string url)
{
    HttpRequest req;
    req.url = std::move(url);
    auto res = transport(req);
    if (!ok(res.status)) {
        auto doc = classify(res.body, res.content_type());
        if (doc.kind == DocumentKind::ExceptionReport)
            throw ServiceReportedException(decode_exception_report(res.body));
        throw TransportError(res.status, "HTTP " + std::to_string(res.status) + " from " + req.url);
    }
    return res;
}

ServiceEndpoint endpoint_of(std::string_view url)
{
    ServiceEndpoint e;
    e.base_url = std::string(url);
    return e;
}

} // namespace

Capabilities fetch_capabilities(const Transport& transport, std::string_view url)
{
    return decode_capabilities(get(transport, encode_get_capabilities(endpoint_of(url))).body);
}

ProcessDescription fetch_description(const Transport& transport, std::string_view url, std::string_view process_id)
{
    return decode_process_description(get(transport, encode_describe_process(endpoint_of(url), process_id)).body);
}

HttpRequest execute_http_request(std::string_view url, const ExecuteRequest& request)
{
    HttpRequest req;
    req.method = "POST";
    req.url = Url::parse(url).text();
    req.headers = {{"Content-Type", "text/xml; charset=UTF-8"}};
    req.body = encode_execute(request);
    return req;
}

ExecuteResult send_execute(const Transport& transport, std::string_view url, const ExecuteRequest& request)
{
    auto res = transport(execute_http_request(url, request));
    if (!ok(res.status)) {
        auto doc = classify(res.body, res.content_type());
        if (doc.kind != DocumentKind::ExceptionReport && doc.kind != DocumentKind::ExecuteResponse)
            throw TransportError(res.status, "HTTP " + std::to_string(res.status) + " from " + std::string(url));
    }
    std::string raw_id = request.raw && !request.outputs.empty() ? request.outputs.front() : std::string{};
    return decode_execute_response(res.body, res.content_type(), raw_id);
}

} // namespace geobind::wps
