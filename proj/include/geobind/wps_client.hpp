#pragma once

#include "geobind/transport.hpp"
#include "geobind/wps_codec.hpp"

#include <string_view>

/// WPS requests sent through a Transport.
namespace geobind::wps {

/// Throws TransportError for unreachable services or non-2xx answers that
/// carry no ExceptionReport, ServiceReportedException when they do, plus
/// the decoder's own errors.
Capabilities fetch_capabilities(const Transport& transport, std::string_view url);
ProcessDescription fetch_description(const Transport& transport, std::string_view url, std::string_view process_id);

/// XML POST of the request. An ExceptionReport answer (whatever the
/// status) comes back as a Failed result rather than an exception.
ExecuteResult send_execute(const Transport& transport, std::string_view url, const ExecuteRequest& request);

/// The Execute document as it would be sent; exposed for inspection.
HttpRequest execute_http_request(std::string_view url, const ExecuteRequest& request);

} // namespace geobind::wps
