#pragma once

#include "geobind/error.hpp"
#include "geobind/wps_model.hpp"

#include <string>
#include <string_view>
#include <vector>

/// WPS 1.0.0 wire encoding on the client side: KVP URLs for
/// GetCapabilities / DescribeProcess, XML for Execute, and decoders for
/// every document a service can answer with. Complex payloads are opaque
/// bytes here.
namespace geobind::wps {

enum class DocumentKind { Capabilities, ProcessDescriptions, ExecuteResponse, ExceptionReport, RawOutput };

struct WpsDocument {
    DocumentKind kind = DocumentKind::RawOutput;
    std::string body;
    std::string mime_type;
};

/// Classifies a response body by its root element; anything that is not a
/// recognised WPS/OWS root (including non-XML) is RawOutput.
WpsDocument classify(std::string body, std::string mime_type);

struct Capabilities {
    ServiceMetadata metadata;
    std::vector<ProcessBrief> processes;
};

std::string encode_get_capabilities(const ServiceEndpoint& endpoint);
std::string encode_describe_process(const ServiceEndpoint& endpoint, std::string_view process_id);

/// Throws XmlSyntax, NotACapabilitiesDocument, UnsupportedVersion, or
/// ServiceReportedException when the body is an ows:ExceptionReport.
Capabilities decode_capabilities(std::string_view doc);

/// First ProcessDescription of the document.
ProcessDescription decode_process_description(std::string_view doc);
std::vector<ProcessDescription> decode_process_descriptions(std::string_view doc);

std::string encode_execute(const ExecuteRequest& request);

/// Total over arbitrary bytes: the only exception that escapes is
/// XmlSyntax, and only when `declared_mime` is an XML type. A body that is
/// not a WPS/OWS document becomes a single InlineComplex output keyed by
/// `raw_output_id` ("raw" when empty).
ExecuteResult decode_execute_response(std::string_view doc, std::string_view declared_mime,
                                      std::string_view raw_output_id = {});

ExceptionInfo decode_exception_report(std::string_view doc);

bool is_xml_mime(std::string_view mime);

} // namespace geobind::wps
