#pragma once

// Element-level readers shared by the client decoders and the mock server's
// request parser.

#include "geobind/wps_model.hpp"
#include "geobind/xml.hpp"

namespace geobind::wps::detail {

bool is_exception_report(const xml::Element& e);
ExceptionInfo read_exception_report(const xml::Element& root);
/// Trimmed text of an ows:* child (OWS 1.1 or 1.0); empty when absent.
std::string ows_text(const xml::Element& e, std::string_view name);
BBox read_bbox(const xml::Element& e);
/// Contents of a wps:Data element.
DataEnvelope read_data(const xml::Document& doc, const xml::Element& data);
Reference read_reference(const xml::Document& doc, const xml::Element& ref);

} // namespace geobind::wps::detail
