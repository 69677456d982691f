#pragma once

#include "geobind/geometry.hpp"
#include "geobind/xml.hpp"

#include <string>
#include <string_view>
#include <vector>

/// GML 3.1.1 simple-feature subset. Reads gml:pos / gml:posList and the
/// older gml:coordinates form; writes gml:pos / gml:posList only.
namespace geobind::gml {

Geometry parse_geometry(std::string_view doc);
Geometry parse_geometry(const xml::Element& e);

/// Standalone fragment with the gml namespace declared on the root and no
/// XML declaration, so it can be embedded verbatim in another document.
std::string serialize_geometry(const Geometry& g);
void write_geometry(xml::Writer& w, const Geometry& g, bool declare_namespace);

FeatureCollection parse_feature_collection(std::string_view doc);
FeatureCollection parse_feature_collection(const xml::Element& root);

/// wfs:FeatureCollection with one gml:featureMember per feature; features
/// are written as <app:type_name gml:id="...">.
std::string serialize_feature_collection(const FeatureCollection& fc, std::string_view type_name);

inline constexpr std::string_view kAppNs = "urn:geobind:features";

/// Geometries in feature order, attributes dropped.
std::vector<Geometry> extract_geometries(const FeatureCollection& fc);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// True when the root element of `doc` is a GML geometry element.
bool is_geometry_element(const xml::Element& e);

} // namespace geobind::gml
