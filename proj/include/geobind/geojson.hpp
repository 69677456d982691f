#pragma once

#include "geobind/geometry.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

/// GeoJSON (RFC 7946 structure) interchange for the CLI, the bridge and
/// dataset ingestion. Coordinates are written x,y without reprojection.
namespace geobind::geojson {

using Json = nlohmann::ordered_json;

Json geometry_to_json(const Geometry& g);
Json feature_collection_to_json(const FeatureCollection& fc);

/// Compact GeoJSON FeatureCollection text.
std::string to_interchange(const FeatureCollection& fc);

/// Throws Error(GeoJsonSyntax) for structurally invalid input. Polygons are
/// normalized to the winding convention.
Geometry geometry_from_json(const Json& j, std::string_view srs = kDefaultSrs);
FeatureCollection feature_collection_from_json(const Json& j, std::string_view srs = kDefaultSrs);

/// Accepts a FeatureCollection, a single Feature, or a bare geometry object.
FeatureCollection read_features(std::string_view text, std::string_view srs = kDefaultSrs);

} // namespace geobind::geojson
