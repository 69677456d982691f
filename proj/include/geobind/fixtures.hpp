#pragma once

#include "geobind/geometry.hpp"

#include <string>
#include <string_view>
#include <vector>

/// Documents the mock services publish, compiled into the library.
namespace geobind::fixtures {

const std::string& capabilities();
/// Throws Error(UnknownProcess) for other identifiers.
const std::string& describe(std::string_view process_id);
/// Buffer, Centroid, Envelope.
const std::vector<std::string>& process_ids();
/// The roads layer as GeoJSON text.
const std::string& roads_geojson();
FeatureCollection roads();

} // namespace geobind::fixtures
