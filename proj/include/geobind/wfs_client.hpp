#pragma once

#include "geobind/geometry.hpp"
#include "geobind/transport.hpp"
#include "geobind/wps_model.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

/// WFS 1.1.0 GetFeature composition and fetching, and packaging of a query
/// as a WPS input either by reference or fetched inline.
namespace geobind::wfs {

inline constexpr std::string_view kVersion = "1.1.0";

struct WfsQuery {
    std::string service_url;
    std::string type_name;
    std::optional<unsigned> max_features;
    std::optional<std::vector<std::string>> feature_ids;
    /// Equality clauses, all of which must hold.
    std::vector<std::pair<std::string, std::string>> attribute_filters;
    std::optional<BBox> bbox;

    bool operator==(const WfsQuery&) const = default;
};

struct LayerInfo {
    std::string name;
    std::string title;
    std::string default_srs;

    bool operator==(const LayerInfo&) const = default;
};

/// Throws InvalidQuery (empty type name, empty id list, maxFeatures 0) or
/// ConflictingFilters (more than one of ids / attributes / bbox).
void check(const WfsQuery& q);

std::string build_get_feature_url(const WfsQuery& q);
/// Inverse of build_get_feature_url, for servers. Throws InvalidQuery.
WfsQuery parse_get_feature_url(std::string_view url);

/// ogc:Filter text for equality clauses; several clauses are joined by ogc:And.
std::string equality_filter(const std::vector<std::pair<std::string, std::string>>& clauses);
/// Reads PropertyIsEqualTo clauses back; throws InvalidQuery on anything else.
std::vector<std::pair<std::string, std::string>> parse_equality_filter(std::string_view filter_xml);

std::string get_capabilities_url(std::string_view service_url);
/// Throws XmlSyntax, NotAWfsCapabilities.
std::vector<LayerInfo> list_layers(std::string_view capabilities_doc);
std::vector<LayerInfo> fetch_layers(const Transport& transport, std::string_view service_url);

FeatureCollection fetch_features(const WfsQuery& q, const Transport& transport);

/// GET reference to the query, mime text/xml.
wps::DataEnvelope as_reference(const WfsQuery& q);

/// Fetches now and returns the data inline: the single feature's bare
/// geometry when `geometry_only` (AmbiguousGeometry unless exactly one
/// feature matched), otherwise the whole collection.
wps::DataEnvelope resolve_reference(const WfsQuery& q, const Transport& transport, bool geometry_only);

} // namespace geobind::wfs
