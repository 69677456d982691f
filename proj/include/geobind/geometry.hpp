#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace geobind {

inline constexpr std::string_view kDefaultSrs = "EPSG:4326";

/// Planar position in SRS units: x = easting/longitude, y = northing/latitude.
struct Position {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Position&) const = default;
};

/// Closed ring: at least 4 positions, first == last.
using Ring = std::vector<Position>;

struct Point {
    Position pos;
    bool operator==(const Point&) const = default;
};

struct LineString {
    std::vector<Position> points;
    bool operator==(const LineString&) const = default;
};

/// Exterior counter-clockwise, interiors clockwise once normalized.
struct Polygon {
    Ring exterior;
    std::vector<Ring> interiors;
    bool operator==(const Polygon&) const = default;
};

struct MultiPoint {
    std::vector<Position> points;
    bool operator==(const MultiPoint&) const = default;
};

struct MultiLineString {
    std::vector<LineString> lines;
    bool operator==(const MultiLineString&) const = default;
};

struct MultiPolygon {
    std::vector<Polygon> polygons;
    bool operator==(const MultiPolygon&) const = default;
};

using Shape = std::variant<Point, LineString, Polygon, MultiPoint, MultiLineString, MultiPolygon>;

struct Geometry {
    Shape shape;
    std::string srs{kDefaultSrs};

    bool operator==(const Geometry&) const = default;
};

struct Feature {
    std::string id;
    Geometry geometry;
    /// Attribute values are kept as text, in document order.
    std::vector<std::pair<std::string, std::string>> attributes;

    bool operator==(const Feature&) const = default;
};

struct FeatureCollection {
    std::vector<Feature> features;
    std::string srs{kDefaultSrs};

    bool operator==(const FeatureCollection&) const = default;
};

struct BBox {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;
    std::string srs{kDefaultSrs};

    bool operator==(const BBox&) const = default;

    bool contains(Position p) const
    {
        return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
    }
};

/// Shoelace area; positive for counter-clockwise rings.
double signed_area(const Ring& ring);
double area(const Polygon& p);
double area(const Geometry& g);

/// Reorients rings (exterior CCW, holes CW). Idempotent.
Polygon normalize(Polygon p);
Geometry normalize(Geometry g);

/// Structural checks: position counts, closed rings, finite coordinates.
/// Throws Error(InvalidGeometry).
void validate(const Geometry& g);

BBox compute_bbox(const Geometry& g);

std::string_view type_name(const Geometry& g);

/// Applies `f` to every position of the geometry.
template <class F>
void for_each_position(const Geometry& g, F&& f)
{
    auto ring = [&](const Ring& r) {
        for (const auto& p : r)
            f(p);
    };
    auto poly = [&](const Polygon& p) {
        ring(p.exterior);
        for (const auto& h : p.interiors)
            ring(h);
    };
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Point>) {
                f(s.pos);
            } else if constexpr (std::is_same_v<T, LineString> || std::is_same_v<T, MultiPoint>) {
                ring(s.points);
            } else if constexpr (std::is_same_v<T, Polygon>) {
                poly(s);
            } else if constexpr (std::is_same_v<T, MultiLineString>) {
                for (const auto& l : s.lines)
                    ring(l.points);
            } else {
                for (const auto& p : s.polygons)
                    poly(p);
            }
        },
        g.shape);
}

} // namespace geobind
