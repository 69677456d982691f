#pragma once

#include "geobind/geometry.hpp"

/// Geoprocessing algorithms published by the mock WPS: round-capped buffer
/// built from capsules merged by polygon union, centroid, and envelope.
namespace geobind::kernel {

struct BufferParams {
    double distance = 0.0;
    /// Circle vertices per half turn; a full circle is a 2k-gon.
    int cap_segments = 16;
};

/// Buffer of a Point, LineString or Polygon. Caps and joins are inscribed
/// polygons whose vertices lie on the true circle, so the boundary stays
/// within [r*cos(pi/2k), r] of the input. Returns a Polygon, or a
/// MultiPolygon when the result has several components.
///
/// Throws NonPositiveDistance, InvalidParameter (k < 4),
/// UnsupportedGeometry (Multi* input), SelfIntersectingInput.
Geometry buffer(const Geometry& g, const BufferParams& p);

/// Boolean union with hole handling. Disjoint inputs give two components,
/// nested inputs give the outer one. Throws DegenerateIntersection when
/// the boundary cannot be reassembled into closed rings.
MultiPolygon polygon_union(const Polygon& a, const Polygon& b);
MultiPolygon polygon_union(const MultiPolygon& a, const MultiPolygon& b);

/// Regular 2k-gon inscribed in the circle of radius r around c, CCW.
Polygon disk(Position c, double r, int k);
/// Buffer of one segment: its two offset edges closed by k-gon half disks.
Polygon capsule(Position a, Position b, double r, int k);

/// Mean of points, length-weighted segment midpoints for lines,
/// area-weighted shoelace centroid for polygons. Throws ZeroMeasure.
Position centroid_position(const Geometry& g);
Geometry centroid(const Geometry& g);

/// Bounding rectangle as a closed 5-position CCW ring.
Geometry envelope(const Geometry& g);

/// True when no two non-adjacent segments touch and no adjacent pair
/// folds back onto itself. A closed line may meet itself at its ends.
bool is_simple(const std::vector<Position>& line);

/// Even-odd membership over all rings. Boundary points may land either way.
bool contains(const MultiPolygon& region, Position p);

} // namespace geobind::kernel
