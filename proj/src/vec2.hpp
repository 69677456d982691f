#pragma once

#include "geobind/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace geobind::detail {

inline Position operator+(Position a, Position b) { return {a.x + b.x, a.y + b.y}; }
inline Position operator-(Position a, Position b) { return {a.x - b.x, a.y - b.y}; }
inline Position operator*(Position a, double s) { return {a.x * s, a.y * s}; }

inline double dot(Position a, Position b) { return a.x * b.x + a.y * b.y; }
inline double cross(Position a, Position b) { return a.x * b.y - a.y * b.x; }
inline double norm(Position a) { return std::hypot(a.x, a.y); }

/// Twice the signed area of (a, b, c); positive when c is left of a->b.
inline double orient(Position a, Position b, Position c) { return cross(b - a, c - a); }

/// Parameter of the projection of p onto a->b, clamped to [0, 1].
inline double project(Position p, Position a, Position b)
{
    auto d = b - a;
    double len2 = dot(d, d);
    if (len2 == 0.0)
        return 0.0;
    return std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
}

inline double distance_to_segment(Position p, Position a, Position b)
{
    double t = project(p, a, b);
    return norm(p - (a + (b - a) * t));
}

} // namespace geobind::detail
