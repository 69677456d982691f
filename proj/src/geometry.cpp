#include "geobind/geometry.hpp"

#include "geobind/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace geobind {

double signed_area(const Ring& ring)
{
    if (ring.size() < 3)
        return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
        const auto& a = ring[i];
        const auto& b = ring[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return twice / 2.0;
}

double area(const Polygon& p)
{
    double a = std::abs(signed_area(p.exterior));
    for (const auto& h : p.interiors)
        a -= std::abs(signed_area(h));
    return a;
}

double area(const Geometry& g)
{
    if (const auto* p = std::get_if<Polygon>(&g.shape))
        return area(*p);
    if (const auto* mp = std::get_if<MultiPolygon>(&g.shape)) {
        double a = 0.0;
        for (const auto& p : mp->polygons)
            a += area(p);
        return a;
    }
    return 0.0;
}

namespace {

void orient(Ring& r, bool ccw)
{
    if ((signed_area(r) > 0.0) != ccw && signed_area(r) != 0.0)
        std::reverse(r.begin(), r.end());
}

void check_ring(const Ring& r, const char* what)
{
    if (r.size() < 4)
        throw Error(Errc::InvalidGeometry, std::string(what) + " has fewer than 4 positions");
    if (r.front() != r.back())
        throw Error(Errc::InvalidGeometry, std::string(what) + " is not closed");
}

} // namespace

Polygon normalize(Polygon p)
{
    orient(p.exterior, true);
    for (auto& h : p.interiors)
        orient(h, false);
    return p;
}

Geometry normalize(Geometry g)
{
    if (auto* p = std::get_if<Polygon>(&g.shape)) {
        *p = normalize(std::move(*p));
    } else if (auto* mp = std::get_if<MultiPolygon>(&g.shape)) {
        for (auto& poly : mp->polygons)
            poly = normalize(std::move(poly));
    }
    return g;
}

void validate(const Geometry& g)
{
    for_each_position(g, [](const Position& p) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw Error(Errc::InvalidGeometry, "non-finite coordinate");
    });
    auto check_polygon = [](const Polygon& p) {
        check_ring(p.exterior, "exterior ring");
        for (const auto& h : p.interiors)
            check_ring(h, "interior ring");
    };
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LineString>) {
                if (s.points.size() < 2)
                    throw Error(Errc::InvalidGeometry, "LineString needs at least 2 positions");
            } else if constexpr (std::is_same_v<T, Polygon>) {
                check_polygon(s);
            } else if constexpr (std::is_same_v<T, MultiLineString>) {
                for (const auto& l : s.lines) {
                    if (l.points.size() < 2)
                        throw Error(Errc::InvalidGeometry, "LineString needs at least 2 positions");
                }
            } else if constexpr (std::is_same_v<T, MultiPolygon>) {
                for (const auto& p : s.polygons)
                    check_polygon(p);
            }
        },
        g.shape);
}

BBox compute_bbox(const Geometry& g)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    BBox box{inf, inf, -inf, -inf, g.srs};
    for_each_position(g, [&](const Position& p) {
        box.min_x = std::min(box.min_x, p.x);
        box.min_y = std::min(box.min_y, p.y);
        box.max_x = std::max(box.max_x, p.x);
        box.max_y = std::max(box.max_y, p.y);
    });
    if (box.min_x > box.max_x)
        box = BBox{0.0, 0.0, 0.0, 0.0, g.srs};
    return box;
}

std::string_view type_name(const Geometry& g)
{
    static constexpr std::string_view names[] = {"Point", "LineString", "Polygon",
                                                 "MultiPoint", "MultiLineString", "MultiPolygon"};
    return names[g.shape.index()];
}

} // namespace geobind
