#include "geobind/error.hpp"
#include "geobind/kernel.hpp"
#include "vec2.hpp"

#include <cmath>
#include <numbers>

namespace geobind::kernel {

using namespace geobind::detail;

namespace {

Position on_circle(Position c, double r, double angle)
{
    return {c.x + r * std::cos(angle), c.y + r * std::sin(angle)};
}

std::vector<Position> without_repeats(const std::vector<Position>& pts)
{
    std::vector<Position> out;
    for (const auto& p : pts) {
        if (out.empty() || out.back() != p)
            out.push_back(p);
    }
    return out;
}

bool segments_touch(Position a, Position b, Position c, Position d)
{
    double o1 = orient(a, b, c), o2 = orient(a, b, d);
    double o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0)))
        return true;
    return (o1 == 0 && distance_to_segment(c, a, b) == 0.0) || (o2 == 0 && distance_to_segment(d, a, b) == 0.0)
        || (o3 == 0 && distance_to_segment(a, c, d) == 0.0) || (o4 == 0 && distance_to_segment(b, c, d) == 0.0);
}

void require_simple(const std::vector<Position>& line, const char* what)
{
    if (!is_simple(line))
        throw Error(Errc::SelfIntersectingInput, std::string(what) + " intersects itself");
}

MultiPolygon add_capsules(MultiPolygon region, const std::vector<Position>& line, const BufferParams& p)
{
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        auto cap = capsule(line[i], line[i + 1], p.distance, p.cap_segments);
        region = region.polygons.empty() ? MultiPolygon{{cap}} : polygon_union(region, MultiPolygon{{cap}});
    }
    return region;
}

} // namespace

Polygon disk(Position c, double r, int k)
{
    Ring ring;
    const int n = 2 * k;
    for (int j = 0; j < n; ++j)
        ring.push_back(on_circle(c, r, std::numbers::pi * j / k));
    ring.push_back(ring.front());
    return Polygon{std::move(ring), {}};
}

Polygon capsule(Position a, Position b, double r, int k)
{
    auto d = b - a;
    double theta = std::atan2(d.y, d.x);
    Ring ring;
    // Half disk around b from the right offset to the left offset, then
    // around a from the left offset back to the right one.
    for (int j = 0; j <= k; ++j)
        ring.push_back(on_circle(b, r, theta - std::numbers::pi / 2 + std::numbers::pi * j / k));
    for (int j = 0; j <= k; ++j)
        ring.push_back(on_circle(a, r, theta + std::numbers::pi / 2 + std::numbers::pi * j / k));
    ring.push_back(ring.front());
    return Polygon{std::move(ring), {}};
}

bool is_simple(const std::vector<Position>& line)
{
    const std::size_t n = line.size();
    if (n < 3)
        return true;
    const bool closed = line.front() == line.back();
    const std::size_t segs = n - 1;
    for (std::size_t i = 0; i < segs; ++i) {
        for (std::size_t j = i + 1; j < segs; ++j) {
            bool adjacent = j == i + 1 || (closed && i == 0 && j == segs - 1);
            if (adjacent) {
                // Adjacent segments share one endpoint; they must not fold back.
                auto shared = j == i + 1 ? line[j] : line[0];
                auto u = (j == i + 1 ? line[i] : line[1]) - shared;
                auto v = (j == i + 1 ? line[j + 1] : line[segs - 1]) - shared;
                if (cross(u, v) == 0.0 && dot(u, v) > 0.0)
                    return false;
                if (segs == 2 && closed)
                    return false;
                continue;
            }
            if (segments_touch(line[i], line[i + 1], line[j], line[j + 1]))
                return false;
        }
    }
    return true;
}

Geometry buffer(const Geometry& g, const BufferParams& p)
{
    if (!(p.distance > 0.0) || !std::isfinite(p.distance))
        throw Error(Errc::NonPositiveDistance, "buffer distance must be finite and positive");
    if (p.cap_segments < 4)
        throw Error(Errc::InvalidParameter, "cap_segments must be at least 4");

    MultiPolygon region;
    if (const auto* pt = std::get_if<Point>(&g.shape)) {
        region.polygons.push_back(disk(pt->pos, p.distance, p.cap_segments));
    } else if (const auto* ls = std::get_if<LineString>(&g.shape)) {
        auto line = without_repeats(ls->points);
        if (line.size() == 1) {
            region.polygons.push_back(disk(line.front(), p.distance, p.cap_segments));
        } else {
            require_simple(line, "LineString");
            region = add_capsules(std::move(region), line, p);
        }
    } else if (const auto* poly = std::get_if<Polygon>(&g.shape)) {
        Polygon clean = normalize(*poly);
        clean.exterior = without_repeats(clean.exterior);
        for (auto& h : clean.interiors)
            h = without_repeats(h);
        require_simple(clean.exterior, "Polygon exterior");
        for (const auto& h : clean.interiors)
            require_simple(h, "Polygon interior");
        if (std::abs(signed_area(clean.exterior)) == 0.0)
            throw Error(Errc::InvalidGeometry, "polygon has zero area");
        region.polygons.push_back(clean);
        region = add_capsules(std::move(region), clean.exterior, p);
        for (const auto& h : clean.interiors)
            region = add_capsules(std::move(region), h, p);
    } else {
        throw Error(Errc::UnsupportedGeometry, std::string(type_name(g)) + " cannot be buffered");
    }

    Geometry out;
    out.srs = g.srs;
    if (region.polygons.size() == 1)
        out.shape = normalize(std::move(region.polygons.front()));
    else
        out.shape = MultiPolygon{std::move(region)};
    return normalize(std::move(out));
}

} // namespace geobind::kernel
