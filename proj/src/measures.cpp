#include "geobind/error.hpp"
#include "geobind/kernel.hpp"
#include "vec2.hpp"

namespace geobind::kernel {

using namespace geobind::detail;

namespace {

struct Accumulator {
    double weight = 0.0;
    double sx = 0.0;
    double sy = 0.0;

    void add(Position p, double w)
    {
        weight += w;
        sx += p.x * w;
        sy += p.y * w;
    }

    Position mean(const char* measure) const
    {
        if (weight == 0.0)
            throw Error(Errc::ZeroMeasure, std::string("geometry has zero ") + measure);
        return {sx / weight, sy / weight};
    }
};

void add_line(Accumulator& acc, const std::vector<Position>& pts)
{
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        acc.add((pts[i] + pts[i + 1]) * 0.5, norm(pts[i + 1] - pts[i]));
}

// Shoelace centroid terms; holes are clockwise so their weight is negative.
void add_ring(Accumulator& acc, const Ring& r)
{
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        double c = cross(r[i], r[i + 1]);
        acc.weight += c / 2.0;
        acc.sx += (r[i].x + r[i + 1].x) * c / 6.0;
        acc.sy += (r[i].y + r[i + 1].y) * c / 6.0;
    }
}

void add_polygon(Accumulator& acc, const Polygon& p)
{
    auto n = normalize(p);
    add_ring(acc, n.exterior);
    for (const auto& h : n.interiors)
        add_ring(acc, h);
}

} // namespace

Position centroid_position(const Geometry& g)
{
    Accumulator acc;
    return std::visit(
        [&](const auto& s) -> Position {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Point>) {
                return s.pos;
            } else if constexpr (std::is_same_v<T, MultiPoint>) {
                for (const auto& p : s.points)
                    acc.add(p, 1.0);
                return acc.mean("point count");
            } else if constexpr (std::is_same_v<T, LineString>) {
                add_line(acc, s.points);
                return acc.mean("length");
            } else if constexpr (std::is_same_v<T, MultiLineString>) {
                for (const auto& l : s.lines)
                    add_line(acc, l.points);
                return acc.mean("length");
            } else if constexpr (std::is_same_v<T, Polygon>) {
                add_polygon(acc, s);
                return acc.mean("area");
            } else {
                for (const auto& p : s.polygons)
                    add_polygon(acc, p);
                return acc.mean("area");
            }
        },
        g.shape);
}

Geometry centroid(const Geometry& g)
{
    return Geometry{Point{centroid_position(g)}, g.srs};
}

Geometry envelope(const Geometry& g)
{
    auto b = compute_bbox(g);
    Ring ring{{b.min_x, b.min_y}, {b.max_x, b.min_y}, {b.max_x, b.max_y}, {b.min_x, b.max_y}, {b.min_x, b.min_y}};
    return Geometry{Polygon{std::move(ring), {}}, g.srs};
}

} // namespace geobind::kernel
