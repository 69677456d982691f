// Boolean union of polygonal regions.
//
// Both operands are split at every mutual intersection and vertex-on-edge
// contact, all points are snapped to a tolerance grid, and each boundary
// fragment is kept when it lies outside the other operand. Fragments shared
// by both operands survive once when the interiors are on the same side and
// vanish when they face each other. The kept fragments are chained into
// rings, which are grouped into polygons by containment.

#include "geobind/error.hpp"
#include "geobind/kernel.hpp"
#include "vec2.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <unordered_map>
#include <utility>

namespace geobind::kernel {

using namespace geobind::detail;

namespace {

struct PositionHash {
    std::size_t operator()(const Position& p) const noexcept
    {
        std::size_t h = std::hash<double>{}(p.x);
        return h ^ (std::hash<double>{}(p.y) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    }
};

struct PairHash {
    std::size_t operator()(const std::pair<Position, Position>& s) const noexcept
    {
        PositionHash h;
        return h(s.first) * 31 + h(s.second);
    }
};

struct Segment {
    Position from;
    Position to;
};

// Merges points closer than the tolerance into the first one seen.
class Snapper {
public:
    explicit Snapper(double tolerance) : tol_(tolerance) {}

    Position snap(Position p)
    {
        auto cx = cell(p.x), cy = cell(p.y);
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = cells_.find(key(cx + dx, cy + dy));
                if (it == cells_.end())
                    continue;
                for (const auto& rep : it->second) {
                    if (std::abs(rep.x - p.x) <= tol_ && std::abs(rep.y - p.y) <= tol_)
                        return rep;
                }
            }
        }
        cells_[key(cx, cy)].push_back(p);
        return p;
    }

private:
    std::int64_t cell(double v) const { return static_cast<std::int64_t>(std::floor(v / tol_)); }
    static std::pair<std::int64_t, std::int64_t> key(std::int64_t x, std::int64_t y) { return {x, y}; }

    struct KeyHash {
        std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& k) const noexcept
        {
            return std::hash<std::int64_t>{}(k.first) * 1000003u ^ std::hash<std::int64_t>{}(k.second);
        }
    };

    double tol_;
    std::unordered_map<std::pair<std::int64_t, std::int64_t>, std::vector<Position>, KeyHash> cells_;
};

std::vector<Segment> edges_of(const std::vector<Ring>& rings)
{
    std::vector<Segment> out;
    for (const auto& r : rings) {
        for (std::size_t i = 0; i + 1 < r.size(); ++i) {
            if (r[i] != r[i + 1])
                out.push_back({r[i], r[i + 1]});
        }
    }
    return out;
}

std::vector<Ring> rings_of(const MultiPolygon& mp)
{
    std::vector<Ring> out;
    for (const auto& p : mp.polygons) {
        auto n = normalize(p);
        out.push_back(std::move(n.exterior));
        for (auto& h : n.interiors)
            out.push_back(std::move(h));
    }
    return out;
}

struct Box {
    double min_x, min_y, max_x, max_y;
};

Box box_of(const Segment& s, double pad)
{
    return {std::min(s.from.x, s.to.x) - pad, std::min(s.from.y, s.to.y) - pad,
            std::max(s.from.x, s.to.x) + pad, std::max(s.from.y, s.to.y) + pad};
}

bool overlaps(const Box& a, const Box& b)
{
    return a.min_x <= b.max_x && b.min_x <= a.max_x && a.min_y <= b.max_y && b.min_y <= a.max_y;
}

using Splits = std::vector<std::pair<double, Position>>;

void intersect(const Segment& a, const Segment& b, Splits& on_a, Splits& on_b, double tol)
{
    for (auto q : {b.from, b.to}) {
        if (distance_to_segment(q, a.from, a.to) <= tol)
            on_a.emplace_back(project(q, a.from, a.to), q);
    }
    for (auto p : {a.from, a.to}) {
        if (distance_to_segment(p, b.from, b.to) <= tol)
            on_b.emplace_back(project(p, b.from, b.to), p);
    }
    double la = norm(a.to - a.from), lb = norm(b.to - b.from);
    double o1 = orient(a.from, a.to, b.from), o2 = orient(a.from, a.to, b.to);
    double o3 = orient(b.from, b.to, a.from), o4 = orient(b.from, b.to, a.to);
    auto strictly_opposite = [tol](double u, double v, double len) {
        return (u > tol * len && v < -tol * len) || (u < -tol * len && v > tol * len);
    };
    if (strictly_opposite(o1, o2, la) && strictly_opposite(o3, o4, lb)) {
        double t = o3 / (o3 - o4);
        double s = o1 / (o1 - o2);
        Position x = a.from + (a.to - a.from) * t;
        on_a.emplace_back(t, x);
        on_b.emplace_back(s, x);
    }
}

std::vector<Segment> fragment(const std::vector<Segment>& edges, std::vector<Splits>& splits, Snapper& snapper)
{
    std::vector<Segment> out;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto& sp = splits[i];
        std::sort(sp.begin(), sp.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
        std::vector<Position> chain;
        chain.push_back(snapper.snap(edges[i].from));
        for (const auto& [t, p] : sp)
            chain.push_back(snapper.snap(p));
        chain.push_back(snapper.snap(edges[i].to));
        Position prev = chain.front();
        for (std::size_t k = 1; k < chain.size(); ++k) {
            if (chain[k] != prev) {
                out.push_back({prev, chain[k]});
                prev = chain[k];
            }
        }
    }
    return out;
}

int winding(const std::vector<Segment>& boundary, Position p)
{
    int wn = 0;
    for (const auto& s : boundary) {
        if (s.from.y <= p.y) {
            if (s.to.y > p.y && orient(s.from, s.to, p) > 0.0)
                ++wn;
        } else if (s.to.y <= p.y && orient(s.from, s.to, p) < 0.0) {
            --wn;
        }
    }
    return wn;
}

Box bounds(const std::vector<Segment>& segs)
{
    Box b{INFINITY, INFINITY, -INFINITY, -INFINITY};
    for (const auto& s : segs) {
        for (auto p : {s.from, s.to}) {
            b.min_x = std::min(b.min_x, p.x);
            b.min_y = std::min(b.min_y, p.y);
            b.max_x = std::max(b.max_x, p.x);
            b.max_y = std::max(b.max_y, p.y);
        }
    }
    return b;
}

// Clockwise sweep from `back` to `dir`, in (0, 2pi].
double clockwise_angle(Position back, Position dir)
{
    double ccw = std::atan2(cross(back, dir), dot(back, dir));
    double cw = -ccw;
    if (cw <= 0.0)
        cw += 2.0 * std::numbers::pi;
    return cw;
}

std::vector<Ring> stitch(const std::vector<Segment>& kept)
{
    std::unordered_map<Position, std::vector<std::size_t>, PositionHash> outgoing;
    for (std::size_t i = 0; i < kept.size(); ++i)
        outgoing[kept[i].from].push_back(i);

    std::vector<bool> used(kept.size(), false);
    std::vector<Ring> rings;
    for (std::size_t start = 0; start < kept.size(); ++start) {
        if (used[start])
            continue;
        Ring ring{kept[start].from};
        used[start] = true;
        std::size_t current = start;
        for (;;) {
            Position here = kept[current].to;
            ring.push_back(here);
            if (here == kept[start].from)
                break;
            const auto it = outgoing.find(here);
            if (it == outgoing.end())
                throw Error(Errc::DegenerateIntersection, "union boundary has a dangling end");
            Position back = kept[current].from - here;
            std::size_t best = kept.size();
            double best_angle = INFINITY;
            for (auto cand : it->second) {
                if (used[cand])
                    continue;
                double a = clockwise_angle(back, kept[cand].to - here);
                if (a < best_angle) {
                    best_angle = a;
                    best = cand;
                }
            }
            if (best == kept.size())
                throw Error(Errc::DegenerateIntersection, "union boundary does not close");
            used[best] = true;
            current = best;
        }
        rings.push_back(std::move(ring));
    }
    return rings;
}

// Drops vertices lying on the straight line between their neighbours.
Ring simplify(const Ring& ring, double tol)
{
    if (ring.size() < 4)
        return ring;
    std::vector<Position> pts(ring.begin(), ring.end() - 1);
    bool changed = true;
    while (changed && pts.size() >= 3) {
        changed = false;
        for (std::size_t i = 0; i < pts.size() && pts.size() >= 3; ++i) {
            auto prev = pts[(i + pts.size() - 1) % pts.size()];
            auto next = pts[(i + 1) % pts.size()];
            auto d1 = pts[i] - prev, d2 = next - pts[i];
            double len = norm(next - prev);
            if (len > 0.0 && std::abs(cross(d1, d2)) <= tol * len && dot(d1, d2) > 0.0) {
                pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                --i;
            }
        }
    }
    Ring out(pts.begin(), pts.end());
    if (!out.empty())
        out.push_back(out.front());
    return out;
}

bool ring_contains(const Ring& ring, Position p)
{
    bool inside = false;
    for (std::size_t i = 0, n = ring.size(); i + 1 < n; ++i) {
        auto a = ring[i], b = ring[i + 1];
        if ((a.y > p.y) != (b.y > p.y)) {
            double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x)
                inside = !inside;
        }
    }
    return inside;
}

Position hole_probe(const Ring& hole)
{
    std::size_t longest = 0;
    double best = -1.0;
    for (std::size_t i = 0; i + 1 < hole.size(); ++i) {
        double len = norm(hole[i + 1] - hole[i]);
        if (len > best) {
            best = len;
            longest = i;
        }
    }
    return (hole[longest] + hole[longest + 1]) * 0.5;
}

MultiPolygon assemble(std::vector<Ring> rings, double tol)
{
    std::vector<Ring> shells, holes;
    for (auto& r : rings) {
        r = simplify(r, tol);
        if (r.size() < 4)
            continue;
        double a = signed_area(r);
        double perimeter = 0.0;
        for (std::size_t i = 0; i + 1 < r.size(); ++i)
            perimeter += norm(r[i + 1] - r[i]);
        if (std::abs(a) <= tol * perimeter)
            continue;
        (a > 0.0 ? shells : holes).push_back(std::move(r));
    }

    MultiPolygon out;
    for (auto& s : shells)
        out.polygons.push_back(Polygon{std::move(s), {}});
    for (auto& h : holes) {
        auto probe = hole_probe(h);
        Polygon* owner = nullptr;
        double owner_area = INFINITY;
        for (auto& p : out.polygons) {
            double a = signed_area(p.exterior);
            if (a < owner_area && ring_contains(p.exterior, probe)) {
                owner = &p;
                owner_area = a;
            }
        }
        if (!owner)
            throw Error(Errc::DegenerateIntersection, "hole outside every shell");
        owner->interiors.push_back(std::move(h));
    }
    return out;
}

double coordinate_scale(const std::vector<Segment>& a, const std::vector<Segment>& b)
{
    double scale = 1.0;
    for (const auto* set : {&a, &b}) {
        for (const auto& s : *set) {
            scale = std::max({scale, std::abs(s.from.x), std::abs(s.from.y), std::abs(s.to.x), std::abs(s.to.y)});
        }
    }
    return scale;
}

MultiPolygon unite(const std::vector<Ring>& a_rings, const std::vector<Ring>& b_rings)
{
    auto ea = edges_of(a_rings);
    auto eb = edges_of(b_rings);
    if (ea.empty())
        return assemble(b_rings, 0.0);
    if (eb.empty())
        return assemble(a_rings, 0.0);

    const double tol = 1e-11 * coordinate_scale(ea, eb);

    std::vector<Splits> sa(ea.size()), sb(eb.size());
    std::vector<Box> boxes_b(eb.size());
    for (std::size_t j = 0; j < eb.size(); ++j)
        boxes_b[j] = box_of(eb[j], tol);
    for (std::size_t i = 0; i < ea.size(); ++i) {
        auto ba = box_of(ea[i], tol);
        for (std::size_t j = 0; j < eb.size(); ++j) {
            if (overlaps(ba, boxes_b[j]))
                intersect(ea[i], eb[j], sa[i], sb[j], tol);
        }
    }

    Snapper snapper(tol);
    for (const auto& e : ea)
        snapper.snap(e.from);
    for (const auto& e : eb)
        snapper.snap(e.from);
    auto fa = fragment(ea, sa, snapper);
    auto fb = fragment(eb, sb, snapper);

    // Shared fragments: keep one copy when both interiors lie on the same
    // side, drop both when they face each other.
    std::unordered_multimap<std::pair<Position, Position>, std::size_t, PairHash> index_b;
    for (std::size_t j = 0; j < fb.size(); ++j)
        index_b.emplace(std::make_pair(fb[j].from, fb[j].to), j);
    std::vector<char> decided_a(fa.size(), 0), keep_a(fa.size(), 0);
    std::vector<char> decided_b(fb.size(), 0), keep_b(fb.size(), 0);
    auto take = [&](const Position& from, const Position& to) -> std::size_t {
        auto range = index_b.equal_range({from, to});
        for (auto it = range.first; it != range.second; ++it) {
            if (!decided_b[it->second])
                return it->second;
        }
        return fb.size();
    };
    for (std::size_t i = 0; i < fa.size(); ++i) {
        if (auto j = take(fa[i].from, fa[i].to); j != fb.size()) {
            decided_a[i] = decided_b[j] = 1;
            keep_a[i] = 1;
        } else if (auto k = take(fa[i].to, fa[i].from); k != fb.size()) {
            decided_a[i] = decided_b[k] = 1;
        }
    }

    auto box_a = bounds(fa), box_b = bounds(fb);
    auto outside = [](const std::vector<Segment>& other, const Box& other_box, const Segment& s) {
        Position m = (s.from + s.to) * 0.5;
        if (m.x < other_box.min_x || m.x > other_box.max_x || m.y < other_box.min_y || m.y > other_box.max_y)
            return true;
        return winding(other, m) == 0;
    };
    std::vector<Segment> kept;
    for (std::size_t i = 0; i < fa.size(); ++i) {
        if (decided_a[i] ? keep_a[i] : outside(fb, box_b, fa[i]))
            kept.push_back(fa[i]);
    }
    for (std::size_t j = 0; j < fb.size(); ++j) {
        if (!decided_b[j] && outside(fa, box_a, fb[j]))
            kept.push_back(fb[j]);
    }
    return assemble(stitch(kept), tol);
}

} // namespace

MultiPolygon polygon_union(const Polygon& a, const Polygon& b)
{
    return polygon_union(MultiPolygon{{a}}, MultiPolygon{{b}});
}

MultiPolygon polygon_union(const MultiPolygon& a, const MultiPolygon& b)
{
    return unite(rings_of(a), rings_of(b));
}

bool contains(const MultiPolygon& region, Position p)
{
    bool inside = false;
    for (const auto& poly : region.polygons) {
        if (ring_contains(poly.exterior, p))
            inside = !inside;
        for (const auto& h : poly.interiors) {
            if (ring_contains(h, p))
                inside = !inside;
        }
    }
    return inside;
}

} // namespace geobind::kernel
