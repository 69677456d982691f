#include "geobind/gml.hpp"

#include "geobind/error.hpp"

#include <charconv>
#include <cmath>
#include <set>

namespace geobind::gml {

using xml::kGmlNs;

namespace {

const std::set<std::string, std::less<>> kGeometryNames = {
    "Point", "LineString", "Polygon", "MultiPoint", "MultiLineString", "MultiPolygon",
    "MultiCurve", "MultiSurface", "LinearRing", "Curve", "Surface", "MultiGeometry",
    "Envelope", "Box", "OrientableCurve", "CompositeCurve", "CompositeSurface", "Solid",
};

bool is_sep(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

double parse_number(std::string_view token)
{
    double v = 0.0;
    const char* first = token.data();
    const char* last = first + token.size();
    if (first != last && *first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v))
        throw Error(Errc::MalformedCoordinates, "not a number: '" + std::string(token) + "'");
    return v;
}

std::vector<double> parse_numbers(std::string_view text)
{
    std::vector<double> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_sep(text[i]))
            ++i;
        auto start = i;
        while (i < text.size() && !is_sep(text[i]))
            ++i;
        if (i > start)
            out.push_back(parse_number(text.substr(start, i - start)));
    }
    return out;
}

std::vector<Position> pairs(const std::vector<double>& values)
{
    if (values.size() % 2 != 0)
        throw Error(Errc::MalformedCoordinates, "odd number of coordinate values");
    std::vector<Position> out;
    out.reserve(values.size() / 2);
    for (std::size_t i = 0; i < values.size(); i += 2)
        out.push_back({values[i], values[i + 1]});
    return out;
}

void check_dimension(const xml::Element& e)
{
    if (auto dim = e.attribute("srsDimension"); dim && *dim != "2")
        throw Error(Errc::UnsupportedGeometry, "only 2D coordinates are supported");
}

// gml:coordinates with its cs / ts / decimal attributes.
std::vector<Position> parse_coordinates_element(const xml::Element& e)
{
    auto cs = e.attribute("cs").value_or(",");
    auto ts = e.attribute("ts").value_or(" ");
    auto dec = e.attribute("decimal").value_or(".");
    if (cs.size() != 1 || ts.size() != 1 || dec.size() != 1)
        throw Error(Errc::MalformedCoordinates, "multi-character coordinate separators");
    std::string text = e.trimmed_text();
    for (auto& c : text) {
        if (c == cs[0] || (is_sep(ts[0]) ? is_sep(c) : c == ts[0]))
            c = ' ';
        else if (c == dec[0])
            c = '.';
    }
    return pairs(parse_numbers(text));
}

// Position sequence of a LineString or LinearRing element.
std::vector<Position> read_positions(const xml::Element& e)
{
    check_dimension(e);
    if (const auto* list = e.child(kGmlNs, "posList")) {
        check_dimension(*list);
        return pairs(parse_numbers(list->text));
    }
    if (const auto* coords = e.child(kGmlNs, "coordinates"))
        return parse_coordinates_element(*coords);
    std::vector<Position> out;
    for (const auto* pos : e.children_named(kGmlNs, "pos")) {
        check_dimension(*pos);
        auto values = parse_numbers(pos->text);
        if (values.size() != 2)
            throw Error(Errc::MalformedCoordinates, "gml:pos must hold exactly 2 values");
        out.push_back({values[0], values[1]});
    }
    return out;
}

Position read_point(const xml::Element& e)
{
    check_dimension(e);
    std::vector<Position> ps;
    if (const auto* pos = e.child(kGmlNs, "pos")) {
        check_dimension(*pos);
        ps = pairs(parse_numbers(pos->text));
    } else if (const auto* coords = e.child(kGmlNs, "coordinates")) {
        ps = parse_coordinates_element(*coords);
    } else {
        throw Error(Errc::MalformedCoordinates, "gml:Point without gml:pos");
    }
    if (ps.size() != 1)
        throw Error(Errc::MalformedCoordinates, "gml:Point must hold exactly one position");
    return ps.front();
}

LineString read_line(const xml::Element& e)
{
    LineString l{read_positions(e)};
    if (l.points.size() < 2)
        throw Error(Errc::MalformedCoordinates, "gml:LineString needs at least 2 positions");
    return l;
}

Ring read_ring_holder(const xml::Element& holder)
{
    const auto* ring = holder.child(kGmlNs, "LinearRing");
    if (!ring)
        throw Error(Errc::UnsupportedGeometry, "ring boundary must be a gml:LinearRing");
    Ring r = read_positions(*ring);
    if (r.size() < 4 || r.front() != r.back())
        throw Error(Errc::MalformedCoordinates, "gml:LinearRing must be closed with at least 4 positions");
    return r;
}

Polygon read_polygon(const xml::Element& e)
{
    check_dimension(e);
    Polygon p;
    const auto* ext = e.child(kGmlNs, "exterior");
    if (!ext)
        ext = e.child(kGmlNs, "outerBoundaryIs");
    if (!ext)
        throw Error(Errc::MalformedCoordinates, "gml:Polygon without exterior");
    p.exterior = read_ring_holder(*ext);
    for (const auto& c : e.children) {
        if (c.is(kGmlNs, "interior") || c.is(kGmlNs, "innerBoundaryIs"))
            p.interiors.push_back(read_ring_holder(c));
    }
    return normalize(std::move(p));
}

// Members of a Multi* aggregate: both <xMember> and <xMembers> forms.
std::vector<const xml::Element*> members(const xml::Element& e, std::string_view single,
                                         std::string_view plural, std::string_view item)
{
    std::vector<const xml::Element*> out;
    for (const auto& c : e.children) {
        if (c.is(kGmlNs, single)) {
            const auto* m = c.first_child();
            if (!m)
                throw Error(Errc::MalformedCoordinates, "empty gml:" + std::string(single));
            out.push_back(m);
        } else if (c.is(kGmlNs, plural)) {
            for (const auto& m : c.children)
                out.push_back(&m);
        }
    }
    for (const auto* m : out) {
        if (!m->is(kGmlNs, item))
            throw Error(Errc::UnsupportedGeometry, "unsupported member gml:" + m->local);
    }
    return out;
}

void write_positions(xml::Writer& w, std::string_view element, const std::vector<Position>& ps)
{
    std::string text;
    for (const auto& p : ps) {
        if (!text.empty())
            text += ' ';
        text += format_number(p.x);
        text += ' ';
        text += format_number(p.y);
    }
    w.element(element, text);
}

void write_polygon_body(xml::Writer& w, const Polygon& p)
{
    w.start("gml:exterior").start("gml:LinearRing");
    write_positions(w, "gml:posList", p.exterior);
    w.end().end();
    for (const auto& h : p.interiors) {
        w.start("gml:interior").start("gml:LinearRing");
        write_positions(w, "gml:posList", h);
        w.end().end();
    }
}

void open_root(xml::Writer& w, std::string_view name, const Geometry& g, bool declare)
{
    w.start(std::string("gml:") + std::string(name));
    if (declare)
        w.attr("xmlns:gml", kGmlNs);
    w.attr("srsName", g.srs);
}

std::string feature_id(const xml::Element& f, std::size_t index)
{
    if (auto id = f.attribute("id", kGmlNs))
        return *id;
    if (auto fid = f.attribute("fid"))
        return *fid;
    if (auto id = f.attribute("id"))
        return *id;
    return f.local + "." + std::to_string(index + 1);
}

Feature read_feature(const xml::Element& f, std::size_t index)
{
    Feature feature;
    feature.id = feature_id(f, index);
    bool have_geometry = false;
    for (const auto& prop : f.children) {
        if (prop.is(kGmlNs, "boundedBy"))
            continue;
        const auto* inner = prop.first_child();
        if (inner && inner->ns == kGmlNs) {
            if (!have_geometry) {
                feature.geometry = parse_geometry(*inner);
                have_geometry = true;
            }
            continue;
        }
        if (inner)
            continue;
        feature.attributes.emplace_back(prop.local, prop.trimmed_text());
    }
    if (!have_geometry)
        throw Error(Errc::NoGeometryProperty, "feature '" + feature.id + "' has no geometry property");
    return feature;
}

} // namespace

std::string format_number(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

bool is_geometry_element(const xml::Element& e)
{
    return e.ns == kGmlNs && kGeometryNames.count(e.local) > 0;
}

Geometry parse_geometry(std::string_view doc)
{
    auto parsed = xml::parse(doc);
    return parse_geometry(parsed.root);
}

Geometry parse_geometry(const xml::Element& e)
{
    if (e.ns != kGmlNs)
        throw Error(Errc::UnsupportedGeometry, "not a GML element: " + e.local);
    Geometry g;
    if (auto srs = e.attribute("srsName"); srs && !srs->empty())
        g.srs = *srs;

    if (e.local == "Point") {
        g.shape = Point{read_point(e)};
    } else if (e.local == "LineString") {
        g.shape = read_line(e);
    } else if (e.local == "Polygon") {
        g.shape = read_polygon(e);
    } else if (e.local == "MultiPoint") {
        MultiPoint mp;
        for (const auto* m : members(e, "pointMember", "pointMembers", "Point"))
            mp.points.push_back(read_point(*m));
        g.shape = std::move(mp);
    } else if (e.local == "MultiLineString" || e.local == "MultiCurve") {
        bool curve = e.local == "MultiCurve";
        MultiLineString ml;
        for (const auto* m : members(e, curve ? "curveMember" : "lineStringMember",
                                     curve ? "curveMembers" : "lineStringMembers", "LineString"))
            ml.lines.push_back(read_line(*m));
        g.shape = std::move(ml);
    } else if (e.local == "MultiPolygon" || e.local == "MultiSurface") {
        bool surface = e.local == "MultiSurface";
        MultiPolygon mp;
        for (const auto* m : members(e, surface ? "surfaceMember" : "polygonMember",
                                     surface ? "surfaceMembers" : "polygonMembers", "Polygon"))
            mp.polygons.push_back(read_polygon(*m));
        g.shape = std::move(mp);
    } else {
        throw Error(Errc::UnsupportedGeometry, "unsupported geometry gml:" + e.local);
    }
    return g;
}

void write_geometry(xml::Writer& w, const Geometry& g, bool declare_namespace)
{
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Point>) {
                open_root(w, "Point", g, declare_namespace);
                write_positions(w, "gml:pos", {s.pos});
                w.end();
            } else if constexpr (std::is_same_v<T, LineString>) {
                open_root(w, "LineString", g, declare_namespace);
                write_positions(w, "gml:posList", s.points);
                w.end();
            } else if constexpr (std::is_same_v<T, Polygon>) {
                open_root(w, "Polygon", g, declare_namespace);
                write_polygon_body(w, s);
                w.end();
            } else if constexpr (std::is_same_v<T, MultiPoint>) {
                open_root(w, "MultiPoint", g, declare_namespace);
                for (const auto& p : s.points) {
                    w.start("gml:pointMember").start("gml:Point");
                    write_positions(w, "gml:pos", {p});
                    w.end().end();
                }
                w.end();
            } else if constexpr (std::is_same_v<T, MultiLineString>) {
                open_root(w, "MultiLineString", g, declare_namespace);
                for (const auto& l : s.lines) {
                    w.start("gml:lineStringMember").start("gml:LineString");
                    write_positions(w, "gml:posList", l.points);
                    w.end().end();
                }
                w.end();
            } else {
                open_root(w, "MultiPolygon", g, declare_namespace);
                for (const auto& p : s.polygons) {
                    w.start("gml:polygonMember").start("gml:Polygon");
                    write_polygon_body(w, p);
                    w.end().end();
                }
                w.end();
            }
        },
        g.shape);
}

std::string serialize_geometry(const Geometry& g)
{
    xml::Writer w;
    write_geometry(w, g, true);
    return w.take();
}

FeatureCollection parse_feature_collection(std::string_view doc)
{
    auto parsed = xml::parse(doc);
    return parse_feature_collection(parsed.root);
}

FeatureCollection parse_feature_collection(const xml::Element& root)
{
    std::vector<const xml::Element*> feature_elements;
    for (const auto& c : root.children) {
        if (c.is(kGmlNs, "featureMember")) {
            if (const auto* f = c.first_child())
                feature_elements.push_back(f);
        } else if (c.is(kGmlNs, "featureMembers")) {
            for (const auto& f : c.children)
                feature_elements.push_back(&f);
        }
    }

    FeatureCollection fc;
    for (std::size_t i = 0; i < feature_elements.size(); ++i) {
        auto feature = read_feature(*feature_elements[i], i);
        if (i == 0)
            fc.srs = feature.geometry.srs;
        else if (feature.geometry.srs != fc.srs)
            throw Error(Errc::MixedSrs, "feature '" + feature.id + "' uses " + feature.geometry.srs
                                            + ", collection uses " + fc.srs);
        fc.features.push_back(std::move(feature));
    }
    return fc;
}

std::string serialize_feature_collection(const FeatureCollection& fc, std::string_view type_name)
{
    const std::string element = "app:" + std::string(type_name);
    xml::Writer w;
    w.declaration();
    w.start("wfs:FeatureCollection")
        .attr("xmlns:wfs", xml::kWfsNs)
        .attr("xmlns:gml", kGmlNs)
        .attr("xmlns:app", kAppNs)
        .attr("numberOfFeatures", std::to_string(fc.features.size()));
    for (const auto& f : fc.features) {
        w.start("gml:featureMember").start(element).attr("gml:id", f.id);
        w.start("app:geometry");
        write_geometry(w, f.geometry, false);
        w.end();
        for (const auto& [name, value] : f.attributes)
            w.element("app:" + name, value);
        w.end().end();
    }
    w.end();
    return w.take();
}

std::vector<Geometry> extract_geometries(const FeatureCollection& fc)
{
    std::vector<Geometry> out;
    out.reserve(fc.features.size());
    for (const auto& f : fc.features)
        out.push_back(f.geometry);
    return out;
}

} // namespace geobind::gml
