#include "geobind/geojson.hpp"

#include "geobind/error.hpp"

#include <cmath>

namespace geobind::geojson {

namespace {

// Integral values are emitted as JSON integers so that Point(1,2) reads
// [1,2]; everything else keeps nlohmann's shortest round-trip form.
Json number(double v)
{
    if (std::trunc(v) == v && std::abs(v) < 9.0e15 && !(v == 0.0 && std::signbit(v)))
        return static_cast<std::int64_t>(v);
    return v;
}

Json position(const Position& p)
{
    return Json::array({number(p.x), number(p.y)});
}

Json positions(const std::vector<Position>& ps)
{
    Json arr = Json::array();
    for (const auto& p : ps)
        arr.push_back(position(p));
    return arr;
}

Json polygon(const Polygon& p)
{
    Json rings = Json::array();
    rings.push_back(positions(p.exterior));
    for (const auto& h : p.interiors)
        rings.push_back(positions(h));
    return rings;
}

[[noreturn]] void fail(const std::string& why)
{
    throw Error(Errc::GeoJsonSyntax, why);
}

Position read_position(const Json& j)
{
    if (!j.is_array() || j.size() < 2 || !j[0].is_number() || !j[1].is_number())
        fail("position must be an array of at least two numbers");
    if (j.size() > 2)
        throw Error(Errc::UnsupportedGeometry, "only 2D coordinates are supported");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Position> read_positions(const Json& j)
{
    if (!j.is_array())
        fail("expected an array of positions");
    std::vector<Position> out;
    for (const auto& p : j)
        out.push_back(read_position(p));
    return out;
}

Polygon read_polygon(const Json& j)
{
    if (!j.is_array() || j.empty())
        fail("polygon needs at least one ring");
    Polygon p;
    p.exterior = read_positions(j[0]);
    for (std::size_t i = 1; i < j.size(); ++i)
        p.interiors.push_back(read_positions(j[i]));
    return p;
}

const Json& member(const Json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end())
        fail(std::string("missing member '") + key + "'");
    return *it;
}

std::string attribute_text(const Json& v)
{
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_null())
        return {};
    return v.dump();
}

Feature read_feature(const Json& j, std::size_t index, std::string_view srs)
{
    if (!j.is_object() || member(j, "type") != "Feature")
        fail("expected a Feature object");
    Feature f;
    if (auto id = j.find("id"); id != j.end() && !id->is_null())
        f.id = attribute_text(*id);
    if (f.id.empty())
        f.id = "feature." + std::to_string(index + 1);
    const auto& geom = member(j, "geometry");
    if (geom.is_null())
        throw Error(Errc::NoGeometryProperty, "feature '" + f.id + "' has a null geometry");
    f.geometry = geometry_from_json(geom, srs);
    if (auto props = j.find("properties"); props != j.end() && props->is_object()) {
        for (const auto& [key, value] : props->items())
            f.attributes.emplace_back(key, attribute_text(value));
    }
    return f;
}

} // namespace

Json geometry_to_json(const Geometry& g)
{
    Json out;
    out["type"] = std::string(type_name(g));
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Point>) {
                out["coordinates"] = position(s.pos);
            } else if constexpr (std::is_same_v<T, LineString> || std::is_same_v<T, MultiPoint>) {
                out["coordinates"] = positions(s.points);
            } else if constexpr (std::is_same_v<T, Polygon>) {
                out["coordinates"] = polygon(s);
            } else if constexpr (std::is_same_v<T, MultiLineString>) {
                Json lines = Json::array();
                for (const auto& l : s.lines)
                    lines.push_back(positions(l.points));
                out["coordinates"] = std::move(lines);
            } else {
                Json polys = Json::array();
                for (const auto& p : s.polygons)
                    polys.push_back(polygon(p));
                out["coordinates"] = std::move(polys);
            }
        },
        g.shape);
    return out;
}

Json feature_collection_to_json(const FeatureCollection& fc)
{
    Json features = Json::array();
    for (const auto& f : fc.features) {
        Json props = Json::object();
        for (const auto& [k, v] : f.attributes)
            props[k] = v;
        Json feature;
        feature["type"] = "Feature";
        feature["id"] = f.id;
        feature["geometry"] = geometry_to_json(f.geometry);
        feature["properties"] = std::move(props);
        features.push_back(std::move(feature));
    }
    Json out;
    out["type"] = "FeatureCollection";
    out["features"] = std::move(features);
    return out;
}

std::string to_interchange(const FeatureCollection& fc)
{
    return feature_collection_to_json(fc).dump();
}

Geometry geometry_from_json(const Json& j, std::string_view srs)
{
    if (!j.is_object())
        fail("geometry must be an object");
    const auto& type = member(j, "type");
    if (!type.is_string())
        fail("geometry type must be a string");
    const auto t = type.get<std::string>();
    if (t == "GeometryCollection")
        throw Error(Errc::UnsupportedGeometry, "GeometryCollection is not supported");
    const auto& c = member(j, "coordinates");

    Geometry g;
    g.srs = std::string(srs);
    if (t == "Point") {
        g.shape = Point{read_position(c)};
    } else if (t == "LineString") {
        g.shape = LineString{read_positions(c)};
    } else if (t == "Polygon") {
        g.shape = read_polygon(c);
    } else if (t == "MultiPoint") {
        g.shape = MultiPoint{read_positions(c)};
    } else if (t == "MultiLineString") {
        if (!c.is_array())
            fail("MultiLineString coordinates must be an array");
        MultiLineString ml;
        for (const auto& l : c)
            ml.lines.push_back(LineString{read_positions(l)});
        g.shape = std::move(ml);
    } else if (t == "MultiPolygon") {
        if (!c.is_array())
            fail("MultiPolygon coordinates must be an array");
        MultiPolygon mp;
        for (const auto& p : c)
            mp.polygons.push_back(read_polygon(p));
        g.shape = std::move(mp);
    } else {
        fail("unknown geometry type '" + t + "'");
    }
    try {
        validate(g);
    } catch (const Error& e) {
        fail(e.what());
    }
    return normalize(std::move(g));
}

FeatureCollection feature_collection_from_json(const Json& j, std::string_view srs)
{
    if (!j.is_object())
        fail("expected a JSON object");
    FeatureCollection fc;
    fc.srs = std::string(srs);
    const auto& type = member(j, "type");
    if (type == "FeatureCollection") {
        const auto& features = member(j, "features");
        if (!features.is_array())
            fail("'features' must be an array");
        for (std::size_t i = 0; i < features.size(); ++i)
            fc.features.push_back(read_feature(features[i], i, srs));
    } else if (type == "Feature") {
        fc.features.push_back(read_feature(j, 0, srs));
    } else {
        fc.features.push_back(Feature{"feature.1", geometry_from_json(j, srs), {}});
    }
    return fc;
}

FeatureCollection read_features(std::string_view text, std::string_view srs)
{
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(e.what());
    }
    return feature_collection_from_json(j, srs);
}

} // namespace geobind::geojson
