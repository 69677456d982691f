#include "geobind/error.hpp"
#include "geobind/fixtures.hpp"
#include "geobind/geojson.hpp"
#include "geobind/gml.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace geobind;

namespace {

Errc code_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return Errc::ConfigError;
}

const char* kGml = R"(xmlns:gml="http://www.opengis.net/gml")";

Geometry random_geometry(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    auto pos = [&] { return Position{u(rng), u(rng)}; };
    switch (rng() % 6) {
    case 0:
        return Geometry{Point{pos()}};
    case 1: {
        LineString l;
        for (int i = 0, n = 2 + int(rng() % 6); i < n; ++i)
            l.points.push_back(pos());
        return Geometry{l};
    }
    case 2:
        return Geometry{oracle::random_star(rng, pos(), 1, 10, 3 + int(rng() % 8))};
    case 3: {
        MultiPoint mp;
        for (int i = 0, n = 1 + int(rng() % 4); i < n; ++i)
            mp.points.push_back(pos());
        return Geometry{mp};
    }
    case 4: {
        MultiLineString ml;
        for (int k = 0, m = 1 + int(rng() % 3); k < m; ++k) {
            LineString l;
            for (int i = 0; i < 3; ++i)
                l.points.push_back(pos());
            ml.lines.push_back(l);
        }
        return Geometry{ml};
    }
    default: {
        MultiPolygon mp;
        mp.polygons.push_back(oracle::random_star(rng, {0, 0}, 1, 2, 5));
        mp.polygons.push_back(oracle::random_star(rng, {10, 10}, 1, 2, 6));
        return Geometry{mp};
    }
    }
}

} // namespace

TEST_CASE("parse_geometry examples")
{
    auto g = gml::parse_geometry(std::string("<gml:LineString ") + kGml
                                 + "><gml:posList>0 0 10 0</gml:posList></gml:LineString>");
    CHECK(g.shape == Shape{LineString{{{0, 0}, {10, 0}}}});
    CHECK(g.srs == "EPSG:4326");

    CHECK(code_of([] {
              gml::parse_geometry(std::string("<gml:LineString ") + kGml
                                  + "><gml:posList>0 0 10</gml:posList></gml:LineString>");
          })
          == Errc::MalformedCoordinates);
    CHECK(code_of([] {
              gml::parse_geometry(std::string("<gml:Point ") + kGml + "><gml:pos>1 x</gml:pos></gml:Point>");
          })
          == Errc::MalformedCoordinates);
    CHECK(code_of([] { gml::parse_geometry(std::string("<gml:Curve ") + kGml + "/>"); })
          == Errc::UnsupportedGeometry);
    CHECK(code_of([] { gml::parse_geometry("<gml:Point"); }) == Errc::XmlSyntax);

    // Clockwise exterior is stored counter-clockwise.
    auto poly = gml::parse_geometry(std::string("<gml:Polygon srsName=\"EPSG:3857\" ") + kGml
                                    + "><gml:exterior><gml:LinearRing><gml:posList>0 0 0 2 2 2 2 0 0 0"
                                      "</gml:posList></gml:LinearRing></gml:exterior></gml:Polygon>");
    CHECK(poly.srs == "EPSG:3857");
    const auto& p = std::get<Polygon>(poly.shape);
    CHECK(oracle::shoelace(p.exterior) == doctest::Approx(4.0));

    // Legacy coordinates form is read.
    auto legacy = gml::parse_geometry(std::string("<gml:LineString ") + kGml
                                      + "><gml:coordinates>1,2 3,4</gml:coordinates></gml:LineString>");
    CHECK(legacy.shape == Shape{LineString{{{1, 2}, {3, 4}}}});
}

TEST_CASE("serialize_geometry examples")
{
    auto text = gml::serialize_geometry(Geometry{Point{{1, 2}}});
    CHECK(text.find("<gml:pos>1 2</gml:pos>") != std::string::npos);
    CHECK(text.find("srsName=\"EPSG:4326\"") != std::string::npos);
    CHECK(text.rfind("<?xml", 0) == std::string::npos);

    double tricky = 0.1 + 0.2;
    Geometry l{LineString{{{tricky, 1e-300}, {-0.0, 123456789.123456789}}}};
    auto back = gml::parse_geometry(gml::serialize_geometry(l));
    const auto& pts = std::get<LineString>(back.shape).points;
    CHECK(pts[0].x == tricky);
    CHECK(pts[0].y == 1e-300);
    CHECK(pts[1].y == 123456789.123456789);
    CHECK(gml::format_number(tricky) == "0.30000000000000004");
    CHECK(gml::format_number(1.0) == "1");
}

TEST_CASE("gml round trip over random geometries")
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        auto g = normalize(random_geometry(rng));
        auto back = gml::parse_geometry(gml::serialize_geometry(g));
        REQUIRE(back == g);
    }
}

TEST_CASE("feature collections")
{
    auto roads = fixtures::roads();
    auto doc = gml::serialize_feature_collection(roads, "roads");
    auto fc = gml::parse_feature_collection(doc);
    REQUIRE(fc.features.size() == 3);
    CHECK(fc.features[0].id == "road.1");
    CHECK(fc.features[1].id == "road.2");
    CHECK(fc.features[2].id == "road.3");
    for (const auto& f : fc.features) {
        REQUIRE(f.attributes.size() == 1);
        CHECK(f.attributes[0].first == "name");
    }
    CHECK(fc == roads);

    auto geoms = gml::extract_geometries(fc);
    REQUIRE(geoms.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::holds_alternative<LineString>(geoms[i].shape));
        CHECK(geoms[i] == fc.features[i].geometry);
    }
    CHECK(gml::extract_geometries(FeatureCollection{}).empty());

    std::string head = R"(<wfs:FeatureCollection xmlns:wfs="http://www.opengis.net/wfs" xmlns:gml="http://www.opengis.net/gml" xmlns:app="urn:geobind:features">)";
    CHECK(code_of([&] {
              gml::parse_feature_collection(
                  head + R"(<gml:featureMember><app:r gml:id="x"><app:name>A</app:name></app:r></gml:featureMember></wfs:FeatureCollection>)");
          })
          == Errc::NoGeometryProperty);
    CHECK(code_of([&] {
              gml::parse_feature_collection(
                  head
                  + R"(<gml:featureMember><app:r gml:id="a"><app:g><gml:Point srsName="EPSG:4326"><gml:pos>1 2</gml:pos></gml:Point></app:g></app:r></gml:featureMember>)"
                  + R"(<gml:featureMember><app:r gml:id="b"><app:g><gml:Point srsName="EPSG:3857"><gml:pos>1 2</gml:pos></gml:Point></app:g></app:r></gml:featureMember></wfs:FeatureCollection>)");
          })
          == Errc::MixedSrs);

    // A single polygon feature comes back as that polygon with attributes gone.
    FeatureCollection one;
    Polygon sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}}, {}};
    one.features.push_back(Feature{"p", Geometry{sq}, {{"k", "v"}}});
    auto g1 = gml::extract_geometries(gml::parse_feature_collection(gml::serialize_feature_collection(one, "t")));
    REQUIRE(g1.size() == 1);
    CHECK(g1[0] == Geometry{sq});
}

TEST_CASE("compute_bbox examples and tightness")
{
    auto b = compute_bbox(Geometry{LineString{{{0, 0}, {10, 0}, {5, 3}}}});
    CHECK(b == BBox{0, 0, 10, 3, "EPSG:4326"});
    CHECK(compute_bbox(Geometry{Point{{4, 7}}}) == BBox{4, 7, 4, 7, "EPSG:4326"});
    CHECK(compute_bbox(Geometry{MultiPoint{{{-1, 2}, {3, -5}}}}) == BBox{-1, -5, 3, 2, "EPSG:4326"});

    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        auto g = random_geometry(rng);
        auto box = compute_bbox(g);
        bool touches[4] = {false, false, false, false};
        for_each_position(g, [&](Position p) {
            CHECK(box.contains(p));
            touches[0] |= p.x == box.min_x;
            touches[1] |= p.y == box.min_y;
            touches[2] |= p.x == box.max_x;
            touches[3] |= p.y == box.max_y;
        });
        for (bool t : touches)
            CHECK(t);
    }
}

TEST_CASE("winding normalization is idempotent and keeps |area|")
{
    std::mt19937_64 rng(9);
    for (int i = 0; i < 300; ++i) {
        auto p = oracle::random_star(rng, {0, 0}, 1, 5, 4 + int(rng() % 10));
        if (rng() % 2)
            std::reverse(p.exterior.begin(), p.exterior.end());
        double before = std::abs(oracle::shoelace(p.exterior));
        auto n = normalize(p);
        CHECK(oracle::shoelace(n.exterior) > 0);
        CHECK(std::abs(oracle::shoelace(n.exterior)) == doctest::Approx(before).epsilon(1e-12));
        CHECK(normalize(n) == n);
    }
}

TEST_CASE("geojson interchange")
{
    FeatureCollection fc;
    fc.features.push_back(Feature{"p", Geometry{Point{{1, 2}}}, {}});
    auto text = geojson::to_interchange(fc);
    CHECK(text.find("\"type\":\"Point\"") != std::string::npos);
    CHECK(text.find("[1,2]") != std::string::npos);

    auto roads_text = geojson::to_interchange(fixtures::roads());
    // Parse-back with the JSON library directly, not the geojson reader.
    auto j = nlohmann::json::parse(roads_text);
    REQUIRE(j["features"].size() == 3);
    CHECK(j["features"][1]["properties"]["name"] == "B");
    auto coords = j["features"][0]["geometry"]["coordinates"];
    auto roads = fixtures::roads();
    const auto& road1 = std::get<LineString>(roads.features[0].geometry.shape).points;
    REQUIRE(coords.size() == road1.size());
    for (std::size_t i = 0; i < road1.size(); ++i) {
        CHECK(coords[i][0].get<double>() == road1[i].x);
        CHECK(coords[i][1].get<double>() == road1[i].y);
    }

    CHECK(geojson::read_features(roads_text) == fixtures::roads());

    std::mt19937_64 rng(21);
    for (int i = 0; i < 1000; ++i) {
        auto g = normalize(random_geometry(rng));
        REQUIRE(geojson::geometry_from_json(geojson::geometry_to_json(g)) == g);
    }

    CHECK(code_of([] { geojson::read_features("{"); }) == Errc::GeoJsonSyntax);
    CHECK(code_of([] { geojson::read_features(R"({"type":"LineString","coordinates":[[0,0]]})"); })
          == Errc::GeoJsonSyntax);
    CHECK(code_of([] { geojson::read_features(R"({"type":"Blob"})"); }) != Errc::ConfigError);
}
