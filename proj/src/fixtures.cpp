#include "geobind/fixtures.hpp"

#include "geobind/error.hpp"
#include "geobind/geojson.hpp"

#include <map>

namespace geobind::fixtures {

namespace detail {
const std::map<std::string, std::string>& embedded();
}

namespace {

const std::string& file(const std::string& name)
{
    return detail::embedded().at(name);
}

} // namespace

const std::string& capabilities() { return file("capabilities.xml"); }

const std::vector<std::string>& process_ids()
{
    static const std::vector<std::string> ids = {"Buffer", "Centroid", "Envelope"};
    return ids;
}

const std::string& describe(std::string_view process_id)
{
    for (const auto& id : process_ids())
        if (id == process_id)
            return file("describe_" + id + ".xml");
    throw Error(Errc::UnknownProcess, "no process '" + std::string(process_id) + "'");
}

const std::string& roads_geojson() { return file("roads.geojson"); }

FeatureCollection roads() { return geojson::read_features(roads_geojson()); }

} // namespace geobind::fixtures
