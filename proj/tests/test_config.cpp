#include "geobind/config.hpp"
#include "geobind/error.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <unistd.h>

using namespace geobind;
namespace fs = std::filesystem;

namespace {

std::string message_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ConfigError);
        return e.what();
    }
    FAIL("no error raised");
    return {};
}

struct TempDir {
    fs::path path = fs::temp_directory_path() / ("geobind_cfg_" + std::to_string(::getpid()));
    fs::path old = fs::current_path();
    TempDir()
    {
        fs::create_directories(path);
        fs::current_path(path);
    }
    ~TempDir()
    {
        fs::current_path(old);
        fs::remove_all(path);
        ::unsetenv("GEOBIND_CONFIG");
        ::unsetenv("GEOBIND_BRIDGE_CONFIG");
    }
    fs::path write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path / name) << text;
        return path / name;
    }
};

} // namespace

TEST_CASE("defaults")
{
    auto c = parse_config("");
    CHECK(c.listen_address == "127.0.0.1:8080");
    CHECK(c.describe_cache_seconds == 60);
    CHECK(c.allowed_upstreams.empty());
    CHECK(c.default_endpoints.empty());
    CHECK_FALSE(c.static_dir);
    CHECK(c.output_format == "geojson");
}

TEST_CASE("full document")
{
    auto c = parse_config(R"(# bridge settings
listen_address = "0.0.0.0:9000"   # trailing comment
allowed_upstreams = [
  "demo.example.org",
  'maps.example.net:8080', # literal string
]
describe_cache_seconds = 5
static_dir = "web/dist"
output_format = "gml"
default_endpoints = [ { name = "local", url = "http://127.0.0.1:8081/wps" } ]

[[default_endpoints]]
name = "demo"
url = "http://demo.example.org/wps"
)");
    CHECK(c.listen_address == "0.0.0.0:9000");
    CHECK(c.allowed_upstreams == std::vector<std::string>{"demo.example.org", "maps.example.net:8080"});
    CHECK(c.describe_cache_seconds == 5);
    CHECK(c.static_dir == "web/dist");
    CHECK(c.output_format == "gml");
    CHECK(c.default_endpoints
          == std::vector<NamedEndpoint>{{"local", "http://127.0.0.1:8081/wps"}, {"demo", "http://demo.example.org/wps"}});
}

TEST_CASE("errors name the problem")
{
    CHECK(message_of([] { parse_config("bogus = 1"); }).find("bogus") != std::string::npos);
    CHECK(message_of([] { parse_config("a = \n"); }).find("line 1") != std::string::npos);
    CHECK(message_of([] { parse_config("\n\nlisten_address = \"x"); }).find("line 3") != std::string::npos);
    message_of([] { parse_config("listen_address = 5"); });
    message_of([] { parse_config("describe_cache_seconds = -1"); });
    message_of([] { parse_config("describe_cache_seconds = \"60\""); });
    message_of([] { parse_config("output_format = \"kml\""); });
    message_of([] { parse_config("allowed_upstreams = \"x\""); });
    message_of([] { parse_config("default_endpoints = [{ name = \"a\" }]"); });
    message_of([] { parse_config("default_endpoints = [{ name = \"a\", url = \"not a url\" }]"); });
    CHECK(message_of([] {
              parse_config("default_endpoints = [{ name = \"a\", url = \"http://h/1\" }, { name = \"a\", url = \"http://h/2\" }]");
          }).find("duplicate") != std::string::npos);
}

TEST_CASE("resolve_endpoint and upstream_allowed")
{
    Config c;
    c.default_endpoints = {{"mock", "http://127.0.0.1:1/wps"}};
    CHECK(c.resolve_endpoint("@mock") == "http://127.0.0.1:1/wps");
    CHECK(c.resolve_endpoint("http://x/wps") == "http://x/wps");
    message_of([&] { c.resolve_endpoint("@other"); });

    CHECK(c.upstream_allowed("http://127.0.0.1:5/wps"));
    CHECK(c.upstream_allowed("http://localhost/wps"));
    CHECK(c.upstream_allowed("http://[::1]:8/wps"));
    CHECK_FALSE(c.upstream_allowed("http://example.com/wps"));
    c.allowed_upstreams = {"example.com"};
    CHECK(c.upstream_allowed("http://EXAMPLE.com:81/wps"));
    CHECK_FALSE(c.upstream_allowed("http://example.org/wps"));
    c.allowed_upstreams = {"example.org:8080"};
    CHECK(c.upstream_allowed("http://example.org:8080/wps"));
    CHECK_FALSE(c.upstream_allowed("http://example.org/wps"));
    c.allowed_upstreams = {"*"};
    CHECK(c.upstream_allowed("http://anything.test/wps"));
}

TEST_CASE("find_config lookup order")
{
    TempDir dir;
    ::unsetenv("GEOBIND_CONFIG");
    ::unsetenv("GEOBIND_BRIDGE_CONFIG");
    CHECK_FALSE(find_config(std::nullopt));

    auto local = dir.write("geobind.toml", "output_format = \"gml\"\n");
    CHECK(find_config(std::nullopt) == fs::path("geobind.toml"));

    auto env_file = dir.write("env.toml", "");
    ::setenv("GEOBIND_CONFIG", env_file.c_str(), 1);
    CHECK(find_config(std::nullopt) == env_file);

    auto bridge_file = dir.write("bridge.toml", "");
    ::setenv("GEOBIND_BRIDGE_CONFIG", bridge_file.c_str(), 1);
    CHECK(find_config(std::nullopt, "GEOBIND_BRIDGE_CONFIG") == bridge_file);
    CHECK(find_config(std::nullopt) == env_file);

    auto flag_file = dir.write("flag.toml", "");
    CHECK(find_config(flag_file.string(), "GEOBIND_BRIDGE_CONFIG") == flag_file);

    message_of([] { find_config(std::string("/nonexistent/geobind.toml")); });
    ::setenv("GEOBIND_CONFIG", "/nonexistent/env.toml", 1);
    message_of([] { find_config(std::nullopt); });

    CHECK(load_config(local).output_format == "gml");
    message_of([] { load_config("/nonexistent/x.toml"); });
}
