#include "geobind/error.hpp"
#include "geobind/url.hpp"
#include "geobind/xml.hpp"

#include <doctest.h>

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

} // namespace

TEST_CASE("url parsing accepts absolute http(s) only")
{
    auto u = Url::parse("http://localhost:8808/wps?a=1");
    CHECK(u.scheme() == "http");
    CHECK(u.host() == "localhost");
    CHECK(u.port() == 8808);
    CHECK(u.path() == "/wps");
    CHECK(u.query() == "a=1");
    CHECK(u.origin() == "http://localhost:8808");
    CHECK(u.is_loopback());
    CHECK(Url::parse("https://example.org").path() == "/");
    CHECK_FALSE(Url::parse("http://example.org/x").is_loopback());
    CHECK(Url::parse("http://127.0.0.1:1/").is_loopback());

    for (const char* bad : {"not a url", "ftp://x/wps", "http://", "http:///path", "http://h/a b", "/relative", ""})
        CHECK_MESSAGE(code_of([&] { Url::parse(bad); }) == Errc::MalformedUrl, bad);
}

TEST_CASE("percent encoding")
{
    CHECK(percent_encode("my proc") == "my%20proc");
    CHECK(percent_encode("a-b_c.d~e") == "a-b_c.d~e");
    CHECK(percent_encode("x:y,z", ":") == "x:y%2Cz");
    CHECK(percent_decode("my%20proc+x") == "my proc x");
    CHECK(percent_decode("100%") == "100%");
    CHECK(percent_decode("%zz") == "%zz");

    std::mt19937 rng(7);
    for (int i = 0; i < 500; ++i) {
        std::string s(rng() % 20, '\0');
        for (auto& c : s)
            c = char(rng() % 256);
        CHECK(percent_decode(percent_encode(s)) == s);
    }
}

TEST_CASE("query helpers")
{
    CHECK(append_query("http://h/wps", "a=1") == "http://h/wps?a=1");
    CHECK(append_query("http://h/wps?key=1", "a=1") == "http://h/wps?key=1&a=1");
    CHECK(append_query("http://h/wps?", "a=1") == "http://h/wps?a=1");

    auto q = parse_query("Service=WPS&identifier=my%20proc&flag");
    REQUIRE(q.size() == 3);
    CHECK(q[1].second == "my proc");
    CHECK(q[2].first == "flag");
    REQUIRE(find_param(q, "SERVICE"));
    CHECK(*find_param(q, "service") == "WPS");
    CHECK(find_param(q, "missing") == nullptr);
    CHECK(iequals("GetFeature", "getfeature"));
    CHECK_FALSE(iequals("abc", "abcd"));
}

TEST_CASE("base64")
{
    CHECK(base64_encode("") == "");
    CHECK(base64_encode("f") == "Zg==");
    CHECK(base64_encode("fo") == "Zm8=");
    CHECK(base64_encode("foo") == "Zm9v");
    CHECK(base64_encode("foobar") == "Zm9vYmFy");
    CHECK(base64_decode("Zm9v\nYmFy") == "foobar");
    CHECK(code_of([] { base64_decode("Zm9v*"); }) == Errc::InvalidParameter);

    std::mt19937 rng(3);
    for (int i = 0; i < 300; ++i) {
        std::string s(rng() % 50, '\0');
        for (auto& c : s)
            c = char(rng() % 256);
        CHECK(base64_decode(base64_encode(s)) == s);
    }
}

TEST_CASE("xml parse resolves namespaces and keeps inner bytes")
{
    std::string src = R"(<?xml version="1.0"?>
<a:root xmlns:a="urn:a" xmlns="urn:d" k="v"><child x:y="1" xmlns:x="urn:x">text &amp; more</child><a:inner><p>keep  this</p></a:inner></a:root>)";
    auto doc = xml::parse(src);
    CHECK(doc.root.is("urn:a", "root"));
    CHECK(doc.root.attribute("k") == "v");
    const auto* child = doc.root.child("urn:d", "child");
    REQUIRE(child);
    CHECK(child->text == "text & more");
    CHECK(child->attribute("y", "urn:x") == "1");
    CHECK_FALSE(child->attribute("y").has_value());
    const auto* inner = doc.root.child("urn:a", "inner");
    REQUIRE(inner);
    CHECK(doc.inner_bytes(*inner) == "<p>keep  this</p>");

    // A standalone fragment re-parses to the same names.
    auto again = xml::parse(xml::serialize(*inner));
    CHECK(again.root.is("urn:a", "inner"));
    CHECK(again.root.first_child()->is("urn:d", "p"));
}

TEST_CASE("xml syntax errors")
{
    for (const char* bad : {"", "<a>", "<a></b>", "not xml", "<a x='1' x='2'/>", "<p:a/>"})
        CHECK_MESSAGE(code_of([&] { xml::parse(bad); }) == Errc::XmlSyntax, bad);
}

TEST_CASE("xml writer escapes")
{
    xml::Writer w;
    w.declaration().start("r").attr("q", "a\"<&").text("1 < 2 & 3").element("e", "").end();
    auto out = w.take();
    auto doc = xml::parse(out);
    CHECK(doc.root.attribute("q") == "a\"<&");
    CHECK(doc.root.text == "1 < 2 & 3");
    CHECK(out.rfind("<?xml", 0) == 0);
    CHECK(xml::escape("<>&") == "&lt;&gt;&amp;");
}
