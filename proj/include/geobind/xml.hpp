#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace geobind::xml {

inline constexpr std::string_view kWpsNs = "http://www.opengis.net/wps/1.0.0";
inline constexpr std::string_view kOwsNs = "http://www.opengis.net/ows/1.1";
inline constexpr std::string_view kXlinkNs = "http://www.w3.org/1999/xlink";
inline constexpr std::string_view kGmlNs = "http://www.opengis.net/gml";
inline constexpr std::string_view kWfsNs = "http://www.opengis.net/wfs";
inline constexpr std::string_view kOgcNs = "http://www.opengis.net/ogc";
inline constexpr std::string_view kXsiNs = "http://www.w3.org/2001/XMLSchema-instance";

struct Attribute {
    std::string ns;
    std::string local;
    std::string prefix;
    std::string value;
};

/// Namespace-resolved element tree. Byte offsets point into the source
/// buffer the element was parsed from, so callers can lift the exact bytes
/// of an element's content.
struct Element {
    std::string ns;
    std::string local;
    std::string prefix;
    std::vector<Attribute> attributes;
    std::vector<Element> children;
    /// Direct character data, concatenated.
    std::string text;
    std::vector<std::pair<std::string, std::string>> ns_decls;
    std::size_t inner_begin = 0;
    std::size_t inner_end = 0;

    bool is(std::string_view ns_uri, std::string_view name) const
    {
        return ns == ns_uri && local == name;
    }

    const Element* child(std::string_view ns_uri, std::string_view name) const;
    std::vector<const Element*> children_named(std::string_view ns_uri, std::string_view name) const;
    /// First element child regardless of name.
    const Element* first_child() const;

    /// Attribute lookup by local name. With no namespace given only
    /// unqualified attributes match.
    std::optional<std::string> attribute(std::string_view name, std::string_view ns_uri = {}) const;

    /// Text with leading/trailing XML whitespace removed.
    std::string trimmed_text() const;

    /// Text of the named child, trimmed; empty when the child is absent.
    std::string child_text(std::string_view ns_uri, std::string_view name) const;
};

struct Document {
    std::string source;
    Element root;

    /// Exact bytes between the element's start and end tags.
    std::string_view inner_bytes(const Element& e) const;
};

/// Throws Error(XmlSyntax) with expat's line/column on malformed input.
Document parse(std::string_view bytes);

/// Serializes an element and its subtree as a standalone fragment, with
/// every namespace it uses declared on the top element.
std::string serialize(const Element& e);

std::string escape(std::string_view text, bool attribute = false);

/// Streaming writer; start tags stay open for attributes until content or
/// a child is written.
class Writer {
public:
    Writer& declaration();
    Writer& start(std::string_view qname);
    Writer& attr(std::string_view qname, std::string_view value);
    Writer& text(std::string_view value);
    /// Writes bytes unescaped. The caller guarantees they are well formed.
    Writer& raw(std::string_view bytes);
    Writer& end();
    /// start + text + end.
    Writer& element(std::string_view qname, std::string_view value);

    const std::string& str() const { return out_; }
    std::string take() { return std::move(out_); }

private:
    void close_start();

    std::string out_;
    std::vector<std::string> open_;
    bool start_open_ = false;
};

} // namespace geobind::xml
