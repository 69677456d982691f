#include "geobind/xml.hpp"

#include "geobind/error.hpp"

#include <expat.h>

#include <map>
#include <memory>
#include <set>

namespace geobind::xml {

namespace {

constexpr char kSep = '\x01';

struct Name {
    std::string ns;
    std::string local;
    std::string prefix;
};

// Expat triplet form: "uri<sep>local<sep>prefix", "uri<sep>local" or "local".
Name split_name(const char* raw)
{
    std::string_view s(raw);
    Name n;
    auto a = s.find(kSep);
    if (a == std::string_view::npos) {
        n.local = std::string(s);
        return n;
    }
    n.ns = std::string(s.substr(0, a));
    auto rest = s.substr(a + 1);
    auto b = rest.find(kSep);
    if (b == std::string_view::npos) {
        n.local = std::string(rest);
    } else {
        n.local = std::string(rest.substr(0, b));
        n.prefix = std::string(rest.substr(b + 1));
    }
    return n;
}

bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

struct Builder {
    XML_Parser parser = nullptr;
    Element root;
    bool have_root = false;
    std::vector<Element*> stack;
    std::vector<std::pair<std::string, std::string>> pending_decls;

    static void on_start(void* ud, const XML_Char* name, const XML_Char** atts)
    {
        auto* self = static_cast<Builder*>(ud);
        Element* e = nullptr;
        if (self->stack.empty()) {
            e = &self->root;
            self->have_root = true;
        } else {
            self->stack.back()->children.emplace_back();
            e = &self->stack.back()->children.back();
        }
        auto n = split_name(name);
        e->ns = std::move(n.ns);
        e->local = std::move(n.local);
        e->prefix = std::move(n.prefix);
        for (int i = 0; atts[i]; i += 2) {
            auto an = split_name(atts[i]);
            e->attributes.push_back({std::move(an.ns), std::move(an.local), std::move(an.prefix), atts[i + 1]});
        }
        e->ns_decls = std::move(self->pending_decls);
        self->pending_decls.clear();
        auto index = static_cast<std::size_t>(XML_GetCurrentByteIndex(self->parser));
        auto count = static_cast<std::size_t>(XML_GetCurrentByteCount(self->parser));
        e->inner_begin = index + count;
        e->inner_end = e->inner_begin;
        self->stack.push_back(e);
    }

    static void on_end(void* ud, const XML_Char*)
    {
        auto* self = static_cast<Builder*>(ud);
        Element* e = self->stack.back();
        auto index = static_cast<std::size_t>(XML_GetCurrentByteIndex(self->parser));
        e->inner_end = index < e->inner_begin ? e->inner_begin : index;
        // Empty-element tags report no separate end tag.
        if (XML_GetCurrentByteCount(self->parser) == 0)
            e->inner_end = e->inner_begin;
        self->stack.pop_back();
    }

    static void on_text(void* ud, const XML_Char* s, int len)
    {
        auto* self = static_cast<Builder*>(ud);
        if (!self->stack.empty())
            self->stack.back()->text.append(s, static_cast<std::size_t>(len));
    }

    static void on_ns_start(void* ud, const XML_Char* prefix, const XML_Char* uri)
    {
        auto* self = static_cast<Builder*>(ud);
        self->pending_decls.emplace_back(prefix ? prefix : "", uri ? uri : "");
    }
};

void collect_namespaces(const Element& e, std::map<std::string, std::string>& out)
{
    if (!e.ns.empty())
        out.emplace(e.prefix, e.ns);
    for (const auto& a : e.attributes) {
        if (!a.ns.empty() && !a.prefix.empty())
            out.emplace(a.prefix, a.ns);
    }
    for (const auto& c : e.children)
        collect_namespaces(c, out);
}

std::string qualified(const std::string& prefix, const std::string& local)
{
    return prefix.empty() ? local : prefix + ":" + local;
}

void write_element(const Element& e, std::string& out, const std::map<std::string, std::string>* decls)
{
    auto name = qualified(e.prefix, e.local);
    out += '<';
    out += name;
    if (decls) {
        for (const auto& [prefix, uri] : *decls) {
            out += prefix.empty() ? " xmlns" : " xmlns:" + prefix;
            out += "=\"" + escape(uri, true) + "\"";
        }
    }
    for (const auto& a : e.attributes)
        out += " " + qualified(a.prefix, a.local) + "=\"" + escape(a.value, true) + "\"";
    if (e.children.empty() && e.text.empty()) {
        out += "/>";
        return;
    }
    out += '>';
    out += escape(e.text);
    for (const auto& c : e.children)
        write_element(c, out, nullptr);
    out += "</" + name + ">";
}

} // namespace

const Element* Element::child(std::string_view ns_uri, std::string_view name) const
{
    for (const auto& c : children) {
        if (c.is(ns_uri, name))
            return &c;
    }
    return nullptr;
}

std::vector<const Element*> Element::children_named(std::string_view ns_uri, std::string_view name) const
{
    std::vector<const Element*> out;
    for (const auto& c : children) {
        if (c.is(ns_uri, name))
            out.push_back(&c);
    }
    return out;
}

const Element* Element::first_child() const
{
    return children.empty() ? nullptr : &children.front();
}

std::optional<std::string> Element::attribute(std::string_view name, std::string_view ns_uri) const
{
    for (const auto& a : attributes) {
        if (a.local == name && a.ns == ns_uri)
            return a.value;
    }
    return std::nullopt;
}

std::string Element::trimmed_text() const
{
    std::size_t b = 0, e = text.size();
    while (b < e && is_space(text[b]))
        ++b;
    while (e > b && is_space(text[e - 1]))
        --e;
    return text.substr(b, e - b);
}

std::string Element::child_text(std::string_view ns_uri, std::string_view name) const
{
    const auto* c = child(ns_uri, name);
    return c ? c->trimmed_text() : std::string{};
}

std::string_view Document::inner_bytes(const Element& e) const
{
    if (e.inner_end <= e.inner_begin || e.inner_end > source.size())
        return {};
    return std::string_view(source).substr(e.inner_begin, e.inner_end - e.inner_begin);
}

Document parse(std::string_view bytes)
{
    Document doc;
    doc.source = std::string(bytes);

    std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
        XML_ParserCreateNS("UTF-8", kSep), &XML_ParserFree);
    if (!parser)
        throw Error(Errc::XmlSyntax, "cannot create XML parser");
    XML_SetReturnNSTriplet(parser.get(), 1);

    Builder b;
    b.parser = parser.get();
    XML_SetUserData(parser.get(), &b);
    XML_SetElementHandler(parser.get(), &Builder::on_start, &Builder::on_end);
    XML_SetCharacterDataHandler(parser.get(), &Builder::on_text);
    XML_SetStartNamespaceDeclHandler(parser.get(), &Builder::on_ns_start);

    if (XML_Parse(parser.get(), doc.source.data(), static_cast<int>(doc.source.size()), 1) == XML_STATUS_ERROR) {
        throw Error(Errc::XmlSyntax,
                    std::string(XML_ErrorString(XML_GetErrorCode(parser.get()))) + " at line "
                        + std::to_string(XML_GetCurrentLineNumber(parser.get())) + ", column "
                        + std::to_string(XML_GetCurrentColumnNumber(parser.get())));
    }
    if (!b.have_root)
        throw Error(Errc::XmlSyntax, "no root element");
    doc.root = std::move(b.root);
    return doc;
}

std::string serialize(const Element& e)
{
    std::map<std::string, std::string> decls;
    collect_namespaces(e, decls);
    std::string out;
    write_element(e, out, &decls);
    return out;
}

std::string escape(std::string_view text, bool attribute)
{
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"':
            if (attribute) out += "&quot;"; else out += c;
            break;
        case '\n':
            if (attribute) out += "&#10;"; else out += c;
            break;
        case '\r': out += "&#13;"; break;
        case '\t':
            if (attribute) out += "&#9;"; else out += c;
            break;
        default: out += c;
        }
    }
    return out;
}

Writer& Writer::declaration()
{
    out_ += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    return *this;
}

Writer& Writer::start(std::string_view qname)
{
    close_start();
    out_ += '<';
    out_ += qname;
    open_.emplace_back(qname);
    start_open_ = true;
    return *this;
}

Writer& Writer::attr(std::string_view qname, std::string_view value)
{
    out_ += ' ';
    out_ += qname;
    out_ += "=\"";
    out_ += escape(value, true);
    out_ += '"';
    return *this;
}

Writer& Writer::text(std::string_view value)
{
    close_start();
    out_ += escape(value);
    return *this;
}

Writer& Writer::raw(std::string_view bytes)
{
    close_start();
    out_ += bytes;
    return *this;
}

Writer& Writer::end()
{
    if (start_open_) {
        out_ += "/>";
        start_open_ = false;
    } else {
        out_ += "</" + open_.back() + ">";
    }
    open_.pop_back();
    return *this;
}

Writer& Writer::element(std::string_view qname, std::string_view value)
{
    start(qname);
    if (!value.empty())
        text(value);
    return end();
}

void Writer::close_start()
{
    if (start_open_) {
        out_ += '>';
        start_open_ = false;
    }
}

} // namespace geobind::xml
