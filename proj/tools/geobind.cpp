#include "geobind/bridge.hpp"
#include "geobind/config.hpp"
#include "geobind/error.hpp"
#include "geobind/geojson.hpp"
#include "geobind/gml.hpp"
#include "geobind/mock_services.hpp"
#include "geobind/url.hpp"
#include "geobind/wfs_client.hpp"
#include "geobind/wps_client.hpp"
#include "geobind/xml.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace geobind;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 1, kTransport = 2, kRemote = 3, kValidation = 4, kFileIo = 5 };

struct CliFailure {
    int code;
    std::string message;
};

struct FileError : Error {
    explicit FileError(const std::string& message) : Error(Errc::InvalidParameter, message) {}
};

int exit_code_for(const Error& e)
{
    if (dynamic_cast<const FileError*>(&e))
        return kFileIo;
    switch (e.code()) {
    case Errc::TransportError:
    case Errc::PortInUse:
        return kTransport;
    case Errc::ServiceReportedException:
    case Errc::XmlSyntax:
    case Errc::NotACapabilitiesDocument:
    case Errc::NotADescriptionDocument:
    case Errc::NotAWfsCapabilities:
    case Errc::UnknownParameterKind:
    case Errc::UnsupportedVersion:
    case Errc::DuplicateProcessId:
        return kRemote;
    case Errc::DatasetLoadError:
        return kFileIo;
    case Errc::MalformedUrl:
    case Errc::ConfigError:
    case Errc::EmptyIdentifier:
    case Errc::InvalidQuery:
    case Errc::ConflictingFilters:
        return kUsage;
    default:
        return kValidation;
    }
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FileError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << bytes) || !out.flush())
        throw FileError("cannot write " + path.string());
}

std::pair<std::string, std::string> split_assignment(const std::string& arg, const char* flag)
{
    auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0)
        throw CliFailure{kUsage, std::string(flag) + " expects id=value, got '" + arg + "'"};
    return {arg.substr(0, eq), arg.substr(eq + 1)};
}

Config load_cli_config(const std::optional<std::string>& flag, const char* preferred_env = nullptr)
{
    auto path = find_config(flag, preferred_env);
    return path ? load_config(*path) : Config{};
}

// "gml" or "geojson" from --format, else the extension.
std::string file_format(const std::string& path, const std::string& override_format)
{
    if (!override_format.empty())
        return override_format;
    auto ext = fs::path(path).extension().string();
    for (auto& c : ext)
        c = char(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".gml" || ext == ".xml")
        return "gml";
    if (ext == ".geojson" || ext == ".json")
        return "geojson";
    throw CliFailure{kUsage, "cannot tell the format of '" + path + "'; pass --format gml|geojson"};
}

wps::DataEnvelope complex_from_file(const std::string& path, const std::string& format, const wps::InputDescriptor* d)
{
    auto bytes = read_file(path);
    wps::InlineComplex cx;
    cx.mime_type = "text/xml";
    if (d && !d->formats.empty()) {
        cx.mime_type = d->formats.front().mime_type;
        cx.encoding = d->formats.front().encoding;
        cx.schema = d->formats.front().schema;
    }
    if (format == "gml") {
        // Re-serialized so the fragment embeds cleanly (no XML declaration).
        auto doc = xml::parse(bytes);
        cx.payload = gml::is_geometry_element(doc.root) ? gml::serialize_geometry(gml::parse_geometry(doc.root))
                                                        : xml::serialize(doc.root);
        return cx;
    }
    auto fc = geojson::read_features(bytes);
    if (fc.features.size() == 1)
        cx.payload = gml::serialize_geometry(fc.features.front().geometry);
    else
        cx.payload = gml::serialize_feature_collection(fc, "feature");
    return cx;
}

// "wfs-url,typeName[,featureId=..][,max=..][,attr=k=v]"
wfs::WfsQuery parse_wfs_spec(const std::string& spec)
{
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string part; std::getline(ss, part, ',');)
        parts.push_back(part);
    if (parts.size() < 2)
        throw CliFailure{kUsage, "--wfs expects id=wfs-url,typeName[,...], got '" + spec + "'"};
    wfs::WfsQuery q;
    q.service_url = parts[0];
    q.type_name = parts[1];
    for (std::size_t i = 2; i < parts.size(); ++i) {
        const auto& p = parts[i];
        if (p.rfind("featureId=", 0) == 0) {
            if (!q.feature_ids)
                q.feature_ids.emplace();
            q.feature_ids->push_back(p.substr(10));
        } else if (p.rfind("max=", 0) == 0) {
            try {
                q.max_features = unsigned(std::stoul(p.substr(4)));
            } catch (const std::exception&) {
                throw CliFailure{kUsage, "bad max in --wfs: '" + p + "'"};
            }
        } else if (p.rfind("attr=", 0) == 0) {
            auto kv = p.substr(5);
            auto eq = kv.find('=');
            if (eq == std::string::npos || eq == 0)
                throw CliFailure{kUsage, "--wfs attr expects attr=key=value, got '" + p + "'"};
            q.attribute_filters.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
        } else {
            throw CliFailure{kUsage, "unknown --wfs option '" + p + "'"};
        }
    }
    wfs::check(q);
    return q;
}

// GML stays as served; GeoJSON becomes a single-feature collection.
std::string complex_text(const std::string& format, const std::string& id, const wps::InlineComplex& cx)
{
    if (format == "gml" || !wps::is_xml_mime(cx.mime_type))
        return cx.payload;
    auto doc = xml::parse(cx.payload);
    FeatureCollection fc;
    if (gml::is_geometry_element(doc.root)) {
        auto g = gml::parse_geometry(doc.root);
        fc.srs = g.srs;
        fc.features.push_back(Feature{id, std::move(g), {}});
    } else {
        fc = gml::parse_feature_collection(doc.root);
    }
    return geojson::to_interchange(fc) + "\n";
}

// -------- subcommands

struct Common {
    std::optional<std::string> config_path;
};

int run_discover(const Common& common, const std::string& target)
{
    auto config = load_cli_config(common.config_path);
    auto url = config.resolve_endpoint(target);
    auto caps = wps::fetch_capabilities(http_transport(), url);
    std::cout << "title\t" << caps.metadata.title << "\n"
              << "abstract\t" << caps.metadata.abstract << "\n"
              << "version\t" << caps.metadata.version << "\n"
              << "processes\t" << caps.processes.size() << "\n";
    for (const auto& p : caps.processes)
        std::cout << p.identifier << "\t" << p.title << "\n";
    return kOk;
}

std::string occurs_text(unsigned lo, unsigned hi)
{
    return std::to_string(lo) + ".." + (hi == std::numeric_limits<unsigned>::max() ? "n" : std::to_string(hi));
}

template <class D>
std::string type_text(const D& d)
{
    if (d.literal_datatype)
        return std::string(wps::to_string(*d.literal_datatype));
    std::string out;
    for (const auto& f : d.formats)
        out += (out.empty() ? "" : ",") + f.mime_type;
    return out.empty() ? "-" : out;
}

int run_describe(const Common& common, const std::string& target, const std::string& id, bool json)
{
    auto config = load_cli_config(common.config_path);
    auto url = config.resolve_endpoint(target);
    auto d = wps::fetch_description(http_transport(), url, id);
    if (json) {
        std::cout << bridge::process_body(d) << "\n";
        return kOk;
    }
    std::cout << d.brief.identifier << "\t" << d.brief.title << "\n";
    if (d.brief.abstract)
        std::cout << *d.brief.abstract << "\n";
    std::cout << "\ndirection\tidentifier\tkind\ttype\toccurs\n";
    for (const auto& in : d.inputs)
        std::cout << "input\t" << in.identifier << "\t" << wps::to_string(in.kind) << "\t" << type_text(in) << "\t"
                  << occurs_text(in.min_occurs, in.max_occurs) << "\n";
    for (const auto& out : d.outputs)
        std::cout << "output\t" << out.identifier << "\t" << wps::to_string(out.kind) << "\t" << type_text(out)
                  << "\t1..1\n";
    return kOk;
}

struct ExecuteArgs {
    std::string target;
    std::string process;
    std::vector<std::string> literals;
    std::vector<std::string> complexes;
    std::vector<std::string> references;
    std::vector<std::string> wfs;
    std::vector<std::string> client_side;
    std::string raw;
    std::string out;
    std::string format;
};

int run_execute(const Common& common, const ExecuteArgs& a)
{
    auto config = load_cli_config(common.config_path);
    auto url = config.resolve_endpoint(a.target);
    auto transport = http_transport();

    auto caps = wps::fetch_capabilities(transport, url);
    auto session = wps::load_capabilities(wps::begin_session(url), caps.metadata, caps.processes);
    auto description = wps::fetch_description(transport, url, a.process);
    session = wps::select_process(session, description);

    std::map<std::string, wfs::WfsQuery> wfs_queries;
    for (const auto& arg : a.literals) {
        auto [id, value] = split_assignment(arg, "--literal");
        const auto* d = description.input(id);
        auto type = d && d->literal_datatype ? *d->literal_datatype : wps::LiteralType::String;
        session = wps::bind_input(session, id, wps::InlineLiteral{value, type});
    }
    for (const auto& arg : a.complexes) {
        auto [id, value] = split_assignment(arg, "--complex");
        if (value.empty() || value.front() != '@')
            throw CliFailure{kUsage, "--complex expects id=@file, got '" + arg + "'"};
        auto path = value.substr(1);
        session = wps::bind_input(session, id,
                                  complex_from_file(path, file_format(path, a.format), description.input(id)));
    }
    for (const auto& arg : a.references) {
        auto [id, href] = split_assignment(arg, "--reference");
        session = wps::bind_input(session, id, wps::Reference{href, wps::HttpMethod::Get, std::nullopt, "text/xml"});
    }
    for (const auto& arg : a.wfs) {
        auto [id, spec] = split_assignment(arg, "--wfs");
        auto q = parse_wfs_spec(spec);
        session = wps::bind_input(session, id, wfs::as_reference(q));
        wfs_queries.emplace(id, q);
    }
    for (const auto& id : a.client_side) {
        session = wps::set_fetch_mode(session, id, wps::FetchMode::FetchClientSide);
        std::vector<wps::DataEnvelope> resolved;
        if (auto it = wfs_queries.find(id); it != wfs_queries.end()) {
            resolved.push_back(wfs::resolve_reference(it->second, transport, true));
        } else {
            for (const auto& e : session.bindings.at(id)) {
                const auto& ref = std::get<wps::Reference>(e);
                auto res = transport(HttpRequest{"GET", ref.href, {}, {}});
                if (res.status < 200 || res.status >= 300)
                    throw TransportError(res.status, ref.href + " answered HTTP " + std::to_string(res.status));
                resolved.push_back(
                    wps::InlineComplex{res.body, ref.mime_type.value_or(res.content_type()), std::nullopt, std::nullopt});
            }
        }
        session = wps::resolve_input(session, id, resolved);
    }

    auto violations = wps::validate_bindings(session);
    if (!violations.empty()) {
        for (const auto& v : violations)
            std::cerr << wps::to_string(v.kind) << ": " << v.input_id << "\n";
        return kValidation;
    }

    std::optional<std::string> raw;
    if (!a.raw.empty())
        raw = a.raw;
    auto request = wps::build_execute(session, raw);
    auto result = wps::send_execute(transport, url, request);
    session = wps::accept_result(session, result);
    if (result.status == wps::ExecuteResult::Status::Failed) {
        const auto& f = result.failure;
        std::cerr << "remote failure: " << (f ? f->code : std::string("NoApplicableCode"));
        if (f)
            for (const auto& m : f->messages)
                std::cerr << ": " << m;
        std::cerr << "\n";
        return kRemote;
    }

    std::string out_format = config.output_format;
    if (!a.out.empty())
        out_format = file_format(a.out, a.format);
    bool wrote_out = false;
    for (const auto& [id, value] : result.outputs) {
        if (const auto* lit = std::get_if<wps::InlineLiteral>(&value)) {
            std::cout << (request.raw ? "" : id + "\t") << lit->value << "\n";
        } else if (const auto* bb = std::get_if<wps::InlineBBox>(&value)) {
            std::cout << id << "\t" << gml::format_number(bb->bbox.min_x) << " " << gml::format_number(bb->bbox.min_y)
                      << " " << gml::format_number(bb->bbox.max_x) << " " << gml::format_number(bb->bbox.max_y) << "\n";
        } else if (const auto* ref = std::get_if<wps::Reference>(&value)) {
            std::cout << id << "\t" << ref->href << "\n";
        } else if (const auto* cx = std::get_if<wps::InlineComplex>(&value)) {
            if (a.out.empty()) {
                std::cout << complex_text(out_format, id, *cx);
                continue;
            }
            fs::path path = a.out;
            if (wrote_out)
                path = path.parent_path() / (path.stem().string() + "." + id + path.extension().string());
            write_file(path, complex_text(out_format, id, *cx));
            wrote_out = true;
        }
    }
    return kOk;
}

struct ServeArgs {
    bool mock = false;
    bool bridge = false;
    int wps_port = 0;
    int wfs_port = 0;
    std::optional<int> bridge_port;
    std::string dataset;
    int latency_ms = 0;
    std::string host = "127.0.0.1";
};

int run_serve(const Common& common, const ServeArgs& a)
{
    if (!a.mock && !a.bridge)
        throw CliFailure{kUsage, "serve needs --mock, --bridge or both"};

    // Block the stop signals before any server thread starts so only
    // sigwait below sees them.
    sigset_t stop;
    sigemptyset(&stop);
    sigaddset(&stop, SIGINT);
    sigaddset(&stop, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop, nullptr);

    std::unique_ptr<mock::MockStack> stack;
    if (a.mock) {
        mock::MockConfig mc;
        mc.wps_port = a.wps_port;
        mc.wfs_port = a.wfs_port;
        mc.latency_ms = a.latency_ms;
        mc.host = a.host;
        if (!a.dataset.empty())
            mc.dataset_path = a.dataset;
        stack = mock::start_mock_stack(mc);
        std::cout << stack->wps_url() << "\n" << stack->wfs_url() << "\n" << std::flush;
    }

    std::unique_ptr<HttpServer> bridge_server;
    if (a.bridge) {
        auto config = load_cli_config(common.config_path, "GEOBIND_BRIDGE_CONFIG");
        auto [host, port] = bridge::split_listen_address(config.listen_address);
        if (a.bridge_port)
            port = *a.bridge_port;
        if (stack) {
            std::erase_if(config.default_endpoints, [](const NamedEndpoint& e) { return e.name == "mock"; });
            config.default_endpoints.insert(config.default_endpoints.begin(), NamedEndpoint{"mock", stack->wps_url()});
        }
        auto service = std::make_shared<const bridge::Bridge>(std::move(config), http_transport());
        bridge_server = bridge::start_bridge(service, host, port);
        std::cout << bridge_server->base_url() << "\n" << std::flush;
    }

    int sig = 0;
    sigwait(&stop, &sig);
    if (bridge_server)
        bridge_server->stop();
    if (stack)
        stack->shutdown();
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Client for OGC Web Processing Services and the geobind bridge"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--config", common.config_path, "Config file (TOML)");

    std::string target, process_id;
    bool json = false;

    auto* discover = app.add_subcommand("discover", "List a service's metadata and processes");
    discover->add_option("url", target, "Service URL or @name")->required();

    auto* describe = app.add_subcommand("describe", "Show a process's inputs and outputs");
    describe->add_option("url", target, "Service URL or @name")->required();
    describe->add_option("process", process_id, "Process identifier")->required();
    describe->add_flag("--json", json, "Print the bridge's JSON description");

    ExecuteArgs ex;
    auto* execute = app.add_subcommand("execute", "Bind inputs and run a process");
    execute->add_option("url", ex.target, "Service URL or @name")->required();
    execute->add_option("process", ex.process, "Process identifier")->required();
    execute->add_option("--literal", ex.literals, "id=value")->take_all();
    execute->add_option("--complex", ex.complexes, "id=@file.gml or id=@file.geojson")->take_all();
    execute->add_option("--reference", ex.references, "id=href")->take_all();
    execute->add_option("--wfs", ex.wfs, "id=wfs-url,typeName[,featureId=..][,max=..][,attr=k=v]")->take_all();
    execute->add_option("--fetch-client-side", ex.client_side, "Fetch this reference input locally")->take_all();
    execute->add_option("--raw", ex.raw, "Request this output as raw data");
    execute->add_option("--out", ex.out, "File for complex outputs");
    execute->add_option("--format", ex.format, "Override file format detection")
        ->check(CLI::IsMember({"gml", "geojson"}));

    ServeArgs sv;
    auto* serve = app.add_subcommand("serve", "Run the mock services and/or the bridge");
    serve->add_flag("--mock", sv.mock, "Start the mock WPS and WFS");
    serve->add_flag("--bridge", sv.bridge, "Start the bridge");
    serve->add_option("--wps-port", sv.wps_port, "Mock WPS port (0 picks one)");
    serve->add_option("--wfs-port", sv.wfs_port, "Mock WFS port (0 picks one)");
    serve->add_option("--bridge-port", sv.bridge_port, "Bridge port, overriding listen_address");
    serve->add_option("--dataset", sv.dataset, "GeoJSON dataset for the mock WFS");
    serve->add_option("--latency-ms", sv.latency_ms, "Artificial mock WPS latency");
    serve->add_option("--host", sv.host, "Mock bind address");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*discover)
            return run_discover(common, target);
        if (*describe)
            return run_describe(common, target, process_id, json);
        if (*execute)
            return run_execute(common, ex);
        if (*serve)
            return run_serve(common, sv);
    } catch (const CliFailure& f) {
        std::cerr << "geobind: " << f.message << "\n";
        return f.code;
    } catch (const wps::BindingViolations& e) {
        for (const auto& v : e.violations())
            std::cerr << wps::to_string(v.kind) << ": " << v.input_id << "\n";
        return kValidation;
    } catch (const ServiceReportedException& e) {
        std::cerr << "geobind: remote exception " << e.info().code;
        if (e.info().locator)
            std::cerr << " (" << *e.info().locator << ")";
        for (const auto& m : e.info().messages)
            std::cerr << ": " << m;
        std::cerr << "\n";
        return kRemote;
    } catch (const Error& e) {
        std::cerr << "geobind: " << errc_name(e.code()) << ": " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "geobind: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
