#include "geobind/wps_model.hpp"

#include "geobind/url.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace geobind::wps {

std::string_view to_string(DataKind k)
{
    switch (k) {
    case DataKind::Literal: return "Literal";
    case DataKind::Complex: return "Complex";
    case DataKind::BoundingBox: return "BoundingBox";
    }
    return "?";
}

std::string_view to_string(LiteralType t)
{
    switch (t) {
    case LiteralType::String: return "string";
    case LiteralType::Integer: return "integer";
    case LiteralType::Double: return "double";
    case LiteralType::Boolean: return "boolean";
    }
    return "?";
}

std::string_view to_string(Stage s)
{
    switch (s) {
    case Stage::Start: return "Start";
    case Stage::CapabilitiesLoaded: return "CapabilitiesLoaded";
    case Stage::ProcessDescribed: return "ProcessDescribed";
    case Stage::InputsBound: return "InputsBound";
    case Stage::Completed: return "Completed";
    case Stage::Failed: return "Failed";
    }
    return "?";
}

std::string_view to_string(Violation::Kind k)
{
    switch (k) {
    case Violation::Kind::MissingRequired: return "MissingRequired";
    case Violation::Kind::OccurrenceExceeded: return "OccurrenceExceeded";
    case Violation::Kind::KindMismatch: return "KindMismatch";
    }
    return "?";
}

LiteralType literal_type_from_name(std::string_view name)
{
    if (auto cut = name.find_last_of("#:"); cut != std::string_view::npos)
        name = name.substr(cut + 1);
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "double" || lower == "float" || lower == "decimal")
        return LiteralType::Double;
    if (lower == "integer" || lower == "int" || lower == "long" || lower == "short"
        || lower == "nonnegativeinteger" || lower == "positiveinteger" || lower == "unsignedint")
        return LiteralType::Integer;
    if (lower == "boolean" || lower == "bool")
        return LiteralType::Boolean;
    return LiteralType::String;
}

bool literal_parses(std::string_view value, LiteralType type)
{
    const char* first = value.data();
    const char* last = first + value.size();
    switch (type) {
    case LiteralType::String:
        return true;
    case LiteralType::Integer: {
        if (first != last && *first == '+')
            ++first;
        long long v = 0;
        auto [ptr, ec] = std::from_chars(first, last, v);
        return first != last && ec == std::errc{} && ptr == last;
    }
    case LiteralType::Double: {
        if (first != last && *first == '+')
            ++first;
        double v = 0;
        auto [ptr, ec] = std::from_chars(first, last, v);
        return first != last && ec == std::errc{} && ptr == last && std::isfinite(v);
    }
    case LiteralType::Boolean:
        return value == "true" || value == "false" || value == "1" || value == "0";
    }
    return false;
}

const InputDescriptor* ProcessDescription::input(std::string_view id) const
{
    for (const auto& i : inputs) {
        if (i.identifier == id)
            return &i;
    }
    return nullptr;
}

const OutputDescriptor* ProcessDescription::output(std::string_view id) const
{
    for (const auto& o : outputs) {
        if (o.identifier == id)
            return &o;
    }
    return nullptr;
}

const DataEnvelope* ExecuteResult::output(std::string_view id) const
{
    for (const auto& [name, env] : outputs) {
        if (name == id)
            return &env;
    }
    return nullptr;
}

namespace {

template <class Descriptor>
void check_shape(const Descriptor& d)
{
    if (d.identifier.empty())
        throw Error(Errc::InvalidParameter, "descriptor without identifier");
    if (d.kind == DataKind::Literal && !d.literal_datatype)
        throw Error(Errc::InvalidParameter, "literal '" + d.identifier + "' has no datatype");
    if (d.kind == DataKind::Complex && d.formats.empty())
        throw Error(Errc::InvalidParameter, "complex '" + d.identifier + "' has no formats");
}

[[noreturn]] void stage_violation(const BindingSession& s, std::string_view op)
{
    throw Error(Errc::StageViolation,
                std::string(op) + " is not allowed in stage " + std::string(to_string(s.stage)));
}

void require_stage(const BindingSession& s, std::initializer_list<Stage> allowed, std::string_view op)
{
    if (std::find(allowed.begin(), allowed.end(), s.stage) == allowed.end())
        stage_violation(s, op);
}

const InputDescriptor& require_input(const BindingSession& s, std::string_view id)
{
    const auto* d = s.selected->input(id);
    if (!d)
        throw Error(Errc::UnknownInput, "process '" + s.selected->brief.identifier + "' has no input '"
                                            + std::string(id) + "'");
    return *d;
}

BindingSession with_derived_stage(BindingSession s)
{
    s.stage = validate_bindings(s).empty() ? Stage::InputsBound : Stage::ProcessDescribed;
    return s;
}

} // namespace

BindingViolations::BindingViolations(std::vector<Violation> violations)
    : Error(Errc::BindingViolations,
            [&] {
                std::string msg;
                for (const auto& v : violations) {
                    if (!msg.empty())
                        msg += ", ";
                    msg += std::string(to_string(v.kind)) + ": " + v.input_id;
                }
                return msg;
            }()),
      violations_(std::move(violations))
{
}

void check(const ProcessDescription& d)
{
    if (d.brief.identifier.empty())
        throw Error(Errc::InvalidParameter, "process without identifier");
    if (d.outputs.empty())
        throw Error(Errc::InvalidParameter, "process '" + d.brief.identifier + "' declares no outputs");
    std::set<std::string> seen;
    for (const auto& i : d.inputs) {
        check_shape(i);
        if (i.min_occurs > i.max_occurs || i.max_occurs == 0)
            throw Error(Errc::InvalidParameter, "input '" + i.identifier + "' has inconsistent occurrences");
        if (!seen.insert(i.identifier).second)
            throw Error(Errc::InvalidParameter, "duplicate input '" + i.identifier + "'");
    }
    seen.clear();
    for (const auto& o : d.outputs) {
        check_shape(o);
        if (!seen.insert(o.identifier).second)
            throw Error(Errc::InvalidParameter, "duplicate output '" + o.identifier + "'");
    }
}

void check(const DataEnvelope& e)
{
    if (const auto* lit = std::get_if<InlineLiteral>(&e)) {
        if (!literal_parses(lit->value, lit->datatype))
            throw Error(Errc::LiteralParseError, "'" + lit->value + "' is not a valid "
                                                     + std::string(to_string(lit->datatype)));
    } else if (const auto* ref = std::get_if<Reference>(&e)) {
        Url::parse(ref->href);
        if (ref->method == HttpMethod::Get && ref->body)
            throw Error(Errc::InvalidParameter, "GET reference cannot carry a body");
    } else if (const auto* box = std::get_if<InlineBBox>(&e)) {
        if (box->bbox.min_x > box->bbox.max_x || box->bbox.min_y > box->bbox.max_y)
            throw Error(Errc::InvalidParameter, "bounding box corners are inverted");
    }
}

bool satisfies(const DataEnvelope& e, DataKind kind)
{
    return std::visit(
        [kind](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, InlineLiteral>)
                return kind == DataKind::Literal;
            else if constexpr (std::is_same_v<T, InlineComplex>)
                return kind == DataKind::Complex;
            else if constexpr (std::is_same_v<T, InlineBBox>)
                return kind == DataKind::BoundingBox;
            else
                return true;
        },
        e);
}

BindingSession begin_session(std::string_view url)
{
    auto parsed = Url::parse(url);
    BindingSession s;
    s.endpoint = ServiceEndpoint{parsed.text(), {}, {}, {}, {}};
    return s;
}

BindingSession load_capabilities(const BindingSession& s, const ServiceMetadata& metadata,
                                 const std::vector<ProcessBrief>& processes)
{
    require_stage(s, {Stage::Start}, "load_capabilities");
    if (metadata.version != kVersion)
        throw Error(Errc::UnsupportedVersion, "service speaks WPS " + metadata.version + ", need 1.0.0");
    std::set<std::string> seen;
    for (const auto& p : processes) {
        if (p.identifier.empty())
            throw Error(Errc::InvalidParameter, "process without identifier");
        if (!seen.insert(p.identifier).second)
            throw Error(Errc::DuplicateProcessId, "process '" + p.identifier + "' is listed twice");
    }
    BindingSession next = s;
    next.stage = Stage::CapabilitiesLoaded;
    next.endpoint->title = metadata.title;
    next.endpoint->abstract = metadata.abstract;
    next.endpoint->wps_version = metadata.version;
    next.endpoint->supported_operations = metadata.operations;
    next.processes = processes;
    return next;
}

BindingSession select_process(const BindingSession& s, const ProcessDescription& description)
{
    require_stage(s, {Stage::CapabilitiesLoaded}, "select_process");
    const auto& id = description.brief.identifier;
    bool advertised = std::any_of(s.processes.begin(), s.processes.end(),
                                  [&](const ProcessBrief& p) { return p.identifier == id; });
    if (!advertised)
        throw Error(Errc::UnknownProcess, "process '" + id + "' is not offered by the service");
    check(description);
    BindingSession next = s;
    next.stage = Stage::ProcessDescribed;
    next.selected = description;
    next.bindings.clear();
    next.fetch_mode.clear();
    return next;
}

BindingSession bind_input(const BindingSession& s, std::string_view input_id, const DataEnvelope& envelope)
{
    require_stage(s, {Stage::ProcessDescribed, Stage::InputsBound}, "bind_input");
    const auto& d = require_input(s, input_id);
    if (!satisfies(envelope, d.kind))
        throw Error(Errc::KindMismatch, "input '" + d.identifier + "' expects "
                                            + std::string(to_string(d.kind)) + " data");
    check(envelope);
    if (const auto* lit = std::get_if<InlineLiteral>(&envelope); lit && d.literal_datatype) {
        if (!literal_parses(lit->value, *d.literal_datatype))
            throw Error(Errc::LiteralParseError, "'" + lit->value + "' is not a valid "
                                                     + std::string(to_string(*d.literal_datatype))
                                                     + " for input '" + d.identifier + "'");
    }
    auto it = s.bindings.find(d.identifier);
    std::size_t have = it == s.bindings.end() ? 0 : it->second.size();
    if (have + 1 > d.max_occurs)
        throw Error(Errc::OccurrenceExceeded, "input '" + d.identifier + "' accepts at most "
                                                  + std::to_string(d.max_occurs) + " value(s)");
    BindingSession next = s;
    next.bindings[d.identifier].push_back(envelope);
    return with_derived_stage(std::move(next));
}

BindingSession clear_input(const BindingSession& s, std::string_view input_id)
{
    require_stage(s, {Stage::ProcessDescribed, Stage::InputsBound}, "clear_input");
    const auto& d = require_input(s, input_id);
    BindingSession next = s;
    next.bindings.erase(d.identifier);
    next.fetch_mode.erase(d.identifier);
    return with_derived_stage(std::move(next));
}

BindingSession set_fetch_mode(const BindingSession& s, std::string_view input_id, FetchMode mode)
{
    require_stage(s, {Stage::ProcessDescribed, Stage::InputsBound}, "set_fetch_mode");
    const auto& d = require_input(s, input_id);
    auto it = s.bindings.find(d.identifier);
    if (it == s.bindings.end() || it->second.empty()
        || !std::all_of(it->second.begin(), it->second.end(),
                        [](const DataEnvelope& e) { return std::holds_alternative<Reference>(e); }))
        throw Error(Errc::KindMismatch, "fetch mode applies only to inputs bound by reference");
    BindingSession next = s;
    next.fetch_mode[d.identifier] = mode;
    return next;
}

BindingSession resolve_input(const BindingSession& s, std::string_view input_id,
                             const std::vector<DataEnvelope>& resolved)
{
    require_stage(s, {Stage::ProcessDescribed, Stage::InputsBound}, "resolve_input");
    const auto& d = require_input(s, input_id);
    BindingSession next = clear_input(s, input_id);
    for (const auto& e : resolved)
        next = bind_input(next, d.identifier, e);
    return next;
}

std::vector<Violation> validate_bindings(const BindingSession& s)
{
    require_stage(s, {Stage::ProcessDescribed, Stage::InputsBound}, "validate_bindings");
    std::vector<Violation> out;
    for (const auto& d : s.selected->inputs) {
        auto it = s.bindings.find(d.identifier);
        std::size_t count = it == s.bindings.end() ? 0 : it->second.size();
        if (count < d.min_occurs)
            out.push_back({Violation::Kind::MissingRequired, d.identifier});
        if (count > d.max_occurs)
            out.push_back({Violation::Kind::OccurrenceExceeded, d.identifier});
        if (it != s.bindings.end()) {
            bool mismatch = std::any_of(it->second.begin(), it->second.end(),
                                        [&](const DataEnvelope& e) { return !satisfies(e, d.kind); });
            if (mismatch)
                out.push_back({Violation::Kind::KindMismatch, d.identifier});
        }
    }
    return out;
}

ExecuteRequest build_execute(const BindingSession& s, const std::optional<std::string>& raw_single_output)
{
    require_stage(s, {Stage::ProcessDescribed, Stage::InputsBound}, "build_execute");
    if (auto violations = validate_bindings(s); !violations.empty())
        throw BindingViolations(std::move(violations));
    if (raw_single_output && !s.selected->output(*raw_single_output))
        throw Error(Errc::UnknownOutput, "process '" + s.selected->brief.identifier + "' has no output '"
                                             + *raw_single_output + "'");

    ExecuteRequest req;
    req.process_id = s.selected->brief.identifier;
    for (const auto& d : s.selected->inputs) {
        auto it = s.bindings.find(d.identifier);
        if (it == s.bindings.end())
            continue;
        auto mode = s.fetch_mode.find(d.identifier);
        for (const auto& e : it->second) {
            if (mode != s.fetch_mode.end() && mode->second == FetchMode::FetchClientSide
                && std::holds_alternative<Reference>(e))
                throw Error(Errc::UnresolvedClientFetch,
                            "input '" + d.identifier + "' must be fetched client-side before Execute");
            req.inputs.emplace_back(d.identifier, e);
        }
    }
    if (raw_single_output) {
        req.outputs.push_back(*raw_single_output);
        req.raw = true;
    } else {
        for (const auto& o : s.selected->outputs)
            req.outputs.push_back(o.identifier);
    }
    return req;
}

BindingSession accept_result(const BindingSession& s, const ExecuteResult& result)
{
    require_stage(s, {Stage::InputsBound}, "accept_result");
    BindingSession next = s;
    next.stage = result.status == ExecuteResult::Status::Succeeded ? Stage::Completed : Stage::Failed;
    next.result = result;
    return next;
}

} // namespace geobind::wps
