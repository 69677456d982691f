#pragma once

#include "geobind/error.hpp"
#include "geobind/geometry.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

/// WPS 1.0.0 domain types and the staged binding session:
/// Start -> CapabilitiesLoaded -> ProcessDescribed -> InputsBound -> Completed | Failed.
///
/// Sessions are immutable values. Every operation takes the session by
/// const reference and returns a new one; on error nothing is returned and
/// the caller's session is untouched.
namespace geobind::wps {

inline constexpr std::string_view kVersion = "1.0.0";

enum class DataKind { Literal, Complex, BoundingBox };
enum class LiteralType { String, Integer, Double, Boolean };

std::string_view to_string(DataKind k);
std::string_view to_string(LiteralType t);
/// Maps "double", "xs:double", ".../#double", "float", "int", ... to a
/// literal type. Unknown names read as String.
LiteralType literal_type_from_name(std::string_view name);

/// True when `value` parses under `type`.
bool literal_parses(std::string_view value, LiteralType type);

struct Format {
    std::string mime_type;
    std::optional<std::string> encoding;
    std::optional<std::string> schema;

    bool operator==(const Format&) const = default;
};

struct ServiceEndpoint {
    std::string base_url;
    std::string title;
    std::string abstract;
    std::string wps_version;
    std::set<std::string> supported_operations;

    bool operator==(const ServiceEndpoint&) const = default;
};

/// Service-level part of a Capabilities document.
struct ServiceMetadata {
    std::string title;
    std::string abstract;
    std::string version;
    std::set<std::string> operations;

    bool operator==(const ServiceMetadata&) const = default;
};

struct ProcessBrief {
    std::string identifier;
    std::string title;
    std::optional<std::string> abstract;

    bool operator==(const ProcessBrief&) const = default;
};

struct InputDescriptor {
    std::string identifier;
    std::string title;
    DataKind kind = DataKind::Literal;
    std::optional<LiteralType> literal_datatype;
    /// Default format first.
    std::vector<Format> formats;
    unsigned min_occurs = 1;
    unsigned max_occurs = 1;
    std::optional<std::string> default_value;

    bool operator==(const InputDescriptor&) const = default;
};

struct OutputDescriptor {
    std::string identifier;
    std::string title;
    DataKind kind = DataKind::Complex;
    std::optional<LiteralType> literal_datatype;
    std::vector<Format> formats;

    bool operator==(const OutputDescriptor&) const = default;
};

struct ProcessDescription {
    ProcessBrief brief;
    std::vector<InputDescriptor> inputs;
    std::vector<OutputDescriptor> outputs;

    const InputDescriptor* input(std::string_view id) const;
    const OutputDescriptor* output(std::string_view id) const;

    bool operator==(const ProcessDescription&) const = default;
};

/// Throws Error(InvalidParameter) when a description breaks its shape rules.
void check(const ProcessDescription& d);

struct InlineLiteral {
    std::string value;
    LiteralType datatype = LiteralType::String;
    bool operator==(const InlineLiteral&) const = default;
};

/// Opaque payload bytes; GML interpretation happens elsewhere.
struct InlineComplex {
    std::string payload;
    std::string mime_type;
    std::optional<std::string> encoding;
    std::optional<std::string> schema;
    bool operator==(const InlineComplex&) const = default;
};

struct InlineBBox {
    BBox bbox;
    bool operator==(const InlineBBox&) const = default;
};

enum class HttpMethod { Get, Post };

struct Reference {
    std::string href;
    HttpMethod method = HttpMethod::Get;
    std::optional<std::string> body;
    std::optional<std::string> mime_type;
    bool operator==(const Reference&) const = default;
};

using DataEnvelope = std::variant<InlineLiteral, InlineComplex, InlineBBox, Reference>;

/// Validates an envelope's own invariants (literal parses, absolute href,
/// no body on GET). Throws LiteralParseError / MalformedUrl / InvalidParameter.
void check(const DataEnvelope& e);

struct ExecuteResult {
    enum class Status { Succeeded, Failed };
    Status status = Status::Succeeded;
    /// Ordered as the service returned them.
    std::vector<std::pair<std::string, DataEnvelope>> outputs;
    std::optional<ExceptionInfo> failure;

    const DataEnvelope* output(std::string_view id) const;

    bool operator==(const ExecuteResult&) const = default;
};

struct ExecuteRequest {
    std::string process_id;
    /// Declaration order; an input bound several times appears once per
    /// envelope, in bind order.
    std::vector<std::pair<std::string, DataEnvelope>> inputs;
    std::vector<std::string> outputs;
    bool raw = false;

    bool operator==(const ExecuteRequest&) const = default;
};

enum class Stage { Start, CapabilitiesLoaded, ProcessDescribed, InputsBound, Completed, Failed };
std::string_view to_string(Stage s);

enum class FetchMode { SendReference, FetchClientSide };

struct Violation {
    enum class Kind { MissingRequired, OccurrenceExceeded, KindMismatch };
    Kind kind;
    std::string input_id;

    bool operator==(const Violation&) const = default;
};
std::string_view to_string(Violation::Kind k);

/// Raised by build_execute when the bindings do not validate.
class BindingViolations : public Error {
public:
    explicit BindingViolations(std::vector<Violation> violations);

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

struct BindingSession {
    Stage stage = Stage::Start;
    std::optional<ServiceEndpoint> endpoint;
    std::vector<ProcessBrief> processes;
    std::optional<ProcessDescription> selected;
    std::map<std::string, std::vector<DataEnvelope>> bindings;
    std::map<std::string, FetchMode> fetch_mode;
    std::optional<ExecuteResult> result;

    bool operator==(const BindingSession&) const = default;
};

BindingSession begin_session(std::string_view url);

/// Throws StageViolation, DuplicateProcessId, UnsupportedVersion.
BindingSession load_capabilities(const BindingSession& s, const ServiceMetadata& metadata,
                                 const std::vector<ProcessBrief>& processes);

/// Allowed from CapabilitiesLoaded only; bindings start empty.
BindingSession select_process(const BindingSession& s, const ProcessDescription& description);

BindingSession bind_input(const BindingSession& s, std::string_view input_id, const DataEnvelope& envelope);

/// Drops every envelope (and the fetch mode) of one input. The stage is
/// re-derived, so a session may drop from InputsBound back to
/// ProcessDescribed.
BindingSession clear_input(const BindingSession& s, std::string_view input_id);

/// Marks how a Reference-bound input is delivered. Every envelope bound to
/// the input must be a Reference.
BindingSession set_fetch_mode(const BindingSession& s, std::string_view input_id, FetchMode mode);

/// Replaces the envelopes of an input with client-side fetched data and
/// forgets its fetch mode.
BindingSession resolve_input(const BindingSession& s, std::string_view input_id,
                             const std::vector<DataEnvelope>& resolved);

/// Every unmet constraint at once, in input declaration order.
std::vector<Violation> validate_bindings(const BindingSession& s);

ExecuteRequest build_execute(const BindingSession& s, const std::optional<std::string>& raw_single_output = {});

BindingSession accept_result(const BindingSession& s, const ExecuteResult& result);

/// The envelope variant that satisfies `kind` inline. References satisfy any kind.
bool satisfies(const DataEnvelope& e, DataKind kind);

} // namespace geobind::wps
