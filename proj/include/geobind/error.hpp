#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace geobind {

enum class Errc {
    MalformedUrl,
    StageViolation,
    DuplicateProcessId,
    UnknownProcess,
    UnknownInput,
    UnknownOutput,
    KindMismatch,
    OccurrenceExceeded,
    LiteralParseError,
    UnresolvedClientFetch,
    UnsupportedVersion,
    EmptyIdentifier,
    XmlSyntax,
    NotACapabilitiesDocument,
    NotADescriptionDocument,
    NotAnExceptionReport,
    UnknownParameterKind,
    UnsupportedGeometry,
    MalformedCoordinates,
    InvalidGeometry,
    NoGeometryProperty,
    MixedSrs,
    GeoJsonSyntax,
    ConflictingFilters,
    InvalidQuery,
    NotAWfsCapabilities,
    AmbiguousGeometry,
    TransportError,
    ServiceReportedException,
    SelfIntersectingInput,
    NonPositiveDistance,
    DegenerateIntersection,
    ZeroMeasure,
    InvalidParameter,
    BindingViolations,
    PortInUse,
    DatasetLoadError,
    ConfigError,
};

std::string_view errc_name(Errc code) noexcept;

/// Base of every failure raised by the library. The code is stable and is
/// what callers (CLI exit codes, bridge status mapping) switch on.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message);

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// OWS exception structure: first exception's code/locator, all texts.
struct ExceptionInfo {
    std::string code;
    std::optional<std::string> locator;
    std::vector<std::string> messages;

    bool operator==(const ExceptionInfo&) const = default;
};

/// Raised when a remote service answered with an ows:ExceptionReport.
class ServiceReportedException : public Error {
public:
    explicit ServiceReportedException(ExceptionInfo info);

    const ExceptionInfo& info() const noexcept { return info_; }

private:
    ExceptionInfo info_;
};

/// Non-2xx answer or connection failure. status is 0 when no HTTP
/// response was received at all.
class TransportError : public Error {
public:
    TransportError(int status, const std::string& message);

    int status() const noexcept { return status_; }

private:
    int status_;
};

} // namespace geobind
