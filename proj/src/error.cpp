#include "geobind/error.hpp"

namespace geobind {

std::string_view errc_name(Errc code) noexcept
{
    switch (code) {
    case Errc::MalformedUrl: return "MalformedUrl";
    case Errc::StageViolation: return "StageViolation";
    case Errc::DuplicateProcessId: return "DuplicateProcessId";
    case Errc::UnknownProcess: return "UnknownProcess";
    case Errc::UnknownInput: return "UnknownInput";
    case Errc::UnknownOutput: return "UnknownOutput";
    case Errc::KindMismatch: return "KindMismatch";
    case Errc::OccurrenceExceeded: return "OccurrenceExceeded";
    case Errc::LiteralParseError: return "LiteralParseError";
    case Errc::UnresolvedClientFetch: return "UnresolvedClientFetch";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::EmptyIdentifier: return "EmptyIdentifier";
    case Errc::XmlSyntax: return "XmlSyntax";
    case Errc::NotACapabilitiesDocument: return "NotACapabilitiesDocument";
    case Errc::NotADescriptionDocument: return "NotADescriptionDocument";
    case Errc::NotAnExceptionReport: return "NotAnExceptionReport";
    case Errc::UnknownParameterKind: return "UnknownParameterKind";
    case Errc::UnsupportedGeometry: return "UnsupportedGeometry";
    case Errc::MalformedCoordinates: return "MalformedCoordinates";
    case Errc::InvalidGeometry: return "InvalidGeometry";
    case Errc::NoGeometryProperty: return "NoGeometryProperty";
    case Errc::MixedSrs: return "MixedSrs";
    case Errc::GeoJsonSyntax: return "GeoJsonSyntax";
    case Errc::ConflictingFilters: return "ConflictingFilters";
    case Errc::InvalidQuery: return "InvalidQuery";
    case Errc::NotAWfsCapabilities: return "NotAWfsCapabilities";
    case Errc::AmbiguousGeometry: return "AmbiguousGeometry";
    case Errc::TransportError: return "TransportError";
    case Errc::ServiceReportedException: return "ServiceReportedException";
    case Errc::SelfIntersectingInput: return "SelfIntersectingInput";
    case Errc::NonPositiveDistance: return "NonPositiveDistance";
    case Errc::DegenerateIntersection: return "DegenerateIntersection";
    case Errc::ZeroMeasure: return "ZeroMeasure";
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::BindingViolations: return "BindingViolations";
    case Errc::PortInUse: return "PortInUse";
    case Errc::DatasetLoadError: return "DatasetLoadError";
    case Errc::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code)
{
}

namespace {

std::string describe(const ExceptionInfo& info)
{
    std::string out = info.code;
    if (info.locator)
        out += " (locator " + *info.locator + ")";
    for (const auto& m : info.messages)
        out += ": " + m;
    return out;
}

} // namespace

ServiceReportedException::ServiceReportedException(ExceptionInfo info)
    : Error(Errc::ServiceReportedException, describe(info)), info_(std::move(info))
{
}

TransportError::TransportError(int status, const std::string& message)
    : Error(Errc::TransportError, message), status_(status)
{
}

} // namespace geobind
