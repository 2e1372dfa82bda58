#ifndef GFLOW_ERROR_HPP
#define GFLOW_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace gflow {

/// Failure categories. Each maps to a distinct CLI exit code (see exit_code()).
enum class Errc {
    OutsideTubularNeighbourhood,
    InvalidGeometry,
    InvalidExponent,
    DimensionMismatch,
    DegenerateIncrement,
    InnerSolverStalled,
    OutOfRange,
    UnsupportedAmbientDim,
    SupportViolation,
    IndexOutOfRange,
    NotTangent,
    ParseError,
    ValidationError,
    PresetUnavailable,
    IoError,
};

constexpr std::string_view errc_name(Errc c) noexcept {
    switch (c) {
    case Errc::OutsideTubularNeighbourhood: return "OutsideTubularNeighbourhood";
    case Errc::InvalidGeometry: return "InvalidGeometry";
    case Errc::InvalidExponent: return "InvalidExponent";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DegenerateIncrement: return "DegenerateIncrement";
    case Errc::InnerSolverStalled: return "InnerSolverStalled";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::UnsupportedAmbientDim: return "UnsupportedAmbientDim";
    case Errc::SupportViolation: return "SupportViolation";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::NotTangent: return "NotTangent";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::PresetUnavailable: return "PresetUnavailable";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

/// Process exit code for an error category. 1 is reserved for failed checks.
constexpr int exit_code(Errc c) noexcept { return 10 + static_cast<int>(c); }

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what),
          code_(code),
          detail_(what) {}

    Errc code() const noexcept { return code_; }
    /// The message without the category prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

/// Raised by the config loader; carries the offending key (and line when known).
class ConfigError : public Error {
public:
    ConfigError(Errc code, std::string key, const std::string& what)
        : Error(code, what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace gflow

#endif // GFLOW_ERROR_HPP
