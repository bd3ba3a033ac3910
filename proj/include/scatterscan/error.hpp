#pragma once

#include <stdexcept>
#include <string>

namespace scatterscan {

enum class ErrorCode {
    NoIntersection,
    NotOnBoundary,
    UnsupportedDimension,
    SegmentOutsideDomain,
    NonPositiveTolerance,
    SupportViolation,
    NotOutflow,
    WidthTooLarge,
    InvalidRecovery,
    EmptyChordSet,
    NoValidRecords,
    GridTooLarge,
    ConstructionFailed,
    InvalidArgument,
    IoError,
    ConfigError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

} // namespace scatterscan
