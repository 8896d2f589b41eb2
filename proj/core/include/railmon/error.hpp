#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace railmon {

enum class ErrorCode {
    InvalidNodeId,
    RangeError,
    BadHeader,
    BadLength,
    BadJson,
    InvalidParams,
    DegenerateParams,
    DomainError,
    UnknownRegister,
    UnknownCommand,
    NotMeasuring,
    ClockRegression,
    ForeignGateway,
    SinkUnavailable,
    ScenarioInvalid,
    StoreUnavailable,
    BadRange,
    InvalidRule,
    OutOfOrder,
};

/// Stable identifier used on stderr by the CLI and in rejection records.
std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail);

    ErrorCode code() const noexcept { return code_; }
    std::string_view name() const noexcept { return error_name(code_); }

private:
    ErrorCode code_;
};

}  // namespace railmon
