#include "railmon/error.hpp"

namespace railmon {

std::string_view error_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidNodeId: return "InvalidNodeId";
        case ErrorCode::RangeError: return "RangeError";
        case ErrorCode::BadHeader: return "BadHeader";
        case ErrorCode::BadLength: return "BadLength";
        case ErrorCode::BadJson: return "BadJson";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::DegenerateParams: return "DegenerateParams";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::UnknownRegister: return "UnknownRegister";
        case ErrorCode::UnknownCommand: return "UnknownCommand";
        case ErrorCode::NotMeasuring: return "NotMeasuring";
        case ErrorCode::ClockRegression: return "ClockRegression";
        case ErrorCode::ForeignGateway: return "ForeignGateway";
        case ErrorCode::SinkUnavailable: return "SinkUnavailable";
        case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
        case ErrorCode::StoreUnavailable: return "StoreUnavailable";
        case ErrorCode::BadRange: return "BadRange";
        case ErrorCode::InvalidRule: return "InvalidRule";
        case ErrorCode::OutOfOrder: return "OutOfOrder";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

}  // namespace railmon
