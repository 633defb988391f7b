#pragma once

#include <stdexcept>
#include <string>

namespace uqlift {

enum class ErrorCode {
    NotFundamental,
    DegenerateInput,
    NotIntegral,
    NotTotallyPositive,
    NoSquareClass,
    DegenerateSquare,
    PreconditionFailed,
    NotAUnit,
    RankDeficient,
    ExponentRecoveryFailed,
    ClassNumberNotOne,
    NotCoprime,
    NotSquarefree,
    ESpecialFive,
    DTooSmall,
    DivisibleBy5,
    CorruptCheckpoint,
    InvalidArgument,
    IoError,
};

inline const char* error_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::NotFundamental: return "NotFundamental";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::NotIntegral: return "NotIntegral";
        case ErrorCode::NotTotallyPositive: return "NotTotallyPositive";
        case ErrorCode::NoSquareClass: return "NoSquareClass";
        case ErrorCode::DegenerateSquare: return "DegenerateSquare";
        case ErrorCode::PreconditionFailed: return "PreconditionFailed";
        case ErrorCode::NotAUnit: return "NotAUnit";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::ExponentRecoveryFailed: return "ExponentRecoveryFailed";
        case ErrorCode::ClassNumberNotOne: return "ClassNumberNotOne";
        case ErrorCode::NotCoprime: return "NotCoprime";
        case ErrorCode::NotSquarefree: return "NotSquarefree";
        case ErrorCode::ESpecialFive: return "ESpecialFive";
        case ErrorCode::DTooSmall: return "DTooSmall";
        case ErrorCode::DivisibleBy5: return "DivisibleBy5";
        case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(std::string(error_name(code)) + ": " + msg), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace uqlift
