#pragma once

#include <stdexcept>
#include <string>

namespace uc {

enum class ErrorCode {
    parse,
    validation,
    shape_mismatch,
    domain,
    bound,
    foreign_variable,
    unsound_bounds,
    box_containment,
    extraction,
    dimension_mismatch,
    budget_exceeded,
    convergence,
    io,
    invalid_argument,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace uc
