#pragma once

#include <stdexcept>
#include <string>

namespace pg {

enum class ErrorCode {
    invalid_argument,
    parse,
    io,
    not_found,
    validation,
    provider,
    protocol,
};

// Every recoverable failure in the library surfaces as Error; the C boundary
// maps code() onto pg_status values.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message) : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace pg
