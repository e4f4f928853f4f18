#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sfcast {

enum class ErrorCode {
    invalid_period,
    empty_input,
    not_found,
    degenerate_series,
    insufficient_corpus,
    metadata_missing,
    invalid_basis,
    shape_error,
    no_observations,
    divergence,
    invalid_range,
    underdetermined,
    no_evaluable_entries,
    invalid_argument,
    io_error,
    format_error,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; `code()` is stable and
// machine-readable, `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace sfcast
