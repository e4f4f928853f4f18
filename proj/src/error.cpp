#include "sfcast/error.hpp"

namespace sfcast {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_period: return "invalid-period";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::degenerate_series: return "degenerate-series";
    case ErrorCode::insufficient_corpus: return "insufficient-corpus";
    case ErrorCode::metadata_missing: return "metadata-missing";
    case ErrorCode::invalid_basis: return "invalid-basis";
    case ErrorCode::shape_error: return "shape-error";
    case ErrorCode::no_observations: return "no-observations";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::invalid_range: return "invalid-range";
    case ErrorCode::underdetermined: return "underdetermined";
    case ErrorCode::no_evaluable_entries: return "no-evaluable-entries";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::format_error: return "format-error";
    }
    return "unknown";
}

} // namespace sfcast
