#pragma once

#include <stdexcept>
#include <string>

namespace ifl {

// Numeric values are shared with the C API status codes in ifl.h.
enum class Errc : int {
    ok = 0,
    invalid_argument = 1,
    dimension_mismatch = 2,
    asymmetric_kernel = 3,
    not_normalized = 4,
    self_jump_present = 5,
    reducible = 6,
    site_outside_interior = 7,
    no_convergence = 8,
    nonpositive_curvature = 9,
    lattice_too_large = 10,
    cutoff_insufficient = 11,
    empty_series = 12,
    series_too_short = 13,
    config_error = 14,
    io_error = 15,
    internal = 99,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace ifl
