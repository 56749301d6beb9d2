#pragma once

#include <stdexcept>
#include <string>

namespace goblend {

// The C API maps each of these onto a status code.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Precondition breaches (e.g. stepping a finished episode) and broken
// internal invariants (e.g. replay divergence).
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace goblend
