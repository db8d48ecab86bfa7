#pragma once

#include <stdexcept>
#include <string>

namespace hyperdyn {

// Bad arguments are reported with std::invalid_argument; the types below
// cover the remaining failure kinds.

struct EmptyDomain : std::domain_error {
    using std::domain_error::domain_error;
};

struct NotFound : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct Unsupported : std::logic_error {
    using std::logic_error::logic_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hyperdyn
