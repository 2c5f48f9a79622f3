#pragma once

#include <stdexcept>

namespace blocktau {

struct SingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Request would materialize a dense object beyond the size guard.
struct CapacityError : std::length_error {
    using std::length_error::length_error;
};

}  // namespace blocktau
