#pragma once

#include <stdexcept>
#include <string>

namespace portsel {

// Base class for everything this library throws.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input data fails a structural or numeric check (non-finite cell,
// duplicate instance id, negative cost, ...).
struct validation_error : error {
  using error::error;
};

// Tables cannot be merged.
struct join_error : error {
  using error::error;
};

// Column layout differs from what an operation requires.
struct schema_error : error {
  using error::error;
};

// Bad experiment, builder, or learner configuration.
struct config_error : error {
  using error::error;
};

}  // namespace portsel
