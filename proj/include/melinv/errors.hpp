/* errors.hpp  Error types shared across the library.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#pragma once

#include <stdexcept>
#include <string>

namespace melinv {

/// Thrown when an operation receives arguments that violate its contract
/// (bad geometry, shape mismatch, out-of-range parameter, non-finite data).
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace melinv
