#pragma once

#include <stdexcept>
#include <string>

namespace mobility {

/// Bad input: missing/unreadable files, schema violations in reference data,
/// invalid configuration. The CLI maps this to exit code 2.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mobility
