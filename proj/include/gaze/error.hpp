// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace gaze {

// Shape/length mismatch between operands.
struct DimensionError : std::invalid_argument {
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Position or id outside its valid range.
struct IndexError : std::out_of_range {
    explicit IndexError(const std::string& what) : std::out_of_range(what) {}
};

// Structural misuse of the cache/region layout (e.g. a region pointing at
// a non-visual cache row).
struct LayoutError : std::logic_error {
    explicit LayoutError(const std::string& what) : std::logic_error(what) {}
};

// Caller broke an operation contract (empty attended set, forward/backward
// selection mismatch, incompatible report geometries).
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// A computation produced or encountered a non-finite value.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// File read/write failure.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Bad key, value, or syntax in a run configuration file.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gaze
