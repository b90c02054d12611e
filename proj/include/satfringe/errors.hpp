#pragma once

#include <stdexcept>
#include <string>

namespace satfringe {

/// Bad model parameters, malformed files, inconsistent configuration.
struct validation_error : std::invalid_argument {
    explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

/// A numeric routine failed to reach its accuracy target.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// A fit declined to run (too little data, degenerate setup).  Maps to its own
/// process exit code so pipelines can tell "refused" from "invalid input".
struct fit_refused : std::runtime_error {
    explicit fit_refused(const std::string& what) : std::runtime_error(what) {}
};

} // namespace satfringe
