#pragma once

#include "vfc/experiments.hpp"
#include "vfc/smdp.hpp"

#include <string>

namespace vfc {

/// Parse failure with the 1-based line it happened on.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& file, int line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what) {}
};

/**
Reads a flat `key = value` file (one pair per line, '#' comments, blank
lines ignored) into the system configuration and experiment spec. Keys
match the field names; lists are comma-separated and integer lists also
accept "a-b" ranges. Unknown keys and malformed values raise ConfigError.
*/
void apply_config_file(const std::string& file_path, SystemConfig& config,
                       ExperimentSpec& spec);

}  // namespace vfc
