#pragma once

#include "chelsea/pipeline.hpp"

#include <filesystem>
#include <istream>

namespace chelsea {

/// Parses the flat key-value run configuration ("key = value" lines, '#'
/// comments). Unknown keys and malformed values raise ConfigError. See the
/// README for the key list; schedule presets are selected by name with
/// custom (r_init, alpha, m, floor) overrides.
ChelseaConfig parse_config(std::istream& is);

ChelseaConfig load_config(const std::filesystem::path& path);

}  // namespace chelsea
