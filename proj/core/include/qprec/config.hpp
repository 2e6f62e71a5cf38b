#pragma once

#include <stdexcept>
#include <string>

#include "qprec/eval.hpp"

namespace qprec {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ExperimentConfig default_config();

// Key/value text with nested [tables]; unknown keys or sections are errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Dotted-path override, e.g. "wmmse.tolerance=1e-5" or "schemes=sd,ep".
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

// Canonical form: fixed field order, stable number formatting; parsing the
// output reproduces the config.
std::string serialize_config(const ExperimentConfig& cfg);

void validate_config(const ExperimentConfig& cfg);

}  // namespace qprec
