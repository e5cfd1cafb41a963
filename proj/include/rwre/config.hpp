// Experiment configuration: a flat key = value text format (numbers,
// strings, booleans, arrays, inline tables — one entry per line, '#'
// comments) parsed into JSON, with JSON itself accepted as an alternative
// input encoding. Unknown keys are rejected with the offending key and,
// for the text format, its line number.

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rwre/environment.hpp"

namespace rwre::exp {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ParsedConfig {
    nlohmann::json values;
    std::map<std::string, int> key_lines;  // top-level key -> source line
};

// Text body starting with '{' parses as JSON; anything else as key = value.
ParsedConfig parse_config_text(const std::string& text);

// Law description: { kind = "deterministic", p = 0.7 } |
// { kind = "finite", atoms = [[p, w], ...] } |
// { kind = "uniform", lo = .., hi = .. [, delta = ..] }
EnvironmentLaw law_from_json(const nlohmann::json& j);
nlohmann::json law_to_json(const EnvironmentLaw& law);

}  // namespace rwre::exp
