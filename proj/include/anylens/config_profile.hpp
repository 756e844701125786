#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace anylens
{

struct ConfigFile
{
    std::string name;  // file name relative to the project root
    std::string text;
};

struct MalformedConfig
{
    std::string file;
    std::string reason;

    friend bool operator==( const MalformedConfig&, const MalformedConfig& ) = default;
};

/// Boolean for recognized flags with a boolean value, raw text otherwise.
using OptionValue = std::variant<bool, std::string>;

struct ConfigProfile
{
    std::string                        project_id;
    std::map<std::string, OptionValue> options;
    bool                               implicit_any_exposed = true;
    std::vector<std::string>           files_read;  // in the order they were applied
    std::vector<MalformedConfig>       errors;

    friend bool operator==( const ConfigProfile&, const ConfigProfile& ) = default;
};

/// mypy.ini, pyproject.toml, setup.cfg.
bool is_config_filename( std::string_view name );

/// Flags switched on by `strict = True`.
std::span<const std::string_view> strict_bundle();

/// Reads the global mypy section of every file. When several files set the
/// same option, mypy.ini beats pyproject.toml which beats setup.cfg. Options
/// set explicitly win over those implied by `strict`.
ConfigProfile derive_config_profile( std::string project_id, const std::vector<ConfigFile>& files );

/// Raw key/value pairs of the `[mypy]` section of an INI text. Throws
/// std::runtime_error with a line-numbered reason on malformed input.
std::vector<std::pair<std::string, std::string>> read_ini_mypy_section( std::string_view text );

/// Key/value pairs of the `[tool.mypy]` table of a TOML text. Strings are
/// unquoted; other values keep their source text. Throws std::runtime_error.
std::vector<std::pair<std::string, std::string>> read_toml_mypy_table( std::string_view text );

}  // namespace anylens
