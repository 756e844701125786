#pragma once

#include "anylens/corpus.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace anylens
{

inline constexpr std::string_view kSchemaVersion = "1";
inline constexpr std::string_view kToolVersion   = "0.1.0";

struct ProjectReport
{
    std::string               project_id;
    ConfigProfile             config_profile;
    std::vector<Finding>      findings;
    StubSummary               stub_filter_summary;
    std::vector<ParseFailure> parse_failures;

    friend bool operator==( const ProjectReport&, const ProjectReport& ) = default;
};

struct Report
{
    std::string                schema_version = std::string( kSchemaVersion );
    std::string                tool_version   = std::string( kToolVersion );
    std::optional<std::string> run_timestamp;
    bool                       corpus_mode = false;
    CorpusStats                corpus_stats;
    std::vector<ProjectReport> projects;

    friend bool operator==( const Report&, const Report& ) = default;
};

Report build_report( const std::vector<ProjectResult>& results, bool corpus_mode,
                     std::optional<std::string> run_timestamp );

/// Fixed key order, two-space indentation, trailing newline.
std::string emit_json( const Report& report );
/// Only the header fields and corpus_stats.
std::string emit_stats_json( const Report& report );

/// Inverse of emit_json. Throws std::runtime_error on malformed input.
Report report_from_json( std::string_view text );

/// One line per finding, then the stats block.
std::string emit_text( const Report& report );
/// The stats block alone; always the same number of lines.
std::string emit_stats_text( const CorpusStats& stats );

/// `YYYY-MM-DDTHH:MM:SSZ` for the current time.
std::string utc_timestamp_now();

}  // namespace anylens
