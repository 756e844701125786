#pragma once

#include "anylens/config_profile.hpp"
#include "anylens/detectors.hpp"
#include "anylens/model.hpp"
#include "anylens/stubs.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace anylens
{

class RootNotFound : public std::runtime_error
{
public:
    explicit RootNotFound( const std::string& path ) : std::runtime_error( "no such directory: " + path ) {}
};

class FileCapExceeded : public std::runtime_error
{
public:
    FileCapExceeded( const std::string& project, std::size_t cap )
        : std::runtime_error( "project '" + project + "' has more than " + std::to_string( cap ) + " source files" )
    {
    }
};

enum class DiscoveryMode
{
    SingleProject,
    CorpusOfSubdirectories,
};

struct DiscoveryOptions
{
    bool        include_vendored = false;
    std::size_t max_files        = 20000;
};

struct ProjectDescriptor
{
    std::string              project_id;
    std::filesystem::path    root;
    std::vector<std::string> config_files;  // names present at the root
    std::vector<std::string> source_files;  // project-relative, sorted
    std::vector<std::string> warnings;
};

/// Descriptors sorted by project_id. Throws RootNotFound and FileCapExceeded.
std::vector<ProjectDescriptor> discover_projects( const std::filesystem::path& root, DiscoveryMode mode,
                                                  const DiscoveryOptions& options = {} );

struct AnalysisOptions
{
    PatternSet patterns = default_patterns();
    unsigned   jobs     = 1;
};

struct StubSummary
{
    int input                    = 0;  // annotation lines with Any
    int kept                     = 0;
    int dropped_first_param_only = 0;
    int dropped_duplicates       = 0;

    friend bool operator==( const StubSummary&, const StubSummary& ) = default;
};

struct CorpusStats
{
    int projects                        = 0;
    int files_parsed                    = 0;
    int files_failed                    = 0;
    int annotation_lines_with_any       = 0;
    int distinct_lines_after_filter     = 0;
    int distinct_lines_across_projects  = 0;
    int explicit_any_count              = 0;
    int implicit_any_count              = 0;
    int unconstrained_typevar_count     = 0;
    int override_comment_count          = 0;
    int any_valued_dict_signatures      = 0;
    int declarations                    = 0;
    int nested_declarations             = 0;
    int override_parent_found           = 0;
    int override_different_args         = 0;

    std::map<std::string, int> per_pattern_counts;       // every pattern id present
    std::map<std::string, int> classification_counts;    // every flag present
    std::map<std::string, int> classification_set_counts;  // "flag+flag" keys

    friend bool operator==( const CorpusStats&, const CorpusStats& ) = default;
};

/// A CorpusStats with every pattern and flag key present and zero.
CorpusStats empty_stats();

struct ProjectResult
{
    std::string               project_id;
    ProjectModel              model;
    ConfigProfile             config_profile;
    std::vector<Finding>      findings;
    std::vector<StubLine>     stub_lines;  // kept lines after filtering
    StubSummary               stub_summary;
    CorpusStats               stats;
};

/// Reads and parses each file (in parallel with options.jobs workers), merges,
/// classifies, filters stub lines, runs the enabled detectors and profiles
/// the configuration. Parse failures are recorded, never fatal.
ProjectResult analyze_project( const ProjectDescriptor& project, const AnalysisOptions& options );

/// Same as analyze_project, from in-memory sources (path, text).
ProjectResult analyze_sources( std::string project_id, const std::vector<std::pair<std::string, std::string>>& sources,
                               const std::vector<ConfigFile>& configs, const AnalysisOptions& options );

/// Stub lines (annotated declarations and variables) that contain Any.
std::vector<StubLine> pipeline_input( const ProjectModel& model );

/// Field-wise merge; the cross-project distinct count is recomputed from the
/// kept stub lines. Independent of input order.
CorpusStats aggregate_stats( const std::vector<const ProjectResult*>& results );

}  // namespace anylens
