#include "anylens/cli.hpp"

#include "anylens/report.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace anylens
{

namespace
{

constexpr const char* kSynopsis =
    "usage: anylens {analyze|stats|stubs} PATH [--corpus] [--patterns P1,P2,...] [--format json|text] "
    "[--output FILE] [--fail-on-findings] [--include-vendored] [--no-timestamp] [--jobs N]";

struct Options
{
    std::string path;
    bool        corpus = false;
    std::string patterns;
    bool        patterns_given = false;
    std::string format         = "text";
    std::string output;
    bool        fail_on_findings = false;
    bool        include_vendored = false;
    bool        no_timestamp     = false;
    unsigned    jobs             = 0;
};

void add_common( CLI::App& cmd, Options& o )
{
    cmd.add_option( "path", o.path, "project root, or corpus root with --corpus" )->required();
    cmd.add_flag( "--corpus", o.corpus, "treat each immediate subdirectory as a project" );
    cmd.add_option( "--patterns", o.patterns, "comma-separated pattern ids (default: all but PAT_TVAR)" );
    cmd.add_option( "--format", o.format, "json or text" )->check( CLI::IsMember( { "json", "text" } ) );
    cmd.add_option( "--output", o.output, "write to FILE instead of stdout" );
    cmd.add_flag( "--fail-on-findings", o.fail_on_findings, "exit 1 when any finding is reported" );
    cmd.add_flag( "--include-vendored", o.include_vendored, "also scan virtualenvs, site-packages, build dirs" );
    cmd.add_flag( "--no-timestamp", o.no_timestamp, "emit run_timestamp as null" );
    cmd.add_option( "--jobs", o.jobs, "parallel parser workers (default: hardware threads)" )
        ->check( CLI::Range( 1u, 1024u ) );
}

class UsageError : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

PatternSet parse_patterns( const std::string& list )
{
    PatternSet  set;
    std::size_t pos = 0;
    while ( pos <= list.size() )
    {
        std::size_t comma = list.find( ',', pos );
        if ( comma == std::string::npos ) comma = list.size();
        std::string item = list.substr( pos, comma - pos );
        item.erase( 0, item.find_first_not_of( ' ' ) );
        item.erase( item.find_last_not_of( ' ' ) + 1 );
        pos = comma + 1;
        if ( item.empty() ) continue;
        const auto p = pattern_from_string( item );
        if ( !p ) throw UsageError( "unknown pattern '" + item + "'" );
        set.insert( *p );
    }
    return set;
}

std::string emit_stubs( const std::vector<ProjectResult>& results, bool corpus, bool as_json )
{
    if ( as_json )
    {
        nlohmann::ordered_json lines = nlohmann::ordered_json::array();
        for ( const auto& r : results )
            for ( const auto& line : r.stub_lines )
            {
                nlohmann::ordered_json flags = nlohmann::ordered_json::array();
                for ( AnyFlag f : line.classification.flags ) flags.push_back( to_string( f ) );
                lines.push_back( { { "project_id", r.project_id },
                                   { "file", line.location.file_path },
                                   { "line", line.location.line },
                                   { "symbol", line.qualified_name },
                                   { "classification", flags },
                                   { "text", line.text } } );
            }
        return lines.dump( 2 ) + "\n";
    }
    std::string out;
    for ( const auto& r : results )
        for ( const auto& line : r.stub_lines ) out += ( corpus ? r.project_id + "\t" : "" ) + line.text + "\n";
    return out;
}

int run( const std::string& command, const Options& o, std::ostream& out, std::ostream& err )
{
    AnalysisOptions analysis;
    analysis.patterns = o.patterns_given ? parse_patterns( o.patterns ) : default_patterns();
    analysis.jobs     = o.jobs ? o.jobs : std::max( 1u, std::thread::hardware_concurrency() );

    DiscoveryOptions discovery;
    discovery.include_vendored = o.include_vendored;

    std::vector<ProjectDescriptor> projects;
    try
    {
        projects = discover_projects( o.path, o.corpus ? DiscoveryMode::CorpusOfSubdirectories
                                                       : DiscoveryMode::SingleProject,
                                      discovery );
    }
    catch ( const RootNotFound& e )
    {
        throw UsageError( e.what() );
    }
    for ( const auto& p : projects )
        for ( const auto& w : p.warnings ) err << "warning: " << p.project_id << ": " << w << "\n";

    std::vector<ProjectResult> results;
    results.reserve( projects.size() );
    for ( const auto& p : projects ) results.push_back( analyze_project( p, analysis ) );

    std::optional<std::string> timestamp;
    if ( !o.no_timestamp ) timestamp = utc_timestamp_now();
    const Report report  = build_report( results, o.corpus, timestamp );
    const bool   as_json = o.format == "json";

    std::string text;
    if ( command == "analyze" ) text = as_json ? emit_json( report ) : emit_text( report );
    else if ( command == "stats" ) text = as_json ? emit_stats_json( report ) : emit_stats_text( report.corpus_stats );
    else text = emit_stubs( results, o.corpus, as_json );

    if ( o.output.empty() ) out << text;
    else
    {
        std::ofstream file( o.output, std::ios::binary );
        if ( !file || !( file << text ) ) throw UsageError( "cannot write " + o.output );
    }

    const CorpusStats& s     = report.corpus_stats;
    const int          total = s.files_parsed + s.files_failed;
    if ( total > 0 && 2 * s.files_failed > total ) return kExitParseFailures;
    if ( o.fail_on_findings )
        for ( const auto& p : report.projects )
            if ( !p.findings.empty() ) return kExitFindings;
    return kExitOk;
}

}  // namespace

int run_cli( int argc, const char* const* argv, std::ostream& out, std::ostream& err )
{
    CLI::App app { "Finds imprecise uses of Any in annotated Python code.", "anylens" };
    app.require_subcommand( 1 );
    Options     options;
    std::string command;
    for ( const char* name : { "analyze", "stats", "stubs" } )
    {
        const char* about = std::string_view( name ) == "analyze" ? "findings and statistics"
                            : std::string_view( name ) == "stats" ? "corpus statistics only"
                                                                  : "filtered stub lines, one per line";
        CLI::App*   cmd   = app.add_subcommand( name, about );
        add_common( *cmd, options );
        cmd->callback( [&command, name] { command = name; } );
    }

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::CallForHelp& )
    {
        out << app.help();
        return kExitOk;
    }
    catch ( const CLI::ParseError& e )
    {
        if ( e.get_exit_code() == 0 )
        {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n" << kSynopsis << "\n";
        return kExitUsage;
    }

    for ( CLI::App* sub : app.get_subcommands() )
        if ( sub->count( "--patterns" ) ) options.patterns_given = true;

    try
    {
        return run( command, options, out, err );
    }
    catch ( const UsageError& e )
    {
        err << "error: " << e.what() << "\n" << kSynopsis << "\n";
        return kExitUsage;
    }
    catch ( const std::exception& e )
    {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace anylens
