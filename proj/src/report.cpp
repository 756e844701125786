#include "anylens/report.hpp"

#include "json.hpp"

#include <chrono>
#include <ctime>
#include <sstream>
#include <stdexcept>

namespace anylens
{

using json = nlohmann::ordered_json;

namespace
{

// Scalar counters in emission order; the maps follow them.
const std::pair<const char*, int CorpusStats::*> kCounters[] = {
    { "projects", &CorpusStats::projects },
    { "files_parsed", &CorpusStats::files_parsed },
    { "files_failed", &CorpusStats::files_failed },
    { "annotation_lines_with_any", &CorpusStats::annotation_lines_with_any },
    { "distinct_lines_after_filter", &CorpusStats::distinct_lines_after_filter },
    { "distinct_lines_across_projects", &CorpusStats::distinct_lines_across_projects },
    { "explicit_any_count", &CorpusStats::explicit_any_count },
    { "implicit_any_count", &CorpusStats::implicit_any_count },
    { "unconstrained_typevar_count", &CorpusStats::unconstrained_typevar_count },
    { "override_comment_count", &CorpusStats::override_comment_count },
    { "override_parent_found", &CorpusStats::override_parent_found },
    { "override_different_args", &CorpusStats::override_different_args },
    { "any_valued_dict_signatures", &CorpusStats::any_valued_dict_signatures },
    { "declarations", &CorpusStats::declarations },
    { "nested_declarations", &CorpusStats::nested_declarations },
};

json stats_to_json( const CorpusStats& s )
{
    json j = json::object();
    for ( const auto& [key, member] : kCounters ) j[key] = s.*member;
    j["per_pattern_counts"]        = json::object();
    j["classification_counts"]     = json::object();
    j["classification_set_counts"] = json::object();
    for ( Pattern p : kAllPatterns )
    {
        const std::string key( to_string( p ) );
        auto              it = s.per_pattern_counts.find( key );
        j["per_pattern_counts"][key] = it == s.per_pattern_counts.end() ? 0 : it->second;
    }
    for ( const auto& [k, v] : s.classification_counts ) j["classification_counts"][k] = v;
    for ( const auto& [k, v] : s.classification_set_counts ) j["classification_set_counts"][k] = v;
    return j;
}

CorpusStats stats_from_json( const json& j )
{
    CorpusStats s;
    for ( const auto& [key, member] : kCounters ) s.*member = j.at( key ).get<int>();
    for ( const auto& [k, v] : j.at( "per_pattern_counts" ).items() ) s.per_pattern_counts[k] = v.get<int>();
    for ( const auto& [k, v] : j.at( "classification_counts" ).items() ) s.classification_counts[k] = v.get<int>();
    for ( const auto& [k, v] : j.at( "classification_set_counts" ).items() )
        s.classification_set_counts[k] = v.get<int>();
    return s;
}

json finding_to_json( const Finding& f )
{
    json j;
    j["pattern"]  = to_string( f.pattern );
    j["location"] = { { "file", f.location.file_path }, { "line", f.location.line }, { "column", f.location.column } };
    j["symbol"]       = f.symbol;
    j["confidence"]   = to_string( f.confidence );
    j["experimental"] = f.experimental;
    j["summary"]      = f.summary;
    j["evidence"]     = json::object();
    for ( const auto& [k, v] : f.evidence ) j["evidence"][k] = v;
    if ( f.suggestion )
    {
        json s;
        s["target"] = to_string( f.suggestion->target );
        if ( f.suggestion->target == Suggestion::Target::Param ) s["param_index"] = f.suggestion->param_index;
        s["replacement"] = f.suggestion->replacement;
        j["suggestion"]  = std::move( s );
    }
    else j["suggestion"] = nullptr;
    return j;
}

Finding finding_from_json( const json& j )
{
    Finding f;
    const auto pattern = pattern_from_string( j.at( "pattern" ).get<std::string>() );
    if ( !pattern ) throw std::runtime_error( "unknown pattern " + j.at( "pattern" ).dump() );
    f.pattern                = *pattern;
    const json& loc          = j.at( "location" );
    f.location.file_path     = loc.at( "file" ).get<std::string>();
    f.location.line          = loc.at( "line" ).get<int>();
    f.location.column        = loc.at( "column" ).get<int>();
    f.symbol                 = j.at( "symbol" ).get<std::string>();
    const auto confidence    = confidence_from_string( j.at( "confidence" ).get<std::string>() );
    if ( !confidence ) throw std::runtime_error( "unknown confidence " + j.at( "confidence" ).dump() );
    f.confidence   = *confidence;
    f.experimental = j.at( "experimental" ).get<bool>();
    f.summary      = j.at( "summary" ).get<std::string>();
    for ( const auto& [k, v] : j.at( "evidence" ).items() ) f.evidence.emplace_back( k, v.get<std::string>() );
    const json& s = j.at( "suggestion" );
    if ( !s.is_null() )
    {
        Suggestion out;
        const std::string target = s.at( "target" ).get<std::string>();
        if ( target == "return_type" ) out.target = Suggestion::Target::ReturnType;
        else if ( target == "param" ) out.target = Suggestion::Target::Param;
        else if ( target == "typevar_decl" ) out.target = Suggestion::Target::TypevarDecl;
        else throw std::runtime_error( "unknown suggestion target " + target );
        if ( out.target == Suggestion::Target::Param ) out.param_index = s.at( "param_index" ).get<int>();
        out.replacement = s.at( "replacement" ).get<std::string>();
        f.suggestion    = std::move( out );
    }
    return f;
}

json profile_to_json( const ConfigProfile& p )
{
    json j;
    j["options"] = json::object();
    for ( const auto& [k, v] : p.options )
    {
        if ( std::holds_alternative<bool>( v ) ) j["options"][k] = std::get<bool>( v );
        else j["options"][k] = std::get<std::string>( v );
    }
    j["implicit_any_exposed"] = p.implicit_any_exposed;
    j["files_read"]           = p.files_read;
    j["errors"]               = json::array();
    for ( const auto& e : p.errors ) j["errors"].push_back( { { "file", e.file }, { "reason", e.reason } } );
    return j;
}

ConfigProfile profile_from_json( const json& j, const std::string& project_id )
{
    ConfigProfile p;
    p.project_id = project_id;
    for ( const auto& [k, v] : j.at( "options" ).items() )
    {
        if ( v.is_boolean() ) p.options[k] = v.get<bool>();
        else p.options[k] = v.get<std::string>();
    }
    p.implicit_any_exposed = j.at( "implicit_any_exposed" ).get<bool>();
    p.files_read           = j.at( "files_read" ).get<std::vector<std::string>>();
    for ( const auto& e : j.at( "errors" ) )
        p.errors.push_back( MalformedConfig { e.at( "file" ).get<std::string>(), e.at( "reason" ).get<std::string>() } );
    return p;
}

json header( const Report& r )
{
    json j;
    j["schema_version"] = r.schema_version;
    j["tool_version"]   = r.tool_version;
    j["run_timestamp"]  = r.run_timestamp ? json( *r.run_timestamp ) : json( nullptr );
    j["mode"]           = r.corpus_mode ? "corpus" : "single_project";
    return j;
}

std::string finding_path( const Report& r, const ProjectReport& p, const Finding& f )
{
    return r.corpus_mode ? p.project_id + "/" + f.location.file_path : f.location.file_path;
}

}  // namespace

Report build_report( const std::vector<ProjectResult>& results, bool corpus_mode,
                     std::optional<std::string> run_timestamp )
{
    Report report;
    report.run_timestamp = std::move( run_timestamp );
    report.corpus_mode   = corpus_mode;
    std::vector<const ProjectResult*> ptrs;
    for ( const auto& r : results )
    {
        ptrs.push_back( &r );
        report.projects.push_back(
            ProjectReport { r.project_id, r.config_profile, r.findings, r.stub_summary, r.model.failures } );
    }
    report.corpus_stats = aggregate_stats( ptrs );
    return report;
}

std::string emit_json( const Report& report )
{
    json j            = header( report );
    j["corpus_stats"] = stats_to_json( report.corpus_stats );
    j["projects"]     = json::array();
    for ( const auto& p : report.projects )
    {
        json pj;
        pj["project_id"]     = p.project_id;
        pj["config_profile"] = profile_to_json( p.config_profile );
        pj["findings"]       = json::array();
        for ( const auto& f : p.findings ) pj["findings"].push_back( finding_to_json( f ) );
        pj["stub_filter_summary"] = { { "input", p.stub_filter_summary.input },
                                      { "kept", p.stub_filter_summary.kept },
                                      { "dropped_first_param_only", p.stub_filter_summary.dropped_first_param_only },
                                      { "dropped_duplicates", p.stub_filter_summary.dropped_duplicates } };
        pj["parse_failures"]      = json::array();
        for ( const auto& failure : p.parse_failures )
            pj["parse_failures"].push_back( { { "file", failure.file_path }, { "reason", failure.reason } } );
        j["projects"].push_back( std::move( pj ) );
    }
    return j.dump( 2 ) + "\n";
}

std::string emit_stats_json( const Report& report )
{
    json j            = header( report );
    j["corpus_stats"] = stats_to_json( report.corpus_stats );
    return j.dump( 2 ) + "\n";
}

Report report_from_json( std::string_view text )
{
    try
    {
        const json j = json::parse( text );
        Report     r;
        r.schema_version = j.at( "schema_version" ).get<std::string>();
        r.tool_version   = j.at( "tool_version" ).get<std::string>();
        if ( !j.at( "run_timestamp" ).is_null() ) r.run_timestamp = j.at( "run_timestamp" ).get<std::string>();
        r.corpus_mode  = j.at( "mode" ).get<std::string>() == "corpus";
        r.corpus_stats = stats_from_json( j.at( "corpus_stats" ) );
        for ( const auto& pj : j.at( "projects" ) )
        {
            ProjectReport p;
            p.project_id     = pj.at( "project_id" ).get<std::string>();
            p.config_profile = profile_from_json( pj.at( "config_profile" ), p.project_id );
            for ( const auto& f : pj.at( "findings" ) ) p.findings.push_back( finding_from_json( f ) );
            const json& s                            = pj.at( "stub_filter_summary" );
            p.stub_filter_summary.input              = s.at( "input" ).get<int>();
            p.stub_filter_summary.kept               = s.at( "kept" ).get<int>();
            p.stub_filter_summary.dropped_first_param_only = s.at( "dropped_first_param_only" ).get<int>();
            p.stub_filter_summary.dropped_duplicates = s.at( "dropped_duplicates" ).get<int>();
            for ( const auto& failure : pj.at( "parse_failures" ) )
                p.parse_failures.push_back(
                    ParseFailure { failure.at( "file" ).get<std::string>(), failure.at( "reason" ).get<std::string>() } );
            r.projects.push_back( std::move( p ) );
        }
        return r;
    }
    catch ( const json::exception& e )
    {
        throw std::runtime_error( std::string( "malformed report: " ) + e.what() );
    }
}

std::string emit_stats_text( const CorpusStats& stats )
{
    std::ostringstream out;
    out << "== corpus_stats ==\n";
    for ( const auto& [key, member] : kCounters ) out << key << '\t' << stats.*member << '\n';
    for ( Pattern p : kAllPatterns )
    {
        const std::string key( to_string( p ) );
        auto              it = stats.per_pattern_counts.find( key );
        out << "per_pattern_counts." << key << '\t' << ( it == stats.per_pattern_counts.end() ? 0 : it->second ) << '\n';
    }
    for ( AnyFlag f : { AnyFlag::FirstParamOnly, AnyFlag::InCallableArg, AnyFlag::InDictValue, AnyFlag::OtherPosition,
                        AnyFlag::None } )
    {
        const std::string key( to_string( f ) );
        auto              it = stats.classification_counts.find( key );
        out << "classification_counts." << key << '\t' << ( it == stats.classification_counts.end() ? 0 : it->second )
            << '\n';
    }
    return out.str();
}

std::string emit_text( const Report& report )
{
    std::ostringstream out;
    for ( const auto& p : report.projects )
        for ( const auto& f : p.findings )
            out << to_string( f.pattern ) << '\t' << to_string( f.confidence ) << '\t' << finding_path( report, p, f )
                << ':' << f.location.line << '\t' << f.symbol << '\t' << f.summary << '\n';
    out << emit_stats_text( report.corpus_stats );
    return out.str();
}

std::string utc_timestamp_now()
{
    const std::time_t now = std::chrono::system_clock::to_time_t( std::chrono::system_clock::now() );
    std::tm           utc {};
    gmtime_r( &now, &utc );
    char buffer[32];
    std::strftime( buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc );
    return buffer;
}

}  // namespace anylens
