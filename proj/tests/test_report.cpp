#include "doctest.h"

#include "support.hpp"

#include "anylens/report.hpp"

#include "json.hpp"

#include <algorithm>
#include <regex>

using namespace anylens;
using json = nlohmann::json;

namespace
{

// Enough of JSON Schema 2020-12 for the report schema. Unknown keywords are
// an error so that the schema cannot silently outgrow the checker.
class SchemaChecker
{
public:
    explicit SchemaChecker( json root ) : root_( std::move( root ) ) {}

    std::vector<std::string> errors( const json& value ) const
    {
        std::vector<std::string> out;
        check( root_, value, "$", out );
        return out;
    }

private:
    static bool has_type( const json& v, const std::string& type )
    {
        if ( type == "object" ) return v.is_object();
        if ( type == "array" ) return v.is_array();
        if ( type == "string" ) return v.is_string();
        if ( type == "integer" ) return v.is_number_integer();
        if ( type == "number" ) return v.is_number();
        if ( type == "boolean" ) return v.is_boolean();
        if ( type == "null" ) return v.is_null();
        throw std::runtime_error( "unknown type " + type );
    }

    const json& resolve( const std::string& ref ) const
    {
        const std::string prefix = "#/$defs/";
        if ( ref.rfind( prefix, 0 ) != 0 ) throw std::runtime_error( "unsupported $ref " + ref );
        return root_.at( "$defs" ).at( ref.substr( prefix.size() ) );
    }

    void check( const json& schema, const json& v, const std::string& at, std::vector<std::string>& out ) const
    {
        for ( const auto& [key, rule] : schema.items() )
        {
            if ( key == "$schema" || key == "$id" || key == "title" || key == "$defs" ) continue;
            if ( key == "$ref" ) check( resolve( rule.get<std::string>() ), v, at, out );
            else if ( key == "type" )
            {
                const auto types = rule.is_array() ? rule.get<std::vector<std::string>>()
                                                   : std::vector<std::string> { rule.get<std::string>() };
                if ( std::none_of( types.begin(), types.end(), [&]( const std::string& t ) { return has_type( v, t ); } ) )
                    out.push_back( at + ": wrong type" );
            }
            else if ( key == "const" )
            {
                if ( v != rule ) out.push_back( at + ": not the constant" );
            }
            else if ( key == "enum" )
            {
                if ( std::find( rule.begin(), rule.end(), v ) == rule.end() ) out.push_back( at + ": not in enum" );
            }
            else if ( key == "minimum" )
            {
                if ( v.is_number() && v.get<double>() < rule.get<double>() ) out.push_back( at + ": below minimum" );
            }
            else if ( key == "pattern" )
            {
                if ( v.is_string() && !std::regex_search( v.get<std::string>(), std::regex( rule.get<std::string>() ) ) )
                    out.push_back( at + ": pattern mismatch" );
            }
            else if ( key == "required" )
            {
                if ( v.is_object() )
                    for ( const auto& name : rule )
                        if ( !v.contains( name.get<std::string>() ) ) out.push_back( at + ": missing " + name.get<std::string>() );
            }
            else if ( key == "properties" )
            {
                if ( v.is_object() )
                    for ( const auto& [name, sub] : rule.items() )
                        if ( v.contains( name ) ) check( sub, v.at( name ), at + "." + name, out );
            }
            else if ( key == "additionalProperties" )
            {
                if ( !v.is_object() ) continue;
                const json* props = schema.contains( "properties" ) ? &schema.at( "properties" ) : nullptr;
                for ( const auto& [name, sub] : v.items() )
                {
                    if ( props && props->contains( name ) ) continue;
                    if ( rule.is_boolean() )
                    {
                        if ( !rule.get<bool>() ) out.push_back( at + ": unexpected " + name );
                    }
                    else check( rule, sub, at + "." + name, out );
                }
            }
            else if ( key == "items" )
            {
                if ( v.is_array() )
                    for ( std::size_t i = 0; i < v.size(); ++i ) check( rule, v[i], at + "[" + std::to_string( i ) + "]", out );
            }
            else if ( key == "oneOf" )
            {
                int matches = 0;
                for ( const auto& sub : rule )
                {
                    std::vector<std::string> local;
                    check( sub, v, at, local );
                    if ( local.empty() ) ++matches;
                }
                if ( matches != 1 ) out.push_back( at + ": oneOf matched " + std::to_string( matches ) );
            }
            else throw std::runtime_error( "unsupported schema keyword " + key );
        }
    }

    json root_;
};

SchemaChecker checker()
{
    return SchemaChecker( json::parse( testing::read_text( testing::fs::path( ANYLENS_SOURCE_DIR ) / "schema/report.schema.json" ) ) );
}

std::vector<std::pair<std::string, std::string>> fixture_sources( const std::string& dir )
{
    std::vector<std::pair<std::string, std::string>> files;
    for ( const auto& entry : testing::fs::directory_iterator( testing::fixture( dir ) ) )
        files.emplace_back( entry.path().filename().string(), testing::read_text( entry.path() ) );
    std::sort( files.begin(), files.end() );
    return files;
}

std::vector<ProjectResult> sample_results()
{
    AnalysisOptions options;
    options.patterns = PatternSet( std::begin( kAllPatterns ), std::end( kAllPatterns ) );
    std::vector<ProjectResult> results;
    results.push_back( analyze_sources( "golden", fixture_sources( "golden" ),
                                        { { "pyproject.toml", "[tool.mypy]\nstrict = true\nplugins = \"x\"\n" },
                                          { "mypy.ini", "[mypy\n" } },
                                        options ) );
    results.push_back( analyze_sources( "mixed", { { "ok.py", "from typing import Any\ndef f(x: Any) -> Any: return x\n" },
                                                   { "bad.py", "def (:\n" },
                                                   { "uni.py", "def caf\xC3\xA9(s: str) -> str: return \"\\u00e9\\t\"\n" } },
                                        {}, options ) );
    return results;
}

}  // namespace

TEST_CASE( "JSON round trip is lossless and byte stable" )
{
    const auto results = sample_results();
    for ( bool corpus : { false, true } )
        for ( const std::optional<std::string>& stamp : { std::optional<std::string> {}, std::optional<std::string>( "2026-01-02T03:04:05Z" ) } )
        {
            const Report      report = build_report( results, corpus, stamp );
            const std::string text   = emit_json( report );
            const Report      back   = report_from_json( text );
            CHECK( back == report );
            CHECK( emit_json( back ) == text );
            CHECK( text.back() == '\n' );
        }
}

TEST_CASE( "reports validate against the published schema" )
{
    const SchemaChecker check   = checker();
    const auto          results = sample_results();
    for ( bool corpus : { false, true } )
    {
        const Report report = build_report( results, corpus, utc_timestamp_now() );
        const auto   errors = check.errors( json::parse( emit_json( report ) ) );
        CHECK_MESSAGE( errors.empty(), ( errors.empty() ? "" : errors.front() ) );
    }
    const Report empty = build_report( {}, true, std::nullopt );
    CHECK( check.errors( json::parse( emit_json( empty ) ) ).empty() );
}

TEST_CASE( "the schema checker rejects broken reports" )
{
    const SchemaChecker check = checker();
    json                good  = json::parse( emit_json( build_report( sample_results(), false, std::nullopt ) ) );
    REQUIRE( check.errors( good ).empty() );

    json missing = good;
    missing.erase( "corpus_stats" );
    CHECK_FALSE( check.errors( missing ).empty() );

    json bad_pattern = good;
    bad_pattern["projects"][0]["findings"][0]["pattern"] = "PAT_OTHER";
    CHECK_FALSE( check.errors( bad_pattern ).empty() );

    json bad_stamp             = good;
    bad_stamp["run_timestamp"] = "yesterday";
    CHECK_FALSE( check.errors( bad_stamp ).empty() );

    json extra             = good;
    extra["unexpected"]    = 1;
    CHECK_FALSE( check.errors( extra ).empty() );

    json negative = good;
    negative["corpus_stats"]["files_parsed"] = -1;
    CHECK_FALSE( check.errors( negative ).empty() );
}

TEST_CASE( "report structure" )
{
    const auto   results = sample_results();
    const Report report  = build_report( results, true, std::nullopt );
    const json   j       = json::parse( emit_json( report ) );
    std::vector<std::string> keys;
    for ( const auto& [k, v] : j.items() ) keys.push_back( k );
    CHECK( j.at( "mode" ) == "corpus" );
    CHECK( j.at( "run_timestamp" ).is_null() );
    REQUIRE( j.at( "projects" ).size() == 2 );
    CHECK( j["projects"][0]["project_id"] == "golden" );
    CHECK( j["projects"][1]["parse_failures"].size() == 1 );
    CHECK( j["projects"][0]["config_profile"]["implicit_any_exposed"] == false );
    CHECK( j["projects"][0]["config_profile"]["errors"].size() == 1 );
    CHECK( j["corpus_stats"]["projects"] == 2 );

    const std::string text = emit_json( report );
    CHECK( text.find( "\"schema_version\"" ) < text.find( "\"tool_version\"" ) );
    CHECK( text.find( "\"tool_version\"" ) < text.find( "\"run_timestamp\"" ) );
    CHECK( text.find( "\"run_timestamp\"" ) < text.find( "\"mode\"" ) );
    CHECK( text.find( "\"mode\"" ) < text.find( "\"corpus_stats\"" ) );
    CHECK( text.find( "\"corpus_stats\"" ) < text.find( "\"projects\"" ) );
}

TEST_CASE( "malformed JSON is rejected" )
{
    CHECK_THROWS_AS( report_from_json( "{" ), std::runtime_error );
    CHECK_THROWS_AS( report_from_json( "[]" ), std::runtime_error );
    CHECK_THROWS_AS( report_from_json( "{\"schema_version\": \"1\"}" ), std::runtime_error );
}

TEST_CASE( "text output: one line per finding and a fixed stats block" )
{
    const auto   results  = sample_results();
    const Report report   = build_report( results, false, std::nullopt );
    const auto   count_lines = []( const std::string& s ) { return std::count( s.begin(), s.end(), '\n' ); };

    std::size_t findings = 0;
    for ( const auto& p : report.projects ) findings += p.findings.size();
    const std::string stats = emit_stats_text( report.corpus_stats );
    CHECK( count_lines( emit_text( report ) ) == static_cast<long>( findings ) + count_lines( stats ) );
    CHECK( count_lines( stats ) == count_lines( emit_stats_text( empty_stats() ) ) );
    CHECK( stats.rfind( "== corpus_stats ==\n", 0 ) == 0 );

    const std::string text = emit_text( report );
    CHECK( text.find( "PAT_UVAR\thigh\ttraffic.py:3\tCar\tunconstrained TypeVar; add bound= or constraints\n" ) !=
           std::string::npos );
}

TEST_CASE( "timestamps have the fixed UTC shape" )
{
    CHECK( std::regex_match( utc_timestamp_now(), std::regex( "[0-9]{4}-[0-9]{2}-[0-9]{2}T[0-9]{2}:[0-9]{2}:[0-9]{2}Z" ) ) );
}
