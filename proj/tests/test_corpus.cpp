#include "doctest.h"

#include "support.hpp"

#include "anylens/corpus.hpp"

#include <algorithm>

using namespace anylens;
using testing::ScratchDir;
using testing::write_text;

namespace
{

std::vector<std::pair<std::string, std::string>> fixture_sources( const std::string& dir )
{
    std::vector<std::pair<std::string, std::string>> files;
    for ( const auto& entry : testing::fs::directory_iterator( testing::fixture( dir ) ) )
        files.emplace_back( entry.path().filename().string(), testing::read_text( entry.path() ) );
    std::sort( files.begin(), files.end() );
    return files;
}

PatternSet all_patterns() { return PatternSet( std::begin( kAllPatterns ), std::end( kAllPatterns ) ); }

std::string uvar_source( int n )
{
    std::string src = "from typing import TypeVar\n";
    for ( int i = 0; i < n; ++i ) src += "T" + std::to_string( i ) + " = TypeVar('T" + std::to_string( i ) + "')\n";
    return src;
}

ProjectResult analyze( const std::string& id, std::vector<std::pair<std::string, std::string>> sources,
                       PatternSet patterns = default_patterns() )
{
    AnalysisOptions options;
    options.patterns = std::move( patterns );
    return analyze_sources( id, sources, {}, options );
}

}  // namespace

TEST_CASE( "corpus discovery is sorted and skips directories without sources" )
{
    ScratchDir dir( "disc" );
    write_text( dir.path() / "b" / "m.py", "x = 1\n" );
    write_text( dir.path() / "a" / "pkg" / "n.py", "x = 1\n" );
    write_text( dir.path() / "a" / "mypy.ini", "[mypy]\n" );
    write_text( dir.path() / "c" / "notes.txt", "nothing\n" );
    write_text( dir.path() / "d" / "only.pyi", "def f() -> int: ...\n" );
    write_text( dir.path() / ".hidden" / "m.py", "x = 1\n" );
    write_text( dir.path() / "stray.py", "x = 1\n" );

    const auto projects = discover_projects( dir.path(), DiscoveryMode::CorpusOfSubdirectories );
    std::vector<std::string> ids;
    for ( const auto& p : projects ) ids.push_back( p.project_id );
    CHECK( ids == std::vector<std::string> { "a", "b", "d" } );
    CHECK( projects[0].config_files == std::vector<std::string> { "mypy.ini" } );
    CHECK( projects[0].source_files == std::vector<std::string> { "pkg/n.py" } );
}

TEST_CASE( "empty corpus root and missing root" )
{
    ScratchDir dir( "empty" );
    CHECK( discover_projects( dir.path(), DiscoveryMode::CorpusOfSubdirectories ).empty() );
    CHECK_THROWS_AS( discover_projects( dir.path() / "nope", DiscoveryMode::SingleProject ), RootNotFound );
}

TEST_CASE( "vendored and generated directories are excluded unless asked for" )
{
    ScratchDir dir( "vendor" );
    write_text( dir.path() / "src" / "app.py", "x = 1\n" );
    write_text( dir.path() / "venv" / "pyvenv.cfg", "home = /usr\n" );
    write_text( dir.path() / "venv" / "lib" / "mod.py", "x = 1\n" );
    write_text( dir.path() / "lib" / "site-packages" / "dep.py", "x = 1\n" );
    write_text( dir.path() / "build" / "gen.py", "x = 1\n" );
    write_text( dir.path() / "dist" / "gen.py", "x = 1\n" );
    write_text( dir.path() / ".tox" / "t.py", "x = 1\n" );
    write_text( dir.path() / "__pycache__" / "c.py", "x = 1\n" );

    const auto plain = discover_projects( dir.path(), DiscoveryMode::SingleProject );
    REQUIRE( plain.size() == 1 );
    CHECK( plain[0].source_files == std::vector<std::string> { "src/app.py" } );

    DiscoveryOptions all;
    all.include_vendored = true;
    const auto everything = discover_projects( dir.path(), DiscoveryMode::SingleProject, all );
    CHECK( everything[0].source_files.size() == 7 );
    CHECK( std::is_sorted( everything[0].source_files.begin(), everything[0].source_files.end() ) );
}

TEST_CASE( "a stub file replaces the module it describes" )
{
    ScratchDir dir( "pyi" );
    write_text( dir.path() / "m.py", "def f(x): return x\n" );
    write_text( dir.path() / "m.pyi", "def f(x: int) -> int: ...\n" );
    write_text( dir.path() / "n.py", "y = 1\n" );
    const auto projects = discover_projects( dir.path(), DiscoveryMode::SingleProject );
    CHECK( projects[0].source_files == std::vector<std::string> { "m.pyi", "n.py" } );
}

TEST_CASE( "symlinks are not followed" )
{
    ScratchDir dir( "link" );
    write_text( dir.path() / "real" / "m.py", "x = 1\n" );
    std::error_code ec;
    testing::fs::create_directory_symlink( dir.path() / "real", dir.path() / "alias", ec );
    testing::fs::create_directory_symlink( dir.path(), dir.path() / "real" / "loop", ec );
    if ( ec ) return;
    const auto projects = discover_projects( dir.path(), DiscoveryMode::SingleProject );
    CHECK( projects[0].source_files == std::vector<std::string> { "real/m.py" } );
}

TEST_CASE( "file cap" )
{
    ScratchDir dir( "cap" );
    for ( int i = 0; i < 5; ++i ) write_text( dir.path() / ( "m" + std::to_string( i ) + ".py" ), "x = 1\n" );
    DiscoveryOptions options;
    options.max_files = 4;
    CHECK_THROWS_AS( discover_projects( dir.path(), DiscoveryMode::SingleProject, options ), FileCapExceeded );
    options.max_files = 5;
    CHECK_NOTHROW( discover_projects( dir.path(), DiscoveryMode::SingleProject, options ) );
}

TEST_CASE( "project analysis on the golden fixtures" )
{
    const ProjectResult r = analyze( "golden", fixture_sources( "golden" ), all_patterns() );
    CHECK( r.findings.size() == 8 );
    CHECK( r.stats.files_parsed == 8 );
    CHECK( r.stats.files_failed == 0 );
    for ( Pattern p : kAllPatterns ) CHECK( r.stats.per_pattern_counts.at( std::string( to_string( p ) ) ) == 1 );
    CHECK( r.stats.unconstrained_typevar_count == 1 );
    CHECK( r.stats.override_comment_count == 1 );
    CHECK( r.stats.override_different_args == 1 );
    CHECK( r.stats.distinct_lines_after_filter <= r.stats.annotation_lines_with_any );
    CHECK( r.stub_summary.input == r.stats.annotation_lines_with_any );
    CHECK( r.stub_summary.input ==
           r.stub_summary.kept + r.stub_summary.dropped_first_param_only + r.stub_summary.dropped_duplicates );
    CHECK( static_cast<int>( r.stub_lines.size() ) == r.stub_summary.kept );
}

TEST_CASE( "an empty project has nothing to report" )
{
    const ProjectResult r = analyze( "e", { { "empty.py", "" } } );
    CHECK( r.findings.empty() );
    CHECK( r.stats.annotation_lines_with_any == 0 );
    CHECK( r.stats.files_parsed == 1 );
}

TEST_CASE( "a project whose files all fail still yields a result" )
{
    const ProjectResult r = analyze( "bad", { { "a.py", "def (:\n" }, { "b.py", "x = '\n" } } );
    CHECK( r.stats.files_failed == 2 );
    CHECK( r.stats.files_parsed == 0 );
    CHECK( r.model.failures.size() == 2 );
    CHECK( r.findings.empty() );
}

TEST_CASE( "pattern gating removes exactly the disabled pattern" )
{
    const auto       sources = fixture_sources( "golden" );
    const auto       full    = analyze( "p", sources, all_patterns() );
    PatternSet       without = all_patterns();
    without.erase( Pattern::Override );
    const auto           gated = analyze( "p", sources, without );
    std::vector<Finding> expected;
    std::copy_if( full.findings.begin(), full.findings.end(), std::back_inserter( expected ),
                  []( const Finding& f ) { return f.pattern != Pattern::Override; } );
    CHECK( gated.findings == expected );
}

TEST_CASE( "aggregation is additive, order independent and the identity on one project" )
{
    const ProjectResult a = analyze( "a", { { "m.py", uvar_source( 3 ) } } );
    const ProjectResult b = analyze( "b", { { "m.py", uvar_source( 4 ) } } );
    const ProjectResult c = analyze( "c", fixture_sources( "golden" ), all_patterns() );

    const CorpusStats ab = aggregate_stats( { &a, &b } );
    CHECK( ab.per_pattern_counts.at( "PAT_UVAR" ) == 7 );
    CHECK( ab.projects == 2 );
    CHECK( ab == aggregate_stats( { &b, &a } ) );
    CHECK( aggregate_stats( { &c } ) == c.stats );
    CHECK( aggregate_stats( { &a, &b, &c } ) == aggregate_stats( { &c, &a, &b } ) );

    const CorpusStats abc = aggregate_stats( { &a, &b, &c } );
    CHECK( abc.files_parsed == a.stats.files_parsed + b.stats.files_parsed + c.stats.files_parsed );
    CHECK( abc.explicit_any_count == a.stats.explicit_any_count + b.stats.explicit_any_count + c.stats.explicit_any_count );
    for ( const auto& [key, n] : abc.per_pattern_counts )
        CHECK( n == a.stats.per_pattern_counts.at( key ) + b.stats.per_pattern_counts.at( key ) +
                        c.stats.per_pattern_counts.at( key ) );
    CHECK( aggregate_stats( {} ) == empty_stats() );
}

TEST_CASE( "distinct lines across projects deduplicate shared text" )
{
    const std::string   src = "from typing import Any\ndef f(x: Any) -> int: ...\ndef g(x: Any) -> Any: ...\n";
    const ProjectResult a   = analyze( "a", { { "m.py", src } } );
    const ProjectResult b   = analyze( "b", { { "n.py", src } } );
    const CorpusStats   s   = aggregate_stats( { &a, &b } );
    CHECK( s.distinct_lines_after_filter == 4 );
    CHECK( s.distinct_lines_across_projects == 2 );
}

TEST_CASE( "adding a project changes nothing attributed to the others" )
{
    const ProjectResult a  = analyze( "a", fixture_sources( "golden" ) );
    const ProjectResult a2 = analyze( "a", fixture_sources( "golden" ) );
    CHECK( a.findings == a2.findings );
    CHECK( a.stats == a2.stats );
}

TEST_CASE( "per-pattern counts equal finding list lengths" )
{
    const ProjectResult r = analyze( "p", fixture_sources( "golden" ), all_patterns() );
    for ( const auto& [key, n] : r.stats.per_pattern_counts )
    {
        const auto count = std::count_if( r.findings.begin(), r.findings.end(),
                                          [&]( const Finding& f ) { return to_string( f.pattern ) == key; } );
        CHECK( n == count );
    }
}

TEST_CASE( "worker count does not change results" )
{
    std::vector<std::pair<std::string, std::string>> sources;
    for ( int i = 0; i < 60; ++i )
        sources.emplace_back( "pkg/m" + std::to_string( i ) + ".py",
                              i % 7 == 0 ? "def (:\n" : uvar_source( i % 4 ) + "def f(d: Dict[str, Any]) -> Any: ...\n" );
    AnalysisOptions one, many;
    many.jobs             = 8;
    const ProjectResult x = analyze_sources( "p", sources, {}, one );
    const ProjectResult y = analyze_sources( "p", sources, {}, many );
    CHECK( x.findings == y.findings );
    CHECK( x.stats == y.stats );
    CHECK( x.model.failures == y.model.failures );
}
