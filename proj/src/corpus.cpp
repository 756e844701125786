#include "anylens/corpus.hpp"

#include "anylens/extractor.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <thread>

namespace anylens
{

namespace fs = std::filesystem;

namespace
{

bool is_excluded_dir( const fs::path& dir )
{
    static const std::set<std::string> names { "site-packages", "dist-packages", "build", "dist", "__pycache__",
                                               "node_modules" };
    const std::string name = dir.filename().string();
    if ( !name.empty() && name[0] == '.' && name != "." && name != ".." ) return true;
    if ( names.count( name ) ) return true;
    std::error_code ec;
    return fs::exists( dir / "pyvenv.cfg", ec );
}

bool has_source_extension( const fs::path& p )
{
    const auto ext = p.extension();
    return ext == ".py" || ext == ".pyi";
}

// Source files under `root`, project-relative with forward slashes. A stub
// (.pyi) replaces the module of the same path.
std::vector<std::string> list_sources( const fs::path& root, const std::string& project_id,
                                       const DiscoveryOptions& options, std::vector<std::string>& warnings )
{
    std::map<std::string, std::string> by_module;
    std::error_code                     ec;
    fs::recursive_directory_iterator it( root, fs::directory_options::skip_permission_denied, ec ), end;
    if ( ec )
    {
        warnings.push_back( "cannot read " + root.generic_string() + ": " + ec.message() );
        return {};
    }
    for ( ; it != end; it.increment( ec ) )
    {
        if ( ec )
        {
            warnings.push_back( "cannot read entry under " + root.generic_string() + ": " + ec.message() );
            ec.clear();
            continue;
        }
        const fs::directory_entry& entry = *it;
        std::error_code            status_ec;
        if ( entry.is_symlink( status_ec ) )
        {
            if ( entry.is_directory( status_ec ) ) it.disable_recursion_pending();
            continue;
        }
        if ( entry.is_directory( status_ec ) )
        {
            if ( !options.include_vendored && is_excluded_dir( entry.path() ) ) it.disable_recursion_pending();
            continue;
        }
        if ( !entry.is_regular_file( status_ec ) || !has_source_extension( entry.path() ) ) continue;
        const std::string rel    = entry.path().lexically_relative( root ).generic_string();
        const std::string module = rel.substr( 0, rel.rfind( '.' ) );
        auto [slot, inserted]    = by_module.try_emplace( module, rel );
        if ( !inserted && entry.path().extension() == ".pyi" ) slot->second = rel;
        if ( by_module.size() > options.max_files ) throw FileCapExceeded( project_id, options.max_files );
    }
    std::vector<std::string> files;
    files.reserve( by_module.size() );
    for ( auto& [module, rel] : by_module ) files.push_back( std::move( rel ) );
    std::sort( files.begin(), files.end() );
    return files;
}

ProjectDescriptor describe( const fs::path& root, std::string project_id, const DiscoveryOptions& options )
{
    ProjectDescriptor d;
    d.project_id   = std::move( project_id );
    d.root         = root;
    d.source_files = list_sources( root, d.project_id, options, d.warnings );
    for ( const char* name : { "mypy.ini", "pyproject.toml", "setup.cfg" } )
    {
        std::error_code ec;
        if ( fs::is_regular_file( root / name, ec ) ) d.config_files.push_back( name );
    }
    return d;
}

std::string read_file( const fs::path& path )
{
    std::ifstream in( path, std::ios::binary );
    if ( !in ) throw std::runtime_error( "cannot open file" );
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if ( in.bad() ) throw std::runtime_error( "cannot read file" );
    return buffer.str();
}

template <typename Fn>
void parallel_for( std::size_t count, unsigned jobs, Fn fn )
{
    const unsigned workers = static_cast<unsigned>( std::min<std::size_t>( std::max( jobs, 1u ), count ) );
    if ( workers <= 1 )
    {
        for ( std::size_t i = 0; i < count; ++i ) fn( i );
        return;
    }
    std::atomic<std::size_t> next { 0 };
    std::vector<std::thread> pool;
    for ( unsigned w = 0; w < workers; ++w )
        pool.emplace_back( [&] {
            for ( std::size_t i = next++; i < count; i = next++ ) fn( i );
        } );
    for ( auto& t : pool ) t.join();
}

std::string flag_set_key( const AnyClassification& c )
{
    std::string key;
    for ( AnyFlag f : c.flags )
    {
        if ( !key.empty() ) key += "+";
        key += to_string( f );
    }
    return key;
}

CorpusStats project_stats( const ProjectResult& r )
{
    CorpusStats s                 = empty_stats();
    s.projects                    = 1;
    s.files_parsed                = r.model.files_parsed;
    s.files_failed                = r.model.files_failed;
    s.annotation_lines_with_any   = r.stub_summary.input;
    s.distinct_lines_after_filter = r.stub_summary.kept;
    s.unconstrained_typevar_count = static_cast<int>(
        std::count_if( r.model.typevars.begin(), r.model.typevars.end(),
                       []( const TypeVarDecl& tv ) { return tv.is_unconstrained(); } ) );
    s.override_comment_count = static_cast<int>( std::count_if(
        r.model.ignores.begin(), r.model.ignores.end(), []( const IgnoreComment& c ) { return c.has_code( "override" ); } ) );

    auto classify = [&]( const StubLine& line ) {
        for ( AnyFlag f : line.classification.flags ) ++s.classification_counts[std::string( to_string( f ) )];
        ++s.classification_set_counts[flag_set_key( line.classification )];
    };
    for ( const auto& d : r.model.declarations )
    {
        ++s.declarations;
        if ( d.is_nested ) ++s.nested_declarations;
        const StubLine line = render_stub_line( d );
        s.explicit_any_count += line.explicit_any;
        s.implicit_any_count += line.implicit_any;
        if ( d.has_explicit_annotation() ) classify( line );

        bool dict_any = d.return_annotation && has_any_dict_value( d.return_annotation->normalized );
        for ( const auto& p : d.params ) dict_any = dict_any || ( p.annotation && has_any_dict_value( p.annotation->normalized ) );
        if ( dict_any ) ++s.any_valued_dict_signatures;
    }
    for ( const auto& v : r.model.variables )
    {
        const StubLine line = render_stub_line( v );
        s.explicit_any_count += line.explicit_any;
        classify( line );
    }
    for ( const auto& f : r.findings ) ++s.per_pattern_counts[std::string( to_string( f.pattern ) )];
    for ( const auto& f : detect_override_suppressions( r.model ) )
    {
        const auto outcome = std::find_if( f.evidence.begin(), f.evidence.end(),
                                           []( const auto& kv ) { return kv.first == "outcome"; } );
        if ( outcome == f.evidence.end() ) continue;
        if ( outcome->second != to_string( OverrideOutcome::ParentNotFound ) &&
             outcome->second != to_string( OverrideOutcome::ParentClassUnresolved ) )
            ++s.override_parent_found;
        if ( outcome->second == to_string( OverrideOutcome::DifferentArgs ) ) ++s.override_different_args;
    }
    std::set<std::string> distinct;
    for ( const auto& line : r.stub_lines ) distinct.insert( line.text );
    s.distinct_lines_across_projects = static_cast<int>( distinct.size() );
    return s;
}

ProjectResult finish_project( std::string project_id, std::vector<FileModel> files, const std::vector<ConfigFile>& configs,
                              const AnalysisOptions& options )
{
    ProjectResult r;
    r.project_id     = project_id;
    r.model          = merge_models( project_id, std::move( files ) );
    r.config_profile = derive_config_profile( project_id, configs );
    r.findings       = run_detectors( r.model, options.patterns );

    std::vector<StubLine> input = pipeline_input( r.model );
    r.stub_summary.input        = static_cast<int>( input.size() );
    FilterResult filtered       = filter_pipeline( std::move( input ) );
    r.stub_summary.kept                     = static_cast<int>( filtered.kept.size() );
    r.stub_summary.dropped_first_param_only = filtered.dropped_first_param_only;
    r.stub_summary.dropped_duplicates       = filtered.dropped_duplicates;
    r.stub_lines                            = std::move( filtered.kept );
    r.stats                                 = project_stats( r );
    return r;
}

}  // namespace

CorpusStats empty_stats()
{
    CorpusStats s;
    for ( Pattern p : kAllPatterns ) s.per_pattern_counts[std::string( to_string( p ) )] = 0;
    for ( AnyFlag f : { AnyFlag::FirstParamOnly, AnyFlag::InCallableArg, AnyFlag::InDictValue, AnyFlag::OtherPosition,
                        AnyFlag::None } )
        s.classification_counts[std::string( to_string( f ) )] = 0;
    return s;
}

std::vector<ProjectDescriptor> discover_projects( const fs::path& root, DiscoveryMode mode,
                                                  const DiscoveryOptions& options )
{
    std::error_code ec;
    if ( !fs::is_directory( root, ec ) ) throw RootNotFound( root.generic_string() );

    std::vector<ProjectDescriptor> out;
    if ( mode == DiscoveryMode::SingleProject )
    {
        fs::path    absolute = fs::weakly_canonical( fs::absolute( root, ec ), ec );
        std::string id       = absolute.filename().string();
        if ( id.empty() ) id = absolute.parent_path().filename().string();
        if ( id.empty() ) id = "project";
        out.push_back( describe( root, id, options ) );
        return out;
    }

    fs::directory_iterator it( root, fs::directory_options::skip_permission_denied, ec ), end;
    if ( ec ) throw RootNotFound( root.generic_string() );
    for ( ; it != end; it.increment( ec ) )
    {
        if ( ec ) break;
        std::error_code status_ec;
        if ( it->is_symlink( status_ec ) || !it->is_directory( status_ec ) ) continue;
        if ( !options.include_vendored && is_excluded_dir( it->path() ) ) continue;
        ProjectDescriptor d = describe( it->path(), it->path().filename().string(), options );
        if ( d.source_files.empty() ) continue;
        out.push_back( std::move( d ) );
    }
    std::sort( out.begin(), out.end(),
               []( const ProjectDescriptor& a, const ProjectDescriptor& b ) { return a.project_id < b.project_id; } );
    return out;
}

std::vector<StubLine> pipeline_input( const ProjectModel& model )
{
    std::vector<StubLine> lines;
    for ( const auto& d : model.declarations )
    {
        if ( !d.has_explicit_annotation() ) continue;
        StubLine line = render_stub_line( d );
        if ( !line.classification.has( AnyFlag::None ) ) lines.push_back( std::move( line ) );
    }
    for ( const auto& v : model.variables )
    {
        StubLine line = render_stub_line( v );
        if ( !line.classification.has( AnyFlag::None ) ) lines.push_back( std::move( line ) );
    }
    std::stable_sort( lines.begin(), lines.end(),
                      []( const StubLine& a, const StubLine& b ) { return a.location < b.location; } );
    return lines;
}

ProjectResult analyze_project( const ProjectDescriptor& project, const AnalysisOptions& options )
{
    std::vector<FileModel> files( project.source_files.size() );
    parallel_for( files.size(), options.jobs, [&]( std::size_t i ) {
        const std::string& rel = project.source_files[i];
        try
        {
            files[i] = parse_source_file( rel, read_file( project.root / rel ) );
        }
        catch ( const std::exception& e )
        {
            files[i].file_path      = rel;
            files[i].module_name    = module_name_for( rel );
            files[i].failed         = true;
            files[i].failure_reason = e.what();
        }
    } );

    std::vector<ConfigFile> configs;
    for ( const auto& name : project.config_files )
    {
        try
        {
            configs.push_back( ConfigFile { name, read_file( project.root / name ) } );
        }
        catch ( const std::exception& )
        {
            configs.push_back( ConfigFile { name, {} } );
        }
    }
    return finish_project( project.project_id, std::move( files ), configs, options );
}

ProjectResult analyze_sources( std::string project_id, const std::vector<std::pair<std::string, std::string>>& sources,
                               const std::vector<ConfigFile>& configs, const AnalysisOptions& options )
{
    std::vector<FileModel> files( sources.size() );
    parallel_for( files.size(), options.jobs,
                  [&]( std::size_t i ) { files[i] = parse_source_file( sources[i].first, sources[i].second ); } );
    return finish_project( std::move( project_id ), std::move( files ), configs, options );
}

CorpusStats aggregate_stats( const std::vector<const ProjectResult*>& results )
{
    CorpusStats           total = empty_stats();
    std::set<std::string> distinct;
    for ( const ProjectResult* r : results )
    {
        const CorpusStats& s = r->stats;
        total.projects += s.projects;
        total.files_parsed += s.files_parsed;
        total.files_failed += s.files_failed;
        total.annotation_lines_with_any += s.annotation_lines_with_any;
        total.distinct_lines_after_filter += s.distinct_lines_after_filter;
        total.explicit_any_count += s.explicit_any_count;
        total.implicit_any_count += s.implicit_any_count;
        total.unconstrained_typevar_count += s.unconstrained_typevar_count;
        total.override_comment_count += s.override_comment_count;
        total.any_valued_dict_signatures += s.any_valued_dict_signatures;
        total.declarations += s.declarations;
        total.nested_declarations += s.nested_declarations;
        total.override_parent_found += s.override_parent_found;
        total.override_different_args += s.override_different_args;
        for ( const auto& [k, v] : s.per_pattern_counts ) total.per_pattern_counts[k] += v;
        for ( const auto& [k, v] : s.classification_counts ) total.classification_counts[k] += v;
        for ( const auto& [k, v] : s.classification_set_counts ) total.classification_set_counts[k] += v;
        for ( const auto& line : r->stub_lines ) distinct.insert( line.text );
    }
    total.distinct_lines_across_projects = static_cast<int>( distinct.size() );
    return total;
}

}  // namespace anylens
