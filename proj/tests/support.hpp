#pragma once

// Helpers shared by the test binaries: fixture access, scratch directories,
// random type generation and independent oracles.

#include "anylens/type_expr.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace testing
{

namespace fs = std::filesystem;

inline fs::path fixture( const std::string& rel ) { return fs::path( ANYLENS_FIXTURES ) / rel; }

inline std::string read_text( const fs::path& p )
{
    std::ifstream in( p, std::ios::binary );
    if ( !in ) throw std::runtime_error( "missing file " + p.string() );
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_text( const fs::path& p, const std::string& text )
{
    fs::create_directories( p.parent_path() );
    std::ofstream out( p, std::ios::binary );
    out << text;
}

/// 1-based number of the first line containing `needle`, or 0.
inline int line_of( const std::string& text, const std::string& needle )
{
    std::istringstream in( text );
    std::string        line;
    for ( int n = 1; std::getline( in, line ); ++n )
        if ( line.find( needle ) != std::string::npos ) return n;
    return 0;
}

/// Random byte-level edits: inserts, deletions, replacements, spliced
/// copies and truncation.
inline std::string mutate_source( std::string s, std::mt19937& rng )
{
    static const char        chars[] = "()[]{}:,.'\"#\\\n\t @=*-+<>|&^%!~;_aZ09\xC3\xA9\xFF\x00";
    static const std::string alphabet( chars, sizeof chars - 1 );
    auto pick = [&]( std::size_t n ) { return std::uniform_int_distribution<std::size_t>( 0, n - 1 )( rng ); };
    const int edits = 1 + static_cast<int>( pick( 8 ) );
    for ( int i = 0; i < edits; ++i )
    {
        const std::size_t at = s.empty() ? 0 : pick( s.size() + 1 );
        switch ( pick( 5 ) )
        {
            case 0: s.insert( at, 1, alphabet[pick( alphabet.size() )] ); break;
            case 1:
                if ( at < s.size() ) s.erase( at, 1 + pick( 6 ) );
                break;
            case 2:
                if ( at < s.size() ) s[at] = alphabet[pick( alphabet.size() )];
                break;
            case 3:
                if ( !s.empty() ) s.insert( at, s.substr( pick( s.size() ), 1 + pick( 20 ) ) );
                break;
            default: s = s.substr( 0, at ); break;
        }
    }
    return s;
}

class ScratchDir
{
public:
    explicit ScratchDir( const std::string& tag )
    {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ( "anylens-" + tag + "-" + std::to_string( rd() ) );
        fs::create_directories( path_ );
    }
    ~ScratchDir()
    {
        std::error_code ec;
        fs::remove_all( path_, ec );
    }
    ScratchDir( const ScratchDir& )            = delete;
    ScratchDir& operator=( const ScratchDir& ) = delete;

    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

/// Any nodes by explicit-stack traversal.
inline int walk_count_any( const anylens::TypeExpr& root )
{
    int                                   n = 0;
    std::vector<const anylens::TypeExpr*> stack { &root };
    while ( !stack.empty() )
    {
        const anylens::TypeExpr* t = stack.back();
        stack.pop_back();
        if ( t->kind == anylens::TypeKind::Any ) ++n;
        for ( const auto& a : t->args ) stack.push_back( &a );
    }
    return n;
}

/// Occurrences of the identifier `Any` in rendered text.
inline int token_count_any( const std::string& text )
{
    auto ident = []( char c ) { return std::isalnum( static_cast<unsigned char>( c ) ) || c == '_' || c == '.'; };
    int  n     = 0;
    for ( std::size_t pos = text.find( "Any" ); pos != std::string::npos; pos = text.find( "Any", pos + 1 ) )
    {
        const bool left  = pos == 0 || !ident( text[pos - 1] );
        const bool right = pos + 3 >= text.size() || !ident( text[pos + 3] );
        if ( left && right ) ++n;
    }
    return n;
}

/// Random annotation trees built directly from the factories. Names avoid
/// typing heads so that rendering and re-reading keep them as written.
class TypeGen
{
public:
    explicit TypeGen( unsigned seed ) : rng_( seed ) {}

    anylens::TypeExpr tree( int depth )
    {
        using anylens::TypeExpr;
        const int leaf_kinds = 7;
        const int choice     = pick( depth <= 0 ? leaf_kinds : leaf_kinds + 6 );
        switch ( choice )
        {
            case 0: return TypeExpr::any();
            case 1: return TypeExpr::none();
            case 2: return TypeExpr::named( pick_of( { "int", "str", "bytes", "object", "pkg.Model", "Foo" } ) );
            case 3: return TypeExpr::type_var( pick_of( { "T", "U" } ) );
            case 4: return TypeExpr::self_type();
            case 5: return TypeExpr::never();
            case 6: return TypeExpr::any();
            case 7:
            {
                const std::string head = pick_of( { "List", "Set", "Sequence", "pkg.Box" } );
                return TypeExpr::generic( head, { tree( depth - 1 ) } );
            }
            case 8:
                return TypeExpr::generic( pick_of( { "Dict", "Mapping" } ), { tree( depth - 1 ), tree( depth - 1 ) } );
            case 9:
                if ( pick( 2 ) ) return TypeExpr::generic( "Tuple", { tree( depth - 1 ), TypeExpr::ellipsis() } );
                return TypeExpr::generic( "Tuple", { tree( depth - 1 ), tree( depth - 1 ) } );
            case 10:
            {
                if ( pick( 3 ) == 0 ) return TypeExpr::callable_any_params( tree( depth - 1 ) );
                std::vector<TypeExpr> params;
                for ( int i = pick( 3 ); i > 0; --i ) params.push_back( tree( depth - 1 ) );
                return TypeExpr::callable( std::move( params ), tree( depth - 1 ) );
            }
            case 11:
            {
                std::vector<TypeExpr> members;
                for ( int i = 2 + pick( 2 ); i > 0; --i ) members.push_back( tree( depth - 1 ) );
                return TypeExpr::union_of( std::move( members ) );
            }
            default: return TypeExpr::forward( tree( depth - 1 ) );
        }
    }

    /// Annotation source text over the typing surface syntax, including
    /// bare heads, Optional, `|` unions and string forward references.
    std::string text( int depth, bool allow_quotes = true )
    {
        const int choice = pick( depth <= 0 ? 6 : 16 );
        switch ( choice )
        {
            case 0: return "Any";
            case 1: return pick_of( { "int", "str", "None", "object", "float", "pkg.Model" } );
            case 2: return pick_of( { "Dict", "List", "Set", "Tuple", "Callable", "Mapping", "FrozenSet", "Iterable" } );
            case 3: return pick_of( { "Text", "NoReturn", "AnyStr", "Self" } );
            case 4: return "typing.Any";
            case 5: return allow_quotes ? "'" + pick_of( { "Foo", "Bar" } ) + "'" : std::string( "Foo" );
            case 6: return pick_of( { "List", "Set", "Sequence", "Type" } ) + "[" + text( depth - 1, allow_quotes ) + "]";
            case 7:
                return pick_of( { "Dict", "Mapping" } ) + "[" + text( depth - 1, allow_quotes ) + ", " +
                       text( depth - 1, allow_quotes ) + "]";
            case 8: return "Optional[" + text( depth - 1, allow_quotes ) + "]";
            case 9:
                return "Union[" + text( depth - 1, allow_quotes ) + ", " + text( depth - 1, allow_quotes ) + ", " +
                       text( depth - 1, allow_quotes ) + "]";
            case 10: return text( depth - 1, allow_quotes ) + " | " + text( depth - 1, allow_quotes );
            case 11:
                return "Callable[[" + text( depth - 1, allow_quotes ) + "], " + text( depth - 1, allow_quotes ) + "]";
            case 12: return "Callable[..., " + text( depth - 1, allow_quotes ) + "]";
            case 13: return "Tuple[" + text( depth - 1, allow_quotes ) + ", ...]";
            case 14: return allow_quotes ? "'" + text( depth - 1, false ) + "'" : text( depth - 1, false );
            default: return "Tuple[" + text( depth - 1, allow_quotes ) + ", " + text( depth - 1, allow_quotes ) + "]";
        }
    }

    int pick( int n ) { return std::uniform_int_distribution<int>( 0, n - 1 )( rng_ ); }

    std::string pick_of( std::initializer_list<const char*> options )
    {
        return *( options.begin() + pick( static_cast<int>( options.size() ) ) );
    }

    std::mt19937& rng() { return rng_; }

private:
    std::mt19937 rng_;
};

}  // namespace testing
